//! Shifted-dyadic approximation of the strong maximal operator.
//!
//! Per axis the family uses tiles of length `2^k` on three translated grids
//! (offsets `0`, `⌊2^k/3⌋`, `⌊2·2^k/3⌋`). Every integer interval of length
//! `ℓ ≤ E` lies inside one of these tiles with length `≤ 4ℓ` once scales run up
//! to `⌈log₂ E⌉ + 1`, so on `ℤ^d`
//!
//! ```text
//! fast(x) ≤ exact(x) ≤ 4^{d(1−α)} · fast(x).
//! ```
//!
//! Evaluation is organised by columns: all axes but the last are "cross"
//! axes, and for one cross point `x_c` only the `O(3·log E)` tiles containing
//! each `x_c[i]` matter. Box sums come from slabs of cross-axis prefix sums
//! taken at the handful of `t`-corners the tiles use, which lets a per-column
//! `t`-shift (the Heisenberg shear) be folded in without materialising the
//! sheared field.

use rayon::prelude::*;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::lattice::{row_major_strides, Rect, ScalarField};

use super::{classical_params, Alpha, MaximalField, Mode};

/// Tiles `[offset + j·2^scale, offset + (j+1)·2^scale)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicGrid {
    pub scale: u32,
    pub offset: i64,
}

impl DyadicGrid {
    pub fn side(self) -> i64 {
        1i64 << self.scale
    }

    pub fn tile_index(self, x: i64) -> i64 {
        (x - self.offset).div_euclid(self.side())
    }

    pub fn tile(self, j: i64) -> (i64, i64) {
        let lo = self.offset + j * self.side();
        (lo, lo + self.side())
    }

    pub fn containing(self, x: i64) -> (i64, i64) {
        self.tile(self.tile_index(x))
    }

    /// All grids with scales `0..=max_scale`, identical grids listed once.
    pub fn family(max_scale: u32) -> Vec<DyadicGrid> {
        let mut out = Vec::new();
        for scale in 0..=max_scale {
            let side = 1i64 << scale;
            let mut offsets = vec![0, side / 3, 2 * side / 3];
            offsets.dedup();
            out.extend(offsets.into_iter().map(|offset| DyadicGrid { scale, offset }));
        }
        out
    }
}

/// `⌈log₂ extent⌉ + 1`: enough scales for 4× containment of every interval of length ≤ extent.
pub fn scale_limit(extent: i64) -> u32 {
    let e = extent.max(1) as u64;
    e.next_power_of_two().trailing_zeros() + 1
}

/// `4^{d(1−α)}`.
pub fn sandwich_constant(d: usize, alpha: Alpha) -> f64 {
    4f64.powf(d as f64 * (1.0 - alpha.value()))
}

/// `|f|` on its support hull, with running sums along the last axis for each cross cell.
pub(crate) struct ColumnSource {
    hull: Rect,
    cross_dims: Vec<usize>,
    cross_strides: Vec<usize>,
    cross_cells: Vec<Vec<i64>>,
    t_len: usize,
    t_prefix: Vec<Dd>,
}

impl ColumnSource {
    pub(crate) fn new(f: &ScalarField) -> Option<Self> {
        let hull = f.support_hull()?;
        let local = f.restrict(&hull).expect("hull lies in window");
        let d = hull.dim();
        let m = d - 1;
        let t_len = hull.extent(m) as usize;
        let n_cross = local.values().len() / t_len;
        let mut t_prefix = Vec::with_capacity(n_cross * (t_len + 1));
        for col in local.values().chunks_exact(t_len) {
            let mut acc = Dd::ZERO;
            t_prefix.push(acc);
            for v in col {
                acc += v.abs();
                t_prefix.push(acc);
            }
        }
        let cross_cells: Vec<Vec<i64>> = if m == 0 {
            vec![vec![]]
        } else {
            Rect::new(hull.lo()[..m].to_vec(), hull.hi()[..m].to_vec())
                .unwrap()
                .cells()
                .collect()
        };
        let cross_dims: Vec<usize> = (0..m).map(|a| hull.extent(a) as usize + 1).collect();
        Some(ColumnSource {
            cross_strides: row_major_strides(&cross_dims),
            cross_dims,
            cross_cells,
            t_len,
            t_prefix,
            hull,
        })
    }

    pub(crate) fn hull(&self) -> &Rect {
        &self.hull
    }

    pub(crate) fn cross_cells(&self) -> &[Vec<i64>] {
        &self.cross_cells
    }

    /// Dyadic maximal values along one column `{x_c} × [t_lo, t_hi)`.
    ///
    /// `shifts[y]` is the `t`-shift of cross cell `y` (the column's shear),
    /// i.e. the column sees `g(y, τ) = |f|(y, τ + shifts[y])`; empty means none.
    /// Returns one vector per alpha.
    pub(crate) fn eval_column(
        &self,
        x_c: &[i64],
        shifts: &[i64],
        t_range: (i64, i64),
        cross_scales: &[u32],
        alphas: &[Alpha],
    ) -> Vec<Vec<f64>> {
        let m = self.hull.dim() - 1;
        let (q_lo, q_hi) = t_range;
        let n_t = (q_hi - q_lo) as usize;
        let mut out = vec![vec![0.0; n_t]; alphas.len()];
        let exps: Vec<f64> = alphas.iter().map(|a| a.volume_exponent()).collect();

        // Cross intervals containing x_c, clipped to the hull.
        struct Interval {
            lo: usize,
            hi: usize,
            weight: Vec<f64>,
        }
        let mut cross: Vec<Vec<Interval>> = Vec::with_capacity(m);
        for a in 0..m {
            let mut raw: Vec<(i64, i64)> = DyadicGrid::family(cross_scales[a])
                .into_iter()
                .map(|g| g.containing(x_c[a]))
                .collect();
            raw.sort_unstable();
            raw.dedup();
            let (h_lo, h_hi) = (self.hull.lo()[a], self.hull.hi()[a]);
            let list: Vec<Interval> = raw
                .into_iter()
                .filter_map(|(l, h)| {
                    let (cl, ch) = (l.clamp(h_lo, h_hi), h.clamp(h_lo, h_hi));
                    (cl < ch).then(|| Interval {
                        lo: (cl - h_lo) as usize,
                        hi: (ch - h_lo) as usize,
                        weight: exps.iter().map(|e| ((h - l) as f64).powf(*e)).collect(),
                    })
                })
                .collect();
            if list.is_empty() {
                return out;
            }
            cross.push(list);
        }

        // Band of t where the shifted columns carry mass.
        let (s_min, s_max) = if shifts.is_empty() {
            (0, 0)
        } else {
            (*shifts.iter().min().unwrap(), *shifts.iter().max().unwrap())
        };
        let (t_lo, t_hi) = (self.hull.lo()[m], self.hull.hi()[m]);
        let (band_lo, band_hi) = (t_lo - s_max, t_hi - s_min);
        let t_extent = band_hi.max(q_hi) - band_lo.min(q_lo);

        struct TileRun {
            grid: DyadicGrid,
            first: i64,
            start: usize,
        }
        let mut runs = Vec::new();
        let mut tiles: Vec<(i64, i64)> = Vec::new();
        let mut corners = vec![band_lo, band_hi];
        for grid in DyadicGrid::family(scale_limit(t_extent)) {
            let (j0, j1) = (grid.tile_index(q_lo), grid.tile_index(q_hi - 1));
            runs.push(TileRun {
                grid,
                first: j0,
                start: tiles.len(),
            });
            for j in j0..=j1 {
                let (l, h) = grid.tile(j);
                let (cl, ch) = (l.clamp(band_lo, band_hi), h.clamp(band_lo, band_hi));
                corners.push(cl);
                corners.push(ch);
                tiles.push((cl, ch));
            }
        }
        corners.sort_unstable();
        corners.dedup();
        let corner_idx = |v: i64| corners.binary_search(&v).unwrap();
        let tile_corners: Vec<(usize, usize)> =
            tiles.iter().map(|&(l, h)| (corner_idx(l), corner_idx(h))).collect();
        let (band_lo_k, band_hi_k) = (corner_idx(band_lo), corner_idx(band_hi));

        // Slabs: cross-axis prefix sums of Σ_{τ < corner} g(y, τ).
        let slab_len: usize = self.cross_dims.iter().product();
        let n_corners = corners.len();
        let mut slabs = vec![Dd::ZERO; n_corners * slab_len];
        let row = self.t_len + 1;
        let cell_pos: Vec<usize> = self
            .cross_cells
            .iter()
            .map(|y| {
                (0..m)
                    .map(|a| (y[a] - self.hull.lo()[a] + 1) as usize * self.cross_strides[a])
                    .sum()
            })
            .collect();
        for (k, &tc) in corners.iter().enumerate() {
            let slab = &mut slabs[k * slab_len..(k + 1) * slab_len];
            for (yi, &pos) in cell_pos.iter().enumerate() {
                let s = if shifts.is_empty() { 0 } else { shifts[yi] };
                let idx = (tc + s - t_lo).clamp(0, self.t_len as i64) as usize;
                slab[pos] = self.t_prefix[yi * row + idx];
            }
            for a in 0..m {
                let stride = self.cross_strides[a];
                let dim = self.cross_dims[a];
                for i in 0..slab_len {
                    if (i / stride) % dim != 0 {
                        let prev = slab[i - stride];
                        slab[i] += prev;
                    }
                }
            }
        }

        // Best cross-weighted sum per tile, maximised over cross boxes.
        let mut best = vec![vec![0.0f64; tiles.len()]; alphas.len()];
        let mut choice = vec![0usize; m];
        let mut box_prefix = vec![Dd::ZERO; n_corners];
        let mut signed: Vec<(usize, bool)> = Vec::with_capacity(1 << m);
        let mut wc = vec![1.0f64; alphas.len()];
        'boxes: loop {
            signed.clear();
            for mask in 0u32..(1u32 << m) {
                let mut off = 0;
                for a in 0..m {
                    let iv = &cross[a][choice[a]];
                    off += if mask >> a & 1 == 1 { iv.hi } else { iv.lo } * self.cross_strides[a];
                }
                signed.push((off, (m as u32 - mask.count_ones()) % 2 == 0));
            }
            let at = |k: usize| -> Dd {
                let base = k * slab_len;
                let mut acc = Dd::ZERO;
                for &(off, plus) in &signed {
                    if plus {
                        acc += slabs[base + off];
                    } else {
                        acc -= slabs[base + off];
                    }
                }
                acc
            };
            let mass = (at(band_hi_k) - at(band_lo_k)).to_f64();
            if mass > 0.0 {
                for (k, bp) in box_prefix.iter_mut().enumerate() {
                    *bp = at(k);
                }
                for (ai, w) in wc.iter_mut().enumerate() {
                    *w = (0..m).map(|a| cross[a][choice[a]].weight[ai]).product();
                }
                for (j, &(kl, kh)) in tile_corners.iter().enumerate() {
                    let s = (box_prefix[kh] - box_prefix[kl]).to_f64();
                    if s > 0.0 {
                        for ai in 0..alphas.len() {
                            let v = wc[ai] * s;
                            if v > best[ai][j] {
                                best[ai][j] = v;
                            }
                        }
                    }
                }
            }
            for a in (0..m).rev() {
                choice[a] += 1;
                if choice[a] < cross[a].len() {
                    continue 'boxes;
                }
                choice[a] = 0;
            }
            break;
        }

        for (ai, e) in exps.iter().enumerate() {
            for run in &runs {
                let w_tile = (run.grid.side() as f64).powf(*e);
                for (ti, t) in (q_lo..q_hi).enumerate() {
                    let j = run.start + (run.grid.tile_index(t) - run.first) as usize;
                    let v = w_tile * best[ai][j];
                    if v > out[ai][ti] {
                        out[ai][ti] = v;
                    }
                }
            }
        }
        out
    }
}

/// Cross-axis scale limits from the extent of `hull ∪ query` on each axis.
pub(crate) fn cross_scale_limits(hull: &Rect, query: &Rect) -> Vec<u32> {
    let b = hull.hull(query);
    (0..b.dim() - 1).map(|a| scale_limit(b.extent(a))).collect()
}

/// Evaluates every column of `query`, with `shift_of` giving each column's shear.
pub(crate) fn eval_columns<F>(
    source: &ColumnSource,
    query: &Rect,
    alphas: &[Alpha],
    shift_of: F,
) -> Result<Vec<ScalarField>>
where
    F: Fn(&[i64]) -> Result<Vec<i64>> + Sync,
{
    let d = query.dim();
    if source.hull().dim() != d {
        return Err(Error::DimensionMismatch {
            expected: source.hull().dim(),
            got: d,
        });
    }
    let m = d - 1;
    let scales = cross_scale_limits(source.hull(), query);
    let t_range = (query.lo()[m], query.hi()[m]);
    let columns: Vec<Vec<i64>> = if m == 0 {
        vec![vec![]]
    } else {
        Rect::new(query.lo()[..m].to_vec(), query.hi()[..m].to_vec())?
            .cells()
            .collect()
    };
    let per_column = columns
        .par_iter()
        .map(|x_c| {
            let shifts = shift_of(x_c)?;
            Ok(source.eval_column(x_c, &shifts, t_range, &scales, alphas))
        })
        .collect::<Result<Vec<_>>>()?;
    (0..alphas.len())
        .map(|ai| {
            let values: Vec<f64> = per_column.iter().flat_map(|c| c[ai].iter().copied()).collect();
            ScalarField::new(query.clone(), values)
        })
        .collect()
}

pub(crate) fn fast_window(f: &ScalarField, alphas: &[Alpha], query: &Rect) -> Result<Vec<ScalarField>> {
    match ColumnSource::new(f) {
        Some(source) => eval_columns(&source, query, alphas, |_| Ok(Vec::new())),
        None => alphas.iter().map(|_| ScalarField::zeros(query.clone())).collect(),
    }
}

/// `M_α f` restricted to the shifted-dyadic box family, on every cell of `query`.
pub fn maximal_fast(f: &ScalarField, alpha: Alpha, query: &Rect) -> Result<MaximalField> {
    let params = classical_params(f.dim())?;
    let field = fast_window(f, &[alpha], query)?.pop().unwrap();
    Ok(MaximalField {
        field,
        alpha,
        mode: Mode::Dyadic,
        params,
    })
}
