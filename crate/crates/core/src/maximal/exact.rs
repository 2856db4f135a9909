//! Exact suprema over all integer boxes.
//!
//! Reduction lemma. Fix `x` and a box `R = ∏[a_i, b_i) ∋ x`. If no cell of
//! `supp f` has `i`-th coordinate `a_i` and `a_i < x_i`, replacing `a_i` by
//! `a_i + 1` loses no mass and shrinks the volume, so `vol^{α−1}·mass` does not
//! decrease (`α < 1`, mass `≥ 0`). The same holds for an upper face `b_i`
//! whose slab `b_i − 1` is empty and `b_i − 1 > x_i`. Iterating, some optimal
//! box has every lower face in `{c ∈ proj_i supp f : c ≤ x_i} ∪ {x_i}` and
//! every upper face in `{c + 1 : c ∈ proj_i supp f, c ≥ x_i} ∪ {x_i + 1}`.
//! The sup over all boxes is therefore a finite maximum.

use rayon::prelude::*;

use crate::error::Result;
use crate::lattice::{row_major_strides, PrefixSumTable, Rect, ScalarField, MAX_DIM};

use super::{classical_params, Alpha, MaximalField, Mode};

/// Largest dominance table (in entries) used by the whole-window sweep.
const DOMINANCE_CAP: usize = 1 << 23;

pub(crate) struct ExactEvaluator {
    hull: Rect,
    table: PrefixSumTable,
    strides: Vec<usize>,
    occupied: Vec<Vec<i64>>,
}

struct Face {
    coord: i64,
    offset: usize,
}

impl ExactEvaluator {
    /// `None` when `f ≡ 0`.
    pub(crate) fn new(f: &ScalarField) -> Option<Self> {
        let hull = f.support_hull()?;
        let local = f.restrict(&hull).expect("hull lies in the window").abs();
        let d = hull.dim();
        let mut marks: Vec<Vec<bool>> = (0..d).map(|a| vec![false; hull.extent(a) as usize]).collect();
        for (i, &v) in local.values().iter().enumerate() {
            if v != 0.0 {
                let p = hull.point_at(i);
                for a in 0..d {
                    marks[a][(p[a] - hull.lo()[a]) as usize] = true;
                }
            }
        }
        let occupied = marks
            .iter()
            .enumerate()
            .map(|(a, m)| {
                m.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(k, _)| hull.lo()[a] + k as i64)
                    .collect()
            })
            .collect();
        let table = PrefixSumTable::build(&local, false);
        let dims: Vec<usize> = hull.extents().iter().map(|e| e + 1).collect();
        Some(ExactEvaluator {
            strides: row_major_strides(&dims),
            hull,
            table,
            occupied,
        })
    }

    pub(crate) fn hull(&self) -> &Rect {
        &self.hull
    }

    fn offset(&self, axis: usize, coord: i64) -> usize {
        let c = coord.clamp(self.hull.lo()[axis], self.hull.hi()[axis]);
        (c - self.hull.lo()[axis]) as usize * self.strides[axis]
    }

    fn full_hi(&self, axis: usize) -> usize {
        self.hull.extent(axis) as usize * self.strides[axis]
    }

    #[inline]
    fn mass(&self, lo: &[usize], hi: &[usize]) -> f64 {
        self.table.sum_strided(lo, hi).to_f64()
    }

    /// `sup_{R ∋ x} vol(R)^{α−1} Σ_R |f|`.
    pub(crate) fn eval(&self, x: &[i64], alpha: Alpha) -> f64 {
        let d = self.hull.dim();
        assert_eq!(x.len(), d, "query point dimension");
        let mut lower: Vec<Vec<Face>> = Vec::with_capacity(d);
        let mut upper: Vec<Vec<Face>> = Vec::with_capacity(d);
        let mut max_len = 1;
        for a in 0..d {
            let occ = &self.occupied[a];
            let split = occ.partition_point(|&c| c <= x[a]);
            let mut lo: Vec<i64> = occ[..split].to_vec();
            if lo.last() != Some(&x[a]) {
                lo.push(x[a]);
            }
            let from = occ.partition_point(|&c| c < x[a]);
            let mut hi: Vec<i64> = vec![x[a] + 1];
            hi.extend(occ[from..].iter().map(|c| c + 1).filter(|&b| b != x[a] + 1));
            max_len = max_len.max(hi.last().unwrap() - lo[0]);
            lower.push(lo.into_iter().rev().map(|c| Face { coord: c, offset: self.offset(a, c) }).collect());
            upper.push(hi.into_iter().map(|c| Face { coord: c, offset: self.offset(a, c) }).collect());
        }
        let e = alpha.volume_exponent();
        let pw: Vec<f64> = (0..=max_len).map(|l| (l as f64).powf(e)).collect();

        let mut lo_off = [0usize; MAX_DIM];
        let mut hi_off = [0usize; MAX_DIM];
        for a in 0..d {
            lo_off[a] = self.offset(a, x[a]);
            hi_off[a] = self.offset(a, x[a] + 1);
        }
        // The single cell at x is admissible.
        let mut best = self.mass(&lo_off[..d], &hi_off[..d]);
        let mut search = Search {
            ev: self,
            lower: &lower,
            upper: &upper,
            pw: &pw,
            d,
            lo_off,
            hi_off,
        };
        search.run(0, 1.0, &mut best);
        best
    }
}

struct Search<'a> {
    ev: &'a ExactEvaluator,
    lower: &'a [Vec<Face>],
    upper: &'a [Vec<Face>],
    pw: &'a [f64],
    d: usize,
    lo_off: [usize; MAX_DIM],
    hi_off: [usize; MAX_DIM],
}

impl Search<'_> {
    fn run(&mut self, axis: usize, weight: f64, best: &mut f64) {
        let d = self.d;
        // Axes after `axis` range over the whole hull while bounding.
        for a in axis + 1..d {
            self.lo_off[a] = 0;
            self.hi_off[a] = self.ev.full_hi(a);
        }
        let full = self.ev.full_hi(axis);
        for lf in &self.lower[axis] {
            self.lo_off[axis] = lf.offset;
            self.hi_off[axis] = full;
            let mass_from_a = self.ev.mass(&self.lo_off[..d], &self.hi_off[..d]);
            if mass_from_a == 0.0 {
                continue;
            }
            for uf in &self.upper[axis] {
                let w = weight * self.pw[(uf.coord - lf.coord) as usize];
                // Longer boxes on this axis only lower the weight; mass is capped.
                if w * mass_from_a <= *best {
                    break;
                }
                self.hi_off[axis] = uf.offset;
                let mass = self.ev.mass(&self.lo_off[..d], &self.hi_off[..d]);
                if axis + 1 == d {
                    let v = w * mass;
                    if v > *best {
                        *best = v;
                    }
                } else if w * mass > *best {
                    self.run(axis + 1, w, best);
                    for a in axis + 1..d {
                        self.lo_off[a] = 0;
                        self.hi_off[a] = self.ev.full_hi(a);
                    }
                }
            }
        }
    }
}

/// Exact `M_α f(x)` (untwisted), as a finite maximum via the reduction lemma above.
pub fn maximal_exact_at(f: &ScalarField, alpha: Alpha, x: &[i64]) -> f64 {
    match ExactEvaluator::new(f) {
        Some(ev) => ev.eval(x, alpha),
        None => 0.0,
    }
}

/// Exact `M_α f` on every cell of `query`.
pub fn maximal_exact(f: &ScalarField, alpha: Alpha, query: &Rect) -> Result<MaximalField> {
    let params = classical_params(f.dim())?;
    let field = exact_window(f, &[alpha], query)?.pop().unwrap();
    Ok(MaximalField {
        field,
        alpha,
        mode: Mode::Exact,
        params,
    })
}

/// One exact field per alpha, sharing the mass computations.
pub(crate) fn exact_window(f: &ScalarField, alphas: &[Alpha], query: &Rect) -> Result<Vec<ScalarField>> {
    let Some(ev) = ExactEvaluator::new(f) else {
        return alphas.iter().map(|_| ScalarField::zeros(query.clone())).collect();
    };
    if let Some(fields) = dominance_sweep(&ev, alphas, query)? {
        return Ok(fields);
    }
    let cells: Vec<Vec<i64>> = query.cells().collect();
    alphas
        .iter()
        .map(|&alpha| {
            let values = cells.par_iter().map(|x| ev.eval(x, alpha)).collect();
            ScalarField::new(query.clone(), values)
        })
        .collect()
}

/// Whole-window exact sweep over every box in `B = hull ∪ query`.
///
/// Clipping a box to `B` keeps its mass and shrinks it, so boxes inside `B`
/// suffice. With `V[a, b] = vol^{α−1}·mass([a, b))`, a running max over
/// `a` ascending and `b` descending on every axis gives
/// `T[a*, b*] = max_{a ≤ a*, b ≥ b*} V[a, b]`, and `M_α f(x) = T[x, x + 1]`.
fn dominance_sweep(ev: &ExactEvaluator, alphas: &[Alpha], query: &Rect) -> Result<Option<Vec<ScalarField>>> {
    let bbox = ev.hull().hull(query);
    let d = bbox.dim();
    let side: Vec<usize> = bbox.extents().iter().map(|e| e + 1).collect();
    let mut total: usize = 1;
    for s in &side {
        match total.checked_mul(s * s) {
            Some(t) if t <= DOMINANCE_CAP => total = t,
            _ => return Ok(None),
        }
    }
    // Axis `a` owns the digit pair (lo_a, hi_a), lo being the more significant.
    let pair_dims: Vec<usize> = side.iter().flat_map(|&s| [s, s]).collect();
    let strides = row_major_strides(&pair_dims);

    let mut masses = vec![0.0f64; total];
    let mut lens = vec![0u32; total * d];
    let mut digits = vec![0usize; 2 * d];
    let mut lo_off = [0usize; MAX_DIM];
    let mut hi_off = [0usize; MAX_DIM];
    for idx in 0..total {
        let mut valid = true;
        for a in 0..d {
            let (l, h) = (digits[2 * a], digits[2 * a + 1]);
            if l >= h {
                valid = false;
                break;
            }
            lens[idx * d + a] = (h - l) as u32;
            lo_off[a] = ev.offset(a, bbox.lo()[a] + l as i64);
            hi_off[a] = ev.offset(a, bbox.lo()[a] + h as i64);
        }
        if valid {
            masses[idx] = ev.mass(&lo_off[..d], &hi_off[..d]);
        }
        for k in (0..2 * d).rev() {
            digits[k] += 1;
            if digits[k] < pair_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }

    let max_len = side.iter().max().copied().unwrap_or(1);
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let e = alpha.volume_exponent();
        let pw: Vec<f64> = (0..=max_len).map(|l| (l as f64).powf(e)).collect();
        let mut t: Vec<f64> = masses
            .iter()
            .enumerate()
            .map(|(idx, &m)| {
                if m == 0.0 {
                    0.0
                } else {
                    lens[idx * d..idx * d + d].iter().map(|&l| pw[l as usize]).product::<f64>() * m
                }
            })
            .collect();
        for a in 0..d {
            let (ls, hs) = (strides[2 * a], strides[2 * a + 1]);
            let s = side[a];
            for idx in 0..total {
                if (idx / ls) % s > 0 {
                    t[idx] = t[idx].max(t[idx - ls]);
                }
            }
            for idx in (0..total).rev() {
                if (idx / hs) % s + 1 < s {
                    t[idx] = t[idx].max(t[idx + hs]);
                }
            }
        }
        let values = query
            .cells()
            .map(|x| {
                let mut idx = 0;
                for a in 0..d {
                    let off = (x[a] - bbox.lo()[a]) as usize;
                    idx += off * strides[2 * a] + (off + 1) * strides[2 * a + 1];
                }
                t[idx]
            })
            .collect();
        out.push(ScalarField::new(query.clone(), values)?);
    }
    Ok(Some(out))
}
