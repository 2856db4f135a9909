//! Exact union volumes and overlap counts by coordinate compression.

use crate::error::{Error, Result};

use super::prefix::row_major_strides;
use super::Rect;

/// Per-cell cover counts of a rectangle family on its compressed grid.
///
/// Each axis is cut at the sorted distinct endpoints of the family; every
/// compressed cell is then covered by a constant number of rectangles.
#[derive(Clone, Debug)]
pub struct CompressedGrid {
    coords: Vec<Vec<i64>>,
    cell_dims: Vec<usize>,
    counts: Vec<u32>,
}

impl CompressedGrid {
    pub fn build(rects: &[Rect]) -> Result<Self> {
        let first = rects.first().ok_or(Error::Degenerate("empty rectangle list"))?;
        let d = first.dim();
        if let Some(r) = rects.iter().find(|r| r.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.dim(),
            });
        }
        let coords: Vec<Vec<i64>> = (0..d)
            .map(|a| {
                let mut c: Vec<i64> = rects.iter().flat_map(|r| [r.lo()[a], r.hi()[a]]).collect();
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();

        // Difference array on the corner lattice, then a running sum per axis.
        let dims: Vec<usize> = coords.iter().map(Vec::len).collect();
        let strides = row_major_strides(&dims);
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &x| acc.checked_mul(x))
            .ok_or(Error::Overflow("compressed grid size"))?;
        let mut diff = vec![0i64; len];
        for r in rects {
            let mut lo = Vec::with_capacity(d);
            let mut hi = Vec::with_capacity(d);
            for a in 0..d {
                lo.push(coords[a].binary_search(&r.lo()[a]).unwrap() * strides[a]);
                hi.push(coords[a].binary_search(&r.hi()[a]).unwrap() * strides[a]);
            }
            for mask in 0u32..(1 << d) {
                let mut idx = 0;
                for a in 0..d {
                    idx += if mask >> a & 1 == 1 { hi[a] } else { lo[a] };
                }
                if mask.count_ones() % 2 == 0 {
                    diff[idx] += 1;
                } else {
                    diff[idx] -= 1;
                }
            }
        }
        for a in 0..d {
            let stride = strides[a];
            for idx in 0..len {
                if (idx / stride) % dims[a] != 0 {
                    diff[idx] += diff[idx - stride];
                }
            }
        }

        let cell_dims: Vec<usize> = dims.iter().map(|x| x - 1).collect();
        let cell_len: usize = cell_dims.iter().product();
        let cell_strides = row_major_strides(&cell_dims);
        let mut counts = vec![0u32; cell_len];
        for (ci, count) in counts.iter_mut().enumerate() {
            let mut rem = ci;
            let mut idx = 0;
            for a in 0..d {
                let c = rem / cell_strides[a];
                rem %= cell_strides[a];
                idx += c * strides[a];
            }
            *count = diff[idx] as u32;
        }
        Ok(CompressedGrid {
            coords,
            cell_dims,
            counts,
        })
    }

    /// `(cover count, cell volume)` for every compressed cell.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u128)> + '_ {
        let strides = row_major_strides(&self.cell_dims);
        self.counts.iter().enumerate().map(move |(ci, &count)| {
            let mut rem = ci;
            let mut vol: u128 = 1;
            for a in 0..self.coords.len() {
                let c = rem / strides[a];
                rem %= strides[a];
                vol *= (self.coords[a][c + 1] - self.coords[a][c]) as u128;
            }
            (count, vol)
        })
    }

    /// `(cover count, cell box)` for every compressed cell with a nonzero count.
    pub fn covered_pieces(&self) -> impl Iterator<Item = (u32, Rect)> + '_ {
        let strides = row_major_strides(&self.cell_dims);
        self.counts.iter().enumerate().filter(|(_, c)| **c > 0).map(move |(ci, &count)| {
            let mut rem = ci;
            let (mut lo, mut hi) = (Vec::new(), Vec::new());
            for (a, c) in self.coords.iter().enumerate() {
                let k = rem / strides[a];
                rem %= strides[a];
                lo.push(c[k]);
                hi.push(c[k + 1]);
            }
            (count, Rect::new(lo, hi).expect("compressed cells are nonempty"))
        })
    }

    pub fn union_volume(&self) -> u128 {
        self.cells().filter(|(c, _)| *c > 0).map(|(_, v)| v).sum()
    }

    /// `Σ_cells count^p · volume`, i.e. `‖Σ χ_R‖_p^p`.
    pub fn count_power_sum(&self, p: f64) -> f64 {
        self.cells()
            .filter(|(c, _)| *c > 0)
            .map(|(c, v)| (c as f64).powf(p) * v as f64)
            .sum()
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Lebesgue (counting) volume of `∪ rects`.
pub fn union_volume(rects: &[Rect]) -> Result<u128> {
    Ok(CompressedGrid::build(rects)?.union_volume())
}

/// Volume of `r ∩ ∪ others`, compressing only the pieces inside `r`.
pub fn overlap_volume(r: &Rect, others: &[Rect]) -> u128 {
    let clipped: Vec<Rect> = others.iter().filter_map(|o| o.intersect(r)).collect();
    if clipped.is_empty() {
        return 0;
    }
    union_volume(&clipped).expect("clipped pieces share the dimension of r")
}
