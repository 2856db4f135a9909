//! Multidimensional summed-area tables.

use crate::dd::Dd;

use super::{Rect, ScalarField};

/// Inclusion–exclusion prefix sums over a field's window.
///
/// `cum` has extent `+1` on every axis; entry `c` holds the sum over the cells
/// `lo ≤ y < lo + c`. Entries are double-double so that the `2^d`-term
/// alternating sum keeps full precision.
#[derive(Clone, Debug)]
pub struct PrefixSumTable {
    window: Rect,
    strides: Vec<usize>,
    cum: Vec<Dd>,
}

impl PrefixSumTable {
    pub fn build(field: &ScalarField, absolute: bool) -> Self {
        let window = field.window().clone();
        let d = window.dim();
        let dims: Vec<usize> = window.extents().iter().map(|e| e + 1).collect();
        let strides = row_major_strides(&dims);
        let len: usize = dims.iter().product();
        let mut cum = vec![Dd::ZERO; len];

        let src_dims = window.extents();
        let src_strides = row_major_strides(&src_dims);
        for (i, &v) in field.values().iter().enumerate() {
            let mut rem = i;
            let mut at = 0;
            for a in 0..d {
                let c = rem / src_strides[a];
                rem %= src_strides[a];
                at += (c + 1) * strides[a];
            }
            cum[at] = Dd::new(if absolute { v.abs() } else { v });
        }

        for a in 0..d {
            let stride = strides[a];
            let n = dims[a];
            for base in 0..len {
                // Visit each line along axis `a` once, from its first element.
                if (base / stride) % n != 0 {
                    continue;
                }
                let mut running = Dd::ZERO;
                for k in 0..n {
                    let idx = base + k * stride;
                    running += cum[idx];
                    cum[idx] = running;
                }
            }
        }
        PrefixSumTable {
            window,
            strides,
            cum,
        }
    }

    pub fn window(&self) -> &Rect {
        &self.window
    }

    /// Exact sum over `r ∩ window`; zero for disjoint boxes.
    pub fn rect_sum(&self, r: &Rect) -> f64 {
        debug_assert_eq!(r.dim(), self.window.dim());
        let d = self.window.dim();
        let mut lo = [0usize; MAX_DIM];
        let mut hi = [0usize; MAX_DIM];
        for a in 0..d {
            let wl = self.window.lo()[a];
            let wh = self.window.hi()[a];
            let l = r.lo()[a].clamp(wl, wh);
            let h = r.hi()[a].clamp(wl, wh);
            if l >= h {
                return 0.0;
            }
            lo[a] = (l - wl) as usize * self.strides[a];
            hi[a] = (h - wl) as usize * self.strides[a];
        }
        self.sum_strided(&lo[..d], &hi[..d]).to_f64()
    }

    /// Inclusion–exclusion over corners given as pre-multiplied strided offsets.
    #[inline]
    pub(crate) fn sum_strided(&self, lo: &[usize], hi: &[usize]) -> Dd {
        inclusion_exclusion(&self.cum, 0, lo, hi)
    }
}

pub(crate) const MAX_DIM: usize = 16;

pub(crate) fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for a in (0..dims.len().saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * dims[a + 1];
    }
    strides
}

/// `Σ_mask (−1)^{d−|mask|} table[base + Σ corner_a]`, choosing `hi[a]` on set bits.
#[inline]
pub(crate) fn inclusion_exclusion(table: &[Dd], base: usize, lo: &[usize], hi: &[usize]) -> Dd {
    let d = lo.len();
    let mut acc = Dd::ZERO;
    for mask in 0u32..(1u32 << d) {
        let mut idx = base;
        for a in 0..d {
            idx += if mask >> a & 1 == 1 { hi[a] } else { lo[a] };
        }
        if (d as u32 - mask.count_ones()) % 2 == 0 {
            acc += table[idx];
        } else {
            acc -= table[idx];
        }
    }
    acc
}

/// Sum of `field` (or `|field|`) over `r`, computed through a fresh table.
pub fn build_prefix_sum(field: &ScalarField, absolute: bool) -> PrefixSumTable {
    PrefixSumTable::build(field, absolute)
}

pub fn rect_sum(table: &PrefixSumTable, r: &Rect) -> f64 {
    table.rect_sum(r)
}
