//! The Heisenberg group law on `ℤ^n × ℤ^n × ℤ` and the shear that untwists it.
//!
//! Coordinates of a field over `ℤ^{2n+1}` are ordered `(u_1..u_n, v_1..v_n, t)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Rect, ScalarField};

/// `n` and the twist coefficient `μ`; `μ` is an integer so twists are lattice shifts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupParams {
    pub n: usize,
    pub mu: i64,
}

impl GroupParams {
    pub fn new(n: usize, mu: i64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Degenerate("Heisenberg parameter n must be at least 1"));
        }
        Ok(GroupParams { n, mu })
    }

    pub fn d(&self) -> usize {
        2 * self.n + 1
    }

    /// `μ (u·η − v·ξ)` with checked arithmetic.
    pub fn twist(&self, u: &[i64], v: &[i64], xi: &[i64], eta: &[i64]) -> Result<i64> {
        let overflow = || Error::Overflow("Heisenberg twist");
        let mut acc: i64 = 0;
        for k in 0..self.n {
            let a = u[k].checked_mul(eta[k]).ok_or_else(overflow)?;
            let b = v[k].checked_mul(xi[k]).ok_or_else(overflow)?;
            acc = acc
                .checked_add(a.checked_sub(b).ok_or_else(overflow)?)
                .ok_or_else(overflow)?;
        }
        acc.checked_mul(self.mu).ok_or_else(overflow)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
    pub t: i64,
}

impl LatticePoint {
    pub fn new(u: Vec<i64>, v: Vec<i64>, t: i64) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        Ok(LatticePoint { u, v, t })
    }

    pub fn identity(n: usize) -> Self {
        LatticePoint {
            u: vec![0; n],
            v: vec![0; n],
            t: 0,
        }
    }

    /// Splits `(u, v, t)` out of a point of `ℤ^{2n+1}`.
    pub fn from_coords(coords: &[i64]) -> Result<Self> {
        if coords.len() < 3 || coords.len() % 2 == 0 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: coords.len(),
            });
        }
        let n = (coords.len() - 1) / 2;
        Ok(LatticePoint {
            u: coords[..n].to_vec(),
            v: coords[n..2 * n].to_vec(),
            t: coords[2 * n],
        })
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn coords(&self) -> Vec<i64> {
        let mut c = Vec::with_capacity(2 * self.n() + 1);
        c.extend_from_slice(&self.u);
        c.extend_from_slice(&self.v);
        c.push(self.t);
        c
    }
}

/// `(u,v,t) ⊙ (ξ,η,τ) = (u+ξ, v+η, t+τ+μ(u·η − v·ξ))`.
pub fn group_mul(a: &LatticePoint, b: &LatticePoint, params: GroupParams) -> Result<LatticePoint> {
    for p in [a, b] {
        if p.n() != params.n || p.v.len() != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.n,
                got: p.n(),
            });
        }
    }
    let overflow = || Error::Overflow("group multiplication");
    let add = |x: &[i64], y: &[i64]| -> Result<Vec<i64>> {
        x.iter()
            .zip(y)
            .map(|(p, q)| p.checked_add(*q).ok_or_else(overflow))
            .collect()
    };
    let twist = params.twist(&a.u, &a.v, &b.u, &b.v)?;
    let t = a
        .t
        .checked_add(b.t)
        .and_then(|s| s.checked_add(twist))
        .ok_or_else(overflow)?;
    Ok(LatticePoint {
        u: add(&a.u, &b.u)?,
        v: add(&a.v, &b.v)?,
        t,
    })
}

/// `(ξ,η,τ)^{-1} = (−ξ,−η,−τ)`.
pub fn group_inv(a: &LatticePoint) -> LatticePoint {
    LatticePoint {
        u: a.u.iter().map(|x| x.wrapping_neg()).collect(),
        v: a.v.iter().map(|x| x.wrapping_neg()).collect(),
        t: a.t.wrapping_neg(),
    }
}

/// `g(ξ,η,τ) = f(ξ, η, τ + μ(base_u·η − base_v·ξ))`.
///
/// Each `(ξ,η)`-column of `f` moves rigidly in `τ`; the output window widens the
/// `τ`-range by the largest shift magnitude on both sides so no mass is lost.
pub fn shear_field(
    f: &ScalarField,
    base_u: &[i64],
    base_v: &[i64],
    params: GroupParams,
) -> Result<ScalarField> {
    let n = params.n;
    let d = params.d();
    if f.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: f.dim(),
        });
    }
    if base_u.len() != n || base_v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: base_u.len().min(base_v.len()),
        });
    }
    let w = f.window();
    let cross = Rect::new(w.lo()[..2 * n].to_vec(), w.hi()[..2 * n].to_vec())?;
    let shifts = cross
        .cells()
        .map(|c| params.twist(base_u, base_v, &c[..n], &c[n..]))
        .collect::<Result<Vec<i64>>>()?;
    let reach = shifts
        .iter()
        .map(|s| s.checked_abs().ok_or(Error::Overflow("shear reach")))
        .try_fold(0i64, |m, s| s.map(|s| m.max(s)))?;

    let mut lo = w.lo().to_vec();
    let mut hi = w.hi().to_vec();
    lo[2 * n] = lo[2 * n].checked_sub(reach).ok_or(Error::Overflow("shear window"))?;
    hi[2 * n] = hi[2 * n].checked_add(reach).ok_or(Error::Overflow("shear window"))?;
    let out_window = Rect::new(lo, hi)?;
    let src_len = w.extent(2 * n) as usize;
    let out_len = out_window.extent(2 * n) as usize;
    let mut out = vec![0.0; out_window.cell_count()?];

    let src = f.values();
    out.par_chunks_mut(out_len)
        .zip(shifts.par_iter())
        .enumerate()
        .for_each(|(col, (dst, &s))| {
            // Source τ maps to τ − s; offset inside the widened window is reach − s.
            let start = (reach - s) as usize;
            dst[start..start + src_len].copy_from_slice(&src[col * src_len..(col + 1) * src_len]);
        });
    ScalarField::new(out_window, out)
}
