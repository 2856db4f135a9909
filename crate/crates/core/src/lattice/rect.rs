use std::fmt;

use crate::error::{Error, Result};

/// Heisenberg parameter `n` and the ambient dimension `2n + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dim {
    n: usize,
}

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Degenerate("Heisenberg parameter n must be at least 1"));
        }
        Ok(Dim { n })
    }

    /// Recovers `n` from an ambient dimension, which must be odd and at least 3.
    pub fn from_ambient(d: usize) -> Result<Self> {
        if d < 3 || d % 2 == 0 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: d,
            });
        }
        Dim::new((d - 1) / 2)
    }

    pub fn n(self) -> usize {
        self.n
    }

    pub fn d(self) -> usize {
        2 * self.n + 1
    }
}

/// Half-open integer box `∏ [lo_i, hi_i)`; every axis is nonempty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Rect {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::Degenerate("rectangle of dimension 0"));
        }
        for (axis, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if l >= h {
                return Err(Error::EmptyRect { axis, lo: l, hi: h });
            }
        }
        Ok(Rect { lo, hi })
    }

    /// The cube `[lo, hi)^d`.
    pub fn cube(d: usize, lo: i64, hi: i64) -> Result<Self> {
        Rect::new(vec![lo; d], vec![hi; d])
    }

    /// The single cell at `p`.
    pub fn cell(p: &[i64]) -> Self {
        Rect {
            lo: p.to_vec(),
            hi: p.iter().map(|&x| x + 1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> i64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn extents(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| self.extent(i) as usize).collect()
    }

    /// Number of unit cells.
    pub fn volume(&self) -> u128 {
        (0..self.dim()).map(|i| self.extent(i) as u128).product()
    }

    /// Number of cells as a `usize`, for dense storage.
    pub fn cell_count(&self) -> Result<usize> {
        let mut total: usize = 1;
        for i in 0..self.dim() {
            total = total
                .checked_mul(self.extent(i) as usize)
                .ok_or(Error::Overflow("cell count"))?;
        }
        Ok(total)
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&x, (&l, &h))| l <= x && x < h)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let l = self.lo[i].max(other.lo[i]);
            let h = self.hi[i].min(other.hi[i]);
            if l >= h {
                return None;
            }
            lo.push(l);
            hi.push(h);
        }
        Some(Rect { lo, hi })
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        (0..self.dim()).all(|i| self.lo[i].max(other.lo[i]) < self.hi[i].min(other.hi[i]))
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &Rect) -> Rect {
        Rect {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| *a.min(b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| *a.max(b)).collect(),
        }
    }

    /// Smallest box containing `self` and the cell at `p`.
    pub fn hull_point(&self, p: &[i64]) -> Rect {
        self.hull(&Rect::cell(p))
    }

    /// Scales every side by `factor` about the box centre; the extra
    /// `(factor − 1)·extent` cells are split as evenly as possible.
    pub fn dilate(&self, factor: u32) -> Rect {
        assert!(factor >= 1, "dilation factor must be positive");
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for i in 0..self.dim() {
            let extra = self.extent(i) * (factor as i64 - 1);
            let left = extra / 2;
            lo[i] -= left;
            hi[i] += extra - left;
        }
        Rect { lo, hi }
    }

    /// Row-major index of `p` (last axis fastest), if inside.
    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let mut idx = 0usize;
        for i in 0..self.dim() {
            idx = idx * self.extent(i) as usize + (p[i] - self.lo[i]) as usize;
        }
        Some(idx)
    }

    /// Inverse of [`Rect::index_of`].
    pub fn point_at(&self, mut idx: usize) -> Vec<i64> {
        let mut p = vec![0; self.dim()];
        for i in (0..self.dim()).rev() {
            let e = self.extent(i) as usize;
            p[i] = self.lo[i] + (idx % e) as i64;
            idx /= e;
        }
        p
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> Cells<'_> {
        Cells {
            rect: self,
            next: Some(self.lo.clone()),
        }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "{}..{}", self.lo[i], self.hi[i])?;
        }
        write!(f, ")")
    }
}

pub struct Cells<'a> {
    rect: &'a Rect,
    next: Option<Vec<i64>>,
}

impl Iterator for Cells<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut axis = self.rect.dim();
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            succ[axis] += 1;
            if succ[axis] < self.rect.hi[axis] {
                self.next = Some(succ);
                break;
            }
            succ[axis] = self.rect.lo[axis];
        }
        Some(current)
    }
}
