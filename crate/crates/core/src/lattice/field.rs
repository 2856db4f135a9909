use crate::dd::Dd;
use crate::error::{Error, Result};

use super::Rect;

/// Dense real values on a finite window of the lattice, zero outside.
///
/// Cells have unit measure, so integrals are plain sums.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    window: Rect,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(window: Rect, values: Vec<f64>) -> Result<Self> {
        let expected = window.cell_count()?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(ScalarField { window, values })
    }

    pub fn zeros(window: Rect) -> Result<Self> {
        let len = window.cell_count()?;
        Ok(ScalarField {
            window,
            values: vec![0.0; len],
        })
    }

    pub fn from_fn(window: Rect, mut f: impl FnMut(&[i64]) -> f64) -> Result<Self> {
        let values = window.cells().map(|p| f(&p)).collect::<Vec<_>>();
        ScalarField::new(window, values)
    }

    /// Indicator of a rectangle, stored on `window`.
    pub fn indicator(window: Rect, r: &Rect) -> Result<Self> {
        ScalarField::from_fn(window, |p| if r.contains(p) { 1.0 } else { 0.0 })
    }

    pub fn window(&self) -> &Rect {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at `p`; exactly zero outside the window.
    pub fn get(&self, p: &[i64]) -> f64 {
        match self.window.index_of(p) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    pub fn set(&mut self, p: &[i64], value: f64) -> Result<()> {
        let i = self.window.index_of(p).ok_or(Error::WindowTooSmall)?;
        self.values[i] = value;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        ScalarField {
            window: self.window.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn abs(&self) -> ScalarField {
        ScalarField {
            window: self.window.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Bounding box of the nonzero cells, `None` for the zero field.
    pub fn support_hull(&self) -> Option<Rect> {
        let d = self.dim();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        let mut any = false;
        for (i, &v) in self.values.iter().enumerate() {
            if v != 0.0 {
                any = true;
                let p = self.window.point_at(i);
                for a in 0..d {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a] + 1);
                }
            }
        }
        any.then(|| Rect::new(lo, hi).expect("hull of nonempty support"))
    }

    /// Copy of the field restricted (or zero-extended) to another window.
    pub fn restrict(&self, window: &Rect) -> Result<ScalarField> {
        if window == &self.window {
            return Ok(self.clone());
        }
        ScalarField::from_fn(window.clone(), |p| self.get(p))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<Dd>().to_f64()
    }

    /// `(Σ |value|^p)^{1/p}` with unit cell measure.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }
}

/// `L^p` norm of a field, accumulated in double-double.
pub fn lp_norm(field: &ScalarField, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(format!("L^p norm needs finite p >= 1, got {p}")));
    }
    if p == 1.0 {
        return Ok(field.sum_abs());
    }
    let acc: Dd = field.values.iter().map(|v| v.abs().powf(p)).sum();
    Ok(acc.to_f64().powf(1.0 / p))
}
