//! Experiment harness: level sets, weak-type and strong-norm ratios, test ensembles.

mod ensemble;
mod field_spec;
mod ratios;

pub use ensemble::{run_ensemble, EnsembleReport, Experiment, RunReport, Summary};
pub use field_spec::{generate_field, FieldKind, FieldSpec};
pub use ratios::{
    evaluate, strong_norm_ratio, weak_ratio_of, weak_type_ratio, EvalOptions, Evaluation, LambdaGrid,
    StrongNormResult, WeakTypeResult,
};

use crate::error::{Error, Result};
use crate::maximal::{Alpha, MaximalField};

/// `1 < p ≤ q < ∞` with `α = 1/p − 1/q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentPair {
    p: f64,
    q: f64,
    alpha: Alpha,
}

impl ExponentPair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let alpha = Alpha::from_exponents(p, q)?;
        let gap = 1.0 - alpha.value() - (p - 1.0) / p - 1.0 / q;
        if gap.abs() > 1e-15 {
            return Err(Error::InvalidExponent(format!(
                "exponent identity off by {gap:e} for p={p}, q={q}"
            )));
        }
        Ok(ExponentPair { p, q, alpha })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }
}

/// `{x in the window : M(x) > λ}` by cell count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSet {
    pub lambda: f64,
    pub volume: u64,
}

pub fn level_set_volume(m: &MaximalField, lambda: f64) -> Result<LevelSet> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidLevel(lambda));
    }
    let volume = m.values().iter().filter(|&&v| v > lambda).count() as u64;
    Ok(LevelSet { lambda, volume })
}
