//! Fractional strong maximal operators
//! `M_α f(x) = sup_{R ∋ x} vol(R)^{α−1} Σ_R |f|` over integer boxes, classical
//! and Heisenberg-twisted, exact and shifted-dyadic.

mod dyadic;
mod exact;
mod twisted;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::heisenberg::GroupParams;
use crate::lattice::{Dim, Rect, ScalarField};

pub use dyadic::{maximal_fast, scale_limit, sandwich_constant, DyadicGrid};
pub use exact::{maximal_exact, maximal_exact_at};
pub use twisted::{heisenberg_maximal, heisenberg_maximal_multi, maximal_group_form_at};

/// Fractional order `α ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub const ZERO: Alpha = Alpha(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&value) {
            return Err(Error::InvalidExponent(format!("alpha must lie in [0, 1), got {value}")));
        }
        Ok(Alpha(value))
    }

    /// `α = 1/p − 1/q` for `1 < p ≤ q < ∞`.
    pub fn from_exponents(p: f64, q: f64) -> Result<Self> {
        if !(p > 1.0 && p <= q && q.is_finite()) {
            return Err(Error::InvalidExponent(format!(
                "need 1 < p <= q < inf, got p={p}, q={q}"
            )));
        }
        Alpha::new((1.0 / p - 1.0 / q).max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The volume exponent `α − 1`, always negative.
    pub(crate) fn volume_exponent(self) -> f64 {
        self.0 - 1.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Dyadic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Dyadic => "dyadic",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "dyadic" | "shifted-dyadic" => Ok(Mode::Dyadic),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Values of `M_α f` on a query window.
#[derive(Clone, Debug, PartialEq)]
pub struct MaximalField {
    pub field: ScalarField,
    pub alpha: Alpha,
    pub mode: Mode,
    pub params: GroupParams,
}

impl MaximalField {
    pub fn window(&self) -> &Rect {
        self.field.window()
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    /// Header tokens appended to the field file format.
    pub fn header_extras(&self) -> Vec<(&'static str, String)> {
        vec![
            ("alpha", self.alpha.to_string()),
            ("mu", self.params.mu.to_string()),
            ("mode", self.mode.as_str().to_string()),
        ]
    }

    pub fn write<W: std::io::Write>(&self, w: W) -> Result<()> {
        let dim = Dim::new(self.params.n)?;
        crate::lattice::io::write_field(w, dim, &self.field, &self.header_extras())
    }

    pub fn read<R: std::io::BufRead>(r: R) -> Result<Self> {
        let file = crate::lattice::io::read_field(r)?;
        let get = |key: &str| {
            file.extra
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Parse(format!("maximal field header lacks {key}")))
        };
        let alpha = Alpha::new(
            get("alpha")?
                .parse()
                .map_err(|e| Error::Parse(format!("alpha: {e}")))?,
        )?;
        let mu = get("mu")?
            .parse()
            .map_err(|e| Error::Parse(format!("mu: {e}")))?;
        let mode = get("mode")?.parse()?;
        Ok(MaximalField {
            field: file.field,
            alpha,
            mode,
            params: GroupParams::new(file.dim.n(), mu)?,
        })
    }
}

/// Group parameters implied by an ambient dimension with no twist.
pub(crate) fn classical_params(d: usize) -> Result<GroupParams> {
    GroupParams::new(Dim::from_ambient(d)?.n(), 0)
}
