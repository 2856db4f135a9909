//! Weak-type and strong-norm ratios of the twisted maximal operator.

use crate::error::{Error, Result};
use crate::heisenberg::GroupParams;
use crate::lattice::{Rect, ScalarField};
use crate::maximal::{heisenberg_maximal_multi, sandwich_constant, Alpha, MaximalField, Mode};

use super::ExponentPair;

/// Where and how `M_α f` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    /// Evaluation window = support hull dilated by this factor per axis.
    pub dilation: u32,
    /// Largest window (in cells) evaluated exactly when no mode is forced.
    pub exact_cell_cap: usize,
    pub mode: Option<Mode>,
    /// Second, wider dilation used to report truncation sensitivity.
    pub sensitivity_dilation: Option<u32>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            dilation: 3,
            exact_cell_cap: 16 * 16 * 16,
            mode: None,
            sensitivity_dilation: Some(5),
        }
    }
}

/// Relative change above which the wider window flags an instance.
pub const SENSITIVITY_THRESHOLD: f64 = 0.05;

/// λ values at which `λ·vol{M > λ}^{1/q}` is examined.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaGrid {
    /// Every attained positive value, approached from below: the exact sup over λ > 0.
    Attained,
    /// At most this many attained values, evenly spaced in rank.
    Quantiles(usize),
    /// Given λs, strict level sets.
    Explicit(Vec<f64>),
}

pub struct Evaluation {
    pub window: Rect,
    pub mode: Mode,
    pub fields: Vec<MaximalField>,
}

/// `M_α f` for each alpha on the dilated support hull of `f`.
pub fn evaluate(
    f: &ScalarField,
    alphas: &[Alpha],
    params: GroupParams,
    dilation: u32,
    opts: &EvalOptions,
) -> Result<Evaluation> {
    let hull = f.support_hull().ok_or(Error::ZeroField)?;
    let window = hull.dilate(dilation);
    let cells = window.cell_count()?;
    let mode = match opts.mode {
        Some(Mode::Exact) if cells > opts.exact_cell_cap => {
            return Err(Error::ResourceLimit(format!(
                "exact mode on {cells} cells exceeds the cap of {}",
                opts.exact_cell_cap
            )))
        }
        Some(m) => m,
        None if cells <= opts.exact_cell_cap => Mode::Exact,
        None => Mode::Dyadic,
    };
    let fields = heisenberg_maximal_multi(f, alphas, params, &window, mode)?;
    Ok(Evaluation { window, mode, fields })
}

/// `(sup ratio, λ*, vol at λ*)` of `λ·vol{M > λ}^{1/q} / norm` over `grid`.
///
/// For attained values `m` the level-set function jumps at `m`, so the sup is
/// the left limit `m · #{M ≥ m}^{1/q}`; `λ*` is that `m`.
pub fn weak_ratio_of(m: &MaximalField, q: f64, norm: f64, grid: &LambdaGrid) -> Result<(f64, f64, u64)> {
    let mut sorted: Vec<f64> = m.values().iter().copied().filter(|&v| v > 0.0).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut best = (0.0, 0.0, 0);
    let mut consider = |lam: f64, vol: u64| {
        let r = lam * (vol as f64).powf(1.0 / q) / norm;
        if r > best.0 {
            best = (r, lam, vol);
        }
    };
    match grid {
        LambdaGrid::Explicit(lams) => {
            for &lam in lams {
                if !(lam > 0.0) {
                    return Err(Error::InvalidLevel(lam));
                }
                let vol = sorted.partition_point(|&v| v > lam) as u64;
                consider(lam, vol);
            }
        }
        LambdaGrid::Attained | LambdaGrid::Quantiles(_) => {
            // (value, #{M ≥ value}) for each distinct attained value, descending.
            let mut steps: Vec<(f64, u64)> = Vec::new();
            for (i, &v) in sorted.iter().enumerate() {
                if sorted.get(i + 1) != Some(&v) {
                    steps.push((v, i as u64 + 1));
                }
            }
            let picks: Vec<usize> = match grid {
                LambdaGrid::Quantiles(k) if *k < steps.len() => {
                    let k = (*k).max(1);
                    let last = steps.len() - 1;
                    let mut v: Vec<usize> =
                        (0..k).map(|i| if k == 1 { 0 } else { i * last / (k - 1) }).collect();
                    v.dedup();
                    v
                }
                _ => (0..steps.len()).collect(),
            };
            for i in picks {
                consider(steps[i].0, steps[i].1);
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sensitivity {
    pub dilation: u32,
    pub window: Rect,
    pub ratio: f64,
    pub relative_change: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakTypeResult {
    /// `correction · raw_ratio`; in dyadic mode with the attained grid an upper
    /// bound on the exact ratio over the same window.
    pub ratio: f64,
    pub raw_ratio: f64,
    /// `4^{d(1−α)}` in dyadic mode, 1 in exact mode.
    pub correction: f64,
    pub lambda_star: f64,
    pub level_volume: u64,
    pub mode: Mode,
    pub window: Rect,
    pub sensitivity: Option<Sensitivity>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongNormResult {
    /// `‖M_α f‖_{q, window} / ‖f‖_p`; a lower bound on the untruncated ratio.
    pub ratio: f64,
    pub mode: Mode,
    pub window: Rect,
    pub sensitivity: Option<Sensitivity>,
}

fn alphas_of(exps: &[ExponentPair]) -> Vec<Alpha> {
    exps.iter().map(ExponentPair::alpha).collect()
}

fn check_nonzero(f: &ScalarField) -> Result<()> {
    if f.is_zero() {
        return Err(Error::ZeroField);
    }
    Ok(())
}

fn sensitivity(base: f64, dilation: u32, window: Rect, ratio: f64) -> Sensitivity {
    let relative_change = (ratio - base).abs() / base;
    Sensitivity {
        dilation,
        window,
        ratio,
        relative_change,
        flagged: relative_change > SENSITIVITY_THRESHOLD,
    }
}

/// Weak-type ratios for several exponent pairs from one shared evaluation.
pub fn weak_type_ratios(
    f: &ScalarField,
    exps: &[ExponentPair],
    params: GroupParams,
    grid: &LambdaGrid,
    opts: &EvalOptions,
) -> Result<Vec<WeakTypeResult>> {
    check_nonzero(f)?;
    let d = params.d();
    let one = |ev: &Evaluation| -> Result<Vec<(f64, f64, f64, u64)>> {
        exps.iter()
            .zip(&ev.fields)
            .map(|(e, m)| {
                let (raw, lam, vol) = weak_ratio_of(m, e.q(), f.lp_norm(e.p())?, grid)?;
                let c = match ev.mode {
                    Mode::Exact => 1.0,
                    Mode::Dyadic => sandwich_constant(d, e.alpha()),
                };
                Ok((c * raw, raw, lam, vol))
            })
            .collect()
    };
    let base = evaluate(f, &alphas_of(exps), params, opts.dilation, opts)?;
    let base_vals = one(&base)?;
    let wide = match opts.sensitivity_dilation {
        Some(k) => {
            let forced = EvalOptions { mode: Some(base.mode), exact_cell_cap: usize::MAX, ..*opts };
            let ev = evaluate(f, &alphas_of(exps), params, k, &forced)?;
            Some((k, ev.window.clone(), one(&ev)?))
        }
        None => None,
    };
    Ok(base_vals
        .iter()
        .enumerate()
        .map(|(i, &(ratio, raw_ratio, lambda_star, level_volume))| WeakTypeResult {
            ratio,
            raw_ratio,
            correction: ratio / raw_ratio,
            lambda_star,
            level_volume,
            mode: base.mode,
            window: base.window.clone(),
            sensitivity: wide.as_ref().map(|(k, w, vals)| sensitivity(ratio, *k, w.clone(), vals[i].0)),
        })
        .collect())
}

/// `sup_λ λ·vol{M_α f > λ}^{1/q} / ‖f‖_p` on the evaluation window.
pub fn weak_type_ratio(
    f: &ScalarField,
    exps: ExponentPair,
    params: GroupParams,
    grid: &LambdaGrid,
    opts: &EvalOptions,
) -> Result<WeakTypeResult> {
    Ok(weak_type_ratios(f, &[exps], params, grid, opts)?.pop().unwrap())
}

pub fn strong_norm_ratios(
    f: &ScalarField,
    exps: &[ExponentPair],
    params: GroupParams,
    opts: &EvalOptions,
) -> Result<Vec<StrongNormResult>> {
    check_nonzero(f)?;
    let one = |ev: &Evaluation| -> Result<Vec<f64>> {
        exps.iter()
            .zip(&ev.fields)
            .map(|(e, m)| Ok(m.field.lp_norm(e.q())? / f.lp_norm(e.p())?))
            .collect()
    };
    let base = evaluate(f, &alphas_of(exps), params, opts.dilation, opts)?;
    let base_vals = one(&base)?;
    let wide = match opts.sensitivity_dilation {
        Some(k) => {
            let forced = EvalOptions { mode: Some(base.mode), exact_cell_cap: usize::MAX, ..*opts };
            let ev = evaluate(f, &alphas_of(exps), params, k, &forced)?;
            Some((k, ev.window.clone(), one(&ev)?))
        }
        None => None,
    };
    Ok(base_vals
        .iter()
        .enumerate()
        .map(|(i, &ratio)| StrongNormResult {
            ratio,
            mode: base.mode,
            window: base.window.clone(),
            sensitivity: wide.as_ref().map(|(k, w, vals)| sensitivity(ratio, *k, w.clone(), vals[i])),
        })
        .collect())
}

/// `‖M_α f‖_q / ‖f‖_p` on the evaluation window.
pub fn strong_norm_ratio(
    f: &ScalarField,
    exps: ExponentPair,
    params: GroupParams,
    opts: &EvalOptions,
) -> Result<StrongNormResult> {
    Ok(strong_norm_ratios(f, &[exps], params, opts)?.pop().unwrap())
}
