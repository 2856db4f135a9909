//! The Heisenberg-twisted operator and its group-law definition.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heisenberg::{group_inv, group_mul, shear_field, GroupParams, LatticePoint};
use crate::lattice::{Rect, ScalarField};

use super::dyadic::{eval_columns, ColumnSource};
use super::exact::{exact_window, ExactEvaluator};
use super::{Alpha, MaximalField, Mode};

fn check_dim(f: &ScalarField, params: GroupParams, query: Option<&Rect>) -> Result<()> {
    let d = params.d();
    for got in std::iter::once(f.dim()).chain(query.map(Rect::dim)) {
        if got != d {
            return Err(Error::DimensionMismatch { expected: d, got });
        }
    }
    Ok(())
}

/// `M_α f(u,v,t) = sup_{R ∋ (u,v,t)} vol(R)^{α−1} Σ_R |f(ξ, η, τ + μ(u·η − v·ξ))|`.
///
/// The twist depends only on the evaluation point's `(u, v)`, never on `R`,
/// so each `(u, v)`-column is a classical maximal evaluation of one sheared field.
pub fn heisenberg_maximal(
    f: &ScalarField,
    alpha: Alpha,
    params: GroupParams,
    query: &Rect,
    mode: Mode,
) -> Result<MaximalField> {
    Ok(heisenberg_maximal_multi(f, &[alpha], params, query, mode)?
        .pop()
        .unwrap())
}

/// [`heisenberg_maximal`] for several orders at once; box sums are shared.
pub fn heisenberg_maximal_multi(
    f: &ScalarField,
    alphas: &[Alpha],
    params: GroupParams,
    query: &Rect,
    mode: Mode,
) -> Result<Vec<MaximalField>> {
    check_dim(f, params, Some(query))?;
    let n = params.n;
    let fields = match mode {
        Mode::Exact if params.mu == 0 => exact_window(f, alphas, query)?,
        Mode::Exact => twisted_exact(f, alphas, params, query)?,
        Mode::Dyadic => match ColumnSource::new(f) {
            None => alphas
                .iter()
                .map(|_| ScalarField::zeros(query.clone()))
                .collect::<Result<_>>()?,
            Some(source) => {
                let cross = source.cross_cells();
                eval_columns(&source, query, alphas, |col| {
                    if params.mu == 0 {
                        return Ok(Vec::new());
                    }
                    cross
                        .iter()
                        .map(|y| params.twist(&col[..n], &col[n..], &y[..n], &y[n..]))
                        .collect()
                })?
            }
        },
    };
    Ok(fields
        .into_iter()
        .zip(alphas)
        .map(|(field, &alpha)| MaximalField {
            field,
            alpha,
            mode,
            params,
        })
        .collect())
}

fn twisted_exact(f: &ScalarField, alphas: &[Alpha], params: GroupParams, query: &Rect) -> Result<Vec<ScalarField>> {
    let n = params.n;
    let m = 2 * n;
    let Some(hull) = f.support_hull() else {
        return alphas.iter().map(|_| ScalarField::zeros(query.clone())).collect();
    };
    let local = f.restrict(&hull)?;
    let columns: Vec<Vec<i64>> = Rect::new(query.lo()[..m].to_vec(), query.hi()[..m].to_vec())?
        .cells()
        .collect();
    let (t_lo, t_hi) = (query.lo()[m], query.hi()[m]);
    let per_column = columns
        .par_iter()
        .map(|col| -> Result<Vec<Vec<f64>>> {
            let g = shear_field(&local, &col[..n], &col[n..], params)?;
            let ev = ExactEvaluator::new(&g).expect("shear preserves nonzero mass");
            let mut x = col.clone();
            x.push(0);
            Ok(alphas
                .iter()
                .map(|&alpha| {
                    (t_lo..t_hi)
                        .map(|t| {
                            x[m] = t;
                            ev.eval(&x, alpha)
                        })
                        .collect()
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    (0..alphas.len())
        .map(|ai| {
            let values = per_column.iter().flat_map(|c| c[ai].iter().copied()).collect();
            ScalarField::new(query.clone(), values)
        })
        .collect()
}

/// Group-law form: `sup_{R ∋ 0} vol(R)^{α−1} Σ_{y ∈ R} |f(x ⊙ y^{-1})|`.
///
/// Each nonzero cell `c` of `f` is pulled back to the unique `y` with
/// `x ⊙ y^{-1} = c`, namely `y = (x^{-1} ⊙ c)^{-1}`, and the untwisted exact
/// sup is taken at the origin. No shear formula is used.
pub fn maximal_group_form_at(f: &ScalarField, alpha: Alpha, params: GroupParams, x: &LatticePoint) -> Result<f64> {
    check_dim(f, params, None)?;
    let x_inv = group_inv(x);
    let mut pulled: Vec<(Vec<i64>, f64)> = Vec::new();
    for (i, &v) in f.values().iter().enumerate() {
        if v != 0.0 {
            let c = LatticePoint::from_coords(&f.window().point_at(i))?;
            let y = group_inv(&group_mul(&x_inv, &c, params)?);
            pulled.push((y.coords(), v.abs()));
        }
    }
    if pulled.is_empty() {
        return Ok(0.0);
    }
    let d = params.d();
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for (y, _) in &pulled {
        for a in 0..d {
            lo[a] = lo[a].min(y[a]);
            hi[a] = hi[a].max(y[a] + 1);
        }
    }
    let mut h = ScalarField::zeros(Rect::new(lo, hi)?)?;
    for (y, v) in &pulled {
        h.set(y, *v)?;
    }
    let ev = ExactEvaluator::new(&h).expect("nonzero pullback");
    Ok(ev.eval(&LatticePoint::identity(params.n).coords(), alpha))
}
