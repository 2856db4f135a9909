//! Seeded ensembles of ratio measurements with deterministic JSON reports.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::heisenberg::GroupParams;
use crate::rng::GENERATOR;

use super::ratios::{strong_norm_ratios, weak_type_ratios, EvalOptions, LambdaGrid};
use super::{generate_field, ExponentPair, FieldSpec};

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    WeakType(LambdaGrid),
    StrongNorm,
}

impl Experiment {
    fn name(&self) -> &'static str {
        match self {
            Experiment::WeakType(_) => "weaktype",
            Experiment::StrongNorm => "strongnorm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub spec: String,
    pub seed: u64,
    pub n: usize,
    pub mu: i64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub window: String,
    pub mode: String,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensitivity_window: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensitivity_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensitivity_flag: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub p: f64,
    pub q: f64,
    pub mu: i64,
    pub count: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub flagged: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub experiment: String,
    pub generator: String,
    pub runs: Vec<RunReport>,
    pub summaries: Vec<Summary>,
}

impl EnsembleReport {
    pub fn summary(&self, p: f64, q: f64, mu: i64) -> Option<&Summary> {
        self.summaries.iter().find(|s| s.p == p && s.q == q && s.mu == mu)
    }
}

fn median(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

/// One job per `(mu, seed)`, all exponent pairs sharing its maximal evaluation.
/// Runs are listed by `(mu, seed, exponent pair)` whatever order jobs finish in.
/// `runtime_ms` is only recorded when `timing` is set, so reports stay byte-stable.
pub fn run_ensemble(
    spec: &FieldSpec,
    seeds: &[u64],
    exps: &[ExponentPair],
    mus: &[i64],
    experiment: &Experiment,
    opts: &EvalOptions,
    timing: bool,
) -> Result<EnsembleReport> {
    let jobs: Vec<(i64, u64)> = mus.iter().flat_map(|&mu| seeds.iter().map(move |&s| (mu, s))).collect();
    let per_job = jobs
        .par_iter()
        .map(|&(mu, seed)| -> Result<Vec<RunReport>> {
            let start = Instant::now();
            let spec = spec.with_seed(seed);
            let f = generate_field(&spec)?;
            let params = GroupParams::new(spec.n, mu)?;
            let rows: Vec<RunReport> = match experiment {
                Experiment::WeakType(grid) => weak_type_ratios(&f, exps, params, grid, opts)?
                    .into_iter()
                    .zip(exps)
                    .map(|(r, e)| RunReport {
                        spec: spec.to_string(),
                        seed,
                        n: spec.n,
                        mu,
                        p: e.p(),
                        q: e.q(),
                        alpha: e.alpha().value(),
                        window: r.window.to_string(),
                        mode: r.mode.to_string(),
                        ratio: r.ratio,
                        raw_ratio: Some(r.raw_ratio),
                        lambda_star: Some(r.lambda_star),
                        sensitivity_window: r.sensitivity.as_ref().map(|s| s.window.to_string()),
                        sensitivity_ratio: r.sensitivity.as_ref().map(|s| s.ratio),
                        sensitivity_flag: r.sensitivity.as_ref().map(|s| s.flagged),
                        runtime_ms: None,
                    })
                    .collect(),
                Experiment::StrongNorm => strong_norm_ratios(&f, exps, params, opts)?
                    .into_iter()
                    .zip(exps)
                    .map(|(r, e)| RunReport {
                        spec: spec.to_string(),
                        seed,
                        n: spec.n,
                        mu,
                        p: e.p(),
                        q: e.q(),
                        alpha: e.alpha().value(),
                        window: r.window.to_string(),
                        mode: r.mode.to_string(),
                        ratio: r.ratio,
                        raw_ratio: None,
                        lambda_star: None,
                        sensitivity_window: r.sensitivity.as_ref().map(|s| s.window.to_string()),
                        sensitivity_ratio: r.sensitivity.as_ref().map(|s| s.ratio),
                        sensitivity_flag: r.sensitivity.as_ref().map(|s| s.flagged),
                        runtime_ms: None,
                    })
                    .collect(),
            };
            let ms = timing.then(|| start.elapsed().as_millis() as u64);
            Ok(rows.into_iter().map(|r| RunReport { runtime_ms: ms, ..r }).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let runs: Vec<RunReport> = per_job.into_iter().flatten().collect();

    let mut summaries = Vec::new();
    for &mu in mus {
        for e in exps {
            let picked: Vec<&RunReport> = runs.iter().filter(|r| r.mu == mu && r.p == e.p() && r.q == e.q()).collect();
            let mut ratios: Vec<f64> = picked.iter().map(|r| r.ratio).collect();
            if ratios.is_empty() {
                continue;
            }
            ratios.sort_by(|a, b| a.total_cmp(b));
            summaries.push(Summary {
                p: e.p(),
                q: e.q(),
                mu,
                count: ratios.len(),
                min: ratios[0],
                median: median(&ratios),
                max: *ratios.last().unwrap(),
                flagged: picked.iter().filter(|r| r.sensitivity_flag == Some(true)).count(),
            });
        }
    }
    Ok(EnsembleReport {
        experiment: experiment.name().to_string(),
        generator: GENERATOR.to_string(),
        runs,
        summaries,
    })
}
