use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write;
use std::time::Instant;

use crate::block::{estimate_blocks, EstimatorConfig};
use crate::density::{
    extended_density_estimator, laplace_density_estimator, restricted_density_estimator, ExtendedDensityMechanism,
    HomogeneityConfig,
};
use crate::error::{invalid_input, Result};
use crate::graph::{pair_count, LabeledGraph};
use crate::graphon::{delta2_hat_blocks, sample_gnm, sample_w_random, BlockMatrix, StepGraphon};
use crate::rng::{substream, Stream};

use super::config::{EstimatorId, ExperimentConfig, GraphModel};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const CSV_SCHEMA: &str = "# schema=1";

const PURPOSE_GRAPH: u64 = 0;
const PURPOSE_ESTIMATOR: u64 = 1;
const PURPOSE_BOOTSTRAP: u64 = 2;

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub estimator: EstimatorId,
    pub model: GraphModel,
    pub n: usize,
    pub epsilon: f64,
    pub rho: f64,
    pub c: f64,
    pub k: usize,
    pub lambda: f64,
    pub edge_fraction: f64,
    pub trials: usize,
    /// Trials whose estimator returned an error; excluded from the MSE.
    pub errors: usize,
    pub mse: f64,
    pub ci_half_width: f64,
    /// First error message, if any.
    pub first_error: Option<String>,
    /// Not written to the CSV, which must be reproducible byte for byte.
    pub wall_seconds: f64,
}

/// Mean and 95% percentile-bootstrap half-width of `xs`.
pub fn bootstrap_mean<R: Rng + ?Sized>(xs: &[f64], resamples: usize, rng: &mut R) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    if xs.len() == 1 || resamples == 0 {
        return (mean, 0.0);
    }
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..xs.len()).map(|_| xs[rng.gen_range(0..xs.len())]).sum::<f64>() / xs.len() as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |p: f64| means[((p * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    (mean, ((at(0.975) - at(0.025)) / 2.0).max(0.0))
}

/// Least-squares slope of `ln mse` on `ln n` with its standard error.
pub fn slope_fit(points: &[(usize, f64)]) -> Result<(f64, f64)> {
    let mut ns: Vec<usize> = points.iter().map(|p| p.0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(invalid_input(format!("slope fit needs at least 3 distinct n, got {}", ns.len())));
    }
    if points.iter().any(|p| !(p.1 > 0.0)) {
        return Err(invalid_input("slope fit needs positive MSE values"));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let stderr = if xs.len() > 2 { (resid / (m - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok((slope, stderr))
}

enum Prepared {
    None,
    Extended(ExtendedDensityMechanism),
}

struct Cell<'a> {
    cfg: &'a ExperimentConfig,
    n: usize,
    epsilon: f64,
    index: u64,
    prepared: Prepared,
}

impl Cell<'_> {
    fn sample_graph(&self, rng: &mut Stream) -> Result<LabeledGraph> {
        let cfg = self.cfg;
        match cfg.model {
            GraphModel::Gnm => sample_gnm(self.n, self.edge_count(), rng),
            GraphModel::Gnp => {
                let w = StepGraphon::equal_blocks(BlockMatrix::constant(1, 1.0)?);
                Ok(sample_w_random(&w, cfg.edge_fraction, self.n, rng)?.graph)
            }
            GraphModel::Sbm => Ok(sample_w_random(&self.graphon()?, cfg.rho, self.n, rng)?.graph),
        }
    }

    fn edge_count(&self) -> usize {
        (self.cfg.edge_fraction * pair_count(self.n) as f64).floor() as usize
    }

    fn graphon(&self) -> Result<StepGraphon<f64>> {
        let rows = self.cfg.blocks.as_ref().ok_or_else(|| invalid_input("model sbm needs blocks"))?;
        Ok(StepGraphon::equal_blocks(BlockMatrix::from_rows(rows)?))
    }

    fn density_truth(&self) -> f64 {
        match self.cfg.model {
            GraphModel::Gnm => self.edge_count() as f64 / pair_count(self.n) as f64,
            GraphModel::Gnp => self.cfg.edge_fraction,
            GraphModel::Sbm => self.cfg.rho * self.graphon().map(|w| w.density()).unwrap_or(f64::NAN),
        }
    }

    fn squared_error(&self, trial: u64) -> Result<f64> {
        let cfg = self.cfg;
        let master = cfg.seed;
        let g = self.sample_graph(&mut substream(master, self.index, trial, PURPOSE_GRAPH))?;
        let rng = &mut substream(master, self.index, trial, PURPOSE_ESTIMATOR);
        let hom = || HomogeneityConfig::new(cfg.rho, cfg.c);
        let value = match (cfg.estimator, &self.prepared) {
            (EstimatorId::Baseline, _) => laplace_density_estimator(&g, self.epsilon, rng)?.value,
            (EstimatorId::Restricted, _) => restricted_density_estimator(&g, self.epsilon, &hom()?, rng)?.value,
            (EstimatorId::Promise, _) => extended_density_estimator(&g, self.epsilon, &hom()?, true, rng)?.value,
            (EstimatorId::Extended, Prepared::Extended(m)) => m.sample(&g, rng)?.value,
            (EstimatorId::Extended, Prepared::None) => unreachable!("prepared per cell"),
            (EstimatorId::Blocks, _) => {
                let est = estimate_blocks(&g, &EstimatorConfig::new(self.epsilon, cfg.lambda, cfg.k)?, rng)?;
                let d = delta2_hat_blocks(&est.normalized(), self.graphon()?.values())?;
                return Ok(d * d);
            }
        };
        Ok((value - self.density_truth()).powi(2))
    }
}

/// One record per `(n, ε)` cell, in grid order. Trials run in parallel on
/// per-trial substreams and are reduced in trial order.
pub fn run_mse_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let mut records = Vec::new();
    for (i, &n) in cfg.n.iter().enumerate() {
        for (j, &epsilon) in cfg.epsilon.iter().enumerate() {
            let index = (i * cfg.epsilon.len() + j) as u64;
            let start = Instant::now();
            let prepared = match cfg.estimator {
                EstimatorId::Extended => {
                    ExtendedDensityMechanism::build(n, epsilon, &HomogeneityConfig::new(cfg.rho, cfg.c)?).map(Prepared::Extended)
                }
                _ => Ok(Prepared::None),
            };
            let outcomes: Vec<Result<f64>> = match prepared {
                Ok(prepared) => {
                    let cell = Cell { cfg, n, epsilon, index, prepared };
                    (0..cfg.trials as u64).into_par_iter().map(|t| cell.squared_error(t)).collect()
                }
                Err(e) => vec![Err(e); cfg.trials],
            };
            let first_error = outcomes.iter().find_map(|o| o.as_ref().err().map(|e| e.to_string()));
            let errs: Vec<f64> = outcomes.into_iter().filter_map(|o| o.ok()).collect();
            let (mse, ci_half_width) =
                bootstrap_mean(&errs, BOOTSTRAP_RESAMPLES, &mut substream(cfg.seed, index, u64::MAX, PURPOSE_BOOTSTRAP));
            records.push(ExperimentRecord {
                estimator: cfg.estimator,
                model: cfg.model,
                n,
                epsilon,
                rho: cfg.rho,
                c: cfg.c,
                k: cfg.k,
                lambda: cfg.lambda,
                edge_fraction: cfg.edge_fraction,
                trials: cfg.trials,
                errors: cfg.trials - errs.len(),
                mse,
                ci_half_width,
                first_error,
                wall_seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(records)
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = format!(
        "{CSV_SCHEMA}\nestimator,model,n,epsilon,rho,c,k,lambda,edge_fraction,trials,errors,mse,ci95_half_width\n"
    );
    for r in records {
        let model = serde_json::to_value(r.model).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{model},{},{},{},{},{},{},{},{},{},{},{}",
            r.estimator.as_str(),
            r.n,
            r.epsilon,
            r.rho,
            r.c,
            r.k,
            r.lambda,
            r.edge_fraction,
            r.trials,
            r.errors,
            r.mse,
            r.ci_half_width
        );
    }
    out
}
