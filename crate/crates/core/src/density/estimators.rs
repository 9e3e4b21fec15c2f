use rand::Rng;
use serde::Serialize;

use crate::error::{invalid_param, Result};
use crate::graph::{pair_count, LabeledGraph};
use crate::mech::{extend_mechanism, graph_space, sample_laplace, truncated_laplace_density, MetricSpace, PiecewiseExpDensity};

use super::homogeneity::{homogeneity_membership, HomogeneityConfig};

/// Largest `n` for which the extension is materialized over all graphs.
pub const MAX_EXACT_EXTENSION_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityMode {
    Baseline,
    Restricted,
    ExtendedExact,
    Promise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrivacyScope {
    AllGraphs,
    /// Only meaningful when the input is promised to lie in `H`.
    HomogeneousOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub value: f64,
    /// Pre-clamp value; equal to `value` for the truncated mechanisms.
    pub raw: f64,
    pub mode: DensityMode,
    pub epsilon: f64,
    pub scope: PrivacyScope,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid_param(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    Ok(())
}

/// `e(G) + Lap(4/(nε))`, clamped to `[0,1]`.
pub fn laplace_density_estimator<R: Rng + ?Sized>(g: &LabeledGraph, epsilon: f64, rng: &mut R) -> Result<DensityEstimate> {
    check_epsilon(epsilon)?;
    let e = g.edge_density()?;
    let raw = e + sample_laplace(4.0 / (g.n() as f64 * epsilon), rng)?;
    Ok(DensityEstimate { value: raw.clamp(0.0, 1.0), raw, mode: DensityMode::Baseline, epsilon, scope: PrivacyScope::AllGraphs })
}

/// One draw from the truncated Laplace density centred at `e(G)`; private
/// (at ε/2) only between inputs of `H_{ρ,C}`.
pub fn restricted_density_estimator<R: Rng + ?Sized>(
    g: &LabeledGraph,
    epsilon: f64,
    cfg: &HomogeneityConfig,
    rng: &mut R,
) -> Result<DensityEstimate> {
    let f = truncated_laplace_density(g.edge_density()?, epsilon, cfg.c, cfg.rho, g.n())?;
    let q = f.sample(rng);
    Ok(DensityEstimate { value: q, raw: q, mode: DensityMode::Restricted, epsilon: epsilon / 2.0, scope: PrivacyScope::HomogeneousOnly })
}

/// The truncated Laplace mechanism on `H_{ρ,C}` extended to every graph on
/// `n` vertices, materialized as one density per graph (indexed by code).
#[derive(Debug, Clone)]
pub struct ExtendedDensityMechanism {
    pub epsilon: f64,
    pub cfg: HomogeneityConfig,
    pub space: MetricSpace<LabeledGraph>,
    pub densities: Vec<PiecewiseExpDensity>,
}

impl ExtendedDensityMechanism {
    pub fn build(n: usize, epsilon: f64, cfg: &HomogeneityConfig) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(3..=MAX_EXACT_EXTENSION_N).contains(&n) {
            return Err(invalid_param(format!("exact extension needs 3 <= n <= {MAX_EXACT_EXTENSION_N}, got {n}")));
        }
        let space = graph_space(n, |g| homogeneity_membership(g, cfg).map(|m| m.member).unwrap_or(false))?;
        let base = |i: usize| truncated_laplace_density(space.point(i).edge_density()?, epsilon, cfg.c, cfg.rho, n);
        let densities = extend_mechanism(&space, base, epsilon / 2.0)?;
        Ok(Self { epsilon, cfg: *cfg, space, densities })
    }

    pub fn density(&self, g: &LabeledGraph) -> Result<&PiecewiseExpDensity> {
        if g.n() != self.space.point(0).n() {
            return Err(invalid_param("graph size does not match the mechanism"));
        }
        let code = g.code().ok_or_else(|| invalid_param("graph too large to index"))?;
        Ok(&self.densities[code as usize])
    }

    pub fn sample<R: Rng + ?Sized>(&self, g: &LabeledGraph, rng: &mut R) -> Result<DensityEstimate> {
        let q = self.density(g)?.sample(rng);
        Ok(DensityEstimate { value: q, raw: q, mode: DensityMode::ExtendedExact, epsilon: self.epsilon, scope: PrivacyScope::AllGraphs })
    }
}

/// Extended estimator. With `promise_in_h` the restricted mechanism is run
/// directly and labelled as private on `H` only; otherwise the extension is
/// built exactly, which is feasible for `n ≤ 5`.
pub fn extended_density_estimator<R: Rng + ?Sized>(
    g: &LabeledGraph,
    epsilon: f64,
    cfg: &HomogeneityConfig,
    promise_in_h: bool,
    rng: &mut R,
) -> Result<DensityEstimate> {
    if promise_in_h {
        let mut est = restricted_density_estimator(g, epsilon, cfg, rng)?;
        est.mode = DensityMode::Promise;
        est.epsilon = epsilon;
        return Ok(est);
    }
    ExtendedDensityMechanism::build(g.n(), epsilon, cfg)?.sample(g, rng)
}

/// `32/(n²ε²) + p(1−p)/C(n,2)`: Laplace variance plus G(n,p) sampling
/// variance of the edge density.
pub fn predicted_baseline_mse(n: usize, p: f64, epsilon: f64) -> f64 {
    let nf = n as f64;
    32.0 / (nf * nf * epsilon * epsilon) + p * (1.0 - p) / pair_count(n) as f64
}

/// Exact second moment of the truncated Laplace output about `truth` when
/// centred at `center`.
pub fn predicted_restricted_mse(n: usize, center: f64, truth: f64, epsilon: f64, cfg: &HomogeneityConfig) -> Result<f64> {
    Ok(truncated_laplace_density(center, epsilon, cfg.c, cfg.rho, n)?.moment_about(truth, 2))
}
