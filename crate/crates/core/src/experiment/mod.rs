//! Exhaustive privacy audits, Monte Carlo error experiments and the
//! lower-bound constructions.

mod audit;
mod config;
mod models;
mod mse;

pub use audit::{
    audit_dp_exhaustive, audit_reduction, audit_score_sensitivity, bernoulli_reduction_graph, AuditComponent,
    AuditMechanism, ExhaustiveAudit, SensitivityAudit, DENSITY_GRID_POINTS, MAX_BLOCK_AUDIT_N, MAX_DENSITY_AUDIT_N,
};
pub use config::{EstimatorId, ExperimentConfig, GraphModel};
pub use models::{
    exact_total_variation, homogeneity_probability, run_distinguishability_experiment, ChiSquareTest,
    DistinguishabilityReport, HomogeneityReport,
};
pub use mse::{bootstrap_mean, records_to_csv, run_mse_experiment, slope_fit, ExperimentRecord, BOOTSTRAP_RESAMPLES, CSV_SCHEMA};
