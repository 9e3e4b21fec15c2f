//! Noise mechanisms, the extension construction and density-ratio audits.

mod audit;
mod exponential;
mod laplace;
mod piecewise;
mod space;

pub use audit::{dp_audit_densities, log_density_table, uniform_grid, AuditReport, PairRow, PairScope, AUDIT_TOLERANCE};
pub use exponential::{exponential_log_pmf, exponential_mechanism, FiniteMechanism};
pub use laplace::{laplace_cdf, laplace_log_density, sample_laplace};
pub use piecewise::{truncated_laplace_density, truncation_rate, PiecewiseExpDensity};
pub use space::{extend_finite_mechanism, extend_mechanism, graph_space, MetricSpace, MAX_SPACE_POINTS};
