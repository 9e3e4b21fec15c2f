//! Private edge-density estimators: the Laplace baseline, the truncated
//! Laplace mechanism on homogeneous graphs, and its extension.

mod estimators;
mod homogeneity;

pub use estimators::{
    extended_density_estimator, laplace_density_estimator, predicted_baseline_mse, predicted_restricted_mse,
    restricted_density_estimator, DensityEstimate, DensityMode, ExtendedDensityMechanism, PrivacyScope,
    MAX_EXACT_EXTENSION_N,
};
pub use homogeneity::{
    homogeneity_membership, homogeneity_membership_sampled, HomogeneityConfig, Membership, DEFAULT_C,
    DEFAULT_SUBSET_SAMPLES, EXACT_SCAN_MAX_N,
};
