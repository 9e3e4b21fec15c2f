//! Private block-graphon estimation.

mod estimator;
mod score;

pub use estimator::{
    audited_delta, block_mechanism, candidate_scores, clamp_density, estimate_blocks, grid_level, private_density,
    AuditedBlockMechanism, BlockEstimate, CandidateGrid, EstimatorConfig, LevelLaw, PrivateDensity, SensitivityMode,
    DEFAULT_CANDIDATE_BUDGET, MAX_AUDIT_N,
};
pub use score::{best_score, lipschitz_score, profile_score, score, score_matrix, BestScore, ProfileSet};
