//! Step graphons, random-graph samplers and the distances between them.

mod coupling;
mod equipartition;
mod fit;
mod matrix;
mod sample;
mod step;

pub use coupling::{gnm_pmf, rewired_likelihood_ratio, rewired_model_pmf, rewired_vertex_average, rewired_model_pmf_full};
pub use equipartition::{
    all_equipartitions, block_average, block_average_grid, equipartition_count, for_each_equipartition,
    local_search_max, Equipartition,
};
pub use fit::{
    agnostic_error, delta2_hat_blocks, delta2_hat_blocks_sq, delta2_hat_fit, sampling_error, step_sq_distance,
    FitOptions, FitResult, DEFAULT_EQUIPARTITION_BUDGET, MAX_AGNOSTIC_BLOCKS, MAX_PERMUTATION_K,
};
pub use matrix::{normalized_l2, normalized_sq_l2, BlockMatrix, SquareMatrix};
pub use sample::{sample_gnm, sample_gnm_rewired, sample_gnm_rewired_coupled, sample_w_random, RewiredSample, WRandomSample};
pub use step::{two_clique_graphon, StepGraphon};
