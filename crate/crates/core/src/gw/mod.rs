//! Gromov–Wasserstein distances between measure networks.

mod matrix;
mod ot;
mod solver;

pub use matrix::{frobenius_change, gw_matrix, GwMatrix, PairMeta};
pub use ot::{solve_inner_ot, transport_cost, EXACT_OT_SIZE_LIMIT};
pub use solver::{
    decompose_i123, dissimilarity_matrix, gw_cost, normalized_plan_norm, solve_gw, srgw_optimal_similarity,
    GwConfig, GwInit, GwResult, GwTerms,
};
