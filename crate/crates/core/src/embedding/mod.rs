//! Embedding of L¹(Σ) into Hardy martingale spaces: lacunary ladders, the
//! Fejér-product kernel, the projections E_Σ and R, and the transfer T.

mod kernels;
mod lacunary;
mod ladder;
mod verify;

pub use kernels::{
    atom_of, kernel_a, kernel_b, kernel_k, operator_r, operator_r_kernel, r_route_gap, random_sigma_measurable,
    realized_patterns, sigma_basis, sigma_coefficients, sigma_project,
};
pub use lacunary::{operator_j, transfer_grid, transfer_t, LacunaryFunction};
pub use ladder::{level_target, smoothed_sign, smoothing_error, FrequencyLadder, LEVEL_CAP};
pub use verify::{
    best_analytic_approximation, meyer_band, verify_embedding, verify_small, verify_small_with, EmbeddingConfig,
    EmbeddingReport, MeyerBand,
};
