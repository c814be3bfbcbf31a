//! Comparison mechanisms: per-bit randomized response and Laplace noise on
//! the full pairwise distance matrix, plus an MSE sweep across mechanisms.

mod compare;
mod matrix;
mod rr;

pub use compare::{compare_mse, MseConfig, MseRow};
pub use matrix::{laplace_scale, matrix_publish, sample_laplace, NoisyDistanceMatrix};
pub use rr::{rr_estimate_distance, rr_perturb, rr_publish, RRParams, RRRecord};

pub(crate) use rr::rr_perturb_bits;
