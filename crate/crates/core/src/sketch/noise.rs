use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng;

use super::types::{NoiseParams, PrivacyBudget};

/// Gaussian-mechanism noise level for an L2 sensitivity and budget:
/// `sigma = sensitivity * sqrt(2 ln(1.25 / delta)) / epsilon`.
pub fn calibrate_sigma(sensitivity: f64, budget: &PrivacyBudget) -> Result<NoiseParams> {
    if !sensitivity.is_finite() || sensitivity <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sensitivity must be > 0, got {sensitivity}"
        )));
    }
    let sigma = sensitivity * (2.0 * (1.25 / budget.delta()).ln()).sqrt() / budget.epsilon();
    NoiseParams::new(sigma)
}

/// Adds iid `N(0, sigma^2)` noise to each coordinate. The noise for a user
/// comes from substream `user_index` of `noise_seed`, so it is reproducible
/// and independent across users.
pub fn perturb(sketch: &[f64], noise: NoiseParams, noise_seed: u64, user_index: u64) -> Vec<f64> {
    let sigma = noise.sigma();
    if sigma == 0.0 {
        return sketch.to_vec();
    }
    let mut rng = rng::substream(noise_seed, user_index);
    sketch
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + sigma * z
        })
        .collect()
}
