use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::sketch::{hamming, Dataset, DistanceEstimate, Mechanism, UserRecord};

/// Symmetric per-bit randomized response: keep with `e^eps / (1 + e^eps)`,
/// flip with `1 / (1 + e^eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RRParams {
    epsilon: f64,
    p_keep: f64,
    p_flip: f64,
}

impl RRParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::InvalidBudget(format!(
                "randomized response needs epsilon > 0, got {epsilon}"
            )));
        }
        // Logistic form keeps both probabilities accurate for large epsilon.
        let p_keep = 1.0 / (1.0 + (-epsilon).exp());
        let p_flip = 1.0 / (1.0 + epsilon.exp());
        Ok(Self {
            epsilon,
            p_keep,
            p_flip,
        })
    }

    /// Parameters from a keep probability in `(0.5, 1]`. `p_keep = 1` is the
    /// noiseless limit with infinite epsilon.
    pub fn from_keep_probability(p_keep: f64) -> Result<Self> {
        if !(p_keep > 0.5 && p_keep <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "keep probability must be in (0.5, 1], got {p_keep}"
            )));
        }
        let p_flip = 1.0 - p_keep;
        Ok(Self {
            epsilon: (p_keep / p_flip).ln(),
            p_keep,
            p_flip,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn p_keep(&self) -> f64 {
        self.p_keep
    }

    pub fn p_flip(&self) -> f64 {
        self.p_flip
    }
}

/// A record after randomized response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RRRecord {
    pub user_id: String,
    pub bits: Vec<u8>,
}

impl RRRecord {
    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    pub fn into_record(self) -> UserRecord {
        UserRecord::new(self.user_id, self.bits).expect("randomized response keeps bits binary")
    }
}

/// Flips each bit independently with probability `p_flip`, using substream
/// `user_index` of `seed`.
pub fn rr_perturb(x: &UserRecord, params: RRParams, seed: u64, user_index: u64) -> RRRecord {
    RRRecord {
        user_id: x.user_id().to_string(),
        bits: rr_perturb_bits(x.bits(), params, seed, user_index),
    }
}

pub(crate) fn rr_perturb_bits(bits: &[u8], params: RRParams, seed: u64, user_index: u64) -> Vec<u8> {
    let mut rng = rng::substream(seed, user_index);
    bits.iter()
        .map(|&b| if rng.random_bool(params.p_flip) { b ^ 1 } else { b })
        .collect()
}

/// Applies [`rr_perturb`] to every record; user `i` uses substream `i`.
pub fn rr_publish(dataset: &Dataset, params: RRParams, seed: u64) -> Vec<RRRecord> {
    dataset
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| rr_perturb(r, params, seed, i as u64))
        .collect()
}

/// Bias-corrected Hamming distance between two perturbed records.
///
/// With `D` the observed disagreement count, `E[D] = 2pq d + h (p - q)^2`,
/// so `(D - 2pq d) / (p - q)^2` is unbiased for the true distance `h`.
pub fn rr_estimate_distance(a: &RRRecord, b: &RRRecord, params: RRParams) -> Result<DistanceEstimate> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(DistanceEstimate {
        value: rr_estimate_from_count(hamming(&a.bits, &b.bits), a.dim(), params),
        mechanism: Mechanism::RandomizedResponse,
    })
}

pub(crate) fn rr_estimate_from_count(disagreements: usize, d: usize, params: RRParams) -> f64 {
    let (p, q) = (params.p_keep, params.p_flip);
    let gap = p - q;
    (disagreements as f64 - 2.0 * p * q * d as f64) / (gap * gap)
}
