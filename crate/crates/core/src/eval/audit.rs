//! Empirical privacy-loss audits on a pair of neighboring records.
//!
//! For each mechanism the audit samples outputs under `x`, evaluates the
//! exact log-likelihood ratio `ln p(y | x) / p(y | x')` of each sample, and
//! counts how often it exceeds epsilon.

use rayon::prelude::*;

use crate::baselines::{laplace_scale, matrix_publish, rr_perturb_bits, RRParams};
use crate::error::{Error, Result};
use crate::eval::synth::random_record;
use crate::rng::{self, derive_seed};
use crate::sketch::{
    calibrate_sigma, perturb, project, sample_projection, Dataset, Mechanism, NoiseParams, PrivacyBudget, UserRecord,
};

/// Relative slack for comparing a loss that equals epsilon analytically.
const LOSS_ROUNDING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub mechanism: Mechanism,
    pub budget: PrivacyBudget,
    /// Sketch dimension (projection only).
    pub k: usize,
    /// Multiplier on the calibrated sigma (projection only).
    pub noise_scale: f64,
    /// Other users in the audited dataset (matrix only).
    pub matrix_peers: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl AuditConfig {
    pub fn new(mechanism: Mechanism, budget: PrivacyBudget, n_samples: usize, seed: u64) -> Self {
        Self {
            mechanism,
            budget,
            k: 1,
            noise_scale: 1.0,
            matrix_peers: 3,
            n_samples,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub mechanism: Mechanism,
    pub epsilon_target: f64,
    pub delta_target: f64,
    pub n_samples: usize,
    pub violations: usize,
    pub empirical_violation_rate: f64,
    /// Largest rate that still passes.
    pub allowed_rate: f64,
    /// Exact `P(loss > epsilon)` where it has a closed form (projection).
    pub analytic_violation_rate: Option<f64>,
    pub max_loss: f64,
    /// Noise level used (projection only).
    pub sigma: Option<f64>,
    pub passed: bool,
}

impl AuditReport {
    /// Monte Carlo standard error of the empirical rate around the analytic one.
    pub fn analytic_standard_error(&self) -> Option<f64> {
        self.analytic_violation_rate
            .map(|p| (p * (1.0 - p) / self.n_samples as f64).sqrt())
    }
}

/// Pass threshold for an `(epsilon, delta)` mechanism: `delta` plus a
/// binomial allowance of three standard errors and one sample.
pub fn allowed_violation_rate(delta: f64, n_samples: usize) -> f64 {
    let n = n_samples as f64;
    delta + 3.0 * (delta / n).sqrt() + 1.0 / n
}

/// Standard normal upper tail.
fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Audits `config.mechanism` on neighbors `x` and `x_neighbor`, which must
/// differ in exactly one attribute.
pub fn dp_audit(x: &UserRecord, x_neighbor: &UserRecord, config: &AuditConfig) -> Result<AuditReport> {
    if x.hamming(x_neighbor)? != 1 {
        return Err(Error::InvalidParameter(
            "audited inputs must differ in exactly one attribute".into(),
        ));
    }
    if config.n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    let (losses, analytic, sigma) = match config.mechanism {
        Mechanism::Projection => projection_losses(x, x_neighbor, config)?,
        Mechanism::RandomizedResponse => (rr_losses(x, x_neighbor, config)?, None, None),
        Mechanism::MatrixLaplace => (matrix_losses(x, x_neighbor, config)?, None, None),
    };
    let eps = config.budget.epsilon();
    let violations = losses
        .iter()
        .filter(|&&l| match config.mechanism {
            Mechanism::Projection => l > eps,
            _ => l > eps * (1.0 + LOSS_ROUNDING),
        })
        .count();
    let rate = violations as f64 / config.n_samples as f64;
    let allowed = match config.mechanism {
        Mechanism::Projection => allowed_violation_rate(config.budget.delta(), config.n_samples),
        _ => 0.0,
    };
    Ok(AuditReport {
        mechanism: config.mechanism,
        epsilon_target: eps,
        delta_target: config.budget.delta(),
        n_samples: config.n_samples,
        violations,
        empirical_violation_rate: rate,
        allowed_rate: allowed,
        analytic_violation_rate: analytic,
        max_loss: losses.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        sigma,
        passed: rate <= allowed,
    })
}

/// The neighbor of `x` that flips the attribute with the largest row norm
/// in the projection drawn by a projection audit with this config.
pub fn worst_case_neighbor(x: &UserRecord, config: &AuditConfig) -> Result<UserRecord> {
    let p = sample_projection(x.dim(), config.k, audit_matrix_seed(config.seed))?;
    x.with_flipped(p.argmax_row())
}

fn audit_matrix_seed(seed: u64) -> u64 {
    derive_seed(seed, rng::TAG_MATRIX, 0)
}

type Losses = (Vec<f64>, Option<f64>, Option<f64>);

fn projection_losses(x: &UserRecord, x_neighbor: &UserRecord, config: &AuditConfig) -> Result<Losses> {
    let p = sample_projection(x.dim(), config.k, audit_matrix_seed(config.seed))?;
    let sigma = calibrate_sigma(p.row_sensitivity(), &config.budget)?.sigma() * config.noise_scale;
    let noise = NoiseParams::new(sigma)?;
    if sigma == 0.0 {
        return Err(Error::InvalidParameter("projection audit needs sigma > 0".into()));
    }
    let center = project(x, &p)?;
    let other = project(x_neighbor, &p)?;
    let noise_seed = derive_seed(config.seed, rng::TAG_NOISE, 0);
    let two_var = 2.0 * sigma * sigma;
    let losses = (0..config.n_samples as u64)
        .into_par_iter()
        .map(|s| {
            let y = perturb(&center, noise, noise_seed, s);
            let to_x: f64 = y.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
            let to_neighbor: f64 = y.iter().zip(&other).map(|(a, b)| (a - b).powi(2)).sum();
            (to_neighbor - to_x) / two_var
        })
        .collect();

    // loss ~ N(s^2 / (2 sigma^2), s^2 / sigma^2) with s = ||x'P - xP||.
    let shift: f64 = center
        .iter()
        .zip(&other)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let mean = shift * shift / two_var;
    let sd = shift / sigma;
    let analytic = normal_sf((config.budget.epsilon() - mean) / sd);
    Ok((losses, Some(analytic), Some(sigma)))
}

fn rr_losses(x: &UserRecord, x_neighbor: &UserRecord, config: &AuditConfig) -> Result<Vec<f64>> {
    let params = RRParams::new(config.budget.epsilon())?;
    let (ln_keep, ln_flip) = (params.p_keep().ln(), params.p_flip().ln());
    let seed = derive_seed(config.seed, rng::TAG_RR, 0);
    let log_lik = |input: &[u8], out: &[u8]| -> f64 {
        input
            .iter()
            .zip(out)
            .map(|(a, b)| if a == b { ln_keep } else { ln_flip })
            .sum()
    };
    // Bits other than the differing one contribute identically to both terms.
    let j = x
        .bits()
        .iter()
        .zip(x_neighbor.bits())
        .position(|(a, b)| a != b)
        .expect("neighbors differ");
    Ok((0..config.n_samples as u64)
        .into_par_iter()
        .map(|s| {
            let out = rr_perturb_bits(x.bits(), params, seed, s);
            log_lik(&x.bits()[j..=j], &out[j..=j]) - log_lik(&x_neighbor.bits()[j..=j], &out[j..=j])
        })
        .collect())
}

fn matrix_losses(x: &UserRecord, x_neighbor: &UserRecord, config: &AuditConfig) -> Result<Vec<f64>> {
    let mut records = vec![x.clone()];
    let mut neighbors = vec![x_neighbor.clone()];
    for i in 0..config.matrix_peers {
        let peer = random_record(
            format!("peer{i}"),
            x.dim(),
            derive_seed(config.seed, rng::TAG_PEERS, i as u64),
        )?;
        records.push(peer.clone());
        neighbors.push(peer);
    }
    let dataset = Dataset::from_records(records)?;
    let neighbor_set = Dataset::from_records(neighbors)?;
    let n = dataset.len();
    let scale = laplace_scale(n, config.budget.epsilon())?;
    let truth = matrix_publish_noiseless(&dataset);
    let truth_neighbor = matrix_publish_noiseless(&neighbor_set);
    let seed = derive_seed(config.seed, rng::TAG_LAPLACE, 0);
    (0..config.n_samples as u64)
        .into_par_iter()
        .map(|s| {
            let y = matrix_publish(&dataset, config.budget.epsilon(), derive_seed(seed, 0, s))?;
            let mut loss = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let v = y.get(i, j);
                    let idx = i * n + j;
                    loss += ((v - truth_neighbor[idx]).abs() - (v - truth[idx]).abs()) / scale;
                }
            }
            Ok(loss)
        })
        .collect()
}

fn matrix_publish_noiseless(dataset: &Dataset) -> Vec<f64> {
    let r = dataset.records();
    let n = r.len();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = crate::sketch::hamming(r[i].bits(), r[j].bits()) as f64;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(eps: f64, delta: f64) -> PrivacyBudget {
        PrivacyBudget::new(eps, delta).unwrap()
    }

    fn x(d: usize) -> UserRecord {
        random_record("x", d, 17).unwrap()
    }

    #[test]
    fn rejects_non_neighbors() {
        let a = x(8);
        let cfg = AuditConfig::new(Mechanism::RandomizedResponse, budget(1.0, 0.01), 10, 1);
        assert!(dp_audit(&a, &a, &cfg).is_err());
        let far = a.with_flipped(0).unwrap().with_flipped(1).unwrap();
        assert!(dp_audit(&a, &far, &cfg).is_err());
    }

    #[test]
    fn rr_loss_is_exactly_plus_minus_epsilon() {
        let a = x(16);
        for eps in [0.3, 1.0, 2.5] {
            let cfg = AuditConfig::new(Mechanism::RandomizedResponse, budget(eps, 0.01), 2_000, 3);
            let r = dp_audit(&a, &a.with_flipped(5).unwrap(), &cfg).unwrap();
            assert_eq!(r.violations, 0);
            assert!(r.passed);
            assert!((r.max_loss - eps).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_loss_bounded() {
        let a = x(12);
        let cfg = AuditConfig::new(Mechanism::MatrixLaplace, budget(0.7, 0.01), 2_000, 5);
        let r = dp_audit(&a, &a.with_flipped(2).unwrap(), &cfg).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_loss <= 0.7 * (1.0 + 1e-9));
    }

    #[test]
    fn more_noise_fewer_violations() {
        let a = x(32);
        let mut cfg = AuditConfig::new(Mechanism::Projection, budget(1.0, 0.05), 100_000, 8);
        cfg.k = 4;
        let nb = worst_case_neighbor(&a, &cfg).unwrap();
        let calibrated = dp_audit(&a, &nb, &cfg).unwrap();
        cfg.noise_scale = 2.0;
        let doubled = dp_audit(&a, &nb, &cfg).unwrap();
        assert!(doubled.empirical_violation_rate < calibrated.empirical_violation_rate);
        assert!(doubled.analytic_violation_rate < calibrated.analytic_violation_rate);
        assert!(calibrated.passed);
    }
}
