use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::gen_pair_at_distance;
use crate::rng::{self, derive_seed};
use crate::sketch::{estimate_sq_distance, publish_with, Dataset, Mechanism, PrivacyBudget, PublishOptions};

use super::matrix::{laplace_scale, sample_laplace};
use super::rr::{rr_estimate_distance, rr_perturb, RRParams};

/// Parameters of a mean-squared-error sweep over true Hamming distances.
#[derive(Debug, Clone)]
pub struct MseConfig {
    pub mechanisms: Vec<Mechanism>,
    pub d: usize,
    /// Sketch dimension for the projection mechanism.
    pub k: usize,
    pub budget: PrivacyBudget,
    pub distance_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Multiplier on the calibrated projection sigma; 0 gives noiseless sketches.
    pub noise_scale: f64,
    /// Number of users assumed by the matrix mechanism (sets its noise scale).
    pub population: usize,
}

/// One cell of the sweep. `mse = bias^2 + variance` over the collected samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub mechanism: Mechanism,
    pub h: usize,
    pub trials: usize,
    pub mse: f64,
    pub bias: f64,
    pub variance: f64,
}

/// For every `h` in the grid and every mechanism, draws `trials` fresh pairs
/// at exact distance `h`, runs the mechanism end to end with fresh
/// randomness, and summarizes the estimation error.
///
/// Trial `t` at grid position `g` derives all of its seeds from
/// `(seed, g * trials + t)`, so mechanisms see the same pairs.
pub fn compare_mse(config: &MseConfig) -> Result<Vec<MseRow>> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if let Some(&h) = config.distance_grid.iter().find(|&&h| h > config.d) {
        return Err(Error::InvalidParameter(format!(
            "grid distance {h} exceeds dimension {}",
            config.d
        )));
    }
    let mut rows = Vec::new();
    for (g, &h) in config.distance_grid.iter().enumerate() {
        for &mechanism in &config.mechanisms {
            let estimates = (0..config.trials)
                .into_par_iter()
                .map(|t| run_trial(config, mechanism, h, (g * config.trials + t) as u64))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(summarize(mechanism, h, &estimates));
        }
    }
    Ok(rows)
}

fn run_trial(config: &MseConfig, mechanism: Mechanism, h: usize, trial: u64) -> Result<f64> {
    let pair_seed = derive_seed(config.seed, rng::TAG_PAIR, trial);
    let (a, b) = gen_pair_at_distance(config.d, h, pair_seed)?;
    match mechanism {
        Mechanism::Projection => {
            let dataset = Dataset::from_records(vec![a, b])?;
            let options = PublishOptions {
                noise_scale: config.noise_scale,
                attribute_names: None,
            };
            let bundle = publish_with(
                &dataset,
                config.k,
                config.budget,
                derive_seed(config.seed, rng::TAG_MATRIX, trial),
                derive_seed(config.seed, rng::TAG_NOISE, trial),
                &options,
            )?;
            Ok(estimate_sq_distance(&bundle.sketches[0], &bundle.sketches[1], bundle.noise)?.value)
        }
        Mechanism::RandomizedResponse => {
            let params = RRParams::new(config.budget.epsilon())?;
            let seed = derive_seed(config.seed, rng::TAG_RR, trial);
            let ra = rr_perturb(&a, params, seed, 0);
            let rb = rr_perturb(&b, params, seed, 1);
            Ok(rr_estimate_distance(&ra, &rb, params)?.value)
        }
        Mechanism::MatrixLaplace => {
            // The published entry for this pair is truth plus one Laplace draw
            // at the population-wide scale.
            let scale = laplace_scale(config.population, config.budget.epsilon())?;
            let mut rng = rng::seeded(derive_seed(config.seed, rng::TAG_LAPLACE, trial));
            Ok(h as f64 + sample_laplace(&mut rng, scale))
        }
    }
}

fn summarize(mechanism: Mechanism, h: usize, estimates: &[f64]) -> MseRow {
    let n = estimates.len() as f64;
    let truth = h as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let variance = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    let mse = estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / n;
    MseRow {
        mechanism,
        h,
        trials: estimates.len(),
        mse,
        bias: mean - truth,
        variance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(mechanisms: Vec<Mechanism>, grid: Vec<usize>, noise_scale: f64) -> MseConfig {
        MseConfig {
            mechanisms,
            d: 64,
            k: 8,
            budget: PrivacyBudget::new(1.0, 1e-5).unwrap(),
            distance_grid: grid,
            trials: 200,
            seed: 12,
            noise_scale,
            population: 100,
        }
    }

    #[test]
    fn zero_distance_noiseless_projection_is_exact() {
        let rows = compare_mse(&config(vec![Mechanism::Projection], vec![0], 0.0)).unwrap();
        assert_eq!(rows[0].mse, 0.0);
    }

    #[test]
    fn mse_dominates_squared_bias() {
        let all = vec![
            Mechanism::Projection,
            Mechanism::RandomizedResponse,
            Mechanism::MatrixLaplace,
        ];
        let rows = compare_mse(&config(all, vec![0, 5, 30, 64], 1.0)).unwrap();
        assert_eq!(rows.len(), 12);
        for r in rows {
            assert!(r.mse >= r.bias * r.bias);
            let recomposed = r.bias * r.bias + r.variance;
            assert!((r.mse - recomposed).abs() <= 1e-9 * r.mse.max(1.0), "{r:?}");
        }
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(compare_mse(&config(vec![Mechanism::Projection], vec![65], 1.0)).is_err());
        let mut c = config(vec![Mechanism::Projection], vec![1], 1.0);
        c.trials = 0;
        assert!(compare_mse(&c).is_err());
    }

    #[test]
    fn reproducible() {
        let c = config(
            vec![Mechanism::Projection, Mechanism::RandomizedResponse],
            vec![3, 40],
            1.0,
        );
        assert_eq!(compare_mse(&c).unwrap(), compare_mse(&c).unwrap());
    }
}
