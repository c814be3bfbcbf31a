use rand::distr::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::sketch::{hamming, Dataset};

/// The full pairwise squared-distance matrix with Laplace noise on every
/// unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyDistanceMatrix {
    pub user_ids: Vec<String>,
    /// Row-major `n x n`, symmetric, zero diagonal.
    pub entries: Vec<f64>,
    pub epsilon: f64,
    pub laplace_scale: f64,
}

impl NoisyDistanceMatrix {
    pub fn n(&self) -> usize {
        self.user_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n() + j]
    }
}

/// Flipping one attribute of one user moves each of that user's `n - 1`
/// distances by exactly 1, so the L1 sensitivity is `n - 1`.
pub fn laplace_scale(n: usize, epsilon: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "matrix mechanism needs at least 2 users, got {n}"
        )));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidBudget(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok((n - 1) as f64 / epsilon)
}

/// One draw from `Laplace(0, scale)` by inversion.
pub fn sample_laplace<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Publishes every pairwise Hamming distance plus `Laplace((n-1)/epsilon)` noise.
/// Pairs are visited in row-major upper-triangle order from a single stream.
pub fn matrix_publish(dataset: &Dataset, epsilon: f64, seed: u64) -> Result<NoisyDistanceMatrix> {
    let n = dataset.len();
    let scale = laplace_scale(n, epsilon)?;
    let records = dataset.records();
    let mut rng = rng::seeded(seed);
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let truth = hamming(records[i].bits(), records[j].bits()) as f64;
            let v = truth + sample_laplace(&mut rng, scale);
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(NoisyDistanceMatrix {
        user_ids: records.iter().map(|r| r.user_id().to_string()).collect(),
        entries,
        epsilon,
        laplace_scale: scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::UserRecord;

    fn ds(rows: &[&[u8]]) -> Dataset {
        Dataset::from_records(
            rows.iter()
                .enumerate()
                .map(|(i, r)| UserRecord::new(format!("u{i}"), r.to_vec()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn needs_two_users() {
        assert!(matrix_publish(&ds(&[&[0, 1]]), 1.0, 0).is_err());
        assert!(matrix_publish(&ds(&[&[0, 1], &[1, 1]]), 0.0, 0).is_err());
    }

    #[test]
    fn symmetric_with_zero_diagonal() {
        let m = matrix_publish(&ds(&[&[0, 1, 1], &[1, 1, 0], &[0, 0, 0], &[1, 1, 1]]), 0.5, 3).unwrap();
        assert_eq!(m.laplace_scale, 6.0);
        for i in 0..4 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..4 {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn one_bit_flip_moves_each_entry_by_one() {
        let rows: [&[u8]; 4] = [&[0, 1, 1, 0], &[1, 1, 0, 0], &[0, 0, 0, 1], &[1, 1, 1, 1]];
        let before = ds(&rows);
        let mut flipped = before.records().to_vec();
        flipped[2] = flipped[2].with_flipped(1).unwrap();
        let after = Dataset::from_records(flipped).unwrap();
        let (b, a) = (before.records(), after.records());
        let mut changed = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                let diff = b[i].hamming(&b[j]).unwrap() as i64 - a[i].hamming(&a[j]).unwrap() as i64;
                assert!(diff.abs() <= 1);
                changed += (diff != 0) as usize;
            }
        }
        assert_eq!(changed, 3);
    }

    #[test]
    fn laplace_mean_absolute_value() {
        let n = 100_000u64;
        let samples: Vec<f64> = (0..n)
            .map(|s| {
                let m = matrix_publish(&ds(&[&[0, 1], &[0, 1]]), 1.0, s).unwrap();
                m.get(0, 1).abs()
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se, "mean |noise| {mean}");
    }
}
