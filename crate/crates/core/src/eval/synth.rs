use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::sketch::{Dataset, UserRecord};

/// Ground-truth clustered binary data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedClusterSpec {
    pub n: usize,
    pub d: usize,
    pub c: usize,
    /// Per-bit probability of flipping away from the centroid, in `[0, 0.5)`.
    pub flip_noise: f64,
    pub seed: u64,
}

impl PlantedClusterSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.c == 0 {
            return Err(Error::InvalidParameter("n, d and c must be >= 1".into()));
        }
        if self.c > self.n {
            return Err(Error::InvalidParameter(format!(
                "cluster count {} exceeds user count {}",
                self.c, self.n
            )));
        }
        if !(0.0..0.5).contains(&self.flip_noise) {
            return Err(Error::InvalidParameter(format!(
                "flip noise must be in [0, 0.5), got {}",
                self.flip_noise
            )));
        }
        Ok(())
    }
}

/// Draws `c` uniform random centroids, deals users round-robin into clusters
/// (then shuffles the labels), and flips each bit of a user's centroid
/// independently with probability `flip_noise`. Users are named `u<i>`.
pub fn gen_planted_clusters(spec: &PlantedClusterSpec) -> Result<(Dataset, Vec<usize>)> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let centroids: Vec<Vec<u8>> = (0..spec.c)
        .map(|_| (0..spec.d).map(|_| rng.random_range(0..=1u8)).collect())
        .collect();
    let mut labels: Vec<usize> = (0..spec.n).map(|i| i % spec.c).collect();
    labels.shuffle(&mut rng);
    let records = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let bits = centroids[label]
                .iter()
                .map(|&b| if rng.random_bool(spec.flip_noise) { b ^ 1 } else { b })
                .collect();
            UserRecord::new(format!("u{i}"), bits)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((Dataset::new(spec.d, records)?, labels))
}

/// Two records (`a`, `b`) at Hamming distance exactly `h`: `a` is uniform,
/// `b` flips a uniformly chosen set of `h` positions.
pub fn gen_pair_at_distance(d: usize, h: usize, seed: u64) -> Result<(UserRecord, UserRecord)> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be >= 1".into()));
    }
    if h > d {
        return Err(Error::InvalidParameter(format!("distance {h} outside [0, {d}]")));
    }
    let mut rng = rng::seeded(seed);
    let a: Vec<u8> = (0..d).map(|_| rng.random_range(0..=1u8)).collect();
    let mut b = a.clone();
    for i in index::sample(&mut rng, d, h) {
        b[i] ^= 1;
    }
    Ok((UserRecord::new("a", a)?, UserRecord::new("b", b)?))
}

/// A uniformly random record.
pub fn random_record(user_id: impl Into<String>, d: usize, seed: u64) -> Result<UserRecord> {
    let mut rng = rng::seeded(seed);
    UserRecord::new(user_id, (0..d).map(|_| rng.random_range(0..=1u8)).collect())
}
