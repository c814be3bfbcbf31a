use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::sketch::{estimate_clamped, hamming, Dataset, PerturbedSketch, PublishedBundle};

/// Indices of the `m` smallest entries of `dist`, skipping `self_index`.
/// Ties go to the lower index.
fn nearest(dist: &[f64], self_index: usize, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dist.len()).filter(|&j| j != self_index).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    order.truncate(m);
    order
}

/// Mean over users of `|true m-NN ∩ estimated m-NN| / m`, where true
/// neighbors use Hamming distance on the raw records and estimated neighbors
/// use the clamped sketch estimate.
pub fn knn_recall(dataset: &Dataset, bundle: &PublishedBundle, m: usize) -> Result<f64> {
    let n = dataset.len();
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbor count must be in [1, {}), got {m}",
            n
        )));
    }
    let sketches: Vec<&PerturbedSketch> = dataset
        .records()
        .iter()
        .map(|r| {
            bundle
                .sketch(r.user_id())
                .ok_or_else(|| Error::UnknownUserId(r.user_id().to_string()))
        })
        .collect::<Result<_>>()?;
    let records = dataset.records();
    let mut total = 0.0;
    let mut truth = vec![0.0; n];
    let mut est = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            truth[j] = hamming(records[i].bits(), records[j].bits()) as f64;
            est[j] = estimate_clamped(sketches[i], sketches[j], bundle.noise)?;
        }
        let true_nn: HashSet<usize> = nearest(&truth, i, m).into_iter().collect();
        let hits = nearest(&est, i, m).iter().filter(|j| true_nn.contains(j)).count();
        total += hits as f64 / m as f64;
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{gen_planted_clusters, PlantedClusterSpec};
    use crate::sketch::{estimate_sq_distance, publish, publish_with, PrivacyBudget, PublishOptions, UserRecord};

    fn budget() -> PrivacyBudget {
        PrivacyBudget::new(1.0, 1e-5).unwrap()
    }

    fn small() -> Dataset {
        let spec = PlantedClusterSpec {
            n: 30,
            d: 32,
            c: 3,
            flip_noise: 0.1,
            seed: 4,
        };
        gen_planted_clusters(&spec).unwrap().0
    }

    #[test]
    fn full_neighborhood_is_perfect() {
        let ds = small();
        let b = publish(&ds, 8, budget(), 1, 2).unwrap();
        assert_eq!(knn_recall(&ds, &b, ds.len() - 1).unwrap(), 1.0);
        assert!(knn_recall(&ds, &b, ds.len()).is_err());
        assert!(knn_recall(&ds, &b, 0).is_err());
    }

    #[test]
    fn recall_in_unit_interval() {
        let ds = small();
        let b = publish(&ds, 8, budget(), 1, 2).unwrap();
        let r = knn_recall(&ds, &b, 3).unwrap();
        assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn twins_are_nearest_without_noise() {
        let base = small();
        let mut records = Vec::new();
        for r in base.records() {
            records.push(r.clone());
            records.push(UserRecord::new(format!("{}_twin", r.user_id()), r.bits().to_vec()).unwrap());
        }
        let ds = Dataset::from_records(records).unwrap();
        let opts = PublishOptions {
            noise_scale: 0.0,
            ..Default::default()
        };
        let b = publish_with(&ds, 16, budget(), 5, 6, &opts).unwrap();
        for pair in b.sketches.chunks(2) {
            let raw = estimate_sq_distance(&pair[0], &pair[1], b.noise).unwrap().value;
            assert_eq!(raw, 0.0);
            assert_eq!(estimate_clamped(&pair[0], &pair[1], b.noise).unwrap(), 0.0);
        }
        assert_eq!(knn_recall(&ds, &b, 1).unwrap(), 1.0);
    }
}
