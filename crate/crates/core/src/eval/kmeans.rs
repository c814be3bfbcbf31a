//! Lloyd's k-means with k-means++ seeding over dense `f64` points.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::sketch::{Dataset, PublishedBundle};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub clusters: usize,
    pub max_iters: usize,
    /// Independent k-means++ restarts; the lowest final inertia wins.
    pub n_init: usize,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(clusters: usize, seed: u64) -> Self {
        Self {
            clusters,
            max_iters: 100,
            n_init: 4,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Lloyd update steps performed.
    pub iterations: usize,
    /// Inertia after each assignment step; non-increasing.
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Clusters `points` (all of equal length). Restart `r` seeds from
/// substream `r` of `config.seed`.
pub fn kmeans(points: &[Vec<f64>], config: &KMeansConfig) -> Result<KMeansResult> {
    let n = points.len();
    if config.clusters == 0 {
        return Err(Error::InvalidParameter("cluster count must be >= 1".into()));
    }
    if config.clusters > n {
        return Err(Error::InvalidParameter(format!(
            "cluster count {} exceeds population {n}",
            config.clusters
        )));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: p.len(),
        });
    }
    let mut best: Option<KMeansResult> = None;
    for run in 0..config.n_init.max(1) {
        let mut rng = rng::substream(config.seed, run as u64);
        let result = lloyd(points, config.clusters, config.max_iters, &mut rng);
        if best.as_ref().is_none_or(|b| result.inertia < b.inertia) {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one run"))
}

fn lloyd<R: Rng>(points: &[Vec<f64>], c: usize, max_iters: usize, rng: &mut R) -> KMeansResult {
    let mut centers = plus_plus_init(points, c, rng);
    let (mut assignments, mut inertia) = assign(points, &centers);
    let mut trace = vec![inertia];
    let mut iterations = 0;
    for _ in 0..max_iters {
        centers = update_centers(points, &assignments, centers);
        let (next, next_inertia) = assign(points, &centers);
        iterations += 1;
        debug_assert!(
            next_inertia <= inertia * (1.0 + 1e-12) + 1e-12,
            "inertia increased: {inertia} -> {next_inertia}"
        );
        trace.push(next_inertia);
        inertia = next_inertia;
        let stable = next == assignments;
        assignments = next;
        if stable {
            break;
        }
    }
    KMeansResult {
        assignments,
        centers,
        inertia,
        iterations,
        inertia_trace: trace,
    }
}

fn plus_plus_init<R: Rng>(points: &[Vec<f64>], c: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points[first].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < c {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // Every remaining point coincides with a center.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centers.push(points[pick].clone());
        let newest = centers.last().expect("just pushed");
        for (w, p) in nearest.iter_mut().zip(points) {
            *w = w.min(sq_dist(p, newest));
        }
    }
    centers
}

fn assign(points: &[Vec<f64>], centers: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let assignments = points
        .iter()
        .map(|p| {
            let (best, dist) = centers
                .iter()
                .enumerate()
                .map(|(j, c)| (j, sq_dist(p, c)))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            inertia += dist;
            best
        })
        .collect();
    (assignments, inertia)
}

/// Means of assigned points; an empty cluster keeps its previous center.
fn update_centers(points: &[Vec<f64>], assignments: &[usize], old: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; old.len()];
    let mut counts = vec![0usize; old.len()];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .zip(old)
        .map(|((sum, count), prev)| {
            if count == 0 {
                prev
            } else {
                sum.into_iter().map(|s| s / count as f64).collect()
            }
        })
        .collect()
}

/// k-means directly on the published sketch vectors.
pub fn kmeans_on_sketches(bundle: &PublishedBundle, config: &KMeansConfig) -> Result<KMeansResult> {
    let points: Vec<Vec<f64>> = bundle.sketches.iter().map(|s| s.values.clone()).collect();
    kmeans(&points, config)
}

/// k-means on the raw binary vectors, as a non-private reference.
pub fn kmeans_on_records(dataset: &Dataset, config: &KMeansConfig) -> Result<KMeansResult> {
    let points: Vec<Vec<f64>> = dataset
        .records()
        .iter()
        .map(|r| r.bits().iter().map(|&b| f64::from(b)).collect())
        .collect();
    kmeans(&points, config)
}
