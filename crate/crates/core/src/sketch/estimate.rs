use crate::error::{Error, Result};

use super::projection::project_bits;
use super::types::{DistanceEstimate, Mechanism, NoiseParams, PerturbedSketch, ProjectionMatrix};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Unbiased squared-distance estimate `||a - b||^2 - 2 k sigma^2`.
///
/// Both sketches carry independent noise, which inflates the expected
/// squared distance by `2 k sigma^2`. The result may be negative.
pub fn estimate_sq_distance(a: &PerturbedSketch, b: &PerturbedSketch, noise: NoiseParams) -> Result<DistanceEstimate> {
    if a.k() != b.k() {
        return Err(Error::DimensionMismatch {
            expected: a.k(),
            actual: b.k(),
        });
    }
    let k = a.k() as f64;
    Ok(DistanceEstimate {
        value: sq_dist(&a.values, &b.values) - 2.0 * k * noise.variance(),
        mechanism: Mechanism::Projection,
    })
}

/// [`estimate_sq_distance`] floored at zero, for algorithms that need a metric-like input.
pub fn estimate_clamped(a: &PerturbedSketch, b: &PerturbedSketch, noise: NoiseParams) -> Result<f64> {
    Ok(estimate_sq_distance(a, b, noise)?.clamped())
}

/// Squared distance from a user's sketch to a public query vector `q`,
/// projected with the same `P`. Only the sketch is noisy, so the
/// correction is `k sigma^2`.
pub fn attribute_query_distance(
    y: &PerturbedSketch,
    q: &[u8],
    p: &ProjectionMatrix,
    noise: NoiseParams,
) -> Result<f64> {
    if y.k() != p.k() {
        return Err(Error::DimensionMismatch {
            expected: p.k(),
            actual: y.k(),
        });
    }
    let qp = project_bits(q, p)?;
    Ok(sq_dist(&y.values, &qp) - p.k() as f64 * noise.variance())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::projection::sample_projection;

    fn sk(values: Vec<f64>) -> PerturbedSketch {
        PerturbedSketch {
            user_id: "u".into(),
            values,
        }
    }

    #[test]
    fn identical_sketches_without_noise() {
        let a = sk(vec![0.3, -1.2, 4.0]);
        let e = estimate_sq_distance(&a, &a, NoiseParams::zero()).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.mechanism, Mechanism::Projection);
    }

    #[test]
    fn symmetric() {
        let a = sk(vec![0.3, -1.2, 4.0]);
        let b = sk(vec![-2.7, 0.1, 3.3]);
        let n = NoiseParams::new(0.7).unwrap();
        assert_eq!(
            estimate_sq_distance(&a, &b, n).unwrap().value,
            estimate_sq_distance(&b, &a, n).unwrap().value
        );
    }

    #[test]
    fn correction_and_clamp() {
        let a = sk(vec![1.0, 1.0]);
        let n = NoiseParams::new(1.5).unwrap();
        // identical sketches: raw estimate is exactly -2 k sigma^2
        let raw = estimate_sq_distance(&a, &a, n).unwrap().value;
        assert_eq!(raw, -2.0 * 2.0 * 2.25);
        assert_eq!(estimate_clamped(&a, &a, n).unwrap(), 0.0);

        let b = sk(vec![1.0 + 7.3f64.sqrt(), 1.0]);
        let pass = estimate_clamped(&a, &b, NoiseParams::zero()).unwrap();
        assert!((pass - 7.3).abs() < 1e-12);
    }

    #[test]
    fn mismatched_k() {
        let n = NoiseParams::zero();
        assert!(matches!(
            estimate_sq_distance(&sk(vec![1.0]), &sk(vec![1.0, 2.0]), n),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn query_against_zero_vector_is_norm() {
        let p = sample_projection(6, 3, 2).unwrap();
        let y = sk(vec![1.0, 2.0, -2.0]);
        let n = NoiseParams::new(0.5).unwrap();
        let got = attribute_query_distance(&y, &[0; 6], &p, n).unwrap();
        assert!((got - (9.0 - 3.0 * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn query_against_own_vector_without_noise() {
        let p = sample_projection(6, 3, 2).unwrap();
        let x = [1, 0, 1, 1, 0, 0];
        let y = sk(project_bits(&x, &p).unwrap());
        assert_eq!(attribute_query_distance(&y, &x, &p, NoiseParams::zero()).unwrap(), 0.0);
        assert!(attribute_query_distance(&y, &x[..5], &p, NoiseParams::zero()).is_err());
    }
}
