use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng;

use super::types::{check_dims, max_row_norm, ProjectionMatrix, UserRecord};

/// Samples a `d x k` matrix with iid `N(0, 1/k)` entries, so that
/// `E||xP||^2 = ||x||^2`. Entries are drawn row-major from one seeded stream.
pub fn sample_projection(d: usize, k: usize, seed: u64) -> Result<ProjectionMatrix> {
    check_dims(d, k)?;
    let scale = 1.0 / (k as f64).sqrt();
    let mut rng = rng::seeded(seed);
    let entries: Vec<f64> = (0..d * k)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        })
        .collect();
    let row_sensitivity = max_row_norm(&entries, k);
    Ok(ProjectionMatrix {
        d,
        k,
        entries,
        seed,
        row_sensitivity,
    })
}

/// Computes `xP` for a record.
pub fn project(x: &UserRecord, p: &ProjectionMatrix) -> Result<Vec<f64>> {
    project_bits(x.bits(), p)
}

/// Computes `xP` for a raw 0/1 vector. Only rows with a set bit contribute.
pub fn project_bits(bits: &[u8], p: &ProjectionMatrix) -> Result<Vec<f64>> {
    if bits.len() != p.d() {
        return Err(Error::DimensionMismatch {
            expected: p.d(),
            actual: bits.len(),
        });
    }
    let mut out = vec![0.0; p.k()];
    for (i, &b) in bits.iter().enumerate() {
        match b {
            0 => {}
            1 => {
                for (o, v) in out.iter_mut().zip(p.row(i)) {
                    *o += v;
                }
            }
            other => {
                return Err(Error::InvalidRecord(format!(
                    "non-binary value {other} at attribute {i}"
                )))
            }
        }
    }
    Ok(out)
}
