use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A user identifier plus the private binary attribute vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecord {
    user_id: String,
    bits: Vec<u8>,
}

impl UserRecord {
    /// Builds a record, rejecting empty vectors and entries other than 0/1.
    pub fn new(user_id: impl Into<String>, bits: Vec<u8>) -> Result<Self> {
        let user_id = user_id.into();
        if bits.is_empty() {
            return Err(Error::InvalidDimension(format!("record `{user_id}` has no attributes")));
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidRecord(format!(
                "record `{user_id}` has non-binary value {} at attribute {pos}",
                bits[pos]
            )));
        }
        Ok(Self { user_id, bits })
    }

    pub fn from_bools(user_id: impl Into<String>, bits: &[bool]) -> Result<Self> {
        Self::new(user_id, bits.iter().map(|&b| u8::from(b)).collect())
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    /// Number of ones, which is also the squared Euclidean norm.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Hamming distance, equal to squared Euclidean distance for binary vectors.
    pub fn hamming(&self, other: &UserRecord) -> Result<usize> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(hamming(&self.bits, &other.bits))
    }

    /// Copy of this record with attribute `index` flipped.
    pub fn with_flipped(&self, index: usize) -> Result<UserRecord> {
        if index >= self.dim() {
            return Err(Error::InvalidParameter(format!(
                "attribute {index} out of range for dimension {}",
                self.dim()
            )));
        }
        let mut bits = self.bits.clone();
        bits[index] ^= 1;
        Ok(UserRecord {
            user_id: self.user_id.clone(),
            bits,
        })
    }
}

pub(crate) fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// A rectangular collection of records with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    dim: usize,
    records: Vec<UserRecord>,
}

impl Dataset {
    /// Validates uniform dimension and unique ids. `dim` is required so that
    /// an empty dataset still knows its width.
    pub fn new(dim: usize, records: Vec<UserRecord>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension("dataset dimension must be >= 1".into()));
        }
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: r.dim(),
                });
            }
            if !seen.insert(r.user_id()) {
                return Err(Error::DuplicateUserId(r.user_id().to_string()));
            }
        }
        Ok(Self { dim, records })
    }

    /// Infers the dimension from the first record.
    pub fn from_records(records: Vec<UserRecord>) -> Result<Self> {
        let dim = records.first().ok_or(Error::EmptyDataset)?.dim();
        Self::new(dim, records)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[UserRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<UserRecord> {
        self.records
    }

    pub fn get(&self, user_id: &str) -> Option<&UserRecord> {
        self.records.iter().find(|r| r.user_id() == user_id)
    }
}

/// The public `d x k` projection matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    pub(crate) d: usize,
    pub(crate) k: usize,
    pub(crate) entries: Vec<f64>,
    pub(crate) seed: u64,
    pub(crate) row_sensitivity: f64,
}

impl ProjectionMatrix {
    /// Rebuilds a matrix from stored parts, checking that the recorded
    /// sensitivity matches the entries.
    pub fn from_parts(d: usize, k: usize, entries: Vec<f64>, seed: u64, row_sensitivity: f64) -> Result<Self> {
        check_dims(d, k)?;
        if entries.len() != d * k {
            return Err(Error::DimensionMismatch {
                expected: d * k,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("projection matrix has non-finite entries".into()));
        }
        let recomputed = max_row_norm(&entries, k);
        if recomputed <= 0.0 {
            return Err(Error::Format("projection matrix has zero sensitivity".into()));
        }
        if ((row_sensitivity - recomputed) / recomputed).abs() > 1e-12 {
            return Err(Error::Format(format!(
                "stored row sensitivity {row_sensitivity} disagrees with matrix ({recomputed})"
            )));
        }
        Ok(Self {
            d,
            k,
            entries,
            seed,
            row_sensitivity,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Maximum Euclidean norm over rows: the L2 sensitivity of `x -> xP`
    /// when neighbors differ in one attribute.
    pub fn row_sensitivity(&self) -> f64 {
        self.row_sensitivity
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.row(i).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Index of the row attaining the sensitivity.
    pub fn argmax_row(&self) -> usize {
        (0..self.d)
            .map(|i| (i, self.row_norm(i)))
            .fold(
                (0, f64::NEG_INFINITY),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            )
            .0
    }
}

pub(crate) fn check_dims(d: usize, k: usize) -> Result<()> {
    if d < 1 || k < 1 || k > d {
        return Err(Error::InvalidDimension(format!("need 1 <= k <= d, got d={d}, k={k}")));
    }
    Ok(())
}

pub(crate) fn max_row_norm(entries: &[f64], k: usize) -> f64 {
    entries
        .chunks_exact(k)
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// An `(epsilon, delta)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidBudget(format!("epsilon must be > 0, got {epsilon}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidBudget(format!("delta must be in (0, 1), got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Standard deviation of the per-coordinate Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    sigma: f64,
}

impl NoiseParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { sigma })
    }

    pub fn zero() -> Self {
        Self { sigma: 0.0 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// One user's published sketch `xP + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedSketch {
    pub user_id: String,
    pub values: Vec<f64>,
}

impl PerturbedSketch {
    pub fn k(&self) -> usize {
        self.values.len()
    }
}

/// How sigma was derived from the budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Name of the calibration formula.
    pub rule: CalibrationRule,
    /// Multiplier applied to the calibrated sigma (1 for a normal release).
    pub noise_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationRule {
    /// `sigma = s * sqrt(2 ln(1.25 / delta)) / epsilon`
    ClassicGaussian,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            rule: CalibrationRule::ClassicGaussian,
            noise_scale: 1.0,
        }
    }
}

/// Everything released to a third party, plus the private noise seed when
/// the bundle was produced locally.
#[derive(Debug, Clone, PartialEq)]
pub struct PublishedBundle {
    pub attribute_names: Vec<String>,
    pub projection: ProjectionMatrix,
    pub sketches: Vec<PerturbedSketch>,
    pub noise: NoiseParams,
    pub budget: PrivacyBudget,
    pub calibration: Calibration,
    /// Never serialized. `None` for bundles loaded from disk.
    pub created_with_seed: Option<u64>,
}

impl PublishedBundle {
    pub fn d(&self) -> usize {
        self.projection.d()
    }

    pub fn k(&self) -> usize {
        self.projection.k()
    }

    pub fn sketch(&self, user_id: &str) -> Option<&PerturbedSketch> {
        self.sketches.iter().find(|s| s.user_id == user_id)
    }

    /// Checks the structural invariants: unique ids, shared `k`, finite values.
    pub fn validate(&self) -> Result<()> {
        if self.attribute_names.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                actual: self.attribute_names.len(),
            });
        }
        let mut seen = HashSet::with_capacity(self.sketches.len());
        for s in &self.sketches {
            if s.k() != self.k() {
                return Err(Error::DimensionMismatch {
                    expected: self.k(),
                    actual: s.k(),
                });
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidRecord(format!(
                    "sketch `{}` has non-finite values",
                    s.user_id
                )));
            }
            if !seen.insert(s.user_id.as_str()) {
                return Err(Error::DuplicateUserId(s.user_id.clone()));
            }
        }
        Ok(())
    }
}

/// Which mechanism produced a distance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    Projection,
    RandomizedResponse,
    MatrixLaplace,
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Projection => "projection",
            Mechanism::RandomizedResponse => "rr",
            Mechanism::MatrixLaplace => "matrix",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(Mechanism::Projection),
            "rr" | "randomized-response" => Ok(Mechanism::RandomizedResponse),
            "matrix" | "matrix-laplace" => Ok(Mechanism::MatrixLaplace),
            other => Err(Error::InvalidParameter(format!("unknown mechanism `{other}`"))),
        }
    }
}

/// A squared-distance estimate. Raw estimates may be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEstimate {
    pub value: f64,
    pub mechanism: Mechanism,
}

impl DistanceEstimate {
    pub fn clamped(&self) -> f64 {
        self.value.max(0.0)
    }
}
