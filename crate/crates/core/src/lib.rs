//! Differentially private distance sketches for binary user data.
//!
//! Each user's `d`-bit vector `x` is published as `xP + noise`, where `P` is
//! a public `d x k` Gaussian projection and the noise is Gaussian with sigma
//! calibrated to the largest row norm of `P`. Squared Euclidean distances
//! between users are recovered without bias from the published sketches.
//!
//! The crate also carries two comparison mechanisms (per-bit randomized
//! response and a Laplace-perturbed distance matrix), an evaluation harness
//! (planted clusters, k-means, nearest-neighbor recall, empirical privacy
//! audits) and the on-disk formats used by the command-line tool.
//!
//! ```
//! use dpsketch::{estimate_sq_distance, publish, Dataset, PrivacyBudget, UserRecord};
//!
//! let data = Dataset::from_records(vec![
//!     UserRecord::new("a", vec![1, 0, 1, 1, 0, 0, 1, 0])?,
//!     UserRecord::new("b", vec![1, 1, 0, 1, 0, 0, 1, 1])?,
//! ])?;
//! let bundle = publish(&data, 4, PrivacyBudget::new(1.0, 1e-5)?, 7, 8)?;
//! let est = estimate_sq_distance(&bundle.sketches[0], &bundle.sketches[1], bundle.noise)?;
//! assert!(est.value.is_finite());
//! # Ok::<(), dpsketch::Error>(())
//! ```

pub mod baselines;
mod error;
pub mod eval;
pub mod io;
pub mod rng;
pub mod sketch;

pub use error::{Error, Result};
pub use sketch::{
    attribute_query_distance, calibrate_sigma, estimate_clamped, estimate_sq_distance, perturb, project, project_bits,
    publish, publish_with, sample_projection, Calibration, CalibrationRule, Dataset, DistanceEstimate, Mechanism,
    NoiseParams, PerturbedSketch, PrivacyBudget, ProjectionMatrix, PublishOptions, PublishedBundle, UserRecord,
};
