//! The private projection mechanism: sample a public Gaussian projection,
//! calibrate noise to its row sensitivity, publish perturbed sketches and
//! estimate squared distances from them.

mod estimate;
mod noise;
mod projection;
mod publish;
mod types;

pub use estimate::{attribute_query_distance, estimate_clamped, estimate_sq_distance};
pub use noise::{calibrate_sigma, perturb};
pub use projection::{project, project_bits, sample_projection};
pub use publish::{publish, publish_with, PublishOptions};
pub use types::{
    Calibration, CalibrationRule, Dataset, DistanceEstimate, Mechanism, NoiseParams, PerturbedSketch, PrivacyBudget,
    ProjectionMatrix, PublishedBundle, UserRecord,
};

pub(crate) use types::hamming;
