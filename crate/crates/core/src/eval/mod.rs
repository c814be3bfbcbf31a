//! Evaluation harness: synthetic data, downstream tasks on sketches
//! (segmentation, nearest neighbors) and empirical privacy audits.

mod audit;
mod kmeans;
mod knn;
mod metrics;
mod synth;

pub use audit::{allowed_violation_rate, dp_audit, worst_case_neighbor, AuditConfig, AuditReport};
pub use kmeans::{kmeans, kmeans_on_records, kmeans_on_sketches, KMeansConfig, KMeansResult};
pub use knn::knn_recall;
pub use metrics::adjusted_rand_index;
pub use synth::{gen_pair_at_distance, gen_planted_clusters, random_record, PlantedClusterSpec};
