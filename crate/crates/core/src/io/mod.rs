//! On-disk formats: dataset CSV, binary sketch bundles and CSV reports.

mod bundle;
mod dataset;
mod report;

pub use bundle::{
    bundle_from_bytes, bundle_to_bytes, read_bundle, write_bundle, BundleMetadata, BUNDLE_FORMAT_VERSION, BUNDLE_MAGIC,
};
pub use dataset::{dataset_to_bytes, read_dataset, read_labels, write_dataset, write_labels};
pub use report::{
    audit_report, kmeans_report, knn_report, matrix_report, mse_report, query_report, KMeansRun, Report, TOOL_NAME,
    TOOL_VERSION,
};
