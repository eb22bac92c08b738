//! Classifier accuracy under input corruption.
//!
//! Feature vectors are computed in `f64`, stored in the format under test,
//! hit by one bit flip per test vector, decoded back, and classified.
//! Models are trained on the clean `f64` features; only the stored test
//! inputs pass through the 32-bit representation.

mod bench;
mod classifiers;
mod dataset;
mod features;

pub use bench::{
    fault_sites, run_benchmark, run_fault_bench, BenchConfig, BenchReport, BenchRow, FaultPolicy, FaultSite,
    PreparedSplit, BENCH_CSV_HEADER,
};
pub use classifiers::{train, ClassifierModel, ModelKind, TreeNode};
pub use dataset::{generate_synthetic, parse_dataset_csv, stratified_split, SyntheticSpec, TimeSeriesDataset};
pub use features::{
    extract_features, extract_statistical, extract_wavelet, haar_transform, window_moments, FeatureConfig,
    FeatureSet, FeatureVector, Moments, MomentField,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MlError {
    #[error("window length {window} exceeds signal length {signal}")]
    WindowTooLong { window: usize, signal: usize },
    #[error("stride must be at least 1")]
    ZeroStride,
    #[error("window length {window} is not a multiple of 2^{levels}")]
    LevelsMismatch { window: usize, levels: u32 },
    #[error("training data has {0} class(es); need at least 2")]
    SingleClass(usize),
    #[error("class {0} has no training example")]
    EmptyClass(usize),
    #[error("labels must be dense in 0..{classes}; label {missing} never occurs")]
    SparseLabels { classes: usize, missing: usize },
    #[error("record {record}: {message}")]
    Record { record: usize, message: String },
    #[error("signals differ in length ({first} vs {other}); feature vectors would not align")]
    RaggedSignals { first: usize, other: usize },
    #[error("feature vector has {got} values, model expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("{0}")]
    Config(String),
}
