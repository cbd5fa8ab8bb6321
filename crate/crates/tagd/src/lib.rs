//! Gesture authentication from tri-axial accelerometer data (TAGD):
//! CSV ingestion and synthetic corpora, resampling and statistical
//! feature extraction, a multiclass linear SVM with recursive feature
//! elimination, a from-scratch 1D-CNN classifier, a DC-GAN forger, and
//! poisoning/evasion attack evaluation with accuracy/FAR/FRR reporting.
//!
//! See the `examples/` directory for one runnable example per major
//! capability, and the `tagd` binary for the subcommand pipeline.

pub mod cli;
pub mod cnn;
pub mod data;
pub mod error;
pub mod gan;
pub mod ingest;
pub mod metrics;
pub mod nn;
pub mod preprocess;
pub mod rng;
pub mod svm;

pub use data::{Dataset, FeatureVector, FixedSequence, GestureSample, SplitSpec};
pub use error::{Error, Result};
pub use rng::RandomStream;
