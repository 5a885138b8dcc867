//! Check-worthiness classification for tweets.
//!
//! Tweets are cleaned ([`preprocess`]), turned into TF-IDF word n-gram
//! vectors ([`features`]), class-balanced with SMOTE ([`balance`]) and fed to
//! a linear SVM ([`svm`]) or a random forest ([`forest`]). [`eval`] scores the
//! predictions and [`experiment`] wires the stages together from a config.

pub mod balance;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod features;
pub mod forest;
pub mod preprocess;
pub mod sparse;
pub mod svm;

pub use corpus::{ClassCounts, ColumnMap, Dataset, Label, LabeledTweet, Language, Split};
pub use error::{Error, Result};
pub use eval::{EvalReport, Prediction};
pub use experiment::{ExperimentConfig, ModelKind, TrainedClassifier};
pub use features::TfIdfModel;
pub use sparse::SparseVector;
