//! Interaction-based feature screening built on the influence score (I-score).
//!
//! The crate covers the full workflow:
//!
//! - [`dataset`]: tabular and text-corpus ingestion, deterministic splits.
//! - [`partition`]: the cell table induced by a subset of discrete variables.
//! - [`influence`]: raw, deviation-form, normalized, and confusion-table I-scores.
//! - [`screening`]: supervised discretization, the Backward Dropping Algorithm,
//!   marginal ranking and the I-score gate.
//! - [`dagger`]: the partition-retention feature built from training local means.
//! - [`metrics`]: confusion tables, rate metrics and tie-aware ROC/AUC.
//! - [`textfeat`]: tokenization, vocabularies and n-gram presence matrices.
//! - [`neural`]: a gated many-to-one recurrent classifier and a one-hidden-layer
//!   feed-forward classifier trained by full-batch gradient descent.
//! - [`simlab`]: the XOR toy simulation and the desk-scale text study.
//!
//! The statistical core (datasets, partitions, scores, screening, dagger maps)
//! is generic over [`Scalar`], so the same code runs in `f64`, `f32`, or exact
//! rational arithmetic. The aliases below name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dagger;
pub mod dataset;
pub mod error;
pub mod influence;
pub mod metrics;
pub mod neural;
pub mod partition;
pub mod report;
pub mod scalar;
pub mod screening;
pub mod seed;
pub mod simlab;
pub mod textfeat;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar used for identity checks.
pub type Exact = num_rational::BigRational;

pub type Dataset = dataset::LabeledDataset<f64>;
pub type ExactDataset = dataset::LabeledDataset<Exact>;
pub type Partitions = partition::PartitionTable<f64>;
pub type ExactPartitions = partition::PartitionTable<Exact>;
pub type IScore = influence::IScoreResult<f64>;
pub type ExactIScore = influence::IScoreResult<Exact>;
pub type Dagger = dagger::DaggerMap<f64>;
pub type Trace = screening::BdaTrace<f64>;
pub type Rule = screening::DiscretizationRule<f64>;
