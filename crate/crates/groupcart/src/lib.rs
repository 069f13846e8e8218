//! Fairness-aware decision trees and ensembles.
//!
//! The library trains binary classification trees whose split criterion
//! trades information gain on the class attribute (IGC) against information
//! gain on declared protected attributes (IGS). A family of trees spanning
//! the IGC/IGS weight spectrum is filtered down to its Pareto frontier on
//! validation objectives, and the surviving trees vote. On top of that sit
//! the evaluation metrics (performance, group fairness, flip rate), the
//! multi-objective machinery (domination, non-dominated sorting, distance
//! to heaven) and a Scott-Knott statistical ranking of repeated trials.

pub mod cli;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod metrics;
pub mod moo;
pub mod stats;
pub mod tree;

pub use error::{Error, Result};

/// A trained binary classifier that predicts from a feature row.
///
/// `feature_names` fixes the schema: `predict_row` expects values in exactly
/// that order. Alignment against a differently-ordered [`data::Dataset`] is
/// done once via [`data::Dataset::column_indices_for`].
pub trait Predictor {
    fn feature_names(&self) -> &[String];

    /// Predict a label for a row aligned with `feature_names`.
    /// Callers are responsible for alignment; implementations may panic on
    /// rows shorter than the schema.
    fn predict_row(&self, row: &[f64]) -> u8;
}
