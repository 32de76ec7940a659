//! Desk-scale CART and bagged random-forest training, evaluation and
//! mean-decrease-impurity feature importance.

mod cart;
mod eval;
mod forest;
mod importance;
mod split;

use thiserror::Error;

use crate::dataset::DataError;
use crate::ensemble::{EnsembleError, TraversalError};

pub use cart::{fit_tree, MaxFeatures, TrainConfig};
pub use eval::{evaluate, EvalReport};
pub use forest::fit_forest;
pub use importance::feature_importance_mdi;
pub use split::{train_test_split, SplitReport};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("dataset has no labels")]
    Unlabeled,
    #[error("no rows to fit")]
    EmptyRows,
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    Fraction(f64),
    #[error("model has {expected} features, dataset has {got}")]
    FeatureCount { expected: usize, got: usize },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Traversal(#[from] TraversalError),
}
