//! Tree-ensemble data model, portable JSON format, and per-tree traversal.

mod model;
mod predicate;
mod schema;
mod tree;

pub use model::{
    load_ensemble, validate_ensemble, EnsembleDocument, EnsembleError, FeatureEntry, NodeEntry, TreeEnsemble,
    TreeEntry, Violation,
};
pub(crate) use predicate::format_fixed;
pub use predicate::{
    canonical_predicate, round_half_even, CanonicalizationPolicy, Condition, Decision, Operator, Predicate, Threshold,
};
pub use schema::{ClassSchema, FeatureKind, FeatureSchema, SchemaError};
pub use tree::{trace_edges, DecisionTree, PathTrace, SplitRule, TraversalError, TreeNode};
