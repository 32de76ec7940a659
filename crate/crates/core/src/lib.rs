//! Decision predicate graphs for tree-ensemble classifiers.
//!
//! A trained ensemble is replayed on a dataset; every satisfied split becomes
//! a canonical predicate node and consecutive predicates are linked by
//! weighted edges. The resulting graph supports centrality ranking,
//! community detection and per-class feature constraints.

pub mod constraints;
pub mod dataset;
pub mod dpg;
pub mod ensemble;
pub mod io;
pub mod metrics;
pub mod trainer;

pub use constraints::{
    constraint_match, evaluate_constraints, extract_constraints, reachable_to_class, ClassConstraints, ConstraintError,
    FeatureInterval,
};
pub use dataset::{DataError, Dataset};
pub use dpg::{build_dpg, load_dpg, BuildError, Dpg, DpgEdge, DpgError, Provenance};
pub use ensemble::{load_ensemble, CanonicalizationPolicy, Predicate, TreeEnsemble};
