use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map};

use super::{fit_tree, TrainConfig, TrainError};
use crate::dataset::Dataset;
use crate::ensemble::{DecisionTree, TreeEnsemble};

/// Bagged random forest over every row of `d`.
///
/// Tree `i` draws from its own generator seeded with `seed + i`, so trees can
/// be fit in parallel and the result does not depend on scheduling.
pub fn fit_forest(d: &Dataset, cfg: &TrainConfig) -> Result<TreeEnsemble, TrainError> {
    cfg.validate()?;
    let classes = d.class_schema()?;
    let n = d.n_rows();
    if n == 0 {
        return Err(TrainError::EmptyRows);
    }
    let all: Vec<usize> = (0..n).collect();
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            let rows = if cfg.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { all.clone() };
            fit_tree(d, &rows, cfg, &mut rng)
        })
        .collect::<Result<Vec<DecisionTree>, TrainError>>()?;

    let mut metadata = Map::new();
    metadata.insert("source".into(), json!("dpg-core random forest"));
    metadata.insert("seed".into(), json!(cfg.seed));
    metadata.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    metadata.insert("training_rows".into(), json!(n));
    Ok(TreeEnsemble::new(d.features().clone(), classes, trees, metadata)?)
}
