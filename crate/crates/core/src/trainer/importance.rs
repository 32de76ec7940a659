use super::TrainError;
use crate::dataset::Dataset;
use crate::ensemble::{DecisionTree, TreeEnsemble, TreeNode};

/// Mean decrease in Gini impurity per feature, normalized to sum to 1.
///
/// Node class counts are recomputed by pushing every row of `d` through each
/// tree. A split on feature `f` reaching `n_t` of `N` rows contributes
/// `(n_t * G_t - n_l * G_l - n_r * G_r) / N`. Contributions are summed over
/// all trees before normalizing. Returns all zeros when no split ever
/// separates a labelled row.
pub fn feature_importance_mdi(m: &TreeEnsemble, d: &Dataset) -> Result<Vec<f64>, TrainError> {
    let p = m.features().len();
    if d.n_features() != p {
        return Err(TrainError::FeatureCount { expected: p, got: d.n_features() });
    }
    let labels = d.labels().ok_or(TrainError::Unlabeled)?;
    let k = m.classes().len();
    let mut importance = vec![0.0; p];
    for tree in m.trees() {
        let counts = node_counts(tree, d, labels, k)?;
        for (id, node) in tree.nodes.iter().enumerate() {
            if let TreeNode::Split { feature, left, right, .. } = node {
                let decrease =
                    weighted_gini(&counts[id]) - weighted_gini(&counts[*left]) - weighted_gini(&counts[*right]);
                importance[*feature] += decrease.max(0.0);
            }
        }
    }
    let total: f64 = importance.iter().sum();
    if total > 0.0 {
        importance.iter_mut().for_each(|v| *v /= total);
    }
    Ok(importance)
}

/// `n * Gini(counts)`.
fn weighted_gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    n as f64 - sq / n as f64
}

fn node_counts(tree: &DecisionTree, d: &Dataset, labels: &[usize], k: usize) -> Result<Vec<Vec<usize>>, TrainError> {
    let mut counts = vec![vec![0usize; k]; tree.nodes.len()];
    for (row, &label) in d.rows().zip(labels) {
        let leaf = tree.walk(row, |node, _| counts[node][label] += 1)?;
        counts[leaf][label] += 1;
    }
    Ok(counts)
}
