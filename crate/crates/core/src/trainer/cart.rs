//! Greedy CART with Gini impurity on numeric features.
//!
//! Split candidates are midpoints between consecutive distinct sorted values
//! of the rows reaching a node. Among equally good splits the lowest feature
//! index wins, then the lowest threshold.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::dataset::Dataset;
use crate::ensemble::{DecisionTree, SplitRule, TreeNode};

/// Number of features examined per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

impl FromStr for MaxFeatures {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "all" => Ok(MaxFeatures::All),
            other => other
                .parse::<usize>()
                .map(MaxFeatures::Count)
                .map_err(|_| format!("expected sqrt, all or a count, got {other:?}")),
        }
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::Sqrt => f.write_str("sqrt"),
            MaxFeatures::All => f.write_str("all"),
            MaxFeatures::Count(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.n_trees == 0 {
            return Err(TrainError::Config("n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(TrainError::Config("min_samples_split must be at least 2".into()));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(TrainError::Config("max_features must be at least 1".into()));
        }
        Ok(())
    }
}

/// `num / den` kept exact so equal-gain splits compare equal.
///
/// For a partition this is `sum_children sum_k n_ck^2 / n_c`; larger means
/// lower weighted Gini impurity.
#[derive(Debug, Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of_node(counts: &[usize]) -> Self {
        let n: usize = counts.iter().sum();
        let sq: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
        Purity { num: sq, den: n as u128 }
    }

    fn of_split(left_sq: u128, left_n: usize, right_sq: u128, right_n: usize) -> Self {
        let (ln, rn) = (left_n as u128, right_n as u128);
        Purity { num: left_sq * rn + right_sq * ln, den: ln * rn }
    }
}

impl PartialEq for Purity {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Purity {}

impl PartialOrd for Purity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Purity {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    purity: Purity,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        match self.purity.cmp(&other.purity) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (self.feature, self.threshold) < (other.feature, other.threshold),
        }
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a / 2.0 + b / 2.0;
    if m >= a && m < b {
        m
    } else {
        a
    }
}

struct Grower<'a, R: Rng + ?Sized> {
    data: &'a Dataset,
    labels: &'a [usize],
    n_classes: usize,
    cfg: &'a TrainConfig,
    rng: &'a mut R,
    nodes: Vec<TreeNode>,
}

impl<R: Rng + ?Sized> Grower<'_, R> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &r in rows {
            counts[self.labels[r]] += 1;
        }
        counts
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let counts = self.counts(&rows);
        let majority = majority_class(&counts);
        self.nodes.push(TreeNode::Leaf { class: majority });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let capped = self.cfg.max_depth.is_some_and(|m| depth >= m);
        if pure || capped || rows.len() < self.cfg.min_samples_split {
            return id;
        }
        let Some(best) = self.best_split(&rows, &counts) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&r| self.data.row(r)[best.feature] <= best.threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] =
            TreeNode::Split { feature: best.feature, rule: SplitRule::Threshold(best.threshold), left, right };
        id
    }

    fn best_split(&mut self, rows: &[usize], counts: &[usize]) -> Option<Candidate> {
        let n_features = self.data.n_features();
        let wanted = self.cfg.max_features.resolve(n_features);
        let mut order: Vec<usize> = (0..n_features).collect();
        order.shuffle(self.rng);

        let parent = Purity::of_node(counts);
        let mut best: Option<Candidate> = None;
        let mut examined = 0;
        for feature in order {
            if examined == wanted {
                break;
            }
            // Constant features do not count towards the budget.
            let Some(c) = self.scan_feature(rows, counts, feature) else {
                continue;
            };
            examined += 1;
            assert!(c.purity >= parent, "Gini impurity increased by a split");
            if best.as_ref().is_none_or(|b| c.beats(b)) {
                best = Some(c);
            }
        }
        best
    }

    fn scan_feature(&self, rows: &[usize], counts: &[usize], feature: usize) -> Option<Candidate> {
        let mut pairs: Vec<(f64, usize)> = rows.iter().map(|&r| (self.data.row(r)[feature], self.labels[r])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let n = pairs.len();
        let mut left = vec![0usize; self.n_classes];
        let mut right = counts.to_vec();
        let mut left_sq: u128 = 0;
        let mut right_sq: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
        let mut best: Option<Candidate> = None;
        for i in 0..n - 1 {
            let c = pairs[i].1;
            left_sq += 2 * left[c] as u128 + 1;
            right_sq -= 2 * right[c] as u128 - 1;
            left[c] += 1;
            right[c] -= 1;
            let (a, b) = (pairs[i].0, pairs[i + 1].0);
            if a < b {
                let purity = Purity::of_split(left_sq, i + 1, right_sq, n - i - 1);
                if best.is_none_or(|bst| purity > bst.purity) {
                    best = Some(Candidate { purity, feature, threshold: midpoint(a, b) });
                }
            }
        }
        best
    }
}

pub(crate) fn majority_class(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &v) in counts.iter().enumerate() {
        if v > counts[best] {
            best = c;
        }
    }
    best
}

/// Fits one CART tree on `rows` of `d` (repeats allowed, as in a bootstrap).
pub fn fit_tree<R: Rng + ?Sized>(
    d: &Dataset,
    rows: &[usize],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<DecisionTree, TrainError> {
    cfg.validate()?;
    let labels = d.labels().ok_or(TrainError::Unlabeled)?;
    if rows.is_empty() {
        return Err(TrainError::EmptyRows);
    }
    let mut grower = Grower { data: d, labels, n_classes: d.classes().len(), cfg, rng, nodes: Vec::new() };
    grower.grow(rows.to_vec(), 0);
    Ok(DecisionTree { root: 0, nodes: grower.nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::FeatureSchema;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn data(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Dataset {
        let names = (0..rows[0].len()).map(|i| format!("f{i}")).collect();
        Dataset::new(FeatureSchema::numeric(names).unwrap(), rows)
            .unwrap()
            .with_labels(labels, vec!["A".into(), "B".into(), "C".into()])
            .unwrap()
    }

    fn all_features() -> TrainConfig {
        TrainConfig { max_features: MaxFeatures::All, ..TrainConfig::default() }
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn pure_rows_give_a_leaf() {
        let d = data(vec![vec![1.0], vec![2.0], vec![3.0]], vec![2, 2, 2]);
        let t = fit_tree(&d, &[0, 1, 2], &all_features(), &mut rng()).unwrap();
        assert_eq!(t, DecisionTree::leaf(2));
    }

    #[test]
    fn two_points_split_at_midpoint() {
        let d = data(vec![vec![0.0], vec![1.0]], vec![0, 1]);
        let t = fit_tree(&d, &[0, 1], &all_features(), &mut rng()).unwrap();
        assert_eq!(t, DecisionTree::stump(0, 0.5, 0, 1));
    }

    #[test]
    fn max_depth_zero_is_majority_leaf() {
        let d = data(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1, 0, 1]);
        let cfg = TrainConfig { max_depth: Some(0), ..all_features() };
        assert_eq!(fit_tree(&d, &[0, 1, 2], &cfg, &mut rng()).unwrap(), DecisionTree::leaf(1));
    }

    #[test]
    fn majority_ties_go_to_lowest_class() {
        assert_eq!(majority_class(&[2, 3, 3]), 1);
        assert_eq!(majority_class(&[0, 0]), 0);
    }

    #[test]
    fn equal_gain_prefers_lowest_feature() {
        // Both features separate the classes perfectly.
        let d = data(vec![vec![0.0, 10.0], vec![1.0, 20.0]], vec![0, 1]);
        let t = fit_tree(&d, &[0, 1], &all_features(), &mut rng()).unwrap();
        assert_eq!(t, DecisionTree::stump(0, 0.5, 0, 1));
    }

    #[test]
    fn equal_gain_prefers_lowest_threshold() {
        // Splitting at 0.5 or 2.5 isolates one class-B point either way.
        let d = data(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]], vec![1, 0, 0, 1]);
        let cfg = TrainConfig { max_depth: Some(1), ..all_features() };
        let t = fit_tree(&d, &[0, 1, 2, 3], &cfg, &mut rng()).unwrap();
        match &t.nodes[t.root] {
            TreeNode::Split { rule: SplitRule::Threshold(th), .. } => assert_eq!(*th, 0.5),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn identical_rows_with_mixed_labels_stop() {
        let d = data(vec![vec![1.0], vec![1.0]], vec![0, 1]);
        assert_eq!(fit_tree(&d, &[0, 1], &all_features(), &mut rng()).unwrap(), DecisionTree::leaf(0));
    }

    #[test]
    fn fits_training_rows_exactly_without_depth_cap() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i / 7) as f64]).collect();
        let labels: Vec<usize> = (0..40).map(|i| (i * 7 % 3) as usize).collect();
        let d = data(rows, labels.clone());
        let idx: Vec<usize> = (0..40).collect();
        let t = fit_tree(&d, &idx, &all_features(), &mut rng()).unwrap();
        for i in idx {
            assert_eq!(t.predict(d.row(i)).unwrap(), labels[i]);
        }
    }

    #[test]
    fn errors() {
        let d = data(vec![vec![0.0]], vec![0]);
        assert!(matches!(fit_tree(&d, &[], &all_features(), &mut rng()), Err(TrainError::EmptyRows)));
        let bad = TrainConfig { min_samples_split: 1, ..all_features() };
        assert!(matches!(fit_tree(&d, &[0], &bad, &mut rng()), Err(TrainError::Config(_))));
    }

    #[test]
    fn max_features_parsing() {
        assert_eq!("sqrt".parse::<MaxFeatures>().unwrap(), MaxFeatures::Sqrt);
        assert_eq!("3".parse::<MaxFeatures>().unwrap(), MaxFeatures::Count(3));
        assert!("many".parse::<MaxFeatures>().is_err());
        assert_eq!(MaxFeatures::Sqrt.resolve(16), 4);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::Count(9).resolve(4), 4);
    }

    #[test]
    fn purity_comparison_is_exact() {
        assert_eq!(Purity { num: 1, den: 3 }, Purity { num: 2, den: 6 });
        assert!(Purity { num: 2, den: 3 } > Purity { num: 1, den: 2 });
    }
}
