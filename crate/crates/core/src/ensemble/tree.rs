use std::collections::BTreeSet;

use thiserror::Error;

use super::predicate::{canonical_predicate, CanonicalizationPolicy, Condition, Decision, Predicate, Threshold};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraversalError {
    #[error("sample has {got} features, model expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("feature {feature} has non-finite value {value}")]
    NonFinite { feature: usize, value: f64 },
    #[error("malformed tree at node {node}")]
    Malformed { node: usize },
}

/// Test applied at a split. The left child receives samples for which the
/// test holds (`x <= threshold`, or `x` in the value set).
#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule {
    Threshold(f64),
    Values(BTreeSet<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split { feature: usize, rule: SplitRule, left: usize, right: usize },
    Leaf { class: usize },
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }
}

/// A binary decision tree. Node ids are positions in `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub root: usize,
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn leaf(class: usize) -> Self {
        DecisionTree { root: 0, nodes: vec![TreeNode::Leaf { class }] }
    }

    /// One split on `feature <= threshold` with two leaves.
    pub fn stump(feature: usize, threshold: f64, left_class: usize, right_class: usize) -> Self {
        DecisionTree {
            root: 0,
            nodes: vec![
                TreeNode::Split { feature, rule: SplitRule::Threshold(threshold), left: 1, right: 2 },
                TreeNode::Leaf { class: left_class },
                TreeNode::Leaf { class: right_class },
            ],
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            if d > self.nodes.len() {
                break;
            }
            match self.nodes.get(id) {
                Some(TreeNode::Split { left, right, .. }) => {
                    stack.push((*left, d + 1));
                    stack.push((*right, d + 1));
                }
                _ => best = best.max(d),
            }
        }
        best
    }

    /// Walks from the root to a leaf, calling `visit(node, went_left)` at every
    /// split. Returns the leaf id.
    pub(crate) fn walk(&self, x: &[f64], mut visit: impl FnMut(usize, bool)) -> Result<usize, TraversalError> {
        let mut id = self.root;
        // A valid tree never revisits a node; the bound guards malformed input.
        for _ in 0..=self.nodes.len() {
            match self.nodes.get(id) {
                None => return Err(TraversalError::Malformed { node: id }),
                Some(TreeNode::Leaf { .. }) => return Ok(id),
                Some(TreeNode::Split { feature, rule, left, right }) => {
                    let value = *x.get(*feature).ok_or(TraversalError::Malformed { node: id })?;
                    if !value.is_finite() {
                        return Err(TraversalError::NonFinite { feature: *feature, value });
                    }
                    let goes_left = match rule {
                        SplitRule::Threshold(t) => value <= *t,
                        SplitRule::Values(set) => Condition::In(set.clone()).holds(value),
                    };
                    visit(id, goes_left);
                    id = if goes_left { *left } else { *right };
                }
            }
        }
        Err(TraversalError::Malformed { node: id })
    }

    /// Class index of the leaf reached by `x`.
    pub fn predict(&self, x: &[f64]) -> Result<usize, TraversalError> {
        let leaf = self.walk(x, |_, _| {})?;
        match self.nodes[leaf] {
            TreeNode::Leaf { class } => Ok(class),
            TreeNode::Split { .. } => Err(TraversalError::Malformed { node: leaf }),
        }
    }

    /// The predicate satisfied when leaving split `node` on the given side,
    /// before canonicalization. `None` for leaves or non-finite thresholds.
    pub fn branch_predicate(&self, node: usize, left: bool) -> Option<Predicate> {
        let TreeNode::Split { feature, rule, .. } = self.nodes.get(node)? else {
            return None;
        };
        let condition = match (rule, left) {
            (SplitRule::Threshold(t), true) => Condition::Le(Threshold::new(*t)?),
            (SplitRule::Threshold(t), false) => Condition::Gt(Threshold::new(*t)?),
            (SplitRule::Values(s), true) => Condition::In(s.clone()),
            (SplitRule::Values(s), false) => Condition::NotIn(s.clone()),
        };
        Some(Predicate::Decision(Decision { feature: *feature, condition }))
    }

    /// Records the satisfied predicate at each visited split, then the reached
    /// leaf's class predicate. Thresholds are canonicalized per `policy`.
    pub fn traverse(&self, x: &[f64], policy: &CanonicalizationPolicy) -> Result<Vec<Predicate>, TraversalError> {
        let mut steps = Vec::new();
        let mut bad = None;
        let leaf = self.walk(x, |node, left| match self.branch_predicate(node, left) {
            Some(p) => steps.push(canonical_predicate(&p, policy)),
            None => bad = bad.or(Some(node)),
        })?;
        if let Some(node) = bad {
            return Err(TraversalError::Malformed { node });
        }
        match self.nodes[leaf] {
            TreeNode::Leaf { class } => steps.push(Predicate::Class(class)),
            TreeNode::Split { .. } => return Err(TraversalError::Malformed { node: leaf }),
        }
        Ok(steps)
    }
}

/// Ordered predicates one sample satisfies in one tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTrace {
    pub tree_index: usize,
    pub sample_index: usize,
    steps: Vec<Predicate>,
}

impl PathTrace {
    /// Returns `None` unless `steps` is non-empty, ends in a class predicate
    /// and has only decisions before it.
    pub fn new(tree_index: usize, sample_index: usize, steps: Vec<Predicate>) -> Option<Self> {
        let (last, body) = steps.split_last()?;
        if !last.is_class() || body.iter().any(Predicate::is_class) {
            return None;
        }
        Some(PathTrace { tree_index, sample_index, steps })
    }

    pub fn steps(&self) -> &[Predicate] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn class_index(&self) -> usize {
        self.steps.last().and_then(Predicate::class_index).expect("trace ends in a class")
    }
}

/// Consecutive predicate pairs of a trace, in order. Empty for leaf-only traces.
pub fn trace_edges(trace: &PathTrace) -> Vec<(&Predicate, &Predicate)> {
    trace.steps.windows(2).map(|w| (&w[0], &w[1])).collect()
}
