//! The tree-ensemble model and its portable JSON form.
//!
//! JSON layout:
//!
//! ```text
//! {"features":[{"name":..,"kind":"numeric"|"categorical"}],
//!  "classes":["setosa", ...],
//!  "trees":[{"root":0,"nodes":[{"id","kind","feature","threshold","left","right","class"}]}],
//!  "metadata":{...}}
//! ```
//!
//! Split nodes go left when the test holds. Categorical splits carry a
//! `"values"` array in place of `"threshold"`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::predicate::CanonicalizationPolicy;
use super::schema::{ClassSchema, FeatureKind, FeatureSchema};
use super::tree::{DecisionTree, PathTrace, SplitRule, TraversalError, TreeNode};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("cannot read {path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed ensemble JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid ensemble: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// One broken invariant, located by tree and node where applicable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub tree: Option<usize>,
    pub node: Option<i64>,
    pub rule: String,
}

impl Violation {
    fn model(rule: impl Into<String>) -> Self {
        Violation { tree: None, node: None, rule: rule.into() }
    }

    fn tree(tree: usize, rule: impl Into<String>) -> Self {
        Violation { tree: Some(tree), node: None, rule: rule.into() }
    }

    fn node(tree: usize, node: i64, rule: impl Into<String>) -> Self {
        Violation { tree: Some(tree), node: Some(node), rule: rule.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.tree, self.node) {
            (Some(t), Some(n)) => write!(f, "{} at tree {t} node {n}", self.rule),
            (Some(t), None) => write!(f, "{} at tree {t}", self.rule),
            _ => f.write_str(&self.rule),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub name: String,
    pub kind: FeatureKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: i64,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEntry {
    pub root: i64,
    pub nodes: Vec<NodeEntry>,
}

/// Unvalidated wire form of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDocument {
    pub features: Vec<FeatureEntry>,
    #[serde(deserialize_with = "labels_as_strings")]
    pub classes: Vec<String>,
    pub trees: Vec<TreeEntry>,
    #[serde(default)]
    pub metadata: Map<String, Value>,
}

fn labels_as_strings<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<String>, D::Error> {
    use serde::de::Error;
    let raw: Vec<Value> = Vec::deserialize(de)?;
    raw.into_iter()
        .map(|v| match v {
            Value::String(s) => Ok(s),
            Value::Number(n) if n.is_i64() || n.is_u64() => Ok(n.to_string()),
            other => Err(D::Error::custom(format!("class label must be a string or integer, got {other}"))),
        })
        .collect()
}

/// Checks every model invariant; an empty result means the document is valid.
pub fn validate_ensemble(doc: &EnsembleDocument) -> Vec<Violation> {
    let mut out = Vec::new();
    let names: Vec<String> = doc.features.iter().map(|f| f.name.clone()).collect();
    let kinds: Vec<FeatureKind> = doc.features.iter().map(|f| f.kind).collect();
    if let Err(e) = FeatureSchema::new(names, kinds) {
        out.push(Violation::model(e.to_string()));
    }
    if let Err(e) = ClassSchema::new(doc.classes.clone()) {
        out.push(Violation::model(e.to_string()));
    }
    if doc.trees.is_empty() {
        out.push(Violation::model("ensemble has no trees"));
    }
    for (t, tree) in doc.trees.iter().enumerate() {
        validate_tree(t, tree, doc, &mut out);
    }
    out
}

fn validate_tree(t: usize, tree: &TreeEntry, doc: &EnsembleDocument, out: &mut Vec<Violation>) {
    let n = tree.nodes.len();
    if n == 0 {
        out.push(Violation::tree(t, "tree has no nodes"));
        return;
    }
    let in_range = |id: i64| id >= 0 && (id as usize) < n;
    let mut slot: Vec<Option<&NodeEntry>> = vec![None; n];
    for node in &tree.nodes {
        if !in_range(node.id) {
            out.push(Violation::node(t, node.id, format!("node id outside 0..{n}")));
        } else if slot[node.id as usize].is_some() {
            out.push(Violation::node(t, node.id, "duplicate node id"));
        } else {
            slot[node.id as usize] = Some(node);
        }
    }

    for node in &tree.nodes {
        let id = node.id;
        match node.kind.as_str() {
            "leaf" => match node.class {
                None => out.push(Violation::node(t, id, "leaf node missing class")),
                Some(c) if c < 0 || c as usize >= doc.classes.len() => {
                    out.push(Violation::node(t, id, format!("leaf class {c} outside {} classes", doc.classes.len())))
                }
                _ => {}
            },
            "split" => {
                match node.feature {
                    None => out.push(Violation::node(t, id, "split node missing feature")),
                    Some(f) if f < 0 || f as usize >= doc.features.len() => out.push(Violation::node(
                        t,
                        id,
                        format!("split feature {f} outside {} features", doc.features.len()),
                    )),
                    Some(f) => match (doc.features[f as usize].kind, node.threshold, &node.values) {
                        (FeatureKind::Numeric, Some(th), None) if th.is_finite() => {}
                        (FeatureKind::Numeric, Some(_), None) => {
                            out.push(Violation::node(t, id, "split threshold is not finite"))
                        }
                        (FeatureKind::Numeric, _, _) => {
                            out.push(Violation::node(t, id, "numeric split needs a threshold and no value set"))
                        }
                        (FeatureKind::Categorical, None, Some(v)) if !v.is_empty() => {}
                        (FeatureKind::Categorical, _, _) => out.push(Violation::node(
                            t,
                            id,
                            "categorical split needs a non-empty value set and no threshold",
                        )),
                    },
                }
                for (side, child) in [("left", node.left), ("right", node.right)] {
                    match child {
                        None => out.push(Violation::node(t, id, format!("split node missing {side} child"))),
                        Some(c) if !in_range(c) => {
                            out.push(Violation::node(t, id, format!("{side} child {c} does not exist")))
                        }
                        _ => {}
                    }
                }
            }
            other => out.push(Violation::node(t, id, format!("unknown node kind {other:?}"))),
        }
    }

    if !in_range(tree.root) {
        out.push(Violation::tree(t, format!("root {} does not exist", tree.root)));
        return;
    }
    // Iterative DFS: grey = on the current path, black = finished.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut mark = vec![Mark::White; n];
    let mut stack = vec![(tree.root as usize, false)];
    while let Some((id, finished)) = stack.pop() {
        if finished {
            mark[id] = Mark::Black;
            continue;
        }
        match mark[id] {
            Mark::Grey => {
                out.push(Violation::node(t, id as i64, "cycle"));
                continue;
            }
            Mark::Black => {
                out.push(Violation::node(t, id as i64, "node reached by more than one parent"));
                continue;
            }
            Mark::White => {}
        }
        mark[id] = Mark::Grey;
        stack.push((id, true));
        if let Some(node) = slot[id] {
            if node.kind == "split" {
                for child in [node.right, node.left].into_iter().flatten() {
                    if in_range(child) {
                        stack.push((child as usize, false));
                    }
                }
            }
        }
    }
    for (id, m) in mark.iter().enumerate() {
        if *m == Mark::White && slot[id].is_some() {
            out.push(Violation::node(t, id as i64, "node unreachable from root"));
        }
    }
}

/// A validated tree-ensemble classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    features: FeatureSchema,
    classes: ClassSchema,
    trees: Vec<DecisionTree>,
    metadata: Map<String, Value>,
}

impl TreeEnsemble {
    pub fn new(
        features: FeatureSchema,
        classes: ClassSchema,
        trees: Vec<DecisionTree>,
        metadata: Map<String, Value>,
    ) -> Result<Self, EnsembleError> {
        let model = TreeEnsemble { features, classes, trees, metadata };
        let violations = validate_ensemble(&model.to_document());
        if violations.is_empty() {
            Ok(model)
        } else {
            Err(EnsembleError::Invalid(violations))
        }
    }

    pub fn from_document(doc: &EnsembleDocument) -> Result<Self, EnsembleError> {
        let violations = validate_ensemble(doc);
        if !violations.is_empty() {
            return Err(EnsembleError::Invalid(violations));
        }
        let features = FeatureSchema::new(
            doc.features.iter().map(|f| f.name.clone()).collect(),
            doc.features.iter().map(|f| f.kind).collect(),
        )
        .expect("validated");
        let classes = ClassSchema::new(doc.classes.clone()).expect("validated");
        let trees = doc.trees.iter().map(tree_from_entry).collect();
        Ok(TreeEnsemble { features, classes, trees, metadata: doc.metadata.clone() })
    }

    pub fn to_document(&self) -> EnsembleDocument {
        EnsembleDocument {
            features: self
                .features
                .names()
                .iter()
                .zip(self.features.kinds())
                .map(|(name, kind)| FeatureEntry { name: name.clone(), kind: *kind })
                .collect(),
            classes: self.classes.labels().to_vec(),
            trees: self.trees.iter().map(tree_to_entry).collect(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, EnsembleError> {
        let doc: EnsembleDocument = serde_json::from_str(text)?;
        TreeEnsemble::from_document(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("ensemble serializes")
    }

    pub fn features(&self) -> &FeatureSchema {
        &self.features
    }

    pub fn classes(&self) -> &ClassSchema {
        &self.classes
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn metadata(&self) -> &Map<String, Value> {
        &self.metadata
    }

    fn check_width(&self, x: &[f64]) -> Result<(), TraversalError> {
        if x.len() == self.features.len() {
            Ok(())
        } else {
            Err(TraversalError::WidthMismatch { expected: self.features.len(), got: x.len() })
        }
    }

    /// Path of sample `x` through tree `tree_index`.
    pub fn trace(
        &self,
        tree_index: usize,
        sample_index: usize,
        x: &[f64],
        policy: &CanonicalizationPolicy,
    ) -> Result<PathTrace, TraversalError> {
        self.check_width(x)?;
        let tree = &self.trees[tree_index];
        let steps = tree.traverse(x, policy)?;
        PathTrace::new(tree_index, sample_index, steps).ok_or(TraversalError::Malformed { node: tree.root })
    }

    /// Per-class vote counts over all trees.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<usize>, TraversalError> {
        self.check_width(x)?;
        let mut votes = vec![0; self.classes.len()];
        for tree in &self.trees {
            votes[tree.predict(x)?] += 1;
        }
        Ok(votes)
    }

    /// Majority vote; ties go to the lowest class index.
    pub fn predict_majority(&self, x: &[f64]) -> Result<usize, TraversalError> {
        let votes = self.votes(x)?;
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        Ok(best)
    }
}

fn tree_from_entry(entry: &TreeEntry) -> DecisionTree {
    let mut nodes = vec![TreeNode::Leaf { class: 0 }; entry.nodes.len()];
    for n in &entry.nodes {
        nodes[n.id as usize] = if n.kind == "leaf" {
            TreeNode::Leaf { class: n.class.expect("validated") as usize }
        } else {
            let rule = match (&n.threshold, &n.values) {
                (Some(t), _) => SplitRule::Threshold(*t),
                (None, Some(v)) => SplitRule::Values(v.iter().copied().collect::<BTreeSet<_>>()),
                (None, None) => unreachable!("validated split has an operand"),
            };
            TreeNode::Split {
                feature: n.feature.expect("validated") as usize,
                rule,
                left: n.left.expect("validated") as usize,
                right: n.right.expect("validated") as usize,
            }
        };
    }
    DecisionTree { root: entry.root as usize, nodes }
}

fn tree_to_entry(tree: &DecisionTree) -> TreeEntry {
    let nodes = tree
        .nodes
        .iter()
        .enumerate()
        .map(|(id, node)| match node {
            TreeNode::Leaf { class } => NodeEntry {
                id: id as i64,
                kind: "leaf".into(),
                feature: None,
                threshold: None,
                values: None,
                left: None,
                right: None,
                class: Some(*class as i64),
            },
            TreeNode::Split { feature, rule, left, right } => NodeEntry {
                id: id as i64,
                kind: "split".into(),
                feature: Some(*feature as i64),
                threshold: match rule {
                    SplitRule::Threshold(t) => Some(*t),
                    SplitRule::Values(_) => None,
                },
                values: match rule {
                    SplitRule::Values(v) => Some(v.iter().copied().collect()),
                    SplitRule::Threshold(_) => None,
                },
                left: Some(*left as i64),
                right: Some(*right as i64),
                class: None,
            },
        })
        .collect();
    TreeEntry { root: tree.root as i64, nodes }
}

/// Reads and validates a portable ensemble JSON file.
pub fn load_ensemble(path: impl AsRef<Path>) -> Result<TreeEnsemble, EnsembleError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| EnsembleError::Io { path: path.to_path_buf(), source })?;
    TreeEnsemble::from_json(&text)
}
