//! Decision predicate graphs.
//!
//! Nodes are canonical predicates, edges count how often one predicate
//! immediately follows another across all (tree, sample) traversals.

mod build;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::ensemble::{Condition, Decision, Operator, Predicate, Threshold};

pub use build::{build_dpg, BuildError};

#[derive(Debug, Error)]
pub enum DpgError {
    #[error("cannot read {path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed DPG JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid DPG: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpgNode {
    pub id: usize,
    pub predicate: Predicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DpgEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: u64,
}

/// Where a graph came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub features: Vec<String>,
    pub classes: Vec<String>,
    pub decimals: u32,
    pub trees: usize,
    pub samples: usize,
    #[serde(default)]
    pub model: Map<String, Value>,
}

impl Provenance {
    /// Number of (tree, sample) traversals behind the graph.
    pub fn traces(&self) -> u64 {
        self.trees as u64 * self.samples as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dpg {
    nodes: Vec<DpgNode>,
    edges: Vec<DpgEdge>,
    source_counts: Vec<u64>,
    provenance: Provenance,
}

impl Dpg {
    /// Assembles a graph from node predicates (ids are positions), edges, and
    /// per-node trace-start counts.
    ///
    /// Rejects duplicate predicates, missing or repeated class nodes, edges
    /// leaving a class node, repeated `(src, dst)` pairs and zero weights.
    /// Edges are stored sorted by `(src, dst)`.
    pub fn from_parts(
        predicates: Vec<Predicate>,
        mut edges: Vec<DpgEdge>,
        source_counts: Vec<u64>,
        provenance: Provenance,
    ) -> Result<Self, DpgError> {
        let invalid = |msg: String| Err(DpgError::Invalid(msg));
        let n = predicates.len();
        if source_counts.len() != n {
            return invalid(format!("{} source counts for {n} nodes", source_counts.len()));
        }
        let mut seen = HashSet::with_capacity(n);
        let mut class_seen = vec![false; provenance.classes.len()];
        for (id, p) in predicates.iter().enumerate() {
            if !seen.insert(p) {
                return invalid(format!("node {id} repeats an earlier predicate"));
            }
            match p {
                Predicate::Class(c) => match class_seen.get_mut(*c) {
                    Some(flag) => *flag = true,
                    None => return invalid(format!("node {id} names unknown class {c}")),
                },
                Predicate::Decision(d) if d.feature >= provenance.features.len() => {
                    return invalid(format!("node {id} names unknown feature {}", d.feature));
                }
                Predicate::Decision(_) => {}
            }
        }
        if let Some(c) = class_seen.iter().position(|s| !s) {
            return invalid(format!("class {c} has no node"));
        }
        edges.sort_unstable();
        for (i, e) in edges.iter().enumerate() {
            if e.src >= n || e.dst >= n {
                return invalid(format!("edge {}->{} leaves the node range", e.src, e.dst));
            }
            if e.weight == 0 {
                return invalid(format!("edge {}->{} has zero weight", e.src, e.dst));
            }
            if predicates[e.src].is_class() {
                return invalid(format!("edge {}->{} leaves a class node", e.src, e.dst));
            }
            if i > 0 && (edges[i - 1].src, edges[i - 1].dst) == (e.src, e.dst) {
                return invalid(format!("edge {}->{} appears twice", e.src, e.dst));
            }
        }
        let nodes = predicates.into_iter().enumerate().map(|(id, predicate)| DpgNode { id, predicate }).collect();
        Ok(Dpg { nodes, edges, source_counts, provenance })
    }

    pub fn nodes(&self) -> &[DpgNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[DpgEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn predicate(&self, id: usize) -> &Predicate {
        &self.nodes[id].predicate
    }

    pub fn is_class(&self, id: usize) -> bool {
        self.nodes[id].predicate.is_class()
    }

    /// Node id of the class terminal for `class`.
    pub fn class_node(&self, class: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.predicate == Predicate::Class(class))
    }

    pub fn source_counts(&self) -> &[u64] {
        &self.source_counts
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn label(&self, id: usize) -> String {
        let p = &self.provenance;
        self.nodes[id].predicate.label(&p.features, &p.classes, p.decimals)
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Outgoing `(dst, weight)` lists, ordered by `dst`.
    pub fn successors(&self) -> Vec<Vec<(usize, u64)>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            out[e.src].push((e.dst, e.weight));
        }
        out
    }

    /// Incoming `(src, weight)` lists, ordered by `src`.
    pub fn predecessors(&self) -> Vec<Vec<(usize, u64)>> {
        let mut inc = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            inc[e.dst].push((e.src, e.weight));
        }
        inc
    }

    /// Non-fatal oddities, currently self-loops.
    pub fn diagnostics(&self) -> Vec<String> {
        self.edges
            .iter()
            .filter(|e| e.src == e.dst)
            .map(|e| format!("self-loop on node {} ({}) with weight {}", e.src, self.label(e.src), e.weight))
            .collect()
    }

    pub fn to_document(&self) -> DpgDocument {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let mut doc = NodeDoc {
                    id: n.id,
                    label: self.label(n.id),
                    kind: if n.predicate.is_class() { "class" } else { "decision" }.to_string(),
                    feature: None,
                    op: None,
                    threshold: None,
                    values: None,
                    class: None,
                    source_count: self.source_counts[n.id],
                };
                match &n.predicate {
                    Predicate::Class(c) => doc.class = Some(*c),
                    Predicate::Decision(d) => {
                        doc.feature = Some(d.feature);
                        doc.op = Some(d.operator());
                        doc.threshold = d.condition.threshold();
                        doc.values = d.condition.values().map(|v| v.iter().copied().collect());
                    }
                }
                doc
            })
            .collect();
        DpgDocument { nodes, edges: self.edges.clone(), provenance: self.provenance.clone() }
    }

    pub fn from_document(doc: DpgDocument) -> Result<Self, DpgError> {
        let mut predicates = Vec::with_capacity(doc.nodes.len());
        let mut sources = Vec::with_capacity(doc.nodes.len());
        for (pos, n) in doc.nodes.iter().enumerate() {
            if n.id != pos {
                return Err(DpgError::Invalid(format!("node at position {pos} has id {}", n.id)));
            }
            predicates.push(node_predicate(n)?);
            sources.push(n.source_count);
        }
        let labels: Vec<String> = doc.nodes.iter().map(|n| n.label.clone()).collect();
        let g = Dpg::from_parts(predicates, doc.edges, sources, doc.provenance)?;
        for (id, label) in labels.iter().enumerate() {
            let expected = g.label(id);
            if *label != expected {
                return Err(DpgError::Invalid(format!(
                    "node {id} label {label:?} does not match its predicate ({expected:?})"
                )));
            }
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("DPG serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DpgError> {
        Dpg::from_document(serde_json::from_str(text)?)
    }
}

fn node_predicate(n: &NodeDoc) -> Result<Predicate, DpgError> {
    let bad = |what: &str| DpgError::Invalid(format!("node {}: {what}", n.id));
    match n.kind.as_str() {
        "class" => n.class.map(Predicate::Class).ok_or_else(|| bad("class node without class")),
        "decision" => {
            let feature = n.feature.ok_or_else(|| bad("decision without feature"))?;
            let op = n.op.ok_or_else(|| bad("decision without op"))?;
            let threshold =
                || n.threshold.and_then(Threshold::new).ok_or_else(|| bad("missing or non-finite threshold"));
            let values = || {
                n.values
                    .as_ref()
                    .map(|v| v.iter().copied().collect::<BTreeSet<i64>>())
                    .ok_or_else(|| bad("missing value set"))
            };
            let condition = match op {
                Operator::Le => Condition::Le(threshold()?),
                Operator::Gt => Condition::Gt(threshold()?),
                Operator::Eq => Condition::In(values()?),
                Operator::Ne => Condition::NotIn(values()?),
            };
            Ok(Predicate::Decision(Decision { feature, condition }))
        }
        other => Err(bad(&format!("unknown node kind {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: usize,
    pub label: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<Operator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<usize>,
    #[serde(default)]
    pub source_count: u64,
}

/// Wire form: `{"nodes":[...], "edges":[{"src","dst","weight"}], "provenance":{...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpgDocument {
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<DpgEdge>,
    pub provenance: Provenance,
}

pub fn load_dpg(path: impl AsRef<Path>) -> Result<Dpg, DpgError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DpgError::Io { path: path.to_path_buf(), source })?;
    Dpg::from_json(&text)
}

/// Per-node `(out_weight, in_weight)` sums.
pub fn weight_flow(g: &Dpg) -> Vec<(u64, u64)> {
    let mut flow = vec![(0, 0); g.len()];
    for e in g.edges() {
        flow[e.src].0 += e.weight;
        flow[e.dst].1 += e.weight;
    }
    flow
}

/// Maps predicates to node ids.
pub fn predicate_index(g: &Dpg) -> HashMap<&Predicate, usize> {
    g.nodes().iter().map(|n| (&n.predicate, n.id)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn le(f: usize, t: f64) -> Predicate {
        Predicate::Decision(Decision::le(f, t).unwrap())
    }

    fn prov() -> Provenance {
        Provenance {
            features: vec!["f0".into()],
            classes: vec!["A".into(), "B".into()],
            decimals: 2,
            trees: 1,
            samples: 1,
            model: Map::new(),
        }
    }

    fn edge(src: usize, dst: usize, weight: u64) -> DpgEdge {
        DpgEdge { src, dst, weight }
    }

    #[test]
    fn rejects_class_sources_and_duplicates() {
        let preds = vec![le(0, 0.5), Predicate::Class(0), Predicate::Class(1)];
        assert!(Dpg::from_parts(preds.clone(), vec![edge(1, 0, 1)], vec![0; 3], prov()).is_err());
        assert!(Dpg::from_parts(preds.clone(), vec![edge(0, 1, 1), edge(0, 1, 2)], vec![0; 3], prov()).is_err());
        assert!(Dpg::from_parts(preds.clone(), vec![edge(0, 1, 0)], vec![0; 3], prov()).is_err());
        assert!(Dpg::from_parts(preds, vec![edge(0, 1, 1)], vec![1, 0, 0], prov()).is_ok());
    }

    #[test]
    fn requires_one_node_per_class() {
        let missing = vec![le(0, 0.5), Predicate::Class(0)];
        assert!(Dpg::from_parts(missing, vec![], vec![0; 2], prov()).is_err());
        let repeated = vec![Predicate::Class(0), Predicate::Class(1), Predicate::Class(1)];
        assert!(Dpg::from_parts(repeated, vec![], vec![0; 3], prov()).is_err());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let preds = vec![le(0, 0.5), Predicate::Class(0), Predicate::Class(1)];
        let g = Dpg::from_parts(preds, vec![edge(0, 1, 3)], vec![3, 0, 0], prov()).unwrap();
        let text = g.to_json();
        let back = Dpg::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"label\": \"f0 <= 0.50\""));
        assert!(text.contains("\"label\": \"Class A\""));
    }

    #[test]
    fn tampered_label_is_rejected() {
        let preds = vec![le(0, 0.5), Predicate::Class(0), Predicate::Class(1)];
        let g = Dpg::from_parts(preds, vec![], vec![0; 3], prov()).unwrap();
        let text = g.to_json().replace("f0 <= 0.50", "f0 <= 0.70");
        assert!(matches!(Dpg::from_json(&text), Err(DpgError::Invalid(_))));
    }

    #[test]
    fn self_loops_are_diagnosed() {
        let preds = vec![le(0, 0.5), Predicate::Class(0), Predicate::Class(1)];
        let g = Dpg::from_parts(preds, vec![edge(0, 0, 2)], vec![0; 3], prov()).unwrap();
        assert_eq!(g.diagnostics().len(), 1);
    }
}
