use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use super::{Dpg, DpgEdge, DpgError, Provenance};
use crate::dataset::{DataError, Dataset};
use crate::ensemble::{
    canonical_predicate, CanonicalizationPolicy, DecisionTree, Predicate, TraversalError, TreeEnsemble, TreeNode,
};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("tree {tree}, sample {sample}: {source}")]
    Traversal { tree: usize, sample: usize, source: TraversalError },
    #[error(transparent)]
    Graph(#[from] DpgError),
}

/// Predicates, edge counts and trace starts seen in one tree, with ids local
/// to the tree in first-seen order.
struct TreeAggregate {
    predicates: Vec<Predicate>,
    edges: HashMap<(u32, u32), u64>,
    sources: Vec<u64>,
}

struct Interner<'a> {
    tree: &'a DecisionTree,
    policy: &'a CanonicalizationPolicy,
    // [true-branch, false-branch] ids for splits; [class, _] for leaves.
    slots: Vec<[Option<u32>; 2]>,
    ids: HashMap<Predicate, u32>,
    agg: TreeAggregate,
}

impl Interner<'_> {
    fn intern(&mut self, node: usize, left: bool) -> Option<u32> {
        let side = usize::from(!left);
        if let Some(id) = self.slots[node][side] {
            return Some(id);
        }
        let predicate = match &self.tree.nodes[node] {
            TreeNode::Leaf { class } => Predicate::Class(*class),
            TreeNode::Split { .. } => canonical_predicate(&self.tree.branch_predicate(node, left)?, self.policy),
        };
        let next = self.agg.predicates.len() as u32;
        let id = *self.ids.entry(predicate).or_insert_with_key(|p| {
            self.agg.predicates.push(p.clone());
            self.agg.sources.push(0);
            next
        });
        self.slots[node][side] = Some(id);
        Some(id)
    }
}

fn aggregate_tree(
    tree: &DecisionTree,
    tree_index: usize,
    d: &Dataset,
    policy: &CanonicalizationPolicy,
) -> Result<TreeAggregate, BuildError> {
    let mut it = Interner {
        tree,
        policy,
        slots: vec![[None, None]; tree.nodes.len()],
        ids: HashMap::new(),
        agg: TreeAggregate { predicates: Vec::new(), edges: HashMap::new(), sources: Vec::new() },
    };
    for (sample, row) in d.rows().enumerate() {
        let fail = |source| BuildError::Traversal { tree: tree_index, sample, source };
        let mut first: Option<u32> = None;
        let mut prev: Option<u32> = None;
        let mut broken: Option<usize> = None;
        let leaf = tree
            .walk(row, |node, left| match it.intern(node, left) {
                Some(id) => {
                    match prev {
                        Some(p) => *it.agg.edges.entry((p, id)).or_insert(0) += 1,
                        None => first = Some(id),
                    }
                    prev = Some(id);
                }
                None => broken = broken.or(Some(node)),
            })
            .map_err(fail)?;
        if let Some(node) = broken {
            return Err(fail(TraversalError::Malformed { node }));
        }
        let class = it.intern(leaf, true).ok_or_else(|| fail(TraversalError::Malformed { node: leaf }))?;
        match prev {
            Some(p) => *it.agg.edges.entry((p, class)).or_insert(0) += 1,
            None => first = Some(class),
        }
        it.agg.sources[first.expect("trace has a first step") as usize] += 1;
    }
    Ok(it.agg)
}

/// Traverses every tree with every row of `d` and aggregates the traces into
/// a graph.
///
/// Node ids follow first appearance in (tree, sample, step) order; class
/// labels never reached are appended afterwards in class order. Edge weights
/// count traversals, so one sample contributes once per tree.
pub fn build_dpg(m: &TreeEnsemble, d: &Dataset, policy: &CanonicalizationPolicy) -> Result<Dpg, BuildError> {
    d.check_features(m.features())?;
    let per_tree = m
        .trees()
        .par_iter()
        .enumerate()
        .map(|(t, tree)| aggregate_tree(tree, t, d, policy))
        .collect::<Result<Vec<_>, _>>()?;

    let mut index: HashMap<Predicate, usize> = HashMap::new();
    let mut predicates: Vec<Predicate> = Vec::new();
    let mut sources: Vec<u64> = Vec::new();
    let mut edges: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut intern = |p: &Predicate, predicates: &mut Vec<Predicate>, sources: &mut Vec<u64>| {
        *index.entry(p.clone()).or_insert_with(|| {
            predicates.push(p.clone());
            sources.push(0);
            predicates.len() - 1
        })
    };
    for agg in per_tree {
        let global: Vec<usize> = agg.predicates.iter().map(|p| intern(p, &mut predicates, &mut sources)).collect();
        for ((a, b), w) in agg.edges {
            *edges.entry((global[a as usize], global[b as usize])).or_insert(0) += w;
        }
        for (local, count) in agg.sources.into_iter().enumerate() {
            sources[global[local]] += count;
        }
    }
    for c in 0..m.classes().len() {
        intern(&Predicate::Class(c), &mut predicates, &mut sources);
    }

    let edges = edges.into_iter().map(|((src, dst), weight)| DpgEdge { src, dst, weight }).collect();
    let provenance = Provenance {
        features: m.features().names().to_vec(),
        classes: m.classes().labels().to_vec(),
        decimals: policy.decimals,
        trees: m.trees().len(),
        samples: d.n_rows(),
        model: m.metadata().clone(),
    };
    Ok(Dpg::from_parts(predicates, edges, sources, provenance)?)
}
