//! Asynchronous label propagation on the undirected, weighted projection.
//!
//! Every node starts with its own id as label. Each sweep visits the nodes
//! in a freshly shuffled order (seeded), and each node takes the label with
//! the largest summed edge weight among its neighbours, smallest label on
//! ties. Propagation stops once every node already holds one of its
//! neighbourhood's maximal labels, or after `max_iters` sweeps.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dpg::Dpg;

pub const DEFAULT_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityReport {
    /// Node ids per community, sorted; communities ordered by size
    /// (largest first), then by smallest member.
    pub communities: Vec<Vec<usize>>,
    /// Class indices whose class node falls in each community.
    pub classes: Vec<Vec<usize>>,
    pub seed: u64,
    pub sweeps: usize,
    pub converged: bool,
}

impl CommunityReport {
    /// Community index of every node.
    pub fn membership(&self, n_nodes: usize) -> Vec<Option<usize>> {
        let mut of = vec![None; n_nodes];
        for (c, members) in self.communities.iter().enumerate() {
            for &v in members {
                if v < n_nodes {
                    of[v] = Some(c);
                }
            }
        }
        of
    }

    /// True when the communities partition `0..n_nodes`.
    pub fn is_partition_of(&self, n_nodes: usize) -> bool {
        let mut seen = vec![false; n_nodes];
        for &v in self.communities.iter().flatten() {
            if v >= n_nodes || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        seen.into_iter().all(|s| s)
    }
}

/// Undirected neighbour lists with weights of antiparallel edges merged.
/// Self-loops are dropped.
fn undirected(g: &Dpg) -> Vec<Vec<(usize, u64)>> {
    let mut maps: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); g.len()];
    for e in g.edges() {
        if e.src != e.dst {
            *maps[e.src].entry(e.dst).or_insert(0) += e.weight;
            *maps[e.dst].entry(e.src).or_insert(0) += e.weight;
        }
    }
    maps.into_iter().map(|m| m.into_iter().collect()).collect()
}

/// Labels with maximal neighbour weight, ascending. Empty for isolated nodes.
fn best_labels(neigh: &[(usize, u64)], labels: &[usize]) -> Vec<usize> {
    let mut weight: BTreeMap<usize, u64> = BTreeMap::new();
    for &(u, w) in neigh {
        *weight.entry(labels[u]).or_insert(0) += w;
    }
    let Some(&max) = weight.values().max() else {
        return Vec::new();
    };
    weight.into_iter().filter(|&(_, w)| w == max).map(|(l, _)| l).collect()
}

fn settled(adj: &[Vec<(usize, u64)>], labels: &[usize]) -> bool {
    (0..adj.len()).all(|v| {
        let best = best_labels(&adj[v], labels);
        best.is_empty() || best.contains(&labels[v])
    })
}

pub(crate) fn propagate(adj: &[Vec<(usize, u64)>], seed: u64, max_iters: usize) -> (Vec<usize>, usize, bool) {
    let n = adj.len();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sweeps = 0;
    let mut converged = settled(adj, &labels);
    while !converged && sweeps < max_iters {
        order.shuffle(&mut rng);
        for &v in &order {
            if let Some(&label) = best_labels(&adj[v], &labels).first() {
                labels[v] = label;
            }
        }
        sweeps += 1;
        converged = settled(adj, &labels);
    }
    (labels, sweeps, converged)
}

pub fn detect_communities(g: &Dpg, seed: u64, max_iters: usize) -> CommunityReport {
    let (labels, sweeps, converged) = propagate(&undirected(g), seed, max_iters);
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(v);
    }
    let mut communities: Vec<Vec<usize>> = groups.into_values().collect();
    communities.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let classes = communities
        .iter()
        .map(|members| members.iter().filter_map(|&v| g.predicate(v).class_index()).collect())
        .collect();
    CommunityReport { communities, classes, seed, sweeps, converged }
}

/// Table-style description of one community.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunitySummary {
    /// 1-based, following the report's order.
    pub community: usize,
    /// All member nodes, class terminals included.
    pub predicates: usize,
    /// Distinct features used by the member decisions.
    pub features: usize,
    pub classes: Vec<usize>,
    /// Class labels joined with `", "`, or `"unassigned"`.
    pub class_label: String,
}

pub fn community_classes(r: &CommunityReport, g: &Dpg) -> Vec<CommunitySummary> {
    r.communities
        .iter()
        .enumerate()
        .map(|(i, members)| {
            let features: BTreeSet<usize> = members.iter().filter_map(|&v| g.predicate(v).feature()).collect();
            let classes: Vec<usize> = members.iter().filter_map(|&v| g.predicate(v).class_index()).collect();
            let class_label = if classes.is_empty() {
                "unassigned".to_string()
            } else {
                classes.iter().map(|&c| g.provenance().classes[c].clone()).collect::<Vec<_>>().join(", ")
            };
            CommunitySummary {
                community: i + 1,
                predicates: members.len(),
                features: features.len(),
                classes,
                class_label,
            }
        })
        .collect()
}
