//! Local reaching centrality.
//!
//! Unweighted, `LRC(v)` is the fraction of the other `N-1` nodes reachable
//! from `v` along outgoing edges. Weighted, each reachable `u` contributes the
//! mean edge weight along a hop-shortest `v -> u` path instead of 1. Among
//! several shortest paths the one with the largest total weight is used.
//! Raw traversal counts are first divided by `traces / N`, so a graph where
//! every trace crosses every edge once scores on the same scale as the
//! unweighted form.

use std::collections::VecDeque;

use rayon::prelude::*;

use super::CentralityReport;
use crate::dpg::Dpg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LrcMode {
    #[default]
    Weighted,
    Unweighted,
}

pub fn local_reaching_centrality(g: &Dpg) -> CentralityReport {
    local_reaching_centrality_with(g, LrcMode::Weighted)
}

pub fn local_reaching_centrality_with(g: &Dpg, mode: LrcMode) -> CentralityReport {
    let n = g.len();
    let adj = g.successors();
    let scale = match mode {
        LrcMode::Unweighted => 1.0,
        LrcMode::Weighted => g.provenance().traces().max(1) as f64 / n.max(1) as f64,
    };
    let scores = (0..n)
        .into_par_iter()
        .map(|v| {
            if n < 2 {
                return 0.0;
            }
            let sum: f64 = match mode {
                LrcMode::Unweighted => reach(&adj, v).len() as f64,
                LrcMode::Weighted => heaviest_shortest_paths(&adj, v)
                    .into_iter()
                    .map(|(hops, total)| total as f64 / hops as f64 / scale)
                    .sum(),
            };
            sum / (n - 1) as f64
        })
        .collect();
    let name = match mode {
        LrcMode::Weighted => "local_reaching",
        LrcMode::Unweighted => "local_reaching_unweighted",
    };
    CentralityReport::new(name, scores)
}

fn reach(adj: &[Vec<(usize, u64)>], v: usize) -> Vec<usize> {
    heaviest_shortest_paths(adj, v).into_iter().map(|(h, _)| h).collect()
}

/// For every node reachable from `src` (excluding `src`): hop distance and the
/// largest raw weight total over the hop-shortest paths.
fn heaviest_shortest_paths(adj: &[Vec<(usize, u64)>], src: usize) -> Vec<(usize, u64)> {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut best = vec![0u64; n];
    let mut queue = VecDeque::new();
    dist[src] = 0;
    queue.push_back(src);
    let mut out = Vec::new();
    while let Some(v) = queue.pop_front() {
        if v != src {
            out.push((dist[v], best[v]));
        }
        for &(w, weight) in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                best[w] = best[v] + weight;
                queue.push_back(w);
            } else if dist[w] == dist[v] + 1 {
                best[w] = best[w].max(best[v] + weight);
            }
        }
    }
    out
}
