//! Betweenness centrality (Brandes) on the directed, unweighted view.
//!
//! Shortest paths count hops; edge weights are ignored. Endpoints are
//! excluded and scores are normalized by `(N-1)(N-2)`. Unreachable pairs
//! contribute 0.

use std::collections::VecDeque;

use rayon::prelude::*;

use super::CentralityReport;
use crate::dpg::Dpg;

pub fn betweenness_centrality(g: &Dpg) -> CentralityReport {
    let adj: Vec<Vec<usize>> = g.successors().into_iter().map(|s| s.into_iter().map(|(v, _)| v).collect()).collect();
    CentralityReport::new("betweenness", normalized_betweenness(&adj))
}

pub(crate) fn normalized_betweenness(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let partials: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| single_source(adj, s)).collect();
    // Summed in source order so the result does not depend on scheduling.
    let mut bc = vec![0.0; n];
    for part in partials {
        for (acc, x) in bc.iter_mut().zip(part) {
            *acc += x;
        }
    }
    let scale = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
    bc.iter_mut().for_each(|x| *x *= scale);
    bc
}

/// Dependencies of `s` on every other node.
fn single_source(adj: &[Vec<usize>], s: usize) -> Vec<f64> {
    let n = adj.len();
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    sigma[s] = 1.0;
    dist[s] = 0;
    queue.push_back(s);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    let mut delta = vec![0.0f64; n];
    for &w in order.iter().rev() {
        for &v in &preds[w] {
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
    }
    delta[s] = 0.0;
    delta
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_interior_node() {
        let bc = normalized_betweenness(&[vec![1], vec![2], vec![]]);
        assert_eq!(bc, vec![0.0, 0.5, 0.0]);
    }

    #[test]
    fn no_two_hop_paths_means_zero() {
        let bc = normalized_betweenness(&[vec![1, 2], vec![], vec![], vec![2]]);
        assert!(bc.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn diamond_splits_credit() {
        // 0 -> {1, 2} -> 3: each middle node carries half of the single pair.
        let bc = normalized_betweenness(&[vec![1, 2], vec![3], vec![3], vec![]]);
        let expect = 0.5 / 6.0;
        assert!((bc[1] - expect).abs() < 1e-15 && (bc[2] - expect).abs() < 1e-15);
        assert_eq!(bc[0], 0.0);
    }

    #[test]
    fn self_loops_are_harmless() {
        let with = normalized_betweenness(&[vec![0, 1], vec![2], vec![]]);
        assert_eq!(with, vec![0.0, 0.5, 0.0]);
    }

    #[test]
    fn tiny_graphs() {
        assert_eq!(normalized_betweenness(&[vec![1], vec![]]), vec![0.0, 0.0]);
        assert!(normalized_betweenness(&[]).is_empty());
    }
}
