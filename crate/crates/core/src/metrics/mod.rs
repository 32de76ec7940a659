//! Centrality and community analytics over a decision predicate graph.

mod betweenness;
mod community;
mod reaching;

use serde::{Deserialize, Serialize};

pub use betweenness::betweenness_centrality;
pub use community::{community_classes, detect_communities, CommunityReport, CommunitySummary, DEFAULT_MAX_ITERS};
pub use reaching::{local_reaching_centrality, local_reaching_centrality_with, LrcMode};

/// Per-node scores and the resulting ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityReport {
    pub metric: String,
    /// Indexed by node id.
    pub scores: Vec<f64>,
    /// Node ids by descending score; ties keep the lower id first.
    pub ranking: Vec<usize>,
}

impl CentralityReport {
    pub(crate) fn new(metric: &str, scores: Vec<f64>) -> Self {
        let mut ranking: Vec<usize> = (0..scores.len()).collect();
        ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        CentralityReport { metric: metric.to_string(), scores, ranking }
    }

    /// The first `k` `(node, score)` pairs of the ranking.
    pub fn top(&self, k: usize) -> Vec<(usize, f64)> {
        self.ranking.iter().take(k).map(|&id| (id, self.scores[id])).collect()
    }
}
