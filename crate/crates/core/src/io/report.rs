//! Combined analysis bundle and its CSV tables.

use serde::{Deserialize, Serialize};

use crate::constraints::{constraint_table, extract_all, ClassConstraintTable};
use crate::dpg::{Dpg, Provenance};
use crate::metrics::{
    betweenness_centrality, community_classes, detect_communities, local_reaching_centrality, CentralityReport,
};

/// Which sections to compute. `Default` asks for none.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportRequest {
    pub constraints: bool,
    /// Top-K betweenness rows.
    pub betweenness: Option<usize>,
    /// Top-K local reaching rows.
    pub local_reaching: Option<usize>,
    /// `(seed, max_iters)` for label propagation.
    pub communities: Option<(u64, usize)>,
}

impl ReportRequest {
    pub fn full(top: usize, seed: u64, max_iters: usize) -> Self {
        ReportRequest {
            constraints: true,
            betweenness: Some(top),
            local_reaching: Some(top),
            communities: Some((seed, max_iters)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPredicate {
    pub rank: usize,
    pub predicate: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityRow {
    pub community: usize,
    pub predicates: usize,
    pub features: usize,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<ClassConstraintTable>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betweenness: Option<Vec<RankedPredicate>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_reaching: Option<Vec<RankedPredicate>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub communities: Option<Vec<CommunityRow>>,
}

pub fn ranked(g: &Dpg, r: &CentralityReport, k: usize) -> Vec<RankedPredicate> {
    r.top(k)
        .into_iter()
        .enumerate()
        .map(|(i, (id, score))| RankedPredicate { rank: i + 1, predicate: g.label(id), score })
        .collect()
}

pub fn report(g: &Dpg, req: &ReportRequest) -> ReportBundle {
    let constraints = req.constraints.then(|| {
        let all = extract_all(g).expect("every class has a node in a valid graph");
        constraint_table(g, &all)
    });
    let betweenness = req.betweenness.map(|k| ranked(g, &betweenness_centrality(g), k));
    let local_reaching = req.local_reaching.map(|k| ranked(g, &local_reaching_centrality(g), k));
    let communities = req.communities.map(|(seed, iters)| {
        let r = detect_communities(g, seed, iters);
        community_classes(&r, g)
            .into_iter()
            .map(|s| CommunityRow {
                community: s.community,
                predicates: s.predicates,
                features: s.features,
                class: s.class_label,
            })
            .collect()
    });
    ReportBundle { provenance: g.provenance().clone(), constraints, betweenness, local_reaching, communities }
}

fn render(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
}

/// Columns `rank,predicate,score`.
pub fn ranking_csv(rows: &[RankedPredicate]) -> String {
    render(
        &["rank", "predicate", "score"],
        rows.iter().map(|r| vec![r.rank.to_string(), r.predicate.clone(), r.score.to_string()]),
    )
}

/// Columns `community,predicates,features,class`.
pub fn communities_csv(rows: &[CommunityRow]) -> String {
    render(
        &["community", "predicates", "features", "class"],
        rows.iter()
            .map(|r| vec![r.community.to_string(), r.predicates.to_string(), r.features.to_string(), r.class.clone()]),
    )
}

/// Columns `class,feature,lower,upper,constraint`; unbounded sides are empty.
pub fn constraints_csv(tables: &[ClassConstraintTable]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    render(
        &["class", "feature", "lower", "upper", "constraint"],
        tables.iter().flat_map(|t| {
            t.constraints
                .iter()
                .map(move |c| vec![t.class.clone(), c.feature.clone(), opt(c.lower), opt(c.upper), c.text.clone()])
        }),
    )
}
