//! Per-class feature constraints from reverse reachability.
//!
//! For a class, every decision node with a directed path into the class node
//! contributes. Per feature, the lower bound is the smallest `>` threshold
//! and the upper bound the largest `<=` threshold; a side with no
//! predicate stays unbounded. Bounds read `lower < x <= upper`.
//!
//! Categorical decisions (experimental) widen the same way: allowed codes
//! are the union of `=` sets, excluded codes the intersection of `!=` sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::dpg::Dpg;
use crate::ensemble::{format_fixed, Condition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("class {0} has no node in the graph")]
    UnknownClass(usize),
    #[error("dataset has no labels")]
    Unlabeled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureInterval {
    pub feature: usize,
    /// Exclusive; `-inf` when unbounded.
    pub lower: f64,
    /// Inclusive; `+inf` when unbounded.
    pub upper: f64,
    pub include: Option<BTreeSet<i64>>,
    pub exclude: Option<BTreeSet<i64>>,
}

impl FeatureInterval {
    fn unbounded(feature: usize) -> Self {
        FeatureInterval { feature, lower: f64::NEG_INFINITY, upper: f64::INFINITY, include: None, exclude: None }
    }

    pub fn contains(&self, x: f64) -> bool {
        if !(x > self.lower && x <= self.upper) {
            return false;
        }
        if let Some(inc) = &self.include {
            if !Condition::In(inc.clone()).holds(x) {
                return false;
            }
        }
        if let Some(exc) = &self.exclude {
            if !Condition::NotIn(exc.clone()).holds(x) {
                return false;
            }
        }
        true
    }

    /// True when no value can satisfy the numeric bounds. Widening over
    /// unrelated paths can produce this.
    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }

    /// `"2.45 < petal length (cm) <= 5.35"`, one-sided forms when unbounded.
    pub fn render(&self, name: &str, decimals: u32) -> String {
        let mut s = String::new();
        if self.lower.is_finite() {
            s.push_str(&format!("{} < ", format_fixed(self.lower, decimals)));
        }
        s.push_str(name);
        if self.upper.is_finite() {
            s.push_str(&format!(" <= {}", format_fixed(self.upper, decimals)));
        }
        let set = |v: &BTreeSet<i64>| v.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        if let Some(inc) = &self.include {
            s.push_str(&format!(" in {{{}}}", set(inc)));
        }
        if let Some(exc) = &self.exclude {
            s.push_str(&format!(" not in {{{}}}", set(exc)));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassConstraints {
    pub class: usize,
    /// One entry per constrained feature, ascending by feature.
    pub intervals: Vec<FeatureInterval>,
}

impl ClassConstraints {
    pub fn interval(&self, feature: usize) -> Option<&FeatureInterval> {
        self.intervals.iter().find(|i| i.feature == feature)
    }
}

/// Decision nodes with a directed path into the node of `class`.
pub fn reachable_to_class(g: &Dpg, class: usize) -> Result<BTreeSet<usize>, ConstraintError> {
    let target = g.class_node(class).ok_or(ConstraintError::UnknownClass(class))?;
    let preds = g.predecessors();
    let mut seen = vec![false; g.len()];
    seen[target] = true;
    let mut queue = VecDeque::from([target]);
    let mut out = BTreeSet::new();
    while let Some(v) = queue.pop_front() {
        for &(u, _) in &preds[v] {
            if !seen[u] {
                seen[u] = true;
                out.insert(u);
                queue.push_back(u);
            }
        }
    }
    Ok(out)
}

pub fn extract_constraints(g: &Dpg, class: usize) -> Result<ClassConstraints, ConstraintError> {
    let nodes = reachable_to_class(g, class)?;
    let mut by_feature: BTreeMap<usize, FeatureInterval> = BTreeMap::new();
    for v in nodes {
        let Some(d) = g.predicate(v).decision() else { continue };
        let iv = by_feature.entry(d.feature).or_insert_with(|| FeatureInterval::unbounded(d.feature));
        match &d.condition {
            Condition::Gt(t) => {
                let t = t.value();
                iv.lower = if iv.lower.is_finite() { iv.lower.min(t) } else { t };
            }
            Condition::Le(t) => {
                let t = t.value();
                iv.upper = if iv.upper.is_finite() { iv.upper.max(t) } else { t };
            }
            Condition::In(set) => iv.include.get_or_insert_with(BTreeSet::new).extend(set.iter().copied()),
            Condition::NotIn(set) => {
                iv.exclude = Some(match iv.exclude.take() {
                    None => set.clone(),
                    Some(prev) => prev.intersection(set).copied().collect(),
                });
            }
        }
    }
    Ok(ClassConstraints { class, intervals: by_feature.into_values().collect() })
}

/// True when `x` satisfies every interval. Vacuously true without intervals.
pub fn constraint_match(x: &[f64], cc: &ClassConstraints) -> bool {
    cc.intervals.iter().all(|iv| x.get(iv.feature).is_some_and(|&v| iv.contains(v)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintEvaluation {
    pub class: usize,
    /// Rows labelled with the class.
    pub class_rows: usize,
    /// Of those, rows inside the constraints.
    pub class_matches: usize,
    /// `class_matches / class_rows`; `None` without class rows.
    pub recall: Option<f64>,
    /// Rows of other classes inside the constraints.
    pub leakage: usize,
    /// All rows inside the constraints.
    pub matches: usize,
    pub rows: usize,
}

/// Labels of `d` must be aligned to the graph's classes.
pub fn evaluate_constraints(
    d: &Dataset,
    rows: &[usize],
    cc: &ClassConstraints,
) -> Result<ConstraintEvaluation, ConstraintError> {
    let labels = d.labels().ok_or(ConstraintError::Unlabeled)?;
    let mut eval = ConstraintEvaluation {
        class: cc.class,
        class_rows: 0,
        class_matches: 0,
        recall: None,
        leakage: 0,
        matches: 0,
        rows: rows.len(),
    };
    for &r in rows {
        let hit = constraint_match(d.row(r), cc);
        let own = labels[r] == cc.class;
        eval.class_rows += usize::from(own);
        eval.class_matches += usize::from(own && hit);
        eval.leakage += usize::from(!own && hit);
        eval.matches += usize::from(hit);
    }
    if eval.class_rows > 0 {
        eval.recall = Some(eval.class_matches as f64 / eval.class_rows as f64);
    }
    Ok(eval)
}

/// Serializable constraint table: per class, per feature bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub feature: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclude: Option<Vec<i64>>,
    pub text: String,
    /// Set when the widened bounds admit no value.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassConstraintTable {
    pub class: String,
    pub constraints: Vec<ConstraintRow>,
}

pub fn constraint_table(g: &Dpg, all: &[ClassConstraints]) -> Vec<ClassConstraintTable> {
    let p = g.provenance();
    all.iter()
        .map(|cc| ClassConstraintTable {
            class: p.classes[cc.class].clone(),
            constraints: cc
                .intervals
                .iter()
                .map(|iv| {
                    let name = &p.features[iv.feature];
                    ConstraintRow {
                        feature: name.clone(),
                        lower: iv.lower.is_finite().then_some(iv.lower),
                        upper: iv.upper.is_finite().then_some(iv.upper),
                        include: iv.include.as_ref().map(|s| s.iter().copied().collect()),
                        exclude: iv.exclude.as_ref().map(|s| s.iter().copied().collect()),
                        text: iv.render(name, p.decimals),
                        empty: iv.is_empty(),
                    }
                })
                .collect(),
        })
        .collect()
}

/// Constraints for every class, in class order.
pub fn extract_all(g: &Dpg) -> Result<Vec<ClassConstraints>, ConstraintError> {
    (0..g.provenance().classes.len()).map(|c| extract_constraints(g, c)).collect()
}
