//! Predicates: the node identity of a decision predicate graph.
//!
//! A predicate is either a decision `(feature, operator, operand)` or a class
//! terminal. Decisions carry their operand in canonical form so that equal
//! predicates coming from different trees hash and compare equal.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// Logical operators admitted in a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operator {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl Operator {
    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Le => "<=",
            Operator::Gt => ">",
            Operator::Eq => "=",
            Operator::Ne => "!=",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "<=" => Some(Operator::Le),
            ">" => Some(Operator::Gt),
            "=" => Some(Operator::Eq),
            "!=" => Some(Operator::Ne),
            _ => None,
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A finite threshold with total ordering and bitwise identity.
///
/// `-0.0` is folded into `0.0` so the two never produce distinct nodes.
#[derive(Debug, Clone, Copy)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(value: f64) -> Option<Self> {
        if value.is_finite() {
            Some(Threshold(if value == 0.0 { 0.0 } else { value }))
        } else {
            None
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl PartialEq for Threshold {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Threshold {}

impl Hash for Threshold {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Threshold {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Threshold {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// The satisfied side of a split.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Le(Threshold),
    Gt(Threshold),
    In(BTreeSet<i64>),
    NotIn(BTreeSet<i64>),
}

impl Condition {
    pub fn operator(&self) -> Operator {
        match self {
            Condition::Le(_) => Operator::Le,
            Condition::Gt(_) => Operator::Gt,
            Condition::In(_) => Operator::Eq,
            Condition::NotIn(_) => Operator::Ne,
        }
    }

    pub fn threshold(&self) -> Option<f64> {
        match self {
            Condition::Le(t) | Condition::Gt(t) => Some(t.value()),
            _ => None,
        }
    }

    pub fn values(&self) -> Option<&BTreeSet<i64>> {
        match self {
            Condition::In(v) | Condition::NotIn(v) => Some(v),
            _ => None,
        }
    }

    /// Evaluates the condition against a feature value.
    ///
    /// Categorical membership only matches integral codes.
    pub fn holds(&self, x: f64) -> bool {
        match self {
            Condition::Le(t) => x <= t.value(),
            Condition::Gt(t) => x > t.value(),
            Condition::In(set) => as_code(x).is_some_and(|c| set.contains(&c)),
            Condition::NotIn(set) => !as_code(x).is_some_and(|c| set.contains(&c)),
        }
    }
}

pub(crate) fn as_code(x: f64) -> Option<i64> {
    (x.is_finite() && x.fract() == 0.0 && x.abs() < 9.0e15).then_some(x as i64)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decision {
    pub feature: usize,
    pub condition: Condition,
}

impl Decision {
    pub fn le(feature: usize, threshold: f64) -> Option<Self> {
        Threshold::new(threshold).map(|t| Decision { feature, condition: Condition::Le(t) })
    }

    pub fn gt(feature: usize, threshold: f64) -> Option<Self> {
        Threshold::new(threshold).map(|t| Decision { feature, condition: Condition::Gt(t) })
    }

    pub fn operator(&self) -> Operator {
        self.condition.operator()
    }

    pub fn holds(&self, row: &[f64]) -> bool {
        row.get(self.feature).is_some_and(|&x| self.condition.holds(x))
    }
}

/// A DPG node identity: a decision or a class terminal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Decision(Decision),
    Class(usize),
}

impl Predicate {
    pub fn is_class(&self) -> bool {
        matches!(self, Predicate::Class(_))
    }

    pub fn class_index(&self) -> Option<usize> {
        match self {
            Predicate::Class(c) => Some(*c),
            Predicate::Decision(_) => None,
        }
    }

    pub fn decision(&self) -> Option<&Decision> {
        match self {
            Predicate::Decision(d) => Some(d),
            Predicate::Class(_) => None,
        }
    }

    pub fn feature(&self) -> Option<usize> {
        self.decision().map(|d| d.feature)
    }

    /// Renders the node label: `"<feature> <op> <threshold>"` or `"Class <label>"`.
    ///
    /// Thresholds are printed with `decimals` fractional digits.
    pub fn label(&self, features: &[String], classes: &[String], decimals: u32) -> String {
        match self {
            Predicate::Class(c) => {
                let name = classes.get(*c).map(String::as_str).unwrap_or("?");
                format!("Class {name}")
            }
            Predicate::Decision(d) => {
                let name = features.get(d.feature).map(String::as_str).unwrap_or("?");
                let operand = match &d.condition {
                    Condition::Le(t) | Condition::Gt(t) => format_fixed(t.value(), decimals),
                    Condition::In(set) | Condition::NotIn(set) => format_set(set),
                };
                format!("{name} {} {operand}", d.operator())
            }
        }
    }
}

fn format_set(set: &BTreeSet<i64>) -> String {
    let items: Vec<String> = set.iter().map(i64::to_string).collect();
    format!("{{{}}}", items.join(","))
}

pub(crate) fn format_fixed(value: f64, decimals: u32) -> String {
    let s = format!("{:.*}", decimals as usize, value);
    // "-0.00" would otherwise leak through for tiny negatives.
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Threshold rounding used to merge predicates across trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalizationPolicy {
    /// Fractional digits kept; ties round half to even on the exact binary value.
    pub decimals: u32,
}

impl Default for CanonicalizationPolicy {
    fn default() -> Self {
        CanonicalizationPolicy { decimals: 2 }
    }
}

impl CanonicalizationPolicy {
    pub fn new(decimals: u32) -> Self {
        CanonicalizationPolicy { decimals }
    }

    pub fn round(&self, value: f64) -> f64 {
        round_half_even(value, self.decimals)
    }
}

/// Rounds to `decimals` fractional digits, ties to even.
///
/// Rounding goes through the exact decimal expansion of the double, so
/// `0.125 -> 0.12` and `4.8499999 -> 4.85`.
pub fn round_half_even(value: f64, decimals: u32) -> f64 {
    if !value.is_finite() {
        return value;
    }
    let rounded: f64 = format!("{:.*}", decimals as usize, value).parse().expect("formatted float parses");
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

/// Rounds a predicate's threshold per `policy`; class predicates and value
/// sets are returned unchanged. Idempotent.
pub fn canonical_predicate(raw: &Predicate, policy: &CanonicalizationPolicy) -> Predicate {
    match raw {
        Predicate::Class(_) => raw.clone(),
        Predicate::Decision(d) => {
            let condition = match &d.condition {
                Condition::Le(t) => Condition::Le(canonical_threshold(*t, policy)),
                Condition::Gt(t) => Condition::Gt(canonical_threshold(*t, policy)),
                other => other.clone(),
            };
            Predicate::Decision(Decision { feature: d.feature, condition })
        }
    }
}

fn canonical_threshold(t: Threshold, policy: &CanonicalizationPolicy) -> Threshold {
    // Rounding a finite value can only overflow for |t| near f64::MAX.
    Threshold::new(policy.round(t.value())).unwrap_or(t)
}
