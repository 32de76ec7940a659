use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("feature name at position {0} is empty")]
    EmptyFeatureName(usize),
    #[error("duplicate feature name {0:?}")]
    DuplicateFeature(String),
    #[error("{names} feature names but {kinds} feature kinds")]
    KindCount { names: usize, kinds: usize },
    #[error("duplicate class label {0:?}")]
    DuplicateClass(String),
    #[error("at least 2 class labels are required, got {0}")]
    TooFewClasses(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
}

impl FeatureSchema {
    pub fn new(names: Vec<String>, kinds: Vec<FeatureKind>) -> Result<Self, SchemaError> {
        if names.len() != kinds.len() {
            return Err(SchemaError::KindCount { names: names.len(), kinds: kinds.len() });
        }
        let mut seen = HashSet::new();
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(SchemaError::EmptyFeatureName(i));
            }
            if !seen.insert(name.as_str()) {
                return Err(SchemaError::DuplicateFeature(name.clone()));
            }
        }
        Ok(FeatureSchema { names, kinds })
    }

    /// All-numeric schema.
    pub fn numeric(names: Vec<String>) -> Result<Self, SchemaError> {
        let kinds = vec![FeatureKind::Numeric; names.len()];
        FeatureSchema::new(names, kinds)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn kind(&self, feature: usize) -> Option<FeatureKind> {
        self.kinds.get(feature).copied()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSchema {
    labels: Vec<String>,
}

impl ClassSchema {
    pub fn new(labels: Vec<String>) -> Result<Self, SchemaError> {
        if labels.len() < 2 {
            return Err(SchemaError::TooFewClasses(labels.len()));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(SchemaError::DuplicateClass(label.clone()));
            }
        }
        Ok(ClassSchema { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}
