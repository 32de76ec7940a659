use std::path::PathBuf;

use thiserror::Error;

use crate::ensemble::{ClassSchema, FeatureSchema, SchemaError};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row} has {got} cells, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("cannot parse {value:?} as a number at row {row}, column {col}")]
    Cell { row: usize, col: usize, value: String },
    #[error("{labels} labels for {rows} rows")]
    LabelCount { rows: usize, labels: usize },
    #[error("label index {label} at row {row} is outside {classes} classes")]
    LabelRange { row: usize, label: usize, classes: usize },
    #[error("dataset has no label column")]
    Unlabeled,
    #[error("class label {0:?} is not known to the model")]
    UnknownClass(String),
    #[error("dataset columns {got:?} do not match model features {expected:?}")]
    FeatureMismatch { expected: Vec<String>, got: Vec<String> },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// Row-major numeric samples with optional class labels.
///
/// Categorical features are stored as integral codes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: FeatureSchema,
    values: Vec<f64>,
    n_rows: usize,
    labels: Option<Vec<usize>>,
    classes: Vec<String>,
}

impl Dataset {
    pub fn new(features: FeatureSchema, rows: Vec<Vec<f64>>) -> Result<Self, DataError> {
        let width = features.len();
        let mut values = Vec::with_capacity(rows.len() * width);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(DataError::Ragged { row: i, expected: width, got: row.len() });
            }
            values.extend_from_slice(row);
        }
        Ok(Dataset { features, values, n_rows: rows.len(), labels: None, classes: Vec::new() })
    }

    /// Attaches labels as indices into `classes`.
    pub fn with_labels(mut self, labels: Vec<usize>, classes: Vec<String>) -> Result<Self, DataError> {
        if labels.len() != self.n_rows {
            return Err(DataError::LabelCount { rows: self.n_rows, labels: labels.len() });
        }
        if let Some((row, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= classes.len()) {
            return Err(DataError::LabelRange { row, label, classes: classes.len() });
        }
        self.labels = Some(labels);
        self.classes = classes;
        Ok(self)
    }

    pub fn features(&self) -> &FeatureSchema {
        &self.features
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.features.len();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels.as_ref().map(|l| l[i])
    }

    /// Class names the label indices refer to. Empty when unlabeled.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_schema(&self) -> Result<ClassSchema, DataError> {
        if !self.is_labeled() {
            return Err(DataError::Unlabeled);
        }
        Ok(ClassSchema::new(self.classes.clone())?)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let w = self.features.len();
        let mut values = Vec::with_capacity(indices.len() * w);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            features: self.features.clone(),
            values,
            n_rows: indices.len(),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            classes: self.classes.clone(),
        }
    }

    /// Re-indexes labels against `schema` by label name.
    pub fn align_classes(&self, schema: &ClassSchema) -> Result<Dataset, DataError> {
        let mut out = self.clone();
        if let Some(labels) = &self.labels {
            let map = self
                .classes
                .iter()
                .map(|name| schema.index_of(name).ok_or_else(|| DataError::UnknownClass(name.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            out.labels = Some(labels.iter().map(|&l| map[l]).collect());
        }
        out.classes = schema.labels().to_vec();
        Ok(out)
    }

    /// Fails unless column names equal `schema`'s, in order.
    pub fn check_features(&self, schema: &FeatureSchema) -> Result<(), DataError> {
        if self.features.names() == schema.names() {
            Ok(())
        } else {
            Err(DataError::FeatureMismatch { expected: schema.names().to_vec(), got: self.features.names().to_vec() })
        }
    }
}
