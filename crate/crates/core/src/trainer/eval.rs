use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::dataset::Dataset;
use crate::ensemble::TreeEnsemble;

/// Confusion matrix indexed `[truth][prediction]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: f64,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.confusion.len()).map(|i| self.confusion[i][i]).sum()
    }
}

/// Scores majority-vote predictions on `rows`. Labels must already be
/// aligned to the model's classes.
pub fn evaluate(m: &TreeEnsemble, d: &Dataset, rows: &[usize]) -> Result<EvalReport, TrainError> {
    let labels = d.labels().ok_or(TrainError::Unlabeled)?;
    let k = m.classes().len();
    let mut confusion = vec![vec![0; k]; k];
    for &r in rows {
        let pred = m.predict_majority(d.row(r))?;
        confusion[labels[r]][pred] += 1;
    }
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let accuracy = if rows.is_empty() { 0.0 } else { correct as f64 / rows.len() as f64 };
    Ok(EvalReport { classes: m.classes().labels().to_vec(), confusion, accuracy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{ClassSchema, DecisionTree, FeatureSchema};

    fn model() -> TreeEnsemble {
        TreeEnsemble::new(
            FeatureSchema::numeric(vec!["f0".into()]).unwrap(),
            ClassSchema::new(vec!["A".into(), "B".into()]).unwrap(),
            vec![DecisionTree::stump(0, 0.5, 0, 1)],
            Default::default(),
        )
        .unwrap()
    }

    fn data(rows: &[f64], labels: &[usize]) -> Dataset {
        Dataset::new(FeatureSchema::numeric(vec!["f0".into()]).unwrap(), rows.iter().map(|&x| vec![x]).collect())
            .unwrap()
            .with_labels(labels.to_vec(), vec!["A".into(), "B".into()])
            .unwrap()
    }

    #[test]
    fn perfect_single_sample() {
        let r = evaluate(&model(), &data(&[0.1], &[0]), &[0]).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion, vec![vec![1, 0], vec![0, 0]]);
    }

    #[test]
    fn all_wrong_has_empty_diagonal() {
        let r = evaluate(&model(), &data(&[0.1, 0.9], &[1, 0]), &[0, 1]).unwrap();
        assert_eq!(r.correct(), 0);
        assert_eq!(r.total(), 2);
        assert_eq!(r.accuracy, 0.0);
    }
}
