use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::dataset::Dataset;

/// Disjoint train/test row indices covering the dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitReport {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Seeded shuffle followed by a cut; no stratification.
///
/// The test side receives `round(n * test_fraction)` rows.
pub fn train_test_split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitReport, TrainError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(TrainError::Fraction(test_fraction));
    }
    if !d.is_labeled() {
        return Err(TrainError::Unlabeled);
    }
    let n = d.n_rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((n as f64) * test_fraction).round() as usize;
    let train_indices = order.split_off(n_test);
    Ok(SplitReport { train_indices, test_indices: order })
}
