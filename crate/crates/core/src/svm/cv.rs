use serde::{Deserialize, Serialize};

use super::{svm_predict, svm_train, LabeledDataset, SvmError, SvmParams};
use crate::synth::rng::XorShift64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    /// Out-of-fold predicted label per sample, in input order.
    pub predictions: Vec<f64>,
    /// Out-of-fold decision value per sample.
    pub decisions: Vec<f64>,
    /// Test fold of each sample.
    pub fold_of: Vec<usize>,
}

/// Fold assignment per sample: each class is shuffled (seeded) and dealt
/// round-robin, continuing the deal across classes so fold sizes differ by
/// at most one.
pub fn stratified_folds(labels: &[f64], folds: usize, seed: u64) -> Result<Vec<usize>, SvmError> {
    if folds < 2 {
        return Err(SvmError::InvalidFolds(folds));
    }
    if folds > labels.len() {
        return Err(SvmError::TooFewSamples {
            samples: labels.len(),
            folds,
        });
    }
    let mut rng = XorShift64::new(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for class in [-1.0, 1.0] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        rng.shuffle(&mut idx);
        for i in idx {
            fold_of[i] = next % folds;
            next += 1;
        }
    }
    Ok(fold_of)
}

/// k-fold cross-validation; the standardizer is refit inside every
/// training fold.
pub fn cross_validate(data: &LabeledDataset, folds: usize, params: &SvmParams) -> Result<CvReport, SvmError> {
    let fold_of = stratified_folds(data.labels(), folds, params.seed)?;
    let mut predictions = vec![0.0; data.len()];
    let mut decisions = vec![0.0; data.len()];
    let mut fold_accuracies = Vec::with_capacity(folds);
    for f in 0..folds {
        let train: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] != f).collect();
        let test: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] == f).collect();
        let model = svm_train(&data.subset(&train), params)?;
        let mut hits = 0;
        for &i in &test {
            let (label, decision) = svm_predict(&model, &data.vectors()[i])?;
            predictions[i] = label;
            decisions[i] = decision;
            if label == data.labels()[i] {
                hits += 1;
            }
        }
        fold_accuracies.push(hits as f64 / test.len() as f64);
    }
    Ok(CvReport {
        mean_accuracy: fold_accuracies.iter().sum::<f64>() / folds as f64,
        fold_accuracies,
        predictions,
        decisions,
        fold_of,
    })
}
