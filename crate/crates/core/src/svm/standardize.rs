use serde::{Deserialize, Serialize};

use super::{LabeledDataset, SvmError};

/// Per-feature affine map fit on training data: `z = (x − mean)/std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations; 1 for constant features.
    pub stds: Vec<f64>,
    /// Indices of features that were constant on the training set.
    pub constant: Vec<usize>,
}

impl Standardizer {
    pub fn fit(vectors: &[Vec<f64>]) -> Result<Self, SvmError> {
        let first = vectors.first().ok_or(SvmError::Empty)?;
        let d = first.len();
        let n = vectors.len() as f64;
        let mut means = vec![0.0; d];
        for v in vectors {
            means.iter_mut().zip(v).for_each(|(m, x)| *m += x);
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; d];
        for v in vectors {
            vars.iter_mut()
                .zip(v.iter().zip(&means))
                .for_each(|(s, (x, m))| *s += (x - m) * (x - m));
        }
        let mut constant = Vec::new();
        let stds = vars
            .iter()
            .enumerate()
            .map(|(j, &s)| {
                let sd = (s / n).sqrt();
                // relative floor so round-off on a constant column does not count as spread
                if sd <= 1e-12 * means[j].abs() || sd == 0.0 {
                    constant.push(j);
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Self { means, stds, constant })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.stds))
            .enumerate()
            .map(|(j, (v, (m, s)))| if self.constant.contains(&j) { 0.0 } else { (v - m) / s })
            .collect()
    }

    pub fn apply_all(&self, vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
        vectors.iter().map(|v| self.apply(v)).collect()
    }
}

/// Fits a standardizer on `train` and returns it with the transformed set.
pub fn standardize_fit_apply(train: &LabeledDataset) -> Result<(Standardizer, LabeledDataset), SvmError> {
    let st = Standardizer::fit(train.vectors())?;
    let mut out = LabeledDataset::new(st.apply_all(train.vectors()), train.labels().to_vec())?;
    if let Some(p) = train.provenance() {
        out = out.with_provenance(p.to_vec())?;
    }
    Ok((st, out))
}
