//! Binary support vector machine: simplified SMO training, standardized
//! inputs, stratified cross-validation and a versioned JSON model format.

mod cv;
mod smo;
mod standardize;

pub use cv::{cross_validate, stratified_folds, CvReport};
pub use smo::{svm_train, SvmParams, DEFAULT_C, DEFAULT_MAX_PASSES, DEFAULT_TOL};
pub use standardize::{standardize_fit_apply, Standardizer};

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::dot;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvmError {
    #[error("dataset is empty")]
    Empty,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("regularization C must be positive, got {0}")]
    InvalidC(f64),
    #[error("rbf gamma must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{vectors} vectors but {labels} labels")]
    LabelCount { vectors: usize, labels: usize },
    #[error("label must be -1 or +1, got {0}")]
    InvalidLabel(f64),
    #[error("non-finite feature value at vector {0}")]
    NonFinite(usize),
    #[error("{samples} samples cannot fill {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },
    #[error("need at least 2 folds, got {0}")]
    InvalidFolds(usize),
    #[error("model file: {0}")]
    Io(String),
    #[error("model format: {0}")]
    Format(String),
    #[error("unsupported model format_version {0}")]
    UnsupportedVersion(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    fn validate(&self) -> Result<(), SvmError> {
        match *self {
            Kernel::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => Err(SvmError::InvalidGamma(gamma)),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Linear => f.write_str("linear"),
            Kernel::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
        }
    }
}

/// Feature vectors with ±1 labels (left = −1, right = +1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    vectors: Vec<Vec<f64>>,
    labels: Vec<f64>,
    provenance: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self, SvmError> {
        if vectors.len() != labels.len() {
            return Err(SvmError::LabelCount {
                vectors: vectors.len(),
                labels: labels.len(),
            });
        }
        let dim = vectors.first().map_or(0, Vec::len);
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(SvmError::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(SvmError::NonFinite(i));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l != 1.0 && l != -1.0) {
            return Err(SvmError::InvalidLabel(bad));
        }
        Ok(Self {
            vectors,
            labels,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, ids: Vec<String>) -> Result<Self, SvmError> {
        if ids.len() != self.len() {
            return Err(SvmError::LabelCount {
                vectors: self.len(),
                labels: ids.len(),
            });
        }
        self.provenance = Some(ids);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn provenance(&self) -> Option<&[String]> {
        self.provenance.as_deref()
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&1.0) && self.labels.contains(&-1.0)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            provenance: self
                .provenance
                .as_ref()
                .map(|p| indices.iter().map(|&i| p[i].clone()).collect()),
        }
    }
}

/// Trained classifier. Support vectors are stored standardized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub format_version: u32,
    pub kernel: Kernel,
    pub c: f64,
    pub tol: f64,
    pub alphas: Vec<f64>,
    pub support_vectors: Vec<Vec<f64>>,
    pub support_labels: Vec<f64>,
    pub bias: f64,
    pub standardizer: Standardizer,
    /// False when training stopped at the iteration cap.
    pub converged: bool,
    /// Largest KKT violation over the training set at the end of training.
    pub kkt_violation: f64,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    /// Decision value on an already standardized vector.
    pub fn decision_standardized(&self, z: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.alphas)
            .zip(&self.support_labels)
            .map(|((s, a), y)| a * y * self.kernel.eval(s, z))
            .sum::<f64>()
            + self.bias
    }

    /// `Σ α_i·y_i·w` for the linear kernel, in standardized coordinates.
    pub fn linear_weights(&self) -> Option<Vec<f64>> {
        if self.kernel != Kernel::Linear {
            return None;
        }
        let mut w = vec![0.0; self.dim()];
        for ((s, a), y) in self.support_vectors.iter().zip(&self.alphas).zip(&self.support_labels) {
            w.iter_mut().zip(s).for_each(|(wi, si)| *wi += a * y * si);
        }
        Some(w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SvmError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| SvmError::Format(e.to_string()))?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| SvmError::Format("missing format_version".into()))?;
        if version != MODEL_FORMAT_VERSION as u64 {
            return Err(SvmError::UnsupportedVersion(version as u32));
        }
        let model: SvmModel = serde_json::from_value(value).map_err(|e| SvmError::Format(e.to_string()))?;
        model.kernel.validate()?;
        let d = model.dim();
        if model.alphas.len() != model.support_vectors.len() || model.support_labels.len() != model.alphas.len() {
            return Err(SvmError::Format("support vector arrays differ in length".into()));
        }
        if let Some(v) = model.support_vectors.iter().find(|v| v.len() != d) {
            return Err(SvmError::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), SvmError> {
        std::fs::write(path, self.to_json()).map_err(|e| SvmError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, SvmError> {
        let text = std::fs::read_to_string(path).map_err(|e| SvmError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// `(label, decision)` for a raw feature vector; a zero decision maps to +1.
pub fn svm_predict(model: &SvmModel, x: &[f64]) -> Result<(f64, f64), SvmError> {
    if x.len() != model.dim() {
        return Err(SvmError::DimensionMismatch {
            expected: model.dim(),
            found: x.len(),
        });
    }
    let decision = model.decision_standardized(&model.standardizer.apply(x));
    Ok((if decision >= 0.0 { 1.0 } else { -1.0 }, decision))
}

/// Fraction of vectors whose predicted label matches.
pub fn accuracy(model: &SvmModel, data: &LabeledDataset) -> Result<f64, SvmError> {
    if data.is_empty() {
        return Err(SvmError::Empty);
    }
    let mut hits = 0;
    for (x, &y) in data.vectors().iter().zip(data.labels()) {
        if svm_predict(model, x)?.0 == y {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}
