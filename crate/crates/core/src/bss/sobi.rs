use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::schur_diag::{rotation_of_combination, CombinedRotation, DEFAULT_RETRY_SEED};
use super::whiten::whiten_from_covariance;
use super::{
    center, joint_diagonalize_jacobi, lagged_covariance, lagged_covariances, off_diagonality,
    perturbed_weights, rotate_set, weighted_lagged_sum, BssError, DEFAULT_JAD_MAX_SWEEPS,
    DEFAULT_JAD_TOL, DEFAULT_RANK_TOL,
};
use crate::linalg::Matrix;
use crate::recording::Recording;

pub const DEFAULT_LAGS: [usize; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
/// Two components whose rotated covariance diagonals never differ by more
/// than this fraction of the largest diagonal entry are reported as
/// unidentifiable.
pub const UNIDENTIFIABLE_SPREAD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Jacobi,
    Schur,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Jacobi => "jacobi",
            Method::Schur => "schur",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jacobi" => Ok(Method::Jacobi),
            "schur" => Ok(Method::Schur),
            other => Err(format!("unknown method '{other}' (expected jacobi or schur)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SobiWarning {
    /// Jacobi sweeps hit the limit; the rotation is the best so far.
    NoConvergence { sweeps: usize },
    /// The Schur combination had a repeated eigenvalue.
    DegenerateCombination { retried: bool, resolved: bool },
    /// Two components have indistinguishable lagged correlations.
    Unidentifiable { components: (usize, usize), spread: f64 },
    /// Whitening dropped near-null directions.
    RankReduced { retained: usize, channels: usize },
}

impl fmt::Display for SobiWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SobiWarning::NoConvergence { sweeps } => {
                write!(f, "joint diagonalization did not converge in {sweeps} sweeps")
            }
            SobiWarning::DegenerateCombination { retried, resolved } => write!(
                f,
                "weighted covariance combination is degenerate (retried: {retried}, resolved: {resolved})"
            ),
            SobiWarning::Unidentifiable { components, spread } => write!(
                f,
                "components {} and {} have indistinguishable lagged correlations (spread {spread:.3e})",
                components.0, components.1
            ),
            SobiWarning::RankReduced { retained, channels } => {
                write!(f, "whitening kept {retained} of {channels} dimensions")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Off-diagonality of the rotated whitened covariance set.
    pub score: f64,
    /// Jacobi sweeps, or Schur QR iterations.
    pub iterations: usize,
    /// Jacobi only: score before the first sweep and after each sweep.
    pub score_history: Vec<f64>,
    pub converged: bool,
    pub warnings: Vec<SobiWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobiOptions {
    pub lags: Vec<usize>,
    pub method: Method,
    /// Jacobi stopping threshold on `|sin θ|`.
    pub tol: f64,
    pub max_sweeps: usize,
    pub rank_tol: f64,
    /// Schur combination weights; `None` means uniform `1/K`.
    pub weights: Option<Vec<f64>>,
    /// Seed for the perturbed-weight retry of a degenerate combination.
    pub retry_seed: u64,
}

impl SobiOptions {
    pub fn new(method: Method) -> Self {
        Self {
            lags: DEFAULT_LAGS.to_vec(),
            method,
            tol: DEFAULT_JAD_TOL,
            max_sweeps: DEFAULT_JAD_MAX_SWEEPS,
            rank_tol: DEFAULT_RANK_TOL,
            weights: None,
            retry_seed: DEFAULT_RETRY_SEED,
        }
    }

    pub fn lags(mut self, lags: &[usize]) -> Self {
        self.lags = lags.to_vec();
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    pub method: Method,
    /// `r × n`, equal to `rotationᵀ·W`.
    pub unmixing: Matrix,
    /// `n × r`, equal to `W⁺·rotation`.
    pub mixing_estimate: Matrix,
    /// `r × T`, equal to `unmixing · centered data`.
    pub sources: Matrix,
    pub rotation: Matrix,
    pub elapsed_seconds: f64,
    pub diagnostics: Diagnostics,
    /// Channel means removed before separation.
    pub means: Vec<f64>,
    pub lags: Vec<usize>,
    pub sample_rate: f64,
    pub channel_names: Option<Vec<String>>,
}

impl SeparationResult {
    pub fn components(&self) -> usize {
        self.sources.rows()
    }

    pub fn channels(&self) -> usize {
        self.mixing_estimate.rows()
    }

    pub fn has_warnings(&self) -> bool {
        !self.diagnostics.warnings.is_empty()
    }

    pub fn is_unidentifiable(&self) -> bool {
        self.diagnostics
            .warnings
            .iter()
            .any(|w| matches!(w, SobiWarning::Unidentifiable { .. }))
    }

    /// Sources as a recording at the input sample rate, rows named `s{k}`.
    pub fn sources_recording(&self) -> Recording {
        let names = (0..self.components()).map(|k| format!("s{k}")).collect();
        Recording::new(self.sources.clone(), self.sample_rate)
            .and_then(|r| r.with_channel_names(names))
            .expect("sample rate was validated with the input")
    }
}

/// SOBI with default lags, rank tolerance and sweep limit; `tol` is the
/// Jacobi stopping threshold (unused by the Schur method).
pub fn sobi(rec: &Recording, lags: &[usize], method: Method, tol: f64) -> Result<SeparationResult, BssError> {
    sobi_with(rec, &SobiOptions::new(method).lags(lags).tol(tol))
}

/// Center, whiten, build the lagged covariance information, diagonalize.
///
/// `elapsed_seconds` covers everything needed to produce the separation.
/// For the Schur method only the weighted sum of the lagged covariances is
/// needed, and it is formed in one pass over the data. The quality score
/// and identifiability check need every whitened covariance for both
/// methods and are computed after the clock stops.
pub fn sobi_with(rec: &Recording, opts: &SobiOptions) -> Result<SeparationResult, BssError> {
    let (n, t) = (rec.channels(), rec.samples());
    if t <= 4 * n {
        return Err(BssError::InsufficientSamples { channels: n, samples: t });
    }
    if opts.lags.is_empty() {
        return Err(BssError::EmptyLags);
    }
    if !(opts.tol > 0.0) {
        return Err(BssError::InvalidTolerance(opts.tol));
    }
    for &lag in &opts.lags {
        if 2 * lag >= t {
            return Err(BssError::LagTooLarge { lag, samples: t });
        }
    }
    let k = opts.lags.len();
    let weights = match &opts.weights {
        Some(w) if w.len() != k => {
            return Err(BssError::WeightCount {
                weights: w.len(),
                matrices: k,
            })
        }
        Some(w) => w.clone(),
        None => vec![1.0 / k as f64; k],
    };
    if opts.method == Method::Schur && !(weights.iter().map(|w| w.abs()).sum::<f64>() > 0.0) {
        return Err(BssError::InvalidWeights);
    }

    let start = Instant::now();
    let (centered, means) = center(rec);
    let whitener = whiten_from_covariance(&lagged_covariance(&centered, 0)?, opts.rank_tol)?;

    let mut warnings = Vec::new();
    let mut jacobi_state = None;
    let (rotation, iterations, converged) = match opts.method {
        Method::Jacobi => {
            let set: Vec<Matrix> = lagged_covariances(&centered, &opts.lags)?
                .iter()
                .map(|c| whitener.congruence(c))
                .collect();
            let out = joint_diagonalize_jacobi(&set, opts.tol, opts.max_sweeps)?;
            if !out.converged {
                warnings.push(SobiWarning::NoConvergence { sweeps: out.sweeps });
            }
            jacobi_state = Some((set, out.score_history));
            (out.rotation, out.sweeps, out.converged)
        }
        Method::Schur => {
            let combined = whitener.congruence(&weighted_lagged_sum(&centered, &opts.lags, &weights)?);
            let mut out = rotation_of_combination(&combined)?;
            if out.degenerate {
                let retry = perturbed_weights(k, opts.retry_seed);
                let again = rotation_of_combination(&whitener.congruence(&weighted_lagged_sum(
                    &centered, &opts.lags, &retry,
                )?))?;
                warnings.push(SobiWarning::DegenerateCombination {
                    retried: true,
                    resolved: !again.degenerate,
                });
                out.iterations += again.iterations;
                out = CombinedRotation { iterations: out.iterations, ..again };
            }
            (out.rotation, out.iterations, true)
        }
    };

    let mut rotation = rotation;
    let mut mixing = whitener.w_pinv.matmul(&rotation);
    order_and_fix_signs(&mut rotation, &mut mixing);
    let unmixing = rotation.transpose().matmul(&whitener.w);
    let sources = unmixing.matmul(centered.data());
    let elapsed_seconds = start.elapsed().as_secs_f64();

    let (set, score_history) = match jacobi_state {
        Some(state) => state,
        None => {
            let set: Vec<Matrix> = lagged_covariances(&centered, &opts.lags)?
                .iter()
                .map(|c| whitener.congruence(c))
                .collect();
            (set, Vec::new())
        }
    };
    let rotated = rotate_set(&set, &rotation);
    let score = off_diagonality(&rotated);
    if whitener.retained_rank < n {
        warnings.push(SobiWarning::RankReduced {
            retained: whitener.retained_rank,
            channels: n,
        });
    }
    if let Some(w) = identifiability_warning(&rotated) {
        warnings.push(w);
    }

    Ok(SeparationResult {
        method: opts.method,
        unmixing,
        mixing_estimate: mixing,
        sources,
        rotation,
        elapsed_seconds,
        diagnostics: Diagnostics {
            score,
            iterations,
            score_history,
            converged,
            warnings,
        },
        means,
        lags: opts.lags.clone(),
        sample_rate: rec.sample_rate(),
        channel_names: rec.channel_names().map(<[String]>::to_vec),
    })
}

/// Orders components by descending back-projected variance `‖a_k‖²` (every
/// whitened source has unit variance) and flips signs so each mixing column's
/// largest-magnitude entry is positive.
fn order_and_fix_signs(rotation: &mut Matrix, mixing: &mut Matrix) {
    let r = rotation.cols();
    let power: Vec<f64> = (0..r)
        .map(|j| mixing.column(j).iter().map(|v| v * v).sum())
        .collect();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));

    let (old_rot, old_mix) = (rotation.clone(), mixing.clone());
    for (dst, &src) in order.iter().enumerate() {
        let col = old_mix.column(src);
        let peak = col.iter().fold(0.0f64, |m, &v| if v.abs() > m.abs() { v } else { m });
        let sign = if peak < 0.0 { -1.0 } else { 1.0 };
        let col: Vec<f64> = col.iter().map(|v| sign * v).collect();
        mixing.set_column(dst, &col);
        let rcol: Vec<f64> = old_rot.column(src).iter().map(|v| sign * v).collect();
        rotation.set_column(dst, &rcol);
    }
}

/// Flags the closest pair of components whose rotated covariance diagonals
/// are indistinguishable across every lag.
fn identifiability_warning(rotated: &[Matrix]) -> Option<SobiWarning> {
    let r = rotated.first()?.rows();
    let diags: Vec<Vec<f64>> = rotated.iter().map(Matrix::diagonal).collect();
    let scale = diags.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return (r > 1).then_some(SobiWarning::Unidentifiable {
            components: (0, 1),
            spread: 0.0,
        });
    }
    let mut worst: Option<((usize, usize), f64)> = None;
    for i in 0..r {
        for j in (i + 1)..r {
            let spread = diags.iter().map(|d| (d[i] - d[j]).abs()).fold(0.0, f64::max) / scale;
            if spread <= UNIDENTIFIABLE_SPREAD && worst.map_or(true, |(_, s)| spread < s) {
                worst = Some(((i, j), spread));
            }
        }
    }
    worst.map(|(components, spread)| SobiWarning::Unidentifiable { components, spread })
}
