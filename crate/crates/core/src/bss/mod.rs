//! Second-order blind source separation.
//!
//! Two diagonalizers share one pipeline (center, whiten, lagged covariances,
//! rotate): [`joint_diagonalize_jacobi`] sweeps Givens rotations over the
//! whole covariance set, while [`diagonalize_schur`] takes the Schur vectors
//! of a single weighted combination of the set. The Schur route is this
//! crate's reading of a "reworked" SOBI: it uses the same covariance
//! information but replaces the iterative joint diagonalization with one
//! decomposition.

mod artifacts;
mod covariance;
mod jacobi;
mod schur_diag;
mod sobi;
mod whiten;

pub use artifacts::{flag_artifact_components, low_frequency_fraction, remove_components, ArtifactCriteria};
pub use covariance::{center, lagged_covariance, lagged_covariances, weighted_lagged_sum};
pub use jacobi::{joint_diagonalize_jacobi, JacobiOutcome, DEFAULT_JAD_MAX_SWEEPS, DEFAULT_JAD_TOL};
pub use schur_diag::{
    diagonalize_schur, diagonalize_schur_seeded, perturbed_weights, SchurOutcome, DEFAULT_RETRY_SEED,
    DEGENERACY_GAP,
};
pub use sobi::{
    sobi, sobi_with, Diagnostics, Method, SeparationResult, SobiOptions, SobiWarning, DEFAULT_LAGS,
    UNIDENTIFIABLE_SPREAD,
};
pub use whiten::{whiten, Whitener, DEFAULT_RANK_TOL};

use thiserror::Error;

use crate::linalg::{off_diagonal_sq, LinalgError, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BssError {
    #[error("lag {lag} needs more than {} samples, have {samples}", 2 * lag)]
    LagTooLarge { lag: usize, samples: usize },
    #[error("lag list is empty")]
    EmptyLags,
    #[error("{weights} weights for {matrices} matrices")]
    WeightCount { weights: usize, matrices: usize },
    #[error("weights sum to zero in absolute value")]
    InvalidWeights,
    #[error("matrix set is empty")]
    EmptySet,
    #[error("expected {expected:?} matrix, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("input matrix is not symmetric")]
    NotSymmetric,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("data has no variance")]
    DegenerateData,
    #[error("{samples} samples for {channels} channels; need more than {}", 4 * channels)]
    InsufficientSamples { channels: usize, samples: usize },
    #[error("component {index} out of range for {components} components")]
    IndexOutOfRange { index: usize, components: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `Σ_k off(M_k)²`: squared Frobenius norm of the off-diagonal part, summed
/// over the set.
pub fn off_diagonality(set: &[Matrix]) -> f64 {
    set.iter().map(off_diagonal_sq).sum()
}

/// `Vᵀ·M_k·V` for every matrix in the set.
pub fn rotate_set(set: &[Matrix], v: &Matrix) -> Vec<Matrix> {
    let vt = v.transpose();
    set.iter().map(|m| vt.matmul(m).matmul(v)).collect()
}

/// Largest angle (radians) between matched columns of two orthogonal
/// matrices, matching each column of `a` to the column of `b` with the
/// largest `|cos|` and ignoring sign. `π/2` if the matching is not a
/// permutation.
pub fn signed_permutation_angle(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    let n = a.cols();
    let mut used = vec![false; n];
    let mut worst = 0.0f64;
    for i in 0..n {
        let ai = a.column(i);
        let (j, cos) = (0..n)
            .map(|j| (j, crate::linalg::dot(&ai, &b.column(j))))
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .unwrap();
        if used[j] {
            return std::f64::consts::FRAC_PI_2;
        }
        used[j] = true;
        let s = cos.signum();
        let bj = b.column(j);
        // 2·asin(|a − s·b|/2) stays accurate for tiny angles, unlike acos
        let chord = ai
            .iter()
            .zip(&bj)
            .map(|(x, y)| (x - s * y).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(2.0 * (0.5 * chord).min(1.0).asin());
    }
    worst
}

/// Absolute correlation of each true source with its matched estimate,
/// maximizing the total over one-to-one assignments. Estimates beyond the
/// number of true sources are left unmatched. Exhaustive for up to 8
/// sources, greedy beyond that.
pub fn matched_correlations(estimates: &Matrix, truth: &Matrix) -> Vec<f64> {
    assert_eq!(estimates.cols(), truth.cols(), "sample count mismatch");
    let m = truth.rows();
    let r = estimates.rows();
    let corr: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..r).map(|j| abs_correlation(truth.row(i), estimates.row(j))).collect())
        .collect();
    if m == 0 || r == 0 {
        return vec![0.0; m];
    }
    if m <= 8 && r <= 8 && m <= r {
        let mut best = (f64::NEG_INFINITY, vec![0; m]);
        let mut chosen = Vec::with_capacity(m);
        search_assignment(&corr, &mut vec![false; r], &mut chosen, 0.0, &mut best);
        return best.1.iter().enumerate().map(|(i, &j)| corr[i][j]).collect();
    }
    let mut out = vec![0.0; m];
    let mut used_t = vec![false; m];
    let mut used_e = vec![false; r];
    for _ in 0..m.min(r) {
        let mut top = (0, 0, -1.0);
        for i in (0..m).filter(|&i| !used_t[i]) {
            for j in (0..r).filter(|&j| !used_e[j]) {
                if corr[i][j] > top.2 {
                    top = (i, j, corr[i][j]);
                }
            }
        }
        used_t[top.0] = true;
        used_e[top.1] = true;
        out[top.0] = top.2;
    }
    out
}

fn search_assignment(
    corr: &[Vec<f64>],
    used: &mut Vec<bool>,
    chosen: &mut Vec<usize>,
    total: f64,
    best: &mut (f64, Vec<usize>),
) {
    let i = chosen.len();
    if i == corr.len() {
        if total > best.0 {
            *best = (total, chosen.clone());
        }
        return;
    }
    for j in 0..used.len() {
        if !used[j] {
            used[j] = true;
            chosen.push(j);
            search_assignment(corr, used, chosen, total + corr[i][j], best);
            chosen.pop();
            used[j] = false;
        }
    }
}

/// `|Pearson correlation|`; zero when either signal is constant.
pub fn abs_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        (sab / (saa * sbb).sqrt()).abs()
    }
}

/// Random orthogonal `R` (QR of a Gaussian matrix via Gram–Schmidt) and the
/// exactly jointly diagonalizable set `{R·D_k·Rᵀ}` with seeded diagonals.
pub fn rotated_diagonal_set(
    n: usize,
    k: usize,
    rng: &mut crate::synth::rng::XorShift64,
) -> (Matrix, Vec<Matrix>) {
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
        for _ in 0..2 {
            for p in 0..j {
                let col = r.column(p);
                let proj = crate::linalg::dot(&v, &col);
                v.iter_mut().zip(&col).for_each(|(x, c)| *x -= proj * c);
            }
        }
        let norm = crate::linalg::dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        r.set_column(j, &v);
    }
    let set = (0..k)
        .map(|_| {
            let d: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
            r.matmul(&Matrix::from_diag(&d)).matmul_transposed(&r).symmetrized()
        })
        .collect();
    (r, set)
}
