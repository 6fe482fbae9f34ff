use super::jacobi::check_set;
use super::{off_diagonality, BssError};
use crate::linalg::{real_schur_default, Matrix};
use crate::synth::rng::XorShift64;

/// Relative eigen-gap below which the combined matrix is treated as
/// degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Seed for the perturbed-weight retry when the caller gives none.
pub const DEFAULT_RETRY_SEED: u64 = 0x50B1;

#[derive(Debug, Clone)]
pub struct SchurOutcome {
    pub rotation: Matrix,
    /// Off-diagonality over the original set, same functional as the
    /// Jacobi diagonalizer.
    pub score: f64,
    pub iterations: usize,
    /// True when even the retried combination had a repeated eigenvalue.
    pub degenerate: bool,
    pub retried: bool,
    pub weights: Vec<f64>,
}

/// Outcome of decomposing one combined matrix.
#[derive(Debug, Clone)]
pub(crate) struct CombinedRotation {
    pub rotation: Matrix,
    pub iterations: usize,
    pub degenerate: bool,
}

/// Real Schur decomposition of a symmetric combination; its Schur vectors
/// are the eigenvectors.
pub(crate) fn rotation_of_combination(m: &Matrix) -> Result<CombinedRotation, BssError> {
    let form = real_schur_default(&m.symmetrized())?;
    let mut diag = form.t.diagonal();
    diag.sort_by(f64::total_cmp);
    let scale = diag.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min_gap = diag
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    Ok(CombinedRotation {
        rotation: form.q,
        iterations: form.iterations,
        degenerate: scale == 0.0 || min_gap < DEGENERACY_GAP * scale,
    })
}

/// Seeded replacement weights in [0.5, 1.5], normalized by the set size.
pub fn perturbed_weights(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = XorShift64::new(seed);
    (0..k).map(|_| rng.uniform(0.5, 1.5) / k as f64).collect()
}

/// Diagonalizes the set through a single Schur decomposition of
/// `Σ w_k·M_k`; see [`diagonalize_schur_seeded`].
pub fn diagonalize_schur(set: &[Matrix], weights: &[f64]) -> Result<SchurOutcome, BssError> {
    diagonalize_schur_seeded(set, weights, DEFAULT_RETRY_SEED)
}

/// Forms `M = Σ w_k·M_k`, symmetrizes it and takes `Q` from its real Schur
/// form as the rotation. If `M` has a repeated eigenvalue (relative gap
/// below 1e−8) the weights are redrawn once from `seed`; a second
/// degenerate combination is returned with `degenerate = true`.
pub fn diagonalize_schur_seeded(
    set: &[Matrix],
    weights: &[f64],
    seed: u64,
) -> Result<SchurOutcome, BssError> {
    let n = check_set(set)?;
    if weights.len() != set.len() {
        return Err(BssError::WeightCount {
            weights: weights.len(),
            matrices: set.len(),
        });
    }
    if !(weights.iter().map(|w| w.abs()).sum::<f64>() > 0.0) {
        return Err(BssError::InvalidWeights);
    }

    let combine = |w: &[f64]| {
        let mut m = Matrix::zeros(n, n);
        for (mk, wk) in set.iter().zip(w) {
            m.add_scaled(*wk, mk);
        }
        m
    };

    let mut used = weights.to_vec();
    let mut result = rotation_of_combination(&combine(&used))?;
    let mut retried = false;
    if result.degenerate {
        retried = true;
        used = perturbed_weights(set.len(), seed);
        let again = rotation_of_combination(&combine(&used))?;
        result = CombinedRotation {
            iterations: result.iterations + again.iterations,
            ..again
        };
    }

    let score = off_diagonality(&super::rotate_set(set, &result.rotation));
    Ok(SchurOutcome {
        rotation: result.rotation,
        score,
        iterations: result.iterations,
        degenerate: result.degenerate,
        retried,
        weights: used,
    })
}
