use super::{off_diagonality, BssError};
use crate::linalg::Matrix;

pub const DEFAULT_JAD_TOL: f64 = 1e-8;
pub const DEFAULT_JAD_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct JacobiOutcome {
    /// Orthogonal `V` with `Vᵀ·M_k·V` near diagonal for every k.
    pub rotation: Matrix,
    pub score: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Off-diagonality score before the first sweep and after each sweep.
    pub score_history: Vec<f64>,
}

/// Joint approximate diagonalization by Givens sweeps (Cardoso–Souloumiac,
/// real symmetric case).
///
/// For each index pair the angle minimizing the summed off-diagonal mass of
/// the pair is applied in closed form, so the score never increases. Sweeps
/// stop after one in which every rotation had `|sin θ| < tol`; hitting
/// `max_sweeps` first returns the current rotation with `converged = false`.
pub fn joint_diagonalize_jacobi(
    set: &[Matrix],
    tol: f64,
    max_sweeps: usize,
) -> Result<JacobiOutcome, BssError> {
    let n = check_set(set)?;
    if !(tol > 0.0) {
        return Err(BssError::InvalidTolerance(tol));
    }
    let mut mats: Vec<Matrix> = set.iter().map(Matrix::symmetrized).collect();
    let mut v = Matrix::identity(n);
    let mut history = vec![off_diagonality(&mats)];
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut gpp, mut gqq, mut gpq) = (0.0, 0.0, 0.0);
                for m in &mats {
                    let h1 = m[(p, p)] - m[(q, q)];
                    let h2 = m[(p, q)] + m[(q, p)];
                    gpp += h1 * h1;
                    gqq += h2 * h2;
                    gpq += h1 * h2;
                }
                let ton = gpp - gqq;
                let toff = 2.0 * gpq;
                let theta = 0.5 * toff.atan2(ton + ton.hypot(toff));
                let (s, c) = theta.sin_cos();
                if s.abs() > tol {
                    rotated = true;
                    for m in mats.iter_mut() {
                        rotate(m, p, q, c, s);
                    }
                    rotate_columns(&mut v, p, q, c, s);
                }
            }
        }
        history.push(off_diagonality(&mats));
        if !rotated {
            converged = true;
            break;
        }
    }

    Ok(JacobiOutcome {
        rotation: v,
        score: *history.last().unwrap(),
        sweeps,
        converged,
        score_history: history,
    })
}

pub(crate) fn check_set(set: &[Matrix]) -> Result<usize, BssError> {
    let first = set.first().ok_or(BssError::EmptySet)?;
    let n = first.rows();
    for m in set {
        if m.shape() != (n, n) {
            return Err(BssError::ShapeMismatch {
                expected: (n, n),
                found: m.shape(),
            });
        }
        if m.asymmetry() > 1e-10 * m.max_abs().max(f64::MIN_POSITIVE) {
            return Err(BssError::NotSymmetric);
        }
    }
    Ok(n)
}

/// `M ← Gᵀ·M·G` with `G` the identity except `G[p,p] = G[q,q] = c`,
/// `G[p,q] = −s`, `G[q,p] = s`.
fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for j in 0..n {
        let a = m[(p, j)];
        let b = m[(q, j)];
        m[(p, j)] = c * a + s * b;
        m[(q, j)] = -s * a + c * b;
    }
    rotate_columns(m, p, q, c, s);
}

fn rotate_columns(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.rows() {
        let a = m[(i, p)];
        let b = m[(i, q)];
        m[(i, p)] = c * a + s * b;
        m[(i, q)] = -s * a + c * b;
    }
}
