use super::{argmax_abs, ensure_square, matrix::off_diagonal_sq, LinalgError, Matrix};

pub const DEFAULT_EIG_TOL: f64 = 1e-10;
pub const DEFAULT_EIG_MAX_SWEEPS: usize = 100;

/// Relative asymmetry accepted as "symmetric" on input.
const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues sorted descending with unit eigenvectors in the matching
/// columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

impl EigenPair {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Symmetric eigendecomposition with the default sweep limit.
pub fn sym_eig(a: &Matrix, tol: f64) -> Result<EigenPair, LinalgError> {
    sym_eig_with(a, tol, DEFAULT_EIG_MAX_SWEEPS)
}

/// Cyclic-by-row Jacobi eigensolver.
///
/// Sweeps stop once the off-diagonal Frobenius mass of the rotated matrix
/// drops to `tol·‖A‖_F`. Values come back in descending order; each
/// eigenvector is signed so its largest-magnitude entry is positive.
pub fn sym_eig_with(a: &Matrix, tol: f64, max_sweeps: usize) -> Result<EigenPair, LinalgError> {
    let n = ensure_square(a)?;
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidTolerance(tol));
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL * a.max_abs().max(f64::MIN_POSITIVE) {
        return Err(LinalgError::NotSymmetric { asymmetry: asym });
    }

    let mut m = a.symmetrized();
    let mut v = Matrix::identity(n);
    let norm = m.frobenius_norm();
    let threshold = tol * norm;

    let mut sweeps = 0;
    while off_diagonal_sq(&m).sqrt() > threshold {
        if sweeps == max_sweeps {
            return Err(LinalgError::NoConvergence { iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate_pair(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = v.column(i);
        if col[argmax_abs(&col)] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        vectors.set_column(k, &col);
    }
    Ok(EigenPair {
        values,
        vectors,
        sweeps,
    })
}

/// One Jacobi rotation annihilating `m[p][q]`; `v` accumulates the
/// rotations so that `vᵀ·A·v = m`.
fn rotate_pair(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        // |theta| overflowed: the rotation angle is negligible
        0.5 / theta
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    if s == 0.0 {
        m[(p, q)] = 0.0;
        m[(q, p)] = 0.0;
        return;
    }

    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}
