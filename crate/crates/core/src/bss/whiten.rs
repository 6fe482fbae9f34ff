use serde::{Deserialize, Serialize};

use super::{lagged_covariance, BssError};
use crate::linalg::{pseudo_inverse, sym_eig, Matrix};
use crate::recording::Recording;

/// Default relative eigenvalue floor for the retained whitening subspace.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
const EIG_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Whitener {
    /// `r × n` whitening transform.
    pub w: Matrix,
    /// `n × r` pseudo-inverse of `w`.
    pub w_pinv: Matrix,
    pub retained_rank: usize,
    /// All eigenvalues of the lag-0 covariance, descending.
    pub eigenvalues: Vec<f64>,
}

impl Whitener {
    pub fn apply(&self, x: &Matrix) -> Matrix {
        self.w.matmul(x)
    }

    /// `W·C·Wᵀ`, symmetrized.
    pub fn congruence(&self, c: &Matrix) -> Matrix {
        self.w.matmul(c).matmul_transposed(&self.w).symmetrized()
    }
}

/// `W = Λ_r^{−1/2}·E_rᵀ` from the eigenpairs of the lag-0 covariance whose
/// eigenvalue is at least `rank_tol·λ_max`.
pub fn whiten(rec: &Recording, rank_tol: f64) -> Result<Whitener, BssError> {
    let c0 = lagged_covariance(rec, 0)?;
    whiten_from_covariance(&c0, rank_tol)
}

pub(crate) fn whiten_from_covariance(c0: &Matrix, rank_tol: f64) -> Result<Whitener, BssError> {
    let eig = sym_eig(c0, EIG_TOL)?;
    let lambda_max = eig.values[0];
    if !(lambda_max > 0.0) {
        return Err(BssError::DegenerateData);
    }
    let floor = rank_tol * lambda_max;
    let rank = eig.values.iter().take_while(|&&l| l >= floor && l > 0.0).count();
    let n = c0.rows();
    let mut w = Matrix::zeros(rank, n);
    for k in 0..rank {
        let s = 1.0 / eig.values[k].sqrt();
        for j in 0..n {
            w[(k, j)] = s * eig.vectors[(j, k)];
        }
    }
    let w_pinv = pseudo_inverse(&w);
    Ok(Whitener {
        w,
        w_pinv,
        retained_rank: rank,
        eigenvalues: eig.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bss::center;
    use crate::synth::rng::XorShift64;

    fn noise_recording(n: usize, t: usize, seed: u64, scales: &[f64]) -> Recording {
        let mut rng = XorShift64::new(seed);
        let mut m = Matrix::zeros(n, t);
        for i in 0..n {
            for v in m.row_mut(i) {
                *v = scales[i] * rng.gaussian();
            }
        }
        Recording::new(m, 100.0).unwrap()
    }

    fn whitened_cov(w: &Whitener, rec: &Recording) -> Matrix {
        let z = w.apply(rec.data());
        z.matmul_transposed(&z).scale(1.0 / rec.samples() as f64)
    }

    #[test]
    fn diagonal_covariance_gives_inverse_sqrt_scaling() {
        // oracle: sym_eig of diag(4, 1) is the identity basis
        let c0 = Matrix::from_diag(&[4.0, 1.0]);
        let w = whiten_from_covariance(&c0, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(w.retained_rank, 2);
        let mut entries: Vec<f64> = w.w.as_slice().iter().map(|v| v.abs()).collect();
        entries.sort_by(f64::total_cmp);
        assert_eq!(entries, vec![0.0, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn white_input_gives_orthogonal_whitener() {
        let (rec, _) = center(&noise_recording(4, 5000, 3, &[1.0; 4]));
        let w = whiten(&rec, DEFAULT_RANK_TOL).unwrap();
        let cov = whitened_cov(&w, &rec);
        assert!(cov.sub(&Matrix::identity(4)).max_abs() <= 1e-8);
        // W is close to orthogonal when the data is already white
        assert!(w.w.orthogonality_error() < 0.2);
    }

    #[test]
    fn rank_one_pair_keeps_one_component() {
        let mut rng = XorShift64::new(5);
        let a: Vec<f64> = (0..1000).map(|_| rng.gaussian()).collect();
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let (rec, _) = center(&Recording::new(Matrix::from_rows(&[a, b]).unwrap(), 100.0).unwrap());
        let w = whiten(&rec, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(w.retained_rank, 1);
        let cov = whitened_cov(&w, &rec);
        assert!((cov[(0, 0)] - 1.0).abs() <= 1e-8);
        // pinv acts as identity on the retained subspace
        assert!(w.w.matmul(&w.w_pinv).sub(&Matrix::identity(1)).max_abs() <= 1e-8);
    }

    #[test]
    fn constant_input_is_degenerate() {
        let (rec, _) = center(&Recording::new(Matrix::from_rows(&[[3.0; 20], [1.0; 20]]).unwrap(), 1.0).unwrap());
        assert!(matches!(whiten(&rec, DEFAULT_RANK_TOL), Err(BssError::DegenerateData)));
    }

    #[test]
    fn anisotropic_data_is_whitened() {
        let mut rng = XorShift64::new(9);
        let raw = noise_recording(6, 4000, 10, &[1.0, 3.0, 0.1, 10.0, 1.0, 0.5]);
        let mix = crate::synth::random_mixing(6, 6, 50.0, &mut rng);
        let (rec, _) = center(&raw.with_data(mix.matmul(raw.data())));
        let w = whiten(&rec, DEFAULT_RANK_TOL).unwrap();
        let cov = whitened_cov(&w, &rec);
        assert!(cov.sub(&Matrix::identity(6)).max_abs() <= 1e-8);
        assert!(w.w_pinv.matmul(&w.w).matmul(&w.w_pinv).sub(&w.w_pinv).max_abs() <= 1e-8 * w.w_pinv.max_abs());
    }
}
