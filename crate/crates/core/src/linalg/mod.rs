//! Dense real linear algebra: Givens rotations, Jacobi symmetric
//! eigendecomposition, Householder Hessenberg reduction, Francis
//! double-shift real Schur decomposition and a Moore–Penrose pseudo-inverse.
//!
//! Everything works in real arithmetic. Complex conjugate eigenvalue pairs
//! are carried as 2×2 diagonal blocks of the Schur form.

mod eigen;
mod givens;
mod hessenberg;
mod matrix;
mod pinv;
mod schur;

pub use eigen::{sym_eig, sym_eig_with, EigenPair, DEFAULT_EIG_MAX_SWEEPS, DEFAULT_EIG_TOL};
pub use givens::givens_rotation;
pub use hessenberg::hessenberg;
pub use matrix::{dot, off_diagonal_sq, Matrix};
pub use pinv::pseudo_inverse;
pub use schur::{real_schur, real_schur_default, schur_eigenvalues, SchurForm};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("invalid matrix shape {rows}x{cols} for {len} values")]
    InvalidShape { rows: usize, cols: usize, len: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

pub(crate) fn ensure_square(a: &Matrix) -> Result<usize, LinalgError> {
    if a.is_square() {
        Ok(a.rows())
    } else {
        Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

/// Index of the largest-magnitude entry; first one wins on ties.
pub(crate) fn argmax_abs(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.abs() > values[best].abs() {
            best = i;
        }
    }
    best
}
