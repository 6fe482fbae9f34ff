use super::{sym_eig, Matrix};

/// Eigenvalues of the Gram matrix below this fraction of the largest are
/// treated as zero.
const RANK_CUTOFF: f64 = 1e-12;

/// Moore–Penrose pseudo-inverse through the eigendecomposition of the
/// smaller Gram matrix (`AᵀA` or `AAᵀ`).
pub fn pseudo_inverse(a: &Matrix) -> Matrix {
    let (m, n) = a.shape();
    let tall = m >= n;
    let gram = if tall {
        a.transpose().matmul(a)
    } else {
        a.matmul_transposed(a)
    };
    if gram.max_abs() == 0.0 {
        return Matrix::zeros(n, m);
    }
    // Gram matrices of finite input are symmetric by construction and the
    // Jacobi sweep converges unconditionally on them.
    let eig = sym_eig(&gram.symmetrized(), 1e-14)
        .or_else(|_| sym_eig(&gram.symmetrized(), 1e-12))
        .expect("Jacobi sweep diverged on a Gram matrix");
    let cutoff = RANK_CUTOFF * eig.values[0];
    let k = gram.rows();
    // G⁺ = V·Λ⁺·Vᵀ
    let mut scaled = eig.vectors.clone();
    for j in 0..k {
        let inv = if eig.values[j] > cutoff {
            1.0 / eig.values[j]
        } else {
            0.0
        };
        for i in 0..k {
            scaled[(i, j)] *= inv;
        }
    }
    let gram_pinv = scaled.matmul_transposed(&eig.vectors);
    if tall {
        // (AᵀA)⁺·Aᵀ
        gram_pinv.matmul_transposed(a)
    } else {
        // Aᵀ·(AAᵀ)⁺
        a.transpose().matmul(&gram_pinv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng::XorShift64;

    fn penrose_residuals(a: &Matrix, p: &Matrix) -> (f64, f64) {
        let r1 = a.matmul(p).matmul(a).sub(a).frobenius_norm();
        let r2 = p.matmul(a).matmul(p).sub(p).frobenius_norm();
        (r1, r2)
    }

    /// Gauss–Jordan inverse with partial pivoting; independent of the
    /// eigen route under test.
    fn inverse_by_elimination(a: &Matrix) -> Matrix {
        let n = a.rows();
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = a[(i, j)];
            }
            aug[(i, n + i)] = 1.0;
        }
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| aug[(x, col)].abs().total_cmp(&aug[(y, col)].abs()))
                .unwrap();
            for j in 0..2 * n {
                let tmp = aug[(col, j)];
                aug[(col, j)] = aug[(pivot, j)];
                aug[(pivot, j)] = tmp;
            }
            let d = aug[(col, col)];
            for j in 0..2 * n {
                aug[(col, j)] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = aug[(r, col)];
                    for j in 0..2 * n {
                        aug[(r, j)] -= f * aug[(col, j)];
                    }
                }
            }
        }
        aug.columns(n..2 * n)
    }

    #[test]
    fn identity_and_diagonal() {
        let i3 = Matrix::identity(3);
        assert!(pseudo_inverse(&i3).sub(&i3).max_abs() < 1e-14);
        let d = Matrix::from_diag(&[2.0, 0.0]);
        let p = pseudo_inverse(&d);
        assert!(p.sub(&Matrix::from_diag(&[0.5, 0.0])).max_abs() < 1e-14);
    }

    #[test]
    fn full_rank_matches_elimination_inverse() {
        let mut rng = XorShift64::new(2024);
        let data = (0..16).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let a = Matrix::from_vec(4, 4, data).unwrap();
        let p = pseudo_inverse(&a);
        let inv = inverse_by_elimination(&a);
        assert!(p.sub(&inv).max_abs() <= 1e-8 * inv.max_abs());
        let res = a.matmul(&p).sub(&Matrix::identity(4)).frobenius_norm();
        assert!(res <= 1e-8, "A·A⁺ − I = {res}");
    }

    #[test]
    fn rectangular_and_rank_deficient() {
        let mut rng = XorShift64::new(77);
        for (m, n) in [(5, 3), (3, 5)] {
            let data = (0..m * n).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let a = Matrix::from_vec(m, n, data).unwrap();
            let p = pseudo_inverse(&a);
            assert_eq!(p.shape(), (n, m));
            let (r1, r2) = penrose_residuals(&a, &p);
            assert!(r1 <= 1e-8 * a.frobenius_norm());
            assert!(r2 <= 1e-8 * a.frobenius_norm().max(p.frobenius_norm()));
        }
        // rank one: second row is twice the first
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]).unwrap();
        let p = pseudo_inverse(&a);
        let (r1, r2) = penrose_residuals(&a, &p);
        assert!(r1 <= 1e-8 * a.frobenius_norm());
        assert!(r2 <= 1e-8 * a.frobenius_norm());
    }

    #[test]
    fn zero_matrix() {
        let p = pseudo_inverse(&Matrix::zeros(2, 3));
        assert_eq!(p, Matrix::zeros(3, 2));
    }
}
