use super::{ensure_square, LinalgError, Matrix};

/// Householder reduction to upper Hessenberg form.
///
/// Returns `(h, q)` with `h = qᵀ·a·q`, `q` orthogonal and every entry of `h`
/// below the first subdiagonal exactly zero.
pub fn hessenberg(a: &Matrix) -> Result<(Matrix, Matrix), LinalgError> {
    let n = ensure_square(a)?;
    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    if n < 3 {
        return Ok((h, q));
    }

    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let x: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let tail_norm = x[1..].iter().map(|t| t * t).sum::<f64>();
        if tail_norm == 0.0 {
            continue;
        }
        let alpha = -x[0].signum() * (x[0] * x[0] + tail_norm).sqrt();
        v[..len].copy_from_slice(&x);
        v[0] -= alpha;
        let vnorm2: f64 = v[..len].iter().map(|t| t * t).sum();
        let beta = 2.0 / vnorm2;
        let v = &v[..len];

        // H ← P·H on rows k+1..n
        for j in 0..n {
            let s: f64 = (0..len).map(|i| v[i] * h[(k + 1 + i, j)]).sum();
            if s != 0.0 {
                for i in 0..len {
                    h[(k + 1 + i, j)] -= beta * v[i] * s;
                }
            }
        }
        // H ← H·P and Q ← Q·P on columns k+1..n
        for target in [&mut h, &mut q] {
            for r in 0..n {
                let row = target.row_mut(r);
                let s: f64 = (0..len).map(|i| v[i] * row[k + 1 + i]).sum();
                if s != 0.0 {
                    for i in 0..len {
                        row[k + 1 + i] -= beta * v[i] * s;
                    }
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    Ok((h, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng::XorShift64;

    fn random(n: usize, seed: u64) -> Matrix {
        let mut rng = XorShift64::new(seed);
        let data = (0..n * n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Matrix::from_vec(n, n, data).unwrap()
    }

    #[test]
    fn two_by_two_is_untouched() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let (h, q) = hessenberg(&a).unwrap();
        assert_eq!(h, a);
        assert_eq!(q, Matrix::identity(2));
    }

    #[test]
    fn random_five_reconstructs() {
        let a = random(5, 42);
        let (h, q) = hessenberg(&a).unwrap();
        assert!(q.orthogonality_error() <= 1e-8);
        let back = q.transpose().matmul(&a).matmul(&q);
        assert!(back.sub(&h).frobenius_norm() <= 1e-8 * a.frobenius_norm());
        for i in 0..5usize {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn symmetric_input_becomes_tridiagonal() {
        let b = random(6, 7);
        let a = b.add(&b.transpose());
        let (h, _) = hessenberg(&a).unwrap();
        for i in 0..6 {
            for j in (i + 2)..6 {
                assert!(h[(i, j)].abs() <= 1e-8, "h[{i},{j}] = {}", h[(i, j)]);
            }
        }
    }

    #[test]
    fn rejects_rectangular() {
        assert!(hessenberg(&Matrix::zeros(2, 3)).is_err());
    }
}
