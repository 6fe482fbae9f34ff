use super::{ensure_square, givens_rotation, hessenberg, LinalgError, Matrix};

/// Relative size below which a subdiagonal entry is treated as zero.
const DEFLATION_TOL: f64 = 1e-12;

/// Real Schur form `a = q·t·qᵀ` with `t` quasi-upper-triangular.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub q: Matrix,
    pub t: Matrix,
    pub iterations: usize,
}

impl SchurForm {
    /// Eigenvalues as `(re, im)` pairs read off the diagonal blocks.
    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        schur_eigenvalues(&self.t)
    }
}

/// Real Schur decomposition with the default iteration budget of `30·n`.
pub fn real_schur_default(a: &Matrix) -> Result<SchurForm, LinalgError> {
    real_schur(a, DEFLATION_TOL, 30 * a.rows().max(1))
}

/// Householder Hessenberg reduction followed by Francis implicit
/// double-shift QR.
///
/// A subdiagonal entry `h[k+1][k]` deflates once it is at most
/// `tol·(|h[k][k]| + |h[k+1][k+1]|)`. `max_iterations` bounds the total
/// number of double-shift sweeps. Diagonal 2×2 blocks with real eigenvalues
/// are split, so the only 2×2 blocks left carry complex conjugate pairs.
pub fn real_schur(a: &Matrix, tol: f64, max_iterations: usize) -> Result<SchurForm, LinalgError> {
    let n = ensure_square(a)?;
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidTolerance(tol));
    }
    let (mut h, mut q) = hessenberg(a)?;
    let scale = h.frobenius_norm();
    let mut iterations = 0;
    let mut since_deflation = 0;

    // active window is h[lo..=hi]
    let mut hi = n.saturating_sub(1);
    while hi > 0 {
        let lo = find_split(&mut h, hi, tol, scale);
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if lo + 1 == hi {
            split_block(&mut h, &mut q, lo);
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            since_deflation = 0;
            continue;
        }

        if iterations == max_iterations {
            return Err(LinalgError::NoConvergence { iterations });
        }
        iterations += 1;
        since_deflation += 1;
        francis_step(&mut h, &mut q, lo, hi, since_deflation % 10 == 0);
    }

    Ok(SchurForm {
        q,
        t: h,
        iterations,
    })
}

/// Walks up from `hi` and returns the first row `l` whose subdiagonal entry
/// `h[l][l-1]` is negligible (zeroing it), or 0.
fn find_split(h: &mut Matrix, hi: usize, tol: f64, scale: f64) -> usize {
    let mut l = hi;
    while l > 0 {
        let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
        if s == 0.0 {
            s = scale;
        }
        if h[(l, l - 1)].abs() <= tol * s {
            h[(l, l - 1)] = 0.0;
            return l;
        }
        l -= 1;
    }
    0
}

/// One implicit double-shift QR sweep over the unreduced block `lo..=hi`.
fn francis_step(h: &mut Matrix, q: &mut Matrix, lo: usize, hi: usize, exceptional: bool) {
    let n = h.rows();
    let m = hi - 1;
    let (s, t) = if exceptional {
        // ad hoc shift breaks cycles the standard shift can fall into
        let w = h[(hi, m)].abs() + h[(m, m - 1)].abs();
        (1.5 * w, w * w)
    } else {
        (
            h[(m, m)] + h[(hi, hi)],
            h[(m, m)] * h[(hi, hi)] - h[(m, hi)] * h[(hi, m)],
        )
    };

    let mut x = h[(lo, lo)] * h[(lo, lo)] + h[(lo, lo + 1)] * h[(lo + 1, lo)] - s * h[(lo, lo)] + t;
    let mut y = h[(lo + 1, lo)] * (h[(lo, lo)] + h[(lo + 1, lo + 1)] - s);
    let mut z = h[(lo + 1, lo)] * h[(lo + 2, lo + 1)];

    for k in lo..hi - 1 {
        if let Some((v, beta)) = householder3(x, y, z) {
            let col_start = if k > lo { k - 1 } else { lo };
            for j in col_start..n {
                let d = v[0] * h[(k, j)] + v[1] * h[(k + 1, j)] + v[2] * h[(k + 2, j)];
                let f = beta * d;
                h[(k, j)] -= f * v[0];
                h[(k + 1, j)] -= f * v[1];
                h[(k + 2, j)] -= f * v[2];
            }
            let row_end = (k + 3).min(hi);
            for i in 0..=row_end {
                let d = v[0] * h[(i, k)] + v[1] * h[(i, k + 1)] + v[2] * h[(i, k + 2)];
                let f = beta * d;
                h[(i, k)] -= f * v[0];
                h[(i, k + 1)] -= f * v[1];
                h[(i, k + 2)] -= f * v[2];
            }
            for i in 0..n {
                let d = v[0] * q[(i, k)] + v[1] * q[(i, k + 1)] + v[2] * q[(i, k + 2)];
                let f = beta * d;
                q[(i, k)] -= f * v[0];
                q[(i, k + 1)] -= f * v[1];
                q[(i, k + 2)] -= f * v[2];
            }
            if k > lo {
                h[(k + 1, k - 1)] = 0.0;
                h[(k + 2, k - 1)] = 0.0;
            }
        }
        x = h[(k + 1, k)];
        y = h[(k + 2, k)];
        if k + 3 <= hi {
            z = h[(k + 3, k)];
        }
    }

    // closing 2×2 rotation on rows/cols hi-1, hi
    let (c, sn, _) = givens_rotation(x, y);
    let k = hi - 1;
    rotate_rows(h, k, c, sn, k.saturating_sub(1).max(lo));
    rotate_cols(h, k, c, sn, hi);
    rotate_cols(q, k, c, sn, n - 1);
    if k > lo {
        h[(hi, k - 1)] = 0.0;
    }
}

/// Reflector `I − beta·v·vᵀ` mapping `(x, y, z)` onto the first axis.
fn householder3(x: f64, y: f64, z: f64) -> Option<([f64; 3], f64)> {
    let norm = (x * x + y * y + z * z).sqrt();
    if norm == 0.0 || (y == 0.0 && z == 0.0) {
        return None;
    }
    let alpha = if x >= 0.0 { -norm } else { norm };
    let v = [x - alpha, y, z];
    let vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    Some((v, 2.0 / vv))
}

/// Rows k, k+1 ← Gᵀ·rows over columns `from..n`, with G = [[c, −s], [s, c]].
fn rotate_rows(m: &mut Matrix, k: usize, c: f64, s: f64, from: usize) {
    for j in from..m.cols() {
        let a = m[(k, j)];
        let b = m[(k + 1, j)];
        m[(k, j)] = c * a + s * b;
        m[(k + 1, j)] = -s * a + c * b;
    }
}

/// Columns k, k+1 ← columns·G over rows `0..=to`.
fn rotate_cols(m: &mut Matrix, k: usize, c: f64, s: f64, to: usize) {
    for i in 0..=to {
        let a = m[(i, k)];
        let b = m[(i, k + 1)];
        m[(i, k)] = c * a + s * b;
        m[(i, k + 1)] = -s * a + c * b;
    }
}

/// Triangularizes the deflated 2×2 block at `k` when its eigenvalues are
/// real; complex pairs stay as a block.
fn split_block(h: &mut Matrix, q: &mut Matrix, k: usize) {
    let (a, b, c, d) = (h[(k, k)], h[(k, k + 1)], h[(k + 1, k)], h[(k + 1, k + 1)]);
    if c == 0.0 {
        return;
    }
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    if disc < 0.0 {
        return;
    }
    let root = disc.sqrt();
    // pick the eigenvalue farther from d to limit cancellation
    let lambda = 0.5 * (a + d) + if p >= 0.0 { root } else { -root };
    let (v1, v2) = {
        let r1 = (b, lambda - a);
        let r2 = (lambda - d, c);
        if r1.0.hypot(r1.1) >= r2.0.hypot(r2.1) {
            r1
        } else {
            r2
        }
    };
    let (cs, sn, r) = givens_rotation(v1, v2);
    if r == 0.0 {
        return;
    }
    let n = h.rows();
    rotate_rows(h, k, cs, sn, k);
    rotate_cols(h, k, cs, sn, k + 1);
    rotate_cols(q, k, cs, sn, n - 1);
    h[(k + 1, k)] = 0.0;
}

/// Eigenvalues of a quasi-upper-triangular matrix, block by block.
pub fn schur_eigenvalues(t: &Matrix) -> Vec<(f64, f64)> {
    let n = t.rows();
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        if k + 1 < n && t[(k + 1, k)] != 0.0 {
            let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
            let p = 0.5 * (a - d);
            let disc = p * p + b * c;
            let mid = 0.5 * (a + d);
            if disc >= 0.0 {
                out.push((mid + disc.sqrt(), 0.0));
                out.push((mid - disc.sqrt(), 0.0));
            } else {
                let im = (-disc).sqrt();
                out.push((mid, im));
                out.push((mid, -im));
            }
            k += 2;
        } else {
            out.push((t[(k, k)], 0.0));
            k += 1;
        }
    }
    out
}
