use super::BssError;
use crate::linalg::{dot, Matrix};
use crate::recording::Recording;

/// Removes each channel's mean. Returns the centered recording and the means.
pub fn center(rec: &Recording) -> (Recording, Vec<f64>) {
    let data = rec.data();
    let t = data.cols() as f64;
    let mut out = data.clone();
    let mut means = Vec::with_capacity(data.rows());
    for i in 0..data.rows() {
        let mean = data.row(i).iter().sum::<f64>() / t;
        out.row_mut(i).iter_mut().for_each(|x| *x -= mean);
        means.push(mean);
    }
    (rec.with_data(out), means)
}

fn check_lag(lag: usize, samples: usize) -> Result<(), BssError> {
    if 2 * lag >= samples {
        Err(BssError::LagTooLarge { lag, samples })
    } else {
        Ok(())
    }
}

/// Symmetrized lagged covariance `½(C + Cᵀ)` with
/// `C = X[:, 0..T−τ]·X[:, τ..T]ᵀ / (T−τ)` on centered data.
pub fn lagged_covariance(rec: &Recording, lag: usize) -> Result<Matrix, BssError> {
    let x = rec.data();
    let (n, t) = x.shape();
    check_lag(lag, t)?;
    let len = t - lag;
    let norm = 1.0 / len as f64;
    let mut c = Matrix::zeros(n, n);
    if lag == 0 {
        for i in 0..n {
            for j in i..n {
                let v = dot(x.row(i), x.row(j)) * norm;
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        return Ok(c);
    }
    for i in 0..n {
        let head = &x.row(i)[..len];
        for j in 0..n {
            c[(i, j)] = dot(head, &x.row(j)[lag..]) * norm;
        }
    }
    Ok(c.symmetrized())
}

/// One lagged covariance per lag.
pub fn lagged_covariances(rec: &Recording, lags: &[usize]) -> Result<Vec<Matrix>, BssError> {
    lags.iter().map(|&l| lagged_covariance(rec, l)).collect()
}

/// `Σ_k w_k·R(τ_k)` in a single data product.
///
/// Each channel is first filtered into `y_j(t) = Σ_k w_k/(T−τ_k)·x_j(t+τ_k)`
/// (terms with `t + τ_k ≥ T` dropped), then `½(X·Yᵀ + Y·Xᵀ)` is formed.
/// Mathematically identical to summing the individual symmetrized
/// covariances, at the cost of one covariance instead of K.
pub fn weighted_lagged_sum(rec: &Recording, lags: &[usize], weights: &[f64]) -> Result<Matrix, BssError> {
    if lags.is_empty() {
        return Err(BssError::EmptyLags);
    }
    if weights.len() != lags.len() {
        return Err(BssError::WeightCount {
            weights: weights.len(),
            matrices: lags.len(),
        });
    }
    let x = rec.data();
    let (n, t) = x.shape();
    for &lag in lags {
        check_lag(lag, t)?;
    }
    let min_lag = *lags.iter().min().unwrap();
    let len = t - min_lag;

    let mut y = Matrix::zeros(n, len);
    for j in 0..n {
        let src = x.row(j);
        let dst = y.row_mut(j);
        for (&lag, &w) in lags.iter().zip(weights) {
            let coef = w / (t - lag) as f64;
            let span = t - lag;
            for (d, s) in dst[..span].iter_mut().zip(&src[lag..]) {
                *d += coef * s;
            }
        }
    }
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        let head = &x.row(i)[..len];
        for j in 0..n {
            c[(i, j)] = dot(head, y.row(j));
        }
    }
    Ok(c.symmetrized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng::XorShift64;
    use std::f64::consts::TAU;

    fn rec(rows: &[Vec<f64>]) -> Recording {
        Recording::new(Matrix::from_rows(rows).unwrap(), 250.0).unwrap()
    }

    #[test]
    fn center_examples() {
        let (c, m) = center(&rec(&[vec![5.0; 4]]));
        assert_eq!(c.channel(0), &[0.0; 4]);
        assert_eq!(m, vec![5.0]);
        let (c, m) = center(&rec(&[vec![1.0, 2.0, 3.0]]));
        assert_eq!(c.channel(0), &[-1.0, 0.0, 1.0]);
        assert_eq!(m, vec![2.0]);
        let zero_mean = vec![-1.5, 0.25, 1.25];
        let (c, _) = center(&rec(&[zero_mean.clone()]));
        for (a, b) in c.channel(0).iter().zip(&zero_mean) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn centered_rows_have_tiny_means() {
        let mut rng = XorShift64::new(4);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..500).map(|_| 100.0 + rng.gaussian()).collect())
            .collect();
        let (c, _) = center(&rec(&rows));
        for i in 0..3 {
            let row = c.channel(i);
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            let max = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(mean.abs() <= 1e-12 * (1.0 + max));
        }
    }

    #[test]
    fn lag_zero_is_sample_covariance() {
        let mut rng = XorShift64::new(8);
        let rows: Vec<Vec<f64>> = (0..3).map(|_| (0..400).map(|_| rng.gaussian()).collect()).collect();
        let (c, _) = center(&rec(&rows));
        let r0 = lagged_covariance(&c, 0).unwrap();
        let direct = c.data().matmul_transposed(c.data()).scale(1.0 / 400.0);
        assert!(r0.sub(&direct).max_abs() < 1e-14);
        let e = crate::linalg::sym_eig(&r0, 1e-12).unwrap();
        assert!(*e.values.last().unwrap() >= -1e-10 * e.values[0]);
    }

    #[test]
    fn cosine_autocovariance() {
        // brute-force oracle: 0.5·cos(2π·f·τ/fs) for a unit cosine
        let (f, fs, t) = (7.0, 250.0, 10_000);
        let x: Vec<f64> = (0..t).map(|k| (TAU * f * k as f64 / fs).cos()).collect();
        let r = rec(&[x]);
        for lag in [0, 1, 5, 13, 40] {
            let c = lagged_covariance(&r, lag).unwrap()[(0, 0)];
            let expect = 0.5 * (TAU * f * lag as f64 / fs).cos();
            assert!((c - expect).abs() <= 0.02, "lag {lag}: {c} vs {expect}");
        }
    }

    #[test]
    fn white_noise_lagged_covariance_is_small() {
        let mut rng = XorShift64::new(12);
        let t = 20_000;
        let rows: Vec<Vec<f64>> = (0..4).map(|_| (0..t).map(|_| rng.gaussian()).collect()).collect();
        let (c, _) = center(&rec(&rows));
        let r5 = lagged_covariance(&c, 5).unwrap();
        assert!(r5.max_abs() <= 4.0 / (t as f64).sqrt());
        assert_eq!(r5.asymmetry(), 0.0);
    }

    #[test]
    fn lag_limit() {
        let r = rec(&[vec![0.0; 10]]);
        assert!(lagged_covariance(&r, 4).is_ok());
        assert!(matches!(lagged_covariance(&r, 5), Err(BssError::LagTooLarge { lag: 5, samples: 10 })));
    }

    #[test]
    fn fused_sum_matches_individual_covariances() {
        let mut rng = XorShift64::new(31);
        let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..3000).map(|_| rng.gaussian()).collect()).collect();
        let (c, _) = center(&rec(&rows));
        let lags = [1, 2, 3, 7, 10];
        let weights = [0.2, 1.0, -0.5, 0.3, 0.9];
        let fused = weighted_lagged_sum(&c, &lags, &weights).unwrap();
        let mut direct = Matrix::zeros(5, 5);
        for (l, w) in lags.iter().zip(&weights) {
            direct.add_scaled(*w, &lagged_covariance(&c, *l).unwrap());
        }
        assert!(fused.sub(&direct).max_abs() <= 1e-13 * direct.max_abs().max(1.0));
        assert!(weighted_lagged_sum(&c, &lags, &weights[..2]).is_err());
        assert!(weighted_lagged_sum(&c, &[], &[]).is_err());
    }
}
