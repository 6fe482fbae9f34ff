use serde::{Deserialize, Serialize};

use super::{Kernel, LabeledDataset, Standardizer, SvmError, SvmModel, MODEL_FORMAT_VERSION};
use crate::synth::rng::XorShift64;

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_PASSES: usize = 50;
/// Hard cap on passes over the data, converged or not.
const MAX_TOTAL_PASSES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: Kernel,
    pub tol: f64,
    /// Consecutive passes without any update before stopping.
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            kernel: Kernel::Linear,
            tol: DEFAULT_TOL,
            max_passes: DEFAULT_MAX_PASSES,
            seed: 0,
        }
    }
}

impl SvmParams {
    pub fn c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

struct Problem {
    y: Vec<f64>,
    k: Vec<f64>,
    n: usize,
    c: f64,
    alpha: Vec<f64>,
    b: f64,
}

impl Problem {
    fn kij(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }

    fn f(&self, i: usize) -> f64 {
        let row = &self.k[i * self.n..(i + 1) * self.n];
        let mut s = self.b;
        for ((a, y), k) in self.alpha.iter().zip(&self.y).zip(row) {
            if *a != 0.0 {
                s += a * y * k;
            }
        }
        s
    }

    fn error(&self, i: usize) -> f64 {
        self.f(i) - self.y[i]
    }

    /// Jointly optimizes `α_i, α_j`; false when no progress is possible.
    fn take_step(&mut self, i: usize, j: usize, ei: f64) -> bool {
        if i == j {
            return false;
        }
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let c = self.c;
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (c + aj - ai).min(c))
        } else {
            ((ai + aj - c).max(0.0), (ai + aj).min(c))
        };
        if lo >= hi {
            return false;
        }
        let eta = 2.0 * self.kij(i, j) - self.kij(i, i) - self.kij(j, j);
        if eta >= 0.0 {
            return false;
        }
        let ej = self.error(j);
        let aj_new = (aj - yj * (ei - ej) / eta).clamp(lo, hi);
        if (aj_new - aj).abs() < 1e-10 * (aj_new + aj + 1e-10) {
            return false;
        }
        let ai_new = ai + yi * yj * (aj - aj_new);
        let b1 = self.b - ei - yi * (ai_new - ai) * self.kij(i, i) - yj * (aj_new - aj) * self.kij(i, j);
        let b2 = self.b - ej - yi * (ai_new - ai) * self.kij(i, j) - yj * (aj_new - aj) * self.kij(j, j);
        self.b = if ai_new > 0.0 && ai_new < c {
            b1
        } else if aj_new > 0.0 && aj_new < c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        self.alpha[i] = ai_new;
        self.alpha[j] = aj_new;
        true
    }

    fn violates(&self, i: usize, r: f64, tol: f64) -> bool {
        (r < -tol && self.alpha[i] < self.c) || (r > tol && self.alpha[i] > 0.0)
    }

    /// Tightest bias bounds implied by KKT: every `α < C` point needs
    /// `y·f ≥ 1` and every `α > 0` point needs `y·f ≤ 1`, each of which
    /// bounds `b` from one side. Returns `(max lower, its index, min upper,
    /// its index)`.
    fn bias_bounds(&self) -> (f64, usize, f64, usize) {
        let (mut lo, mut lo_i, mut up, mut up_i) = (f64::NEG_INFINITY, 0, f64::INFINITY, 0);
        for i in 0..self.n {
            let bound = self.y[i] - (self.f(i) - self.b);
            let mut lower = |v: f64| {
                if v > lo {
                    lo = v;
                    lo_i = i;
                }
            };
            if (self.y[i] > 0.0 && self.alpha[i] < self.c) || (self.y[i] < 0.0 && self.alpha[i] > 0.0) {
                lower(bound);
            }
            if (self.y[i] > 0.0 && self.alpha[i] > 0.0) || (self.y[i] < 0.0 && self.alpha[i] < self.c) {
                if bound < up {
                    up = bound;
                    up_i = i;
                }
            }
        }
        (lo, lo_i, up, up_i)
    }

    /// Sets `b` to minimize the largest KKT violation for the current `α`.
    fn fit_bias(&mut self) {
        let (lo, _, up, _) = self.bias_bounds();
        self.b = match (lo.is_finite(), up.is_finite()) {
            (true, true) => 0.5 * (lo + up),
            (true, false) => lo,
            (false, true) => up,
            (false, false) => self.b,
        };
    }

    /// Largest KKT violation: `α=0 ⇒ y·f ≥ 1`, `0<α<C ⇒ y·f = 1`, `α=C ⇒ y·f ≤ 1`.
    fn kkt_violation(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let m = self.y[i] * self.f(i) - 1.0;
                if self.alpha[i] <= 0.0 {
                    (-m).max(0.0)
                } else if self.alpha[i] >= self.c {
                    m.max(0.0)
                } else {
                    m.abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Simplified SMO on standardized features.
///
/// For each KKT violator `i` a partner `j` is drawn at random (seeded); if
/// that pair cannot move, every other index is tried starting from a random
/// offset. After `max_passes` consecutive passes with no update the bias is
/// set to minimize the worst KKT violation; if that still exceeds `tol`,
/// steps on the maximal violating pair follow and the passes resume.
/// `converged` reports whether KKT holds within `tol` when training stops,
/// which can also happen at a hard pass cap.
pub fn svm_train(data: &LabeledDataset, params: &SvmParams) -> Result<SvmModel, SvmError> {
    if data.is_empty() {
        return Err(SvmError::Empty);
    }
    if !data.has_both_classes() {
        return Err(SvmError::SingleClass);
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(SvmError::InvalidC(params.c));
    }
    if !(params.tol > 0.0) {
        return Err(SvmError::InvalidTolerance(params.tol));
    }
    params.kernel.validate()?;

    let standardizer = Standardizer::fit(data.vectors())?;
    let x = standardizer.apply_all(data.vectors());
    let n = x.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = params.kernel.eval(&x[i], &x[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let mut p = Problem {
        y: data.labels().to_vec(),
        k,
        n,
        c: params.c,
        alpha: vec![0.0; n],
        b: 0.0,
    };

    let mut rng = XorShift64::new(params.seed);
    let mut total = 0;
    let mut kkt_violation;
    loop {
        let mut quiet = 0;
        while quiet < params.max_passes && total < MAX_TOTAL_PASSES {
            total += 1;
            let mut changed = 0;
            for i in 0..n {
                let ei = p.error(i);
                if !p.violates(i, p.y[i] * ei, params.tol) || n < 2 {
                    continue;
                }
                let j = (i + 1 + rng.below(n - 1)) % n;
                if p.take_step(i, j, ei) {
                    changed += 1;
                    continue;
                }
                let offset = rng.below(n);
                if (0..n).map(|s| (offset + s) % n).any(|j| p.take_step(i, j, ei)) {
                    changed += 1;
                }
            }
            quiet = if changed == 0 { quiet + 1 } else { 0 };
        }
        p.fit_bias();
        kkt_violation = p.kkt_violation();
        if kkt_violation <= params.tol || total >= MAX_TOTAL_PASSES {
            break;
        }
        // Finish on the maximal violating pair, which always admits a step
        // unless the two points coincide in feature space.
        let mut moved = false;
        for _ in 0..10 * n {
            let (lo, i, up, j) = p.bias_bounds();
            if 0.5 * (lo - up) <= params.tol {
                break;
            }
            let ei = p.error(i);
            if !p.take_step(i, j, ei) {
                break;
            }
            moved = true;
            p.fit_bias();
        }
        kkt_violation = p.kkt_violation();
        if kkt_violation <= params.tol || !moved {
            break;
        }
    }
    let converged = kkt_violation <= params.tol;

    let support: Vec<usize> = (0..n).filter(|&i| p.alpha[i] > 0.0).collect();
    Ok(SvmModel {
        format_version: MODEL_FORMAT_VERSION,
        kernel: params.kernel,
        c: params.c,
        tol: params.tol,
        alphas: support.iter().map(|&i| p.alpha[i]).collect(),
        support_vectors: support.iter().map(|&i| x[i].clone()).collect(),
        support_labels: support.iter().map(|&i| p.y[i]).collect(),
        bias: p.b,
        standardizer,
        converged,
        kkt_violation,
    })
}
