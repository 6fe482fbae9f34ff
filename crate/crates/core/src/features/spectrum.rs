use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::FeatureError;

/// One-sided power spectral density on the bins `k·fs/N`, `k = 0..=N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
    /// Bin width `fs/N`.
    pub resolution: f64,
}

impl Spectrum {
    /// `Σ density·Δf` over bins with `low ≤ f ≤ high`.
    pub fn power_in(&self, low: f64, high: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| **f >= low && **f <= high)
            .map(|(_, p)| p * self.resolution)
            .sum()
    }

    /// Mean square of the signal (Parseval).
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.resolution
    }
}

/// Rectangular-window periodogram: `|X_k|² / (fs·N)`, interior bins doubled
/// so that `Σ density·Δf = mean(x²)`.
pub fn periodogram(signal: &[f64], fs: f64) -> Result<Spectrum, FeatureError> {
    let n = signal.len();
    if n < 8 {
        return Err(FeatureError::TooShort(n));
    }
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bins = n / 2 + 1;
    let scale = 1.0 / (fs * n as f64);
    let density = (0..bins)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            // the Nyquist bin exists only for even N and is not mirrored
            let mirrored = k != 0 && !(n % 2 == 0 && k == n / 2);
            if mirrored {
                2.0 * p
            } else {
                p
            }
        })
        .collect();
    let resolution = fs / n as f64;
    Ok(Spectrum {
        // k·fs/N rather than k·Δf keeps the Nyquist bin at exactly fs/2
        frequencies: (0..bins).map(|k| k as f64 * fs / n as f64).collect(),
        density,
        resolution,
    })
}
