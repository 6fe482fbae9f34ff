//! Spectral features: rectangular-window periodogram, band power, energy
//! and ERD/ERS percentages.
//!
//! Band selection happens on periodogram bins; there is no time-domain
//! filtering.

mod spectrum;

pub use spectrum::{periodogram, Spectrum};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recording::Recording;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("signal has {0} samples, need at least 8")]
    TooShort(usize),
    #[error("empty signal")]
    Empty,
    #[error("reference power must be positive, got {0}")]
    ZeroReference(f64),
    #[error("band {name} [{low}, {high}] Hz invalid at {fs} Hz")]
    InvalidBand {
        name: String,
        low: f64,
        high: f64,
        fs: f64,
    },
    #[error("epoch has {samples} samples, need at least {needed} (one second)")]
    EpochTooShort { samples: usize, needed: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub name: String,
    pub low: f64,
    pub high: f64,
}

impl Band {
    pub fn new(name: &str, low: f64, high: f64) -> Self {
        Self {
            name: name.to_string(),
            low,
            high,
        }
    }

    pub fn mu() -> Self {
        Self::new("mu", 8.0, 12.0)
    }

    pub fn beta() -> Self {
        Self::new("beta", 13.0, 30.0)
    }

    pub fn defaults() -> Vec<Band> {
        vec![Self::mu(), Self::beta()]
    }

    /// `0 ≤ low < high ≤ fs/2`.
    pub fn validate(&self, fs: f64) -> Result<(), FeatureError> {
        if self.low >= 0.0 && self.low < self.high && self.high <= fs / 2.0 {
            Ok(())
        } else {
            Err(FeatureError::InvalidBand {
                name: self.name.clone(),
                low: self.low,
                high: self.high,
                fs,
            })
        }
    }
}

/// Power in `band`: periodogram density times bin width, summed over bins
/// with `low ≤ f ≤ high`.
pub fn band_power(signal: &[f64], band: &Band, fs: f64) -> Result<f64, FeatureError> {
    band.validate(fs)?;
    Ok(periodogram(signal, fs)?.power_in(band.low, band.high))
}

/// `Σ x²`.
pub fn energy(signal: &[f64]) -> Result<f64, FeatureError> {
    if signal.is_empty() {
        return Err(FeatureError::Empty);
    }
    Ok(signal.iter().map(|x| x * x).sum())
}

/// `100·(active − reference)/reference`: negative is ERD, positive ERS.
pub fn erd_percentage(active_power: f64, reference_power: f64) -> Result<f64, FeatureError> {
    if !(reference_power > 0.0) {
        return Err(FeatureError::ZeroReference(reference_power));
    }
    Ok(100.0 * (active_power - reference_power) / reference_power)
}

/// Per-channel band powers followed by per-channel energies, laid out as
/// `[band₀ ch₀..chₙ₋₁, band₁ ch₀..chₙ₋₁, …, energy ch₀..chₙ₋₁]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub channels: usize,
    pub bands: Vec<String>,
}

impl FeatureVector {
    pub fn band(&self, b: usize) -> &[f64] {
        &self.values[b * self.channels..(b + 1) * self.channels]
    }

    pub fn energy(&self) -> &[f64] {
        let b = self.bands.len();
        &self.values[b * self.channels..(b + 1) * self.channels]
    }

    /// Column headers matching the layout of `values`.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.values.len());
        for band in &self.bands {
            names.extend((0..self.channels).map(|c| format!("{band}_ch{c}")));
        }
        names.extend((0..self.channels).map(|c| format!("energy_ch{c}")));
        names
    }
}

pub fn extract_features(epoch: &Recording, bands: &[Band]) -> Result<FeatureVector, FeatureError> {
    let fs = epoch.sample_rate();
    let needed = fs.ceil() as usize;
    if epoch.samples() < needed {
        return Err(FeatureError::EpochTooShort {
            samples: epoch.samples(),
            needed,
        });
    }
    for b in bands {
        b.validate(fs)?;
    }
    let n = epoch.channels();
    let mut values = vec![0.0; (bands.len() + 1) * n];
    for c in 0..n {
        let x = epoch.channel(c);
        let spec = periodogram(x, fs)?;
        for (b, band) in bands.iter().enumerate() {
            values[b * n + c] = spec.power_in(band.low, band.high);
        }
        values[bands.len() * n + c] = energy(x)?;
    }
    Ok(FeatureVector {
        values,
        channels: n,
        bands: bands.iter().map(|b| b.name.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn sine(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|t| (TAU * freq * t as f64 / fs).sin()).collect()
    }

    #[test]
    fn unit_sinusoid_band_powers() {
        let x = sine(10.0, 250.0, 1000);
        let mu = band_power(&x, &Band::mu(), 250.0).unwrap();
        assert!((mu - 0.5).abs() <= 0.01, "mu power {mu}");
        let beta = band_power(&x, &Band::beta(), 250.0).unwrap();
        assert!(beta <= 0.001);
        assert_eq!(band_power(&[0.0; 64], &Band::mu(), 250.0).unwrap(), 0.0);
    }

    #[test]
    fn energy_cases() {
        assert_eq!(energy(&[1.0, 2.0, 3.0]).unwrap(), 14.0);
        assert_eq!(energy(&[0.0; 5]).unwrap(), 0.0);
        assert_eq!(energy(&[3.0, 6.0, 9.0]).unwrap(), 9.0 * 14.0);
        assert_eq!(energy(&[]), Err(FeatureError::Empty));
    }

    #[test]
    fn erd_fixed_cases() {
        assert_eq!(erd_percentage(10.0, 10.0).unwrap(), 0.0);
        assert_eq!(erd_percentage(5.0, 10.0).unwrap(), -50.0);
        assert_eq!(erd_percentage(14.0, 10.0).unwrap(), 40.0);
        assert!(matches!(erd_percentage(1.0, 0.0), Err(FeatureError::ZeroReference(_))));
    }

    #[test]
    fn band_validation() {
        assert!(band_power(&[1.0; 16], &Band::new("x", 10.0, 5.0), 250.0).is_err());
        assert!(band_power(&[1.0; 16], &Band::new("x", 10.0, 200.0), 250.0).is_err());
    }

    #[test]
    fn single_channel_epoch_features() {
        let x = sine(10.0, 250.0, 500);
        let rec = Recording::new(Matrix::from_rows(&[x.clone()]).unwrap(), 250.0).unwrap();
        let f = extract_features(&rec, &Band::defaults()).unwrap();
        assert_eq!(f.values.len(), 3);
        assert!((f.values[0] - 0.5).abs() < 0.01);
        assert!(f.values[1] < 1e-3);
        assert!((f.values[2] - energy(&x).unwrap()).abs() < 1e-9);
        assert_eq!(f.column_names(), vec!["mu_ch0", "beta_ch0", "energy_ch0"]);
    }

    #[test]
    fn zero_epoch_and_short_epoch() {
        let rec = Recording::new(Matrix::zeros(2, 250), 250.0).unwrap();
        let f = extract_features(&rec, &Band::defaults()).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
        let short = Recording::new(Matrix::zeros(2, 249), 250.0).unwrap();
        assert!(matches!(
            extract_features(&short, &Band::defaults()),
            Err(FeatureError::EpochTooShort { .. })
        ));
    }

    #[test]
    fn channel_permutation_permutes_blocks() {
        let a = sine(10.0, 250.0, 300);
        let b = sine(21.0, 250.0, 300);
        let rec = Recording::new(Matrix::from_rows(&[a.clone(), b.clone()]).unwrap(), 250.0).unwrap();
        let swapped = Recording::new(Matrix::from_rows(&[b, a]).unwrap(), 250.0).unwrap();
        let f = extract_features(&rec, &Band::defaults()).unwrap();
        let g = extract_features(&swapped, &Band::defaults()).unwrap();
        for blk in 0..3 {
            assert_eq!(f.values[2 * blk], g.values[2 * blk + 1]);
            assert_eq!(f.values[2 * blk + 1], g.values[2 * blk]);
        }
    }

    proptest! {
        #[test]
        fn erd_monotone_and_zero_only_at_reference(a in 0.0f64..100.0, d in 1e-6f64..10.0, r in 0.1f64..100.0) {
            let lo = erd_percentage(a, r).unwrap();
            let hi = erd_percentage(a + d, r).unwrap();
            prop_assert!(hi > lo);
            prop_assert_eq!(erd_percentage(r, r).unwrap(), 0.0);
        }

        #[test]
        fn features_invariant_under_time_reversal(seed in any::<u64>(), n in 250usize..400) {
            let mut rng = crate::synth::rng::XorShift64::new(seed);
            let x: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
            let y: Vec<f64> = x.iter().rev().copied().collect();
            let rx = Recording::new(Matrix::from_rows(&[x]).unwrap(), 250.0).unwrap();
            let ry = Recording::new(Matrix::from_rows(&[y]).unwrap(), 250.0).unwrap();
            let fx = extract_features(&rx, &Band::defaults()).unwrap();
            let fy = extract_features(&ry, &Band::defaults()).unwrap();
            for (u, v) in fx.values.iter().zip(&fy.values) {
                prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
            }
        }
    }
}
