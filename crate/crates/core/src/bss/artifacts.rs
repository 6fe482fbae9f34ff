use serde::{Deserialize, Serialize};

use super::{BssError, SeparationResult};
use crate::features::periodogram;
use crate::recording::Recording;

/// Spectral thresholds for artifact-like components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactCriteria {
    /// Upper edge of the eye-blink band, Hz.
    pub low_freq_cutoff: f64,
    /// Flag when the power fraction at or below the cutoff exceeds this.
    pub low_freq_fraction: f64,
    /// Powerline band, Hz.
    pub line_band: (f64, f64),
    /// Flag when the power fraction inside the powerline band exceeds this.
    pub line_fraction: f64,
}

impl Default for ArtifactCriteria {
    fn default() -> Self {
        Self {
            low_freq_cutoff: 4.0,
            low_freq_fraction: 0.6,
            line_band: (49.0, 51.0),
            line_fraction: 0.5,
        }
    }
}

/// Fraction of total power in `[0, cutoff]` Hz. Zero for a silent signal.
pub fn low_frequency_fraction(signal: &[f64], fs: f64, cutoff: f64) -> f64 {
    band_fraction(signal, fs, 0.0, cutoff)
}

fn band_fraction(signal: &[f64], fs: f64, low: f64, high: f64) -> f64 {
    match periodogram(signal, fs) {
        Ok(spec) => {
            let total = spec.total_power();
            if total > 0.0 {
                spec.power_in(low, high) / total
            } else {
                0.0
            }
        }
        Err(_) => 0.0,
    }
}

/// Indices of components that look like eye blinks (mostly below the
/// cutoff) or powerline interference (mostly inside the line band).
pub fn flag_artifact_components(res: &SeparationResult, sample_rate: f64, criteria: &ArtifactCriteria) -> Vec<usize> {
    (0..res.components())
        .filter(|&k| {
            let s = res.sources.row(k);
            let low = band_fraction(s, sample_rate, 0.0, criteria.low_freq_cutoff);
            let line = band_fraction(s, sample_rate, criteria.line_band.0, criteria.line_band.1);
            low > criteria.low_freq_fraction || line > criteria.line_fraction
        })
        .collect()
}

/// Back-projects the sources with the listed components zeroed and adds the
/// channel means back.
pub fn remove_components(res: &SeparationResult, indices: &[usize]) -> Result<Recording, BssError> {
    let r = res.components();
    if let Some(&index) = indices.iter().find(|&&i| i >= r) {
        return Err(BssError::IndexOutOfRange { index, components: r });
    }
    let mut kept = res.sources.clone();
    for &i in indices {
        kept.row_mut(i).fill(0.0);
    }
    let mut data = res.mixing_estimate.matmul(&kept);
    for (i, &m) in res.means.iter().enumerate() {
        data.row_mut(i).iter_mut().for_each(|v| *v += m);
    }
    let rec = Recording::new(data, res.sample_rate).expect("sample rate was validated with the input");
    Ok(match &res.channel_names {
        Some(names) => rec.with_channel_names(names.clone()).expect("one name per channel"),
        None => rec,
    })
}
