use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::rng::XorShift64;
use super::{Label, SynthError, Trial};
use crate::linalg::{sym_eig, Matrix};
use crate::recording::Recording;

/// Default AR(2) coefficients of the broadband noise source.
pub const AR_COEFFICIENTS: (f64, f64) = (0.5, -0.2);
/// Width of one eye-blink pulse in seconds.
pub const BLINK_WIDTH_S: f64 = 0.3;
/// Largest accepted mixing-matrix condition number.
pub const MAX_MIXING_CONDITION: f64 = 1e6;

const MIN_SAMPLES: usize = 1000;
const AR_BURN_IN: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    MuRhythm,
    BetaRhythm,
    BroadbandNoise,
    EyeblinkArtifact,
    PowerlineArtifact,
}

impl SourceKind {
    pub fn is_rhythm(self) -> bool {
        matches!(self, SourceKind::MuRhythm | SourceKind::BetaRhythm)
    }

    pub fn is_artifact(self) -> bool {
        matches!(
            self,
            SourceKind::EyeblinkArtifact | SourceKind::PowerlineArtifact
        )
    }

    fn has_frequency(self) -> bool {
        self.is_rhythm() || self == SourceKind::PowerlineArtifact
    }
}

/// Hemisphere a rhythm source stands in for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Imagery of this class modulates rhythms on `self` (contralateral).
    pub fn modulating_label(self) -> Label {
        match self {
            Side::Left => Label::Right,
            Side::Right => Label::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    /// Amplitude multiplied by `1 − depth` during imagery.
    #[default]
    Erd,
    /// Amplitude multiplied by `1 + depth` during imagery.
    Ers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Hz; used by rhythm and powerline kinds.
    pub frequency: f64,
    pub amplitude: f64,
    /// Fraction in [0, 1]; rhythms only.
    pub erd_depth: f64,
    pub modulation: Modulation,
    /// Rhythms with a side are modulated by contralateral imagery trials.
    pub side: Option<Side>,
}

impl SourceSpec {
    pub fn rhythm(kind: SourceKind, frequency: f64, amplitude: f64) -> Self {
        Self {
            kind,
            frequency,
            amplitude,
            erd_depth: 0.0,
            modulation: Modulation::Erd,
            side: None,
        }
    }

    pub fn lateralized(mut self, side: Side, erd_depth: f64) -> Self {
        self.side = Some(side);
        self.erd_depth = erd_depth;
        self
    }

    pub fn noise(amplitude: f64) -> Self {
        Self::rhythm(SourceKind::BroadbandNoise, 0.0, amplitude)
    }

    pub fn eyeblink(amplitude: f64) -> Self {
        Self::rhythm(SourceKind::EyeblinkArtifact, 0.0, amplitude)
    }

    pub fn powerline(frequency: f64, amplitude: f64) -> Self {
        Self::rhythm(SourceKind::PowerlineArtifact, frequency, amplitude)
    }

    fn validate(&self, fs: f64) -> Result<(), SynthError> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(SynthError::InvalidSpec(format!(
                "amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if self.kind.has_frequency() && !(self.frequency > 0.0 && self.frequency < fs / 2.0) {
            return Err(SynthError::InvalidSpec(format!(
                "{:?} frequency {} Hz outside (0, {})",
                self.kind,
                self.frequency,
                fs / 2.0
            )));
        }
        if !(0.0..=1.0).contains(&self.erd_depth) {
            return Err(SynthError::InvalidSpec(format!(
                "erd_depth {} outside [0, 1]",
                self.erd_depth
            )));
        }
        Ok(())
    }

    /// Amplitude multiplier at `sample` under the given trial schedule.
    pub fn envelope(&self, sample: usize, trials: &[Trial]) -> f64 {
        let Some(side) = self.side else {
            return 1.0;
        };
        if !self.kind.is_rhythm() || self.erd_depth == 0.0 {
            return 1.0;
        }
        let label = side.modulating_label();
        let active = trials
            .iter()
            .any(|t| t.label == label && (t.start..t.end).contains(&sample));
        match (active, self.modulation) {
            (false, _) => 1.0,
            (true, Modulation::Erd) => 1.0 - self.erd_depth,
            (true, Modulation::Ers) => 1.0 + self.erd_depth,
        }
    }
}

/// Per-row generator seed; rows draw from independent streams.
fn row_seed(seed: u64, row: usize) -> u64 {
    seed ^ (row as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Renders one row per spec over `duration_s` seconds at `fs`.
///
/// Rhythms and powerline are sinusoids with a seeded phase; rhythms are
/// multiplied by their ERD/ERS envelope. Broadband noise is the AR(2)
/// process `x_t = 0.5·x_{t−1} − 0.2·x_{t−2} + e_t` with standard normal
/// innovations. Eye blinks are 0.3 s raised-cosine pulses separated by
/// 2–5 s seeded gaps.
pub fn generate_sources(
    specs: &[SourceSpec],
    duration_s: f64,
    fs: f64,
    trials: &[Trial],
    seed: u64,
) -> Result<Matrix, SynthError> {
    if specs.is_empty() {
        return Err(SynthError::InvalidSpec("no source specs".into()));
    }
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(SynthError::InvalidSpec(format!("sample rate {fs}")));
    }
    let samples = (duration_s * fs).round() as usize;
    if samples < MIN_SAMPLES {
        return Err(SynthError::InvalidSpec(format!(
            "{samples} samples, need at least {MIN_SAMPLES}"
        )));
    }
    for t in trials {
        if !(t.baseline_start < t.baseline_end
            && t.baseline_end <= t.start
            && t.start < t.end
            && t.end <= samples)
        {
            return Err(SynthError::InvalidSpec(format!(
                "trial window {}..{} (baseline {}..{}) invalid for {samples} samples",
                t.start, t.end, t.baseline_start, t.baseline_end
            )));
        }
    }
    for spec in specs {
        spec.validate(fs)?;
    }

    let mut out = Matrix::zeros(specs.len(), samples);
    for (k, spec) in specs.iter().enumerate() {
        let mut rng = XorShift64::new(row_seed(seed, k));
        let row = out.row_mut(k);
        match spec.kind {
            SourceKind::MuRhythm | SourceKind::BetaRhythm | SourceKind::PowerlineArtifact => {
                let phase = rng.uniform(0.0, TAU);
                let w = TAU * spec.frequency / fs;
                for (t, x) in row.iter_mut().enumerate() {
                    *x = spec.amplitude * spec.envelope(t, trials) * (w * t as f64 + phase).sin();
                }
            }
            SourceKind::BroadbandNoise => {
                let (a1, a2) = AR_COEFFICIENTS;
                let (mut x1, mut x2) = (0.0, 0.0);
                for _ in 0..AR_BURN_IN {
                    let x = a1 * x1 + a2 * x2 + rng.gaussian();
                    x2 = x1;
                    x1 = x;
                }
                for v in row.iter_mut() {
                    let x = a1 * x1 + a2 * x2 + rng.gaussian();
                    x2 = x1;
                    x1 = x;
                    *v = spec.amplitude * x;
                }
            }
            SourceKind::EyeblinkArtifact => {
                let width = (BLINK_WIDTH_S * fs).round().max(2.0) as usize;
                let mut onset = (rng.uniform(0.5, 3.0) * fs) as usize;
                while onset < samples {
                    for i in 0..width.min(samples - onset) {
                        let u = i as f64 / width as f64;
                        row[onset + i] = spec.amplitude * 0.5 * (1.0 - (TAU * u).cos());
                    }
                    onset += width + (rng.uniform(2.0, 5.0) * fs) as usize;
                }
            }
        }
    }
    Ok(out)
}

/// 2-norm condition number of a full-column-rank matrix, via `aᵀa`.
pub fn condition_number(a: &Matrix) -> f64 {
    let gram = a.transpose().matmul(a);
    match sym_eig(&gram, 1e-13) {
        Ok(e) => {
            let max = e.values[0];
            let min = *e.values.last().unwrap();
            if min <= 0.0 {
                f64::INFINITY
            } else {
                (max / min).sqrt()
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// `a · sources` as a recording at `fs`.
pub fn mix_sources(sources: &Matrix, a: &Matrix, fs: f64) -> Result<Recording, SynthError> {
    if a.cols() != sources.rows() {
        return Err(SynthError::DimensionMismatch {
            mixing: a.shape(),
            sources: sources.shape(),
        });
    }
    let condition = if a.rows() < a.cols() {
        f64::INFINITY
    } else {
        condition_number(a)
    };
    if !(condition <= MAX_MIXING_CONDITION) {
        return Err(SynthError::RankDeficientMixing { condition });
    }
    Ok(Recording::new(a.matmul(sources), fs)?)
}

/// Gaussian `rows × cols` mixing matrix redrawn until its condition number
/// is at most `max_condition`.
pub fn random_mixing(rows: usize, cols: usize, max_condition: f64, rng: &mut XorShift64) -> Matrix {
    loop {
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.gaussian()).collect();
        let a = Matrix::from_vec(rows, cols, data).expect("finite gaussian draws");
        if condition_number(&a) <= max_condition {
            return a;
        }
    }
}
