//! Deterministic synthetic EEG with known ground truth.
//!
//! Every output is a pure function of its arguments and seed; see [`rng`]
//! for the generator contract.

pub mod rng;
mod sources;

pub use sources::{
    condition_number, generate_sources, mix_sources, random_mixing, Modulation, Side, SourceKind,
    SourceSpec, AR_COEFFICIENTS, BLINK_WIDTH_S, MAX_MIXING_CONDITION,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::recording::{Recording, RecordingError};
use rng::XorShift64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid source spec: {0}")]
    InvalidSpec(String),
    #[error("mixing matrix is rank deficient (condition number {condition:e})")]
    RankDeficientMixing { condition: f64 },
    #[error("mixing {mixing:?} does not match sources {sources:?}")]
    DimensionMismatch {
        mixing: (usize, usize),
        sources: (usize, usize),
    },
    #[error(transparent)]
    Recording(#[from] RecordingError),
}

/// Imagery class. Classifier labels are `Left = −1`, `Right = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Left,
    Right,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Left => -1.0,
            Label::Right => 1.0,
        }
    }

    pub fn from_sign(value: f64) -> Label {
        if value < 0.0 {
            Label::Left
        } else {
            Label::Right
        }
    }
}

/// One imagery epoch `start..end` with its preceding baseline window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trial {
    pub start: usize,
    pub end: usize,
    pub label: Label,
    pub baseline_start: usize,
    pub baseline_end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub sources: Matrix,
    pub mixing: Matrix,
    /// Rows of `sources` that are artifacts.
    pub artifact_sources: Vec<usize>,
    /// `mixing · sources` with the artifact rows zeroed.
    pub clean_mixture: Matrix,
    pub specs: Vec<SourceSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub recording: Recording,
    pub trials: Vec<Trial>,
    pub ground_truth: Option<GroundTruth>,
}

impl TrialSet {
    pub fn validate(&self) -> Result<(), SynthError> {
        let samples = self.recording.samples();
        let mut windows: Vec<(usize, usize)> = Vec::new();
        for t in &self.trials {
            if !(t.baseline_start < t.baseline_end
                && t.baseline_end <= t.start
                && t.start < t.end
                && t.end <= samples)
            {
                return Err(SynthError::InvalidSpec(format!(
                    "trial {}..{} (baseline {}..{}) invalid for {samples} samples",
                    t.start, t.end, t.baseline_start, t.baseline_end
                )));
            }
            windows.push((t.start, t.end));
        }
        windows.sort();
        if windows.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(SynthError::InvalidSpec("overlapping trial windows".into()));
        }
        Ok(())
    }
}

/// Knobs of [`make_dataset_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetOptions {
    pub trials_per_class: usize,
    pub channels: usize,
    pub sample_rate: f64,
    pub seed: u64,
    pub erd_depth: f64,
    pub baseline_s: f64,
    pub imagery_s: f64,
}

impl DatasetOptions {
    pub fn new(trials_per_class: usize, channels: usize, sample_rate: f64, seed: u64) -> Self {
        Self {
            trials_per_class,
            channels,
            sample_rate,
            seed,
            erd_depth: 0.7,
            baseline_s: 2.0,
            imagery_s: 2.0,
        }
    }
}

pub const MU_LEFT_HZ: f64 = 10.0;
pub const MU_RIGHT_HZ: f64 = 8.5;
pub const BETA_LEFT_HZ: f64 = 20.0;
pub const BETA_RIGHT_HZ: f64 = 23.0;
pub const LINE_HZ: f64 = 50.0;
const DATASET_MAX_CONDITION: f64 = 25.0;

/// Motor-imagery dataset with default ERD depth 0.7.
pub fn make_dataset(
    trials_per_class: usize,
    channels: usize,
    sample_rate: f64,
    seed: u64,
) -> Result<TrialSet, SynthError> {
    make_dataset_with(&DatasetOptions::new(trials_per_class, channels, sample_rate, seed))
}

/// Source specs used by [`make_dataset_with`] for a given channel count.
///
/// Seven sources (mu and beta per hemisphere, broadband noise, eye blink,
/// powerline) need seven channels. Narrower montages keep both mu rhythms
/// and both artifacts and add the left beta, right beta and noise in that
/// order as channels allow.
pub fn dataset_specs(channels: usize, erd_depth: f64) -> Vec<SourceSpec> {
    let mut specs = vec![
        SourceSpec::rhythm(SourceKind::MuRhythm, MU_LEFT_HZ, 1.0).lateralized(Side::Left, erd_depth),
        SourceSpec::rhythm(SourceKind::MuRhythm, MU_RIGHT_HZ, 1.0).lateralized(Side::Right, erd_depth),
    ];
    let extras = [
        SourceSpec::rhythm(SourceKind::BetaRhythm, BETA_LEFT_HZ, 0.6).lateralized(Side::Left, erd_depth),
        SourceSpec::rhythm(SourceKind::BetaRhythm, BETA_RIGHT_HZ, 0.6)
            .lateralized(Side::Right, erd_depth),
        SourceSpec::noise(0.5),
    ];
    let room = channels.saturating_sub(4).min(extras.len());
    specs.extend_from_slice(&extras[..room]);
    specs.push(SourceSpec::eyeblink(3.0));
    specs.push(SourceSpec::powerline(LINE_HZ, 0.8));
    specs
}

/// Alternating left/right schedule; each trial is a baseline window
/// followed directly by an imagery window.
pub fn trial_schedule(trials_per_class: usize, baseline: usize, imagery: usize) -> Vec<Trial> {
    let per_trial = baseline + imagery;
    (0..2 * trials_per_class)
        .map(|k| {
            let base = k * per_trial;
            Trial {
                start: base + baseline,
                end: base + per_trial,
                label: if k % 2 == 0 { Label::Left } else { Label::Right },
                baseline_start: base,
                baseline_end: base + baseline,
            }
        })
        .collect()
}

pub fn make_dataset_with(opts: &DatasetOptions) -> Result<TrialSet, SynthError> {
    if opts.trials_per_class == 0 {
        return Err(SynthError::InvalidSpec("need at least one trial per class".into()));
    }
    if opts.channels < 4 {
        return Err(SynthError::InvalidSpec(format!(
            "need at least 4 channels, got {}",
            opts.channels
        )));
    }
    let fs = opts.sample_rate;
    let baseline = (opts.baseline_s * fs).round() as usize;
    let imagery = (opts.imagery_s * fs).round() as usize;
    if baseline == 0 || imagery == 0 {
        return Err(SynthError::InvalidSpec("empty baseline or imagery window".into()));
    }
    let trials = trial_schedule(opts.trials_per_class, baseline, imagery);
    let samples = trials.last().map(|t| t.end).unwrap_or(0);

    let specs = dataset_specs(opts.channels, opts.erd_depth);
    let sources = generate_sources(&specs, samples as f64 / fs, fs, &trials, opts.seed)?;
    let mut rng = XorShift64::new(opts.seed ^ 0xA5A5_5A5A_C3C3_3C3C);
    let mixing = random_mixing(opts.channels, specs.len(), DATASET_MAX_CONDITION, &mut rng);
    let names = (0..opts.channels).map(|i| format!("ch{i}")).collect();
    let recording = mix_sources(&sources, &mixing, fs)?.with_channel_names(names)?;

    let artifact_sources: Vec<usize> = specs
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind.is_artifact())
        .map(|(i, _)| i)
        .collect();
    let mut clean_sources = sources.clone();
    for &k in &artifact_sources {
        clean_sources.row_mut(k).fill(0.0);
    }
    let clean_mixture = mixing.matmul(&clean_sources);

    Ok(TrialSet {
        recording,
        trials,
        ground_truth: Some(GroundTruth {
            sources,
            mixing,
            artifact_sources,
            clean_mixture,
            specs,
        }),
    })
}

/// Square, artifact-free-of-labels mixture used for timing runs: one source
/// per channel with pairwise distinct spectra (rhythms spread over 4–45 Hz
/// plus one broadband noise, one blink and one powerline source).
pub fn benchmark_recording(
    channels: usize,
    samples: usize,
    sample_rate: f64,
    seed: u64,
) -> Result<(Recording, GroundTruth), SynthError> {
    if channels < 3 {
        return Err(SynthError::InvalidSpec(format!(
            "benchmark needs at least 3 channels, got {channels}"
        )));
    }
    let rhythms = channels - 3;
    let mut specs: Vec<SourceSpec> = (0..rhythms)
        .map(|k| {
            let f = 4.0 + 41.0 * (k as f64 + 0.5) / rhythms as f64;
            let kind = if f < 13.0 {
                SourceKind::MuRhythm
            } else {
                SourceKind::BetaRhythm
            };
            SourceSpec::rhythm(kind, f.min(0.45 * sample_rate), 1.0)
        })
        .collect();
    specs.push(SourceSpec::noise(1.0));
    specs.push(SourceSpec::eyeblink(3.0));
    specs.push(SourceSpec::powerline(LINE_HZ.min(0.45 * sample_rate), 1.0));

    let sources = generate_sources(&specs, samples as f64 / sample_rate, sample_rate, &[], seed)?;
    let mut rng = XorShift64::new(seed ^ 0x5EED_BE4C_0000_0001);
    let mixing = random_mixing(channels, channels, 100.0, &mut rng);
    let recording = mix_sources(&sources, &mixing, sample_rate)?;
    let artifact_sources = vec![channels - 2, channels - 1];
    let mut clean = sources.clone();
    for &k in &artifact_sources {
        clean.row_mut(k).fill(0.0);
    }
    let clean_mixture = mixing.matmul(&clean);
    Ok((
        recording,
        GroundTruth {
            sources,
            mixing,
            artifact_sources,
            clean_mixture,
            specs,
        },
    ))
}
