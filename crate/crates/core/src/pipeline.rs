//! End-to-end motor-imagery processing: separate, clean, extract band
//! features per trial and cross-validate a classifier.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bss::{flag_artifact_components, remove_components, sobi_with, ArtifactCriteria, Method, SobiOptions, DEFAULT_LAGS};
use crate::features::{extract_features, Band};
use crate::io::read_trial_set;
use crate::recording::Recording;
use crate::svm::{cross_validate, Kernel, LabeledDataset, SvmParams, DEFAULT_C, DEFAULT_MAX_PASSES, DEFAULT_TOL};
use crate::synth::{Label, TrialSet};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Load,
    Separation,
    Artifacts,
    Features,
    Classification,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Separation => "separation",
            Stage::Artifacts => "artifacts",
            Stage::Features => "features",
            Stage::Classification => "classification",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    fn at(stage: Stage) -> impl FnOnce(&dyn fmt::Display) -> PipelineError {
        move |e| PipelineError {
            stage,
            message: e.to_string(),
        }
    }
}

fn tag<T, E: fmt::Display>(stage: Stage, r: Result<T, E>) -> Result<T, PipelineError> {
    r.map_err(|e| PipelineError::at(stage)(&e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Jacobi,
    Schur,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Jacobi => vec![Method::Jacobi],
            MethodChoice::Schur => vec![Method::Schur],
            MethodChoice::Both => vec![Method::Schur, Method::Jacobi],
        }
    }
}

impl std::str::FromStr for MethodChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "both" => Ok(MethodChoice::Both),
            other => match other.parse::<Method>()? {
                Method::Jacobi => Ok(MethodChoice::Jacobi),
                Method::Schur => Ok(MethodChoice::Schur),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSettings {
    pub c: f64,
    pub kernel: Kernel,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmSettings {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            kernel: Kernel::Linear,
            tol: DEFAULT_TOL,
            max_passes: DEFAULT_MAX_PASSES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub lags: Vec<usize>,
    pub method: MethodChoice,
    /// Jacobi stopping threshold.
    pub tol: f64,
    pub bands: Vec<Band>,
    pub artifacts: ArtifactCriteria,
    pub svm: SvmSettings,
    pub seed: u64,
    pub folds: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            lags: DEFAULT_LAGS.to_vec(),
            method: MethodChoice::Schur,
            tol: crate::bss::DEFAULT_JAD_TOL,
            bands: Band::defaults(),
            artifacts: ArtifactCriteria::default(),
            svm: SvmSettings::default(),
            seed: 0,
            folds: DEFAULT_FOLDS,
        }
    }
}

impl PipelineConfig {
    /// Checks everything that does not depend on the data.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |message: String| {
            Err(PipelineError {
                stage: Stage::Config,
                message,
            })
        };
        if self.lags.is_empty() {
            return fail("lag list is empty".into());
        }
        if !(self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if self.bands.is_empty() {
            return fail("no frequency bands".into());
        }
        if let Some(b) = self.bands.iter().find(|b| !(b.low >= 0.0 && b.low < b.high)) {
            return fail(format!("band {} [{}, {}] is empty", b.name, b.low, b.high));
        }
        let a = &self.artifacts;
        if !(a.low_freq_cutoff > 0.0 && a.line_band.0 < a.line_band.1) {
            return fail("artifact bands are empty".into());
        }
        if !(self.svm.c > 0.0) {
            return fail(format!("svm c must be positive, got {}", self.svm.c));
        }
        if !(self.svm.tol > 0.0) {
            return fail(format!("svm tol must be positive, got {}", self.svm.tol));
        }
        if let Kernel::Rbf { gamma } = self.svm.kernel {
            if !(gamma > 0.0) {
                return fail(format!("rbf gamma must be positive, got {gamma}"));
            }
        }
        if self.folds < 2 {
            return fail(format!("need at least 2 folds, got {}", self.folds));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let cfg: Self = tag(Stage::Config, serde_json::from_str(text))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn svm_params(&self) -> SvmParams {
        SvmParams {
            c: self.svm.c,
            kernel: self.svm.kernel,
            tol: self.svm.tol,
            max_passes: self.svm.max_passes,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub label: Label,
    pub predicted: Label,
    pub decision: f64,
    /// Mean over channels of the mu-band ERD% of imagery against baseline.
    pub mu_erd_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRun {
    pub method: Method,
    pub accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub flagged_components: Vec<usize>,
    pub separation_seconds: f64,
    pub warnings: Vec<String>,
    pub trials: Vec<TrialOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub format_version: u32,
    pub runs: Vec<MethodRun>,
}

impl PipelineReport {
    pub fn run(&self, method: Method) -> Option<&MethodRun> {
        self.runs.iter().find(|r| r.method == method)
    }

    /// Same report with wall-clock fields zeroed.
    pub fn without_timing(&self) -> PipelineReport {
        let mut out = self.clone();
        out.runs.iter_mut().for_each(|r| r.separation_seconds = 0.0);
        out
    }
}

/// Loads a trial set and runs [`run_pipeline_on`].
pub fn run_pipeline(config: &PipelineConfig, dataset: &Path) -> Result<PipelineReport, PipelineError> {
    config.validate()?;
    let ts = tag(Stage::Load, read_trial_set(dataset))?;
    run_pipeline_on(config, &ts)
}

pub fn run_pipeline_on(config: &PipelineConfig, ts: &TrialSet) -> Result<PipelineReport, PipelineError> {
    config.validate()?;
    if ts.trials.is_empty() {
        return Err(PipelineError {
            stage: Stage::Load,
            message: "dataset has no trials".into(),
        });
    }
    let fs = ts.recording.sample_rate();
    for b in &config.bands {
        tag(Stage::Config, b.validate(fs))?;
    }
    let runs = config
        .method
        .methods()
        .into_iter()
        .map(|m| run_method(config, ts, m))
        .collect::<Result<_, _>>()?;
    Ok(PipelineReport {
        format_version: 1,
        runs,
    })
}

fn run_method(config: &PipelineConfig, ts: &TrialSet, method: Method) -> Result<MethodRun, PipelineError> {
    let opts = SobiOptions::new(method).lags(&config.lags).tol(config.tol);
    let sep = tag(Stage::Separation, sobi_with(&ts.recording, &opts))?;
    let fs = ts.recording.sample_rate();
    let flagged = flag_artifact_components(&sep, fs, &config.artifacts);
    let cleaned = tag(Stage::Artifacts, remove_components(&sep, &flagged))?;

    let mut vectors = Vec::with_capacity(ts.trials.len());
    let mut erd = Vec::with_capacity(ts.trials.len());
    let mu = config
        .bands
        .iter()
        .find(|b| b.name == "mu")
        .cloned()
        .unwrap_or_else(Band::mu);
    for t in &ts.trials {
        let imagery = tag(Stage::Features, cleaned.window(t.start, t.end))?;
        let baseline = tag(Stage::Features, cleaned.window(t.baseline_start, t.baseline_end))?;
        vectors.push(tag(Stage::Features, extract_features(&imagery, &config.bands))?.values);
        erd.push(tag(Stage::Features, mean_erd(&imagery, &baseline, &mu))?);
    }
    let labels = ts.trials.iter().map(|t| t.label.sign()).collect();
    let data = tag(Stage::Classification, LabeledDataset::new(vectors, labels))?;
    let cv = tag(Stage::Classification, cross_validate(&data, config.folds, &config.svm_params()))?;

    let trials = ts
        .trials
        .iter()
        .enumerate()
        .map(|(k, t)| TrialOutcome {
            trial: k,
            label: t.label,
            predicted: Label::from_sign(cv.predictions[k]),
            decision: cv.decisions[k],
            mu_erd_percent: erd[k],
        })
        .collect();
    Ok(MethodRun {
        method,
        accuracy: cv.mean_accuracy,
        fold_accuracies: cv.fold_accuracies,
        flagged_components: flagged,
        separation_seconds: sep.elapsed_seconds,
        warnings: sep.diagnostics.warnings.iter().map(ToString::to_string).collect(),
        trials,
    })
}

fn mean_erd(imagery: &Recording, baseline: &Recording, band: &Band) -> Result<f64, crate::features::FeatureError> {
    let fs = imagery.sample_rate();
    let mut total = 0.0;
    for c in 0..imagery.channels() {
        let active = crate::features::band_power(imagery.channel(c), band, fs)?;
        let reference = crate::features::band_power(baseline.channel(c), band, fs)?;
        total += crate::features::erd_percentage(active, reference)?;
    }
    Ok(total / imagery.channels() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{make_dataset, DatasetOptions};

    #[test]
    fn config_defaults_and_json() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(PipelineConfig::from_json(&text).unwrap(), cfg);
        // missing fields take defaults
        let partial = PipelineConfig::from_json(r#"{"method":"both","folds":4}"#).unwrap();
        assert_eq!(partial.method, MethodChoice::Both);
        assert_eq!(partial.lags, DEFAULT_LAGS.to_vec());
    }

    #[test]
    fn invalid_config_is_tagged() {
        let err = PipelineConfig::from_json(r#"{"folds":1}"#).unwrap_err();
        assert_eq!(err.stage, Stage::Config);
        assert!(err.to_string().starts_with("config stage:"));
        let err = PipelineConfig::from_json("{").unwrap_err();
        assert_eq!(err.stage, Stage::Config);
    }

    #[test]
    fn zero_trials_is_tagged() {
        let mut ts = make_dataset(2, 6, 128.0, 1).unwrap();
        ts.trials.clear();
        let err = run_pipeline_on(&PipelineConfig::default(), &ts).unwrap_err();
        assert_eq!(err.stage, Stage::Load);
    }

    #[test]
    fn small_dataset_runs_end_to_end() {
        let ts = make_dataset_with_depth(8, 0.7, 3);
        let cfg = PipelineConfig {
            folds: 4,
            seed: 3,
            ..PipelineConfig::default()
        };
        let report = run_pipeline_on(&cfg, &ts).unwrap();
        let run = report.run(Method::Schur).unwrap();
        assert_eq!(run.trials.len(), 16);
        assert!(run.accuracy >= 0.75, "{}", run.accuracy);
        assert!(run.separation_seconds > 0.0);
        // imagery windows carry ERD on average
        let mean_erd = run.trials.iter().map(|t| t.mu_erd_percent).sum::<f64>() / 16.0;
        assert!(mean_erd < -10.0, "{mean_erd}");
    }

    fn make_dataset_with_depth(tpc: usize, depth: f64, seed: u64) -> TrialSet {
        let mut o = DatasetOptions::new(tpc, 8, 250.0, seed);
        o.erd_depth = depth;
        crate::synth::make_dataset_with(&o).unwrap()
    }
}
