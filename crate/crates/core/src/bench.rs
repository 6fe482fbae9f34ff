//! Timing comparison of the Jacobi and Schur separations.
//!
//! Each dataset is separated with one method at a time: one discarded
//! warm-up run, then `repetitions` timed runs whose median is reported.
//! Absolute seconds depend on the machine; the ratio is what carries over.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bss::{sobi_with, BssError, Method, SobiOptions, DEFAULT_LAGS};
use crate::synth::{benchmark_recording, SynthError};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Published reference times `(schur_s, jacobi_s)` per dataset.
pub const REFERENCE_TIMES: [(f64, f64); 5] = [
    (1.567458, 9.845235),
    (1.845277, 10.379097),
    (1.814460, 11.514513),
    (1.739605, 9.800095),
    (1.600469, 9.799495),
];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("need at least 3 repetitions, got {0}")]
    TooFewRepetitions(usize),
    #[error("need at least one dataset")]
    NoDatasets,
    #[error("dataset {dataset}: {source}")]
    Synth {
        dataset: usize,
        #[source]
        source: SynthError,
    },
    #[error("dataset {dataset}, {method}: {source}")]
    Separation {
        dataset: usize,
        method: Method,
        #[source]
        source: BssError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOptions {
    pub datasets: usize,
    pub channels: usize,
    pub samples: usize,
    pub sample_rate: f64,
    pub lags: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
}

impl BenchOptions {
    /// 5 datasets of 16 channels × 30000 samples at 250 Hz, lags 1..10,
    /// 5 repetitions.
    pub fn new(seed: u64) -> Self {
        Self {
            datasets: 5,
            channels: 16,
            samples: 30_000,
            sample_rate: 250.0,
            lags: DEFAULT_LAGS.to_vec(),
            repetitions: 5,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: usize,
    pub channels: usize,
    pub samples: usize,
    pub time_schur_s: f64,
    pub time_jacobi_s: f64,
    /// `time_jacobi_s / time_schur_s`.
    pub ratio: f64,
    pub score_schur: f64,
    pub score_jacobi: f64,
    pub runs_schur_s: Vec<f64>,
    pub runs_jacobi_s: Vec<f64>,
    pub jacobi_sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub format_version: u32,
    pub options: BenchOptions,
    pub aggregation: String,
    pub environment: String,
    pub rows: Vec<BenchRow>,
}

impl BenchmarkReport {
    pub fn min_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min)
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Times positive and each ratio equal to its quotient within 1e−9.
    pub fn is_consistent(&self) -> bool {
        self.rows.iter().all(|r| {
            r.time_schur_s > 0.0
                && r.time_jacobi_s > 0.0
                && (r.ratio - r.time_jacobi_s / r.time_schur_s).abs() <= 1e-9 * r.ratio.abs().max(1.0)
        })
    }

    /// Aligned text table in the layout of the reference table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:>7}  {:>8}  {:>7}  {:>12}  {:>12}  {:>7}  {:>11}  {:>11}",
            "dataset", "channels", "samples", "schur_s", "jacobi_s", "ratio", "score_schur", "score_jacobi"
        )
        .unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{:>7}  {:>8}  {:>7}  {:>12.6}  {:>12.6}  {:>7.3}  {:>11.3e}  {:>11.3e}",
                r.dataset, r.channels, r.samples, r.time_schur_s, r.time_jacobi_s, r.ratio, r.score_schur, r.score_jacobi
            )
            .unwrap();
        }
        writeln!(out, "timing: {}", self.aggregation).unwrap();
        writeln!(out, "environment: {}", self.environment).unwrap();
        out
    }

    /// Plain-language comparison with the published ratios.
    pub fn comparison(&self) -> String {
        let (lo, hi) = reference_ratio_range();
        let mut out = String::new();
        writeln!(
            out,
            "Measured jacobi/schur ratio: {:.2} to {:.2} over {} datasets.",
            self.min_ratio(),
            self.max_ratio(),
            self.rows.len()
        )
        .unwrap();
        writeln!(
            out,
            "Published ratios: {lo:.2} to {hi:.2} (dataset 1: {:.6} s / {:.6} s = {:.4}).",
            REFERENCE_TIMES[0].1,
            REFERENCE_TIMES[0].0,
            reference_ratios()[0]
        )
        .unwrap();
        let verdict = if self.min_ratio() > 1.0 {
            "The Schur variant is faster on every dataset, matching the published ordering."
        } else {
            "The Schur variant is NOT faster on every dataset here."
        };
        writeln!(out, "{verdict}").unwrap();
        writeln!(
            out,
            "Absolute seconds depend on hardware and dataset size, which the reference does not state; only the ordering and ratio are comparable."
        )
        .unwrap();
        out
    }
}

pub fn reference_ratios() -> Vec<f64> {
    REFERENCE_TIMES.iter().map(|(s, j)| j / s).collect()
}

pub fn reference_ratio_range() -> (f64, f64) {
    let r = reference_ratios();
    (
        r.iter().cloned().fold(f64::INFINITY, f64::min),
        r.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    )
}

pub fn environment_note() -> String {
    let cpus = std::thread::available_parallelism().map_or(0, |n| n.get());
    let build = if cfg!(debug_assertions) { "with" } else { "without" };
    format!(
        "{} {}, {cpus} logical CPUs, single-threaded timing, built {build} debug assertions",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn run_benchmark(opts: &BenchOptions) -> Result<BenchmarkReport, BenchError> {
    if opts.repetitions < 3 {
        return Err(BenchError::TooFewRepetitions(opts.repetitions));
    }
    if opts.datasets == 0 {
        return Err(BenchError::NoDatasets);
    }
    let mut rows = Vec::with_capacity(opts.datasets);
    for d in 0..opts.datasets {
        let dataset = d + 1;
        let seed = opts.seed.wrapping_add(d as u64);
        let (rec, _) = benchmark_recording(opts.channels, opts.samples, opts.sample_rate, seed)
            .map_err(|source| BenchError::Synth { dataset, source })?;

        let timed = |method: Method| -> Result<(Vec<f64>, f64, usize), BenchError> {
            let so = SobiOptions::new(method).lags(&opts.lags);
            let run = || {
                sobi_with(&rec, &so).map_err(|source| BenchError::Separation {
                    dataset,
                    method,
                    source,
                })
            };
            let warm = run()?;
            let mut times = Vec::with_capacity(opts.repetitions);
            for _ in 0..opts.repetitions {
                times.push(run()?.elapsed_seconds.max(f64::MIN_POSITIVE));
            }
            Ok((times, warm.diagnostics.score, warm.diagnostics.iterations))
        };
        let (runs_schur_s, score_schur, _) = timed(Method::Schur)?;
        let (runs_jacobi_s, score_jacobi, jacobi_sweeps) = timed(Method::Jacobi)?;
        let time_schur_s = median(&runs_schur_s);
        let time_jacobi_s = median(&runs_jacobi_s);
        rows.push(BenchRow {
            dataset,
            channels: opts.channels,
            samples: opts.samples,
            time_schur_s,
            time_jacobi_s,
            ratio: time_jacobi_s / time_schur_s,
            score_schur,
            score_jacobi,
            runs_schur_s,
            runs_jacobi_s,
            jacobi_sweeps,
        });
    }
    Ok(BenchmarkReport {
        format_version: REPORT_FORMAT_VERSION,
        options: opts.clone(),
        aggregation: format!(
            "median of {} runs after one discarded warm-up, methods run sequentially",
            opts.repetitions
        ),
        environment: environment_note(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_ratios_match_published_times() {
        let r = reference_ratios();
        assert!((r[0] - 6.2810).abs() < 5e-5);
        let (lo, hi) = reference_ratio_range();
        assert!((lo - 5.6247).abs() < 5e-4 && (hi - 6.3460).abs() < 5e-4, "{lo} {hi}");
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn small_benchmark_is_consistent() {
        let opts = BenchOptions {
            datasets: 2,
            channels: 6,
            samples: 3000,
            repetitions: 3,
            ..BenchOptions::new(7)
        };
        let report = run_benchmark(&opts).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.is_consistent());
        assert!(report.rows.iter().all(|r| r.runs_schur_s.len() == 3));
        let table = report.table();
        assert_eq!(table.lines().count(), 2 + 3);
        assert!(report.comparison().contains("Published ratios: 5.62 to 6.35"));
    }

    #[test]
    fn rejects_too_few_repetitions() {
        let opts = BenchOptions {
            repetitions: 2,
            ..BenchOptions::new(1)
        };
        assert!(matches!(run_benchmark(&opts), Err(BenchError::TooFewRepetitions(2))));
    }
}
