//! On-disk formats.
//!
//! A recording is a CSV file with a `# channels=<n> samples=<T>` header
//! followed by one line of `T` comma-separated values per channel, plus a
//! JSON sidecar `<name>.meta.json` holding the sample rate, channel names
//! and, for trial sets, the trial windows and ground-truth file names.
//! Values are written in shortest round-trip form, so write→read is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::recording::{Recording, RecordingError};
use crate::synth::{GroundTruth, SourceSpec, SynthError, Trial, TrialSet};

pub const SIDECAR_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("missing sidecar {0}")]
    MissingSidecar(PathBuf),
    #[error("sidecar {path}: {message}")]
    Sidecar { path: PathBuf, message: String },
    #[error(transparent)]
    Recording(#[from] RecordingError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("json {path}: {message}")]
    Json { path: PathBuf, message: String },
}

impl IoError {
    /// Line number of a parse error, 1-based.
    pub fn line(&self) -> Option<usize> {
        match self {
            IoError::Parse { line, .. } => Some(*line),
            _ => None,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `<name>.meta.json` next to `<name>.csv`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

/// `<name>.<suffix>.csv` next to `<name>.csv`.
fn companion_path(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(format!("{suffix}.csv"))
}

pub fn format_matrix_csv(m: &Matrix) -> String {
    let mut out = String::with_capacity(m.rows() * m.cols() * 20 + 40);
    writeln!(out, "# channels={} samples={}", m.rows(), m.cols()).unwrap();
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix_csv(text: &str, path: &Path) -> Result<Matrix, IoError> {
    let err = |line: usize, message: String| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let (n, t) = parse_header(header).ok_or_else(|| {
        err(1, format!("expected '# channels=<n> samples=<T>', found '{header}'"))
    })?;

    let mut data = Vec::with_capacity(n * t);
    let mut rows = 0;
    for (line, content) in lines {
        if content.is_empty() {
            continue;
        }
        if rows == n {
            return Err(err(line, format!("more than the declared {n} channel rows")));
        }
        let before = data.len();
        for (k, field) in content.split(',').enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| err(line, format!("value {} is not a number: '{}'", k + 1, field.trim())))?;
            if !v.is_finite() {
                return Err(err(line, format!("value {} is not finite", k + 1)));
            }
            data.push(v);
        }
        let found = data.len() - before;
        if found != t {
            return Err(err(line, format!("expected {t} values, found {found}")));
        }
        rows += 1;
    }
    if rows != n {
        return Err(err(text.lines().count().max(1), format!("expected {n} channel rows, found {rows}")));
    }
    Ok(Matrix::from_vec(n, t, data).expect("shape and finiteness checked"))
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix('#')?;
    let mut n = None;
    let mut t = None;
    for part in rest.split_whitespace() {
        let (key, value) = part.split_once('=')?;
        match key {
            "channels" => n = Some(value.parse().ok()?),
            "samples" => t = Some(value.parse().ok()?),
            _ => return None,
        }
    }
    Some((n?, t?))
}

pub fn write_matrix_csv(m: &Matrix, path: &Path) -> Result<(), IoError> {
    fs::write(path, format_matrix_csv(m)).map_err(io_err(path))
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_matrix_csv(&text, path)
}

/// Ground-truth companions of a trial set, by file name relative to the
/// sidecar's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFiles {
    pub sources: String,
    pub mixing: String,
    pub clean: String,
    pub artifact_sources: Vec<usize>,
    pub specs: Vec<SourceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub sample_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<Vec<Trial>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruthFiles>,
}

pub fn read_sidecar(csv_path: &Path) -> Result<Sidecar, IoError> {
    let path = sidecar_path(csv_path);
    if !path.exists() {
        return Err(IoError::MissingSidecar(path));
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| IoError::Sidecar {
        path: path.clone(),
        message: e.to_string(),
    })?;
    if sidecar.format_version != SIDECAR_FORMAT_VERSION {
        return Err(IoError::Sidecar {
            path,
            message: format!("unsupported format_version {}", sidecar.format_version),
        });
    }
    Ok(sidecar)
}

fn write_sidecar(csv_path: &Path, sidecar: &Sidecar) -> Result<(), IoError> {
    write_json(&sidecar_path(csv_path), sidecar)
}

pub fn write_recording(rec: &Recording, path: &Path) -> Result<(), IoError> {
    write_matrix_csv(rec.data(), path)?;
    write_sidecar(
        path,
        &Sidecar {
            format_version: SIDECAR_FORMAT_VERSION,
            sample_rate: rec.sample_rate(),
            channel_names: rec.channel_names().map(<[String]>::to_vec),
            trials: None,
            ground_truth: None,
        },
    )
}

pub fn read_recording(path: &Path) -> Result<Recording, IoError> {
    let sidecar = read_sidecar(path)?;
    recording_from(read_matrix_csv(path)?, &sidecar)
}

fn recording_from(data: Matrix, sidecar: &Sidecar) -> Result<Recording, IoError> {
    let rec = Recording::new(data, sidecar.sample_rate)?;
    Ok(match &sidecar.channel_names {
        Some(names) => rec.with_channel_names(names.clone())?,
        None => rec,
    })
}

/// Writes the recording, its sidecar with trials, and ground-truth
/// companions when present.
pub fn write_trial_set(ts: &TrialSet, path: &Path) -> Result<(), IoError> {
    write_matrix_csv(ts.recording.data(), path)?;
    let ground_truth = match &ts.ground_truth {
        Some(gt) => {
            let files = [("sources", &gt.sources), ("mixing", &gt.mixing), ("clean", &gt.clean_mixture)];
            for (suffix, m) in files {
                write_matrix_csv(m, &companion_path(path, suffix))?;
            }
            let name = |suffix| {
                companion_path(path, suffix)
                    .file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_default()
            };
            Some(GroundTruthFiles {
                sources: name("sources"),
                mixing: name("mixing"),
                clean: name("clean"),
                artifact_sources: gt.artifact_sources.clone(),
                specs: gt.specs.clone(),
            })
        }
        None => None,
    };
    write_sidecar(
        path,
        &Sidecar {
            format_version: SIDECAR_FORMAT_VERSION,
            sample_rate: ts.recording.sample_rate(),
            channel_names: ts.recording.channel_names().map(<[String]>::to_vec),
            trials: Some(ts.trials.clone()),
            ground_truth,
        },
    )
}

/// Reads a trial set. A plain recording sidecar yields an empty trial list.
pub fn read_trial_set(path: &Path) -> Result<TrialSet, IoError> {
    let sidecar = read_sidecar(path)?;
    let recording = recording_from(read_matrix_csv(path)?, &sidecar)?;
    let dir = path.parent().unwrap_or_else(|| Path::new(""));
    let ground_truth = match &sidecar.ground_truth {
        Some(files) => Some(GroundTruth {
            sources: read_matrix_csv(&dir.join(&files.sources))?,
            mixing: read_matrix_csv(&dir.join(&files.mixing))?,
            artifact_sources: files.artifact_sources.clone(),
            clean_mixture: read_matrix_csv(&dir.join(&files.clean))?,
            specs: files.specs.clone(),
        }),
        None => None,
    };
    let ts = TrialSet {
        recording,
        trials: sidecar.trials.unwrap_or_default(),
        ground_truth,
    };
    ts.validate()?;
    Ok(ts)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| IoError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| IoError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::make_dataset;
    use crate::synth::rng::XorShift64;

    #[test]
    fn reads_small_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.csv");
        fs::write(&path, "# channels=2 samples=4\n1,2,3,4\n-0.5, 0.25 ,1e-3,0\n").unwrap();
        fs::write(sidecar_path(&path), r#"{"format_version":1,"sample_rate":128.0}"#).unwrap();
        let rec = read_recording(&path).unwrap();
        assert_eq!(rec.data().shape(), (2, 4));
        assert_eq!(rec.sample_rate(), 128.0);
        assert_eq!(rec.channel(1), &[-0.5, 0.25, 1e-3, 0.0]);
        assert_eq!(sidecar_path(&path), dir.path().join("tiny.meta.json"));
    }

    #[test]
    fn round_trip_is_exact() {
        let mut rng = XorShift64::new(77);
        let data: Vec<f64> = (0..3 * 500).map(|_| rng.gaussian() * 1e3).collect();
        let rec = Recording::new(Matrix::from_vec(3, 500, data).unwrap(), 250.0)
            .unwrap()
            .with_channel_names(vec!["C3".into(), "Cz".into(), "C4".into()])
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rec.csv");
        write_recording(&rec, &path).unwrap();
        let back = read_recording(&path).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn ragged_rows_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let err = parse_matrix_csv("# channels=2 samples=3\n1,2,3\n4,5\n", &path).unwrap_err();
        assert_eq!(err.line(), Some(3));
        assert!(err.to_string().contains("expected 3 values, found 2"), "{err}");
        let err = parse_matrix_csv("# channels=2 samples=2\n1,2\n4,x\n", &path).unwrap_err();
        assert_eq!(err.line(), Some(3));
        let err = parse_matrix_csv("channels=2\n", &path).unwrap_err();
        assert_eq!(err.line(), Some(1));
        let err = parse_matrix_csv("# channels=2 samples=1\n1\n", &path).unwrap_err();
        assert!(err.to_string().contains("expected 2 channel rows"), "{err}");
    }

    #[test]
    fn missing_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lonely.csv");
        fs::write(&path, "# channels=1 samples=1\n0\n").unwrap();
        assert!(matches!(read_recording(&path), Err(IoError::MissingSidecar(_))));
    }

    #[test]
    fn trial_set_round_trip() {
        let ts = make_dataset(2, 8, 128.0, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.csv");
        write_trial_set(&ts, &path).unwrap();
        for f in ["set.meta.json", "set.sources.csv", "set.mixing.csv", "set.clean.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        assert_eq!(read_trial_set(&path).unwrap(), ts);
        // the same file also reads as a plain recording
        assert_eq!(read_recording(&path).unwrap(), ts.recording);
    }
}
