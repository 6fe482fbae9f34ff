use sobi_eeg::bss::{flag_artifact_components, remove_components, sobi, ArtifactCriteria, Method, DEFAULT_LAGS};
use sobi_eeg::io::{read_recording, read_trial_set, write_recording, write_trial_set, IoError};
use sobi_eeg::pipeline::{run_pipeline, MethodChoice, PipelineConfig, Stage};
use sobi_eeg::synth::make_dataset;

#[test]
fn trial_set_survives_a_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.csv");
    let ts = make_dataset(3, 6, 200.0, 21).unwrap();
    write_trial_set(&ts, &path).unwrap();
    let back = read_trial_set(&path).unwrap();
    assert_eq!(back.trials, ts.trials);
    assert_eq!(back.recording.sample_rate(), 200.0);
    assert_eq!(back.recording.data(), ts.recording.data());
    let (a, b) = (ts.ground_truth.unwrap(), back.ground_truth.unwrap());
    assert_eq!(a.mixing, b.mixing);
    assert_eq!(a.sources, b.sources);
    assert_eq!(a.clean_mixture, b.clean_mixture);
    assert_eq!(a.artifact_sources, b.artifact_sources);
}

#[test]
fn separating_a_file_matches_separating_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.csv");
    let ts = make_dataset(2, 8, 250.0, 4).unwrap();
    write_recording(&ts.recording, &path).unwrap();
    let loaded = read_recording(&path).unwrap();
    for method in [Method::Schur, Method::Jacobi] {
        let a = sobi(&ts.recording, &DEFAULT_LAGS, method, 1e-8).unwrap();
        let b = sobi(&loaded, &DEFAULT_LAGS, method, 1e-8).unwrap();
        assert_eq!(a.unmixing, b.unmixing, "{method}");
    }
}

#[test]
fn cleaned_recording_can_be_written_and_read() {
    let dir = tempfile::tempdir().unwrap();
    let ts = make_dataset(4, 8, 250.0, 12).unwrap();
    let res = sobi(&ts.recording, &DEFAULT_LAGS, Method::Schur, 1e-8).unwrap();
    let flagged = flag_artifact_components(&res, 250.0, &ArtifactCriteria::default());
    assert_eq!(flagged.len(), 2);
    let cleaned = remove_components(&res, &flagged).unwrap();
    let path = dir.path().join("clean.csv");
    write_recording(&cleaned, &path).unwrap();
    let back = read_recording(&path).unwrap();
    assert_eq!(back.data(), cleaned.data());
}

#[test]
fn missing_sidecar_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bare.csv");
    std::fs::write(&path, "1,2\n3,4\n").unwrap();
    assert!(matches!(read_recording(&path), Err(IoError::MissingSidecar { .. })));
}

#[test]
fn pipeline_reads_a_dataset_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    write_trial_set(&make_dataset(10, 8, 250.0, 31).unwrap(), &path).unwrap();
    let cfg = PipelineConfig {
        method: MethodChoice::Both,
        seed: 5,
        ..PipelineConfig::default()
    };
    let report = run_pipeline(&cfg, &path).unwrap();
    assert_eq!(report.runs.len(), 2);
    for run in &report.runs {
        assert!(run.accuracy >= 0.9, "{}: {}", run.method, run.accuracy);
        assert_eq!(run.trials.len(), 20);
        // Left-hand imagery desynchronizes the right-hemisphere mu rhythm and
        // vice versa, so both classes show a mean mu ERD below zero.
        let mean_erd = run.trials.iter().map(|t| t.mu_erd_percent).sum::<f64>() / 20.0;
        assert!(mean_erd < 0.0, "{}: mean ERD {mean_erd}", run.method);
    }

    let err = run_pipeline(&cfg, &dir.path().join("absent.csv")).unwrap_err();
    assert_eq!(err.stage, Stage::Load);
}
