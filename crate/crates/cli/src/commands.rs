use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sobi_eeg::bench::{run_benchmark, BenchOptions};
use sobi_eeg::bss::{
    flag_artifact_components, remove_components, sobi_with, ArtifactCriteria, Diagnostics, Method,
    SeparationResult, SobiOptions,
};
use sobi_eeg::features::extract_features;
use sobi_eeg::io::{read_recording, read_trial_set, write_json, write_recording, write_trial_set};
use sobi_eeg::linalg::Matrix;
use sobi_eeg::pipeline::{run_pipeline, PipelineConfig};
use sobi_eeg::recording::Recording;
use sobi_eeg::svm::{svm_predict, svm_train, Kernel, LabeledDataset, SvmModel, SvmParams};
use sobi_eeg::synth::{make_dataset_with, DatasetOptions, TrialSet};

use crate::args::*;
use crate::table::FeatureTable;
use crate::CliError;

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::data(e.to_string())
}

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Sobi(a) => sobi_cmd(a),
        Command::Clean(a) => clean(a),
        Command::Features(a) => features(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Bench(a) => bench(a),
    }
}

fn gen(a: GenArgs) -> Result<(), CliError> {
    let mut opts = DatasetOptions::new(a.trials_per_class, a.channels, a.sample_rate, a.seed);
    opts.erd_depth = a.erd_depth;
    if !(0.0..=1.0).contains(&a.erd_depth) {
        return Err(CliError::usage(format!("--erd-depth must be in [0, 1], got {}", a.erd_depth)));
    }
    let ts = make_dataset_with(&opts).map_err(data_err)?;
    write_trial_set(&ts, &a.out).map_err(data_err)?;
    println!(
        "wrote {} ({} channels, {} samples, {} trials)",
        a.out.display(),
        ts.recording.channels(),
        ts.recording.samples(),
        ts.trials.len()
    );
    Ok(())
}

fn separate(rec: &Recording, sep: &SeparationArgs) -> Result<SeparationResult, CliError> {
    if !(sep.tol > 0.0) {
        return Err(CliError::usage(format!("--tol must be positive, got {}", sep.tol)));
    }
    let mut opts = SobiOptions::new(sep.method.into()).lags(&sep.lags.0).tol(sep.tol);
    if let Some(seed) = sep.seed {
        opts.retry_seed = seed;
    }
    let res = sobi_with(rec, &opts).map_err(data_err)?;
    for w in &res.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    Ok(res)
}

/// Everything in a separation result except the source time series.
#[derive(Serialize)]
struct SeparationSummary<'a> {
    format_version: u32,
    method: Method,
    elapsed_seconds: f64,
    components: usize,
    channels: usize,
    lags: &'a [usize],
    sample_rate: f64,
    unmixing: &'a Matrix,
    mixing_estimate: &'a Matrix,
    rotation: &'a Matrix,
    means: &'a [f64],
    diagnostics: &'a Diagnostics,
    sources_file: String,
}

fn default_prefix(input: &Path, method: Method) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    input.with_file_name(format!("{stem}.{method}"))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn sobi_cmd(a: SobiArgs) -> Result<(), CliError> {
    let rec = read_recording(&a.input).map_err(data_err)?;
    let res = separate(&rec, &a.sep)?;
    let prefix = a.out.unwrap_or_else(|| default_prefix(&a.input, res.method));
    let sources_path = with_suffix(&prefix, ".csv");
    let result_path = with_suffix(&prefix, ".result.json");
    write_recording(&res.sources_recording(), &sources_path).map_err(data_err)?;
    let summary = SeparationSummary {
        format_version: 1,
        method: res.method,
        elapsed_seconds: res.elapsed_seconds,
        components: res.components(),
        channels: res.channels(),
        lags: &res.lags,
        sample_rate: res.sample_rate,
        unmixing: &res.unmixing,
        mixing_estimate: &res.mixing_estimate,
        rotation: &res.rotation,
        means: &res.means,
        diagnostics: &res.diagnostics,
        sources_file: sources_path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    write_json(&result_path, &summary).map_err(data_err)?;
    println!(
        "{}: {} components in {:.6} s, score {:.3e}; wrote {} and {}",
        res.method,
        res.components(),
        res.elapsed_seconds,
        res.diagnostics.score,
        result_path.display(),
        sources_path.display()
    );
    converged(&res)
}

fn converged(res: &SeparationResult) -> Result<(), CliError> {
    if res.diagnostics.converged {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "{} separation did not converge in {} sweeps (outputs were written)",
            res.method, res.diagnostics.iterations
        )))
    }
}

fn clean(a: CleanArgs) -> Result<(), CliError> {
    let ts = read_trial_set(&a.input).map_err(data_err)?;
    let res = separate(&ts.recording, &a.sep)?;
    let indices = match a.remove {
        Some(ix) => ix,
        None => flag_artifact_components(&res, ts.recording.sample_rate(), &ArtifactCriteria::default()),
    };
    let cleaned = remove_components(&res, &indices).map_err(data_err)?;
    if ts.trials.is_empty() {
        write_recording(&cleaned, &a.out).map_err(data_err)?;
    } else {
        // Keep the trial windows so the output can feed `features`.
        let out = TrialSet {
            recording: cleaned,
            trials: ts.trials,
            ground_truth: None,
        };
        write_trial_set(&out, &a.out).map_err(data_err)?;
    }
    println!("removed components {:?}; wrote {}", indices, a.out.display());
    converged(&res)
}

fn features(a: FeaturesArgs) -> Result<(), CliError> {
    let ts = read_trial_set(&a.input).map_err(data_err)?;
    let fs = ts.recording.sample_rate();
    let mut table = FeatureTable {
        columns: Vec::new(),
        trials: Vec::new(),
        labels: Vec::new(),
        rows: Vec::new(),
    };
    let epochs: Vec<(String, Option<f64>, Recording)> = if ts.trials.is_empty() {
        vec![("all".into(), None, ts.recording.clone())]
    } else {
        ts.trials
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let w = ts.recording.window(t.start, t.end).map_err(data_err)?;
                Ok((k.to_string(), Some(t.label.sign()), w))
            })
            .collect::<Result<_, CliError>>()?
    };
    for b in &a.bands {
        b.validate(fs).map_err(|e| CliError::usage(e.to_string()))?;
    }
    for (id, label, epoch) in epochs {
        let fv = extract_features(&epoch, &a.bands).map_err(data_err)?;
        if table.columns.is_empty() {
            table.columns = fv.column_names();
        }
        table.trials.push(id);
        table.labels.push(label);
        table.rows.push(fv.values);
    }
    table.write(&a.out)?;
    println!("wrote {} rows × {} features to {}", table.rows.len(), table.columns.len(), a.out.display());
    Ok(())
}

fn svm_params(a: &SvmArgs, seed: u64) -> Result<SvmParams, CliError> {
    let kernel = match a.kernel {
        KernelArg::Linear => Kernel::Linear,
        KernelArg::Rbf => Kernel::Rbf { gamma: a.gamma },
    };
    if !(a.c > 0.0) {
        return Err(CliError::usage(format!("--c must be positive, got {}", a.c)));
    }
    Ok(SvmParams {
        c: a.c,
        kernel,
        tol: a.svm_tol,
        max_passes: a.max_passes,
        seed,
    })
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let table = FeatureTable::read(&a.features)?;
    let labels = table.required_labels()?;
    let data = LabeledDataset::new(table.rows, labels)
        .and_then(|d| d.with_provenance(table.trials))
        .map_err(data_err)?;
    let model = svm_train(&data, &svm_params(&a.svm, a.seed)?).map_err(data_err)?;
    model.save(&a.out).map_err(data_err)?;
    let acc = sobi_eeg::svm::accuracy(&model, &data).map_err(data_err)?;
    println!(
        "trained on {} vectors: {} support vectors, training accuracy {:.3}; wrote {}",
        data.len(),
        model.alphas.len(),
        acc,
        a.out.display()
    );
    if model.converged {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "training hit the iteration cap (KKT violation {:.3e}; model was written)",
            model.kkt_violation
        )))
    }
}

fn predict(a: PredictArgs) -> Result<(), CliError> {
    let model = SvmModel::load(&a.model).map_err(data_err)?;
    let table = FeatureTable::read(&a.features)?;
    let mut out = Vec::new();
    writeln!(out, "trial,predicted,decision").unwrap();
    let (mut hits, mut labeled) = (0, 0);
    for ((id, row), label) in table.trials.iter().zip(&table.rows).zip(&table.labels) {
        let (pred, decision) = svm_predict(&model, row).map_err(data_err)?;
        writeln!(out, "{id},{pred},{decision}").unwrap();
        if let Some(l) = label {
            labeled += 1;
            hits += usize::from(*l == pred);
        }
    }
    match &a.out {
        Some(path) => std::fs::write(path, &out).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(&out).map_err(data_err)?,
    }
    if labeled > 0 {
        eprintln!("accuracy {:.3} on {labeled} labeled rows", hits as f64 / labeled as f64);
    }
    Ok(())
}

fn pipeline(a: PipelineArgs) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            PipelineConfig::from_json(&text).map_err(|e| CliError::usage(e.to_string()))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(m) = a.method {
        cfg.method = m.into();
    }
    if let Some(l) = a.lags {
        cfg.lags = l.0;
    }
    if let Some(f) = a.folds {
        cfg.folds = f;
    }
    cfg.seed = a.seed;
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;

    let report = run_pipeline(&cfg, &a.dataset).map_err(data_err)?;
    for run in &report.runs {
        println!(
            "{}: cross-validated accuracy {:.3} ({} folds), removed components {:?}, separation {:.6} s",
            run.method, run.accuracy, cfg.folds, run.flagged_components, run.separation_seconds
        );
        for w in &run.warnings {
            eprintln!("warning ({}): {w}", run.method);
        }
    }
    if let Some(out) = &a.out {
        write_json(out, &report).map_err(data_err)?;
        println!("wrote {}", out.display());
    } else if let Some(run) = report.runs.first() {
        println!("{:>5}  {:>5}  {:>9}  {:>10}  {:>8}", "trial", "label", "predicted", "decision", "mu_erd_%");
        for t in &run.trials {
            println!(
                "{:>5}  {:>5}  {:>9}  {:>10.4}  {:>8.1}",
                t.trial,
                label_name(t.label.sign()),
                label_name(t.predicted.sign()),
                t.decision,
                t.mu_erd_percent
            );
        }
    }
    Ok(())
}

fn label_name(sign: f64) -> &'static str {
    if sign < 0.0 {
        "left"
    } else {
        "right"
    }
}

fn bench(a: BenchArgs) -> Result<(), CliError> {
    if a.repetitions < 3 {
        return Err(CliError::usage(format!("--repetitions must be at least 3, got {}", a.repetitions)));
    }
    let opts = BenchOptions {
        datasets: a.datasets,
        channels: a.channels,
        samples: a.samples,
        sample_rate: a.sample_rate,
        lags: a.lags.0,
        repetitions: a.repetitions,
        seed: a.seed,
    };
    let report = run_benchmark(&opts).map_err(data_err)?;
    write_json(&a.out, &report).map_err(data_err)?;
    print!("{}", report.table());
    println!();
    print!("{}", report.comparison());
    println!("wrote {}", a.out.display());
    Ok(())
}
