use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sobi_eeg::bss::Method;
use sobi_eeg::features::Band;
use sobi_eeg::pipeline::MethodChoice;

#[derive(Parser, Debug)]
#[command(name = "sobi-eeg", version, about = "Second-order blind source separation and motor-imagery classification for EEG")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a synthetic motor-imagery trial set
    Gen(GenArgs),
    /// Separate a recording into sources
    Sobi(SobiArgs),
    /// Remove artifact components from a recording
    Clean(CleanArgs),
    /// Compute per-trial band-power features
    Features(FeaturesArgs),
    /// Train an SVM on a feature table
    Train(TrainArgs),
    /// Classify a feature table with a trained model
    Predict(PredictArgs),
    /// Separate, clean, extract features and cross-validate
    Pipeline(PipelineArgs),
    /// Time both separation methods on synthetic recordings
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Output CSV; sidecar and ground-truth files are written next to it
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials_per_class: usize,
    #[arg(long, default_value_t = 8)]
    pub channels: usize,
    #[arg(long, default_value_t = 250.0)]
    pub sample_rate: f64,
    #[arg(long, default_value_t = 0.7)]
    pub erd_depth: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SeparationArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Schur)]
    pub method: MethodArg,
    /// Lags in samples, e.g. `1..10` (inclusive) or `1,2,5`
    #[arg(long, default_value = "1..10", value_parser = parse_lags)]
    pub lags: Lags,
    /// Jacobi stopping threshold
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed for reweighting a degenerate Schur combination
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SobiArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub sep: SeparationArgs,
    /// Output prefix; writes `<prefix>.result.json` and `<prefix>.csv`
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CleanArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub sep: SeparationArgs,
    /// Components to remove; flagged automatically when omitted
    #[arg(long, value_delimiter = ',')]
    pub remove: Option<Vec<usize>>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    /// Trial set or plain recording
    pub input: PathBuf,
    /// Bands as `name:low:high`, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse_band, default_value = "mu:8:12,beta:13:30")]
    pub bands: Vec<Band>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SvmArgs {
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = KernelArg::Linear)]
    pub kernel: KernelArg,
    /// RBF width
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long = "svm-tol", default_value_t = 1e-3)]
    pub svm_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_passes: usize,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Feature table with a label column
    pub features: PathBuf,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    pub model: PathBuf,
    pub features: PathBuf,
    /// Predictions CSV; printed to standard output when omitted
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    pub dataset: PathBuf,
    /// JSON config; flags below override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<PipelineMethodArg>,
    #[arg(long, value_parser = parse_lags)]
    pub lags: Option<Lags>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 5)]
    pub datasets: usize,
    #[arg(long, default_value_t = 16)]
    pub channels: usize,
    #[arg(long, default_value_t = 30_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 250.0)]
    pub sample_rate: f64,
    #[arg(long, default_value = "1..10", value_parser = parse_lags)]
    pub lags: Lags,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, short, default_value = "bench_report.json")]
    pub out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Jacobi,
    Schur,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Jacobi => Method::Jacobi,
            MethodArg::Schur => Method::Schur,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PipelineMethodArg {
    Jacobi,
    Schur,
    Both,
}

impl From<PipelineMethodArg> for MethodChoice {
    fn from(m: PipelineMethodArg) -> Self {
        match m {
            PipelineMethodArg::Jacobi => MethodChoice::Jacobi,
            PipelineMethodArg::Schur => MethodChoice::Schur,
            PipelineMethodArg::Both => MethodChoice::Both,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lags(pub Vec<usize>);

/// `a..b` is inclusive of both ends; lists and ranges can be mixed.
pub fn parse_lags(s: &str) -> Result<Lags, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let a: usize = a.trim().parse().map_err(|_| format!("bad lag range start in '{part}'"))?;
            let b: usize = b.trim().parse().map_err(|_| format!("bad lag range end in '{part}'"))?;
            if a > b {
                return Err(format!("empty lag range '{part}'"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad lag '{part}'"))?);
        }
    }
    if out.is_empty() {
        return Err("no lags given".into());
    }
    Ok(Lags(out))
}

pub fn parse_band(s: &str) -> Result<Band, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [name, low, high] = parts[..] else {
        return Err(format!("band '{s}' is not name:low:high"));
    };
    let low: f64 = low.parse().map_err(|_| format!("bad lower edge in '{s}'"))?;
    let high: f64 = high.parse().map_err(|_| format!("bad upper edge in '{s}'"))?;
    if !(low >= 0.0 && low < high) {
        return Err(format!("band '{s}' is empty"));
    }
    Ok(Band::new(name, low, high))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_valid() {
        Cli::command().debug_assert();
    }

    #[test]
    fn lag_syntax() {
        assert_eq!(parse_lags("1..10").unwrap().0, (1..=10).collect::<Vec<_>>());
        assert_eq!(parse_lags("1..=3,7").unwrap().0, vec![1, 2, 3, 7]);
        assert_eq!(parse_lags("4").unwrap().0, vec![4]);
        assert!(parse_lags("5..2").is_err());
        assert!(parse_lags("x").is_err());
        assert!(parse_lags("").is_err());
    }

    #[test]
    fn band_syntax() {
        assert_eq!(parse_band("mu:8:12").unwrap(), Band::new("mu", 8.0, 12.0));
        assert!(parse_band("mu:12:8").is_err());
        assert!(parse_band("mu:8").is_err());
    }
}
