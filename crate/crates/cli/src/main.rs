//! `nctest` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data or
//! configuration errors. Results go to stdout as JSON; `--out` adds CSV,
//! JSON and (with `--plots svg`) SVG files.

mod commands;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] nctest::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io { .. } => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nctest",
    version,
    about = "Multiple testing with internal negative controls"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// Small statistics are evidence against the null.
    Small,
    /// Large statistics are evidence against the null.
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Plots {
    None,
    Svg,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV with columns id,value,role[,subgroup][,treatment][,control][,truth].
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Direction::Small)]
    pub direction: Direction,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory, or a `.csv` file name for the primary table.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Plots::None)]
    pub plots: Plots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcedureArg {
    Bonferroni,
    Holm,
    Hochberg,
    Lr,
    Bh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PValueArg {
    Ranc,
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Test,
    All,
    Nc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mad1,
    Mad2,
    Efron,
    Ecdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Table1,
    PowerVsM,
    PowerVsMWeak,
    B1,
    B2,
    SimesPerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Simes,
    Fisher,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// RANC p-values and a multiple-testing procedure.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = ProcedureArg::Bh)]
        procedure: ProcedureArg,
        /// FDR level for `bh` (default 0.2).
        #[arg(long)]
        q: Option<f64>,
        /// FWER level for the other procedures (default 0.05).
        #[arg(long)]
        alpha: Option<f64>,
        /// Lehmann–Romano tolerance.
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, value_enum, default_value_t = PValueArg::Ranc)]
        pvalues: PValueArg,
    },
    /// FDR step-up threshold with the negative-control null-proportion estimate.
    Stepup {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = 0.2)]
        q: f64,
        /// Null-proportion tuning level on the negative-control rank scale.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Local-FDR threshold, curve and KDE baseline.
    Localfdr {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = 0.2)]
        q: f64,
        /// Null proportion; estimated from the data at `--lambda` when absent.
        #[arg(long)]
        pi: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Also report every local minimiser within this radius.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Compare empirical-null fits by window uniformity and BH rejections.
    NullFit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = 0.2)]
        q: f64,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SourceArg::Test, SourceArg::All, SourceArg::Nc])]
        sources: Vec<SourceArg>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Mad1, MethodArg::Mad2, MethodArg::Efron, MethodArg::Ecdf])]
        methods: Vec<MethodArg>,
        #[arg(long, default_value_t = nctest::empirical_null::EFRON_DEFAULT_BINS)]
        bins: usize,
        #[arg(long, default_value_t = nctest::empirical_null::EFRON_DEFAULT_DEGREE)]
        degree: usize,
    },
    /// Pairwise comparison of negative-control subgroups.
    Falsify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulation presets.
    Simulate {
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum)]
        preset: Preset,
        /// Replications (draws for `b1`, permutations for `simes-perm`).
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Override the preset's FDR level.
        #[arg(long)]
        q: Option<f64>,
    },
    /// Permutation-calibrated global test.
    Permtest {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = StatisticArg::Simes)]
        statistic: StatisticArg,
        /// Number of sampled relabellings.
        #[arg(long, default_value_t = 999)]
        b: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

/// Honour `NCTEST_THREADS`; returns the configured count.
fn configure_threads() -> Result<Option<usize>, CliError> {
    match std::env::var("NCTEST_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
                CliError::Usage(format!(
                    "NCTEST_THREADS must be a positive integer, got `{v}`"
                ))
            })?;
            nctest::par::configure_threads(n);
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let args: Vec<String> = std::env::args().skip(1).collect();
    let result = configure_threads().and_then(|threads| commands::run(cli.command, args, threads));
    match result {
        Ok(json) => {
            use std::io::Write;
            // A closed pipe (`| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{json}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
