//! Command-line front end for `homophily-core`.
//!
//! Every subcommand is also callable in-process through the functions in
//! [`report`], [`check`] and [`toy`], which is how the integration tests
//! drive it.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use homophily_core::{ColoringError, GraphError, Nu, OracleError, Preset};
use thiserror::Error;

pub mod check;
pub mod report;
pub mod toy;

pub use check::{oracle_check, CheckReport, CheckStatus};
pub use report::{analyze, analyze_files, baseline, baseline_files, AnalyzeOptions, AnalyzeReport, BaselineReport};
pub use toy::toy_curve;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Graph { path: String, source: GraphError },
    #[error("{path}: {source}")]
    Coloring { path: String, source: ColoringError },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Oracle(OracleError::LimitExceeded { .. }) => EXIT_LIMIT,
            _ => EXIT_INPUT,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "homophily", version, about = "Homophily indices under the random coloring model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Ratio,
    Avgdeg,
    Dyadicity,
    All,
}

impl PresetArg {
    pub fn presets(self) -> Vec<Preset> {
        match self {
            PresetArg::Ratio => vec![Preset::Ratio],
            PresetArg::Avgdeg => vec![Preset::AvgInternalDegree],
            PresetArg::Dyadicity => vec![Preset::Dyadicity],
            PresetArg::All => Preset::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NuArg {
    Maxdeg,
    Classes,
    Avgdeg,
}

impl From<NuArg> for Nu {
    fn from(n: NuArg) -> Nu {
        match n {
            NuArg::Maxdeg => Nu::MaxDegree,
            NuArg::Classes => Nu::Classes,
            NuArg::Avgdeg => Nu::AvgDegree,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct InputArgs {
    /// Edge list, one "u v" pair per line
    #[arg(long)]
    pub graph: PathBuf,
    /// Merge duplicate edges instead of rejecting the file
    #[arg(long)]
    pub dedupe: bool,
}

#[derive(Debug, clap::Args)]
pub struct IndexArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub preset: PresetArg,
    /// Scale for the average-internal-degree weights
    #[arg(long, value_enum, default_value = "maxdeg")]
    pub nu: NuArg,
}

#[derive(Debug, clap::Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute every index for an observed coloring
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        /// "vertex<TAB>label" per line
        #[arg(long)]
        coloring: PathBuf,
        #[command(flatten)]
        index: IndexArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Indices for uniformly random colorings with the observed profile
    Baseline {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        coloring: PathBuf,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        index: IndexArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare closed forms and bounds against exact enumeration
    OracleCheck {
        #[command(flatten)]
        input: InputArgs,
        /// Class sizes, e.g. "2,2"
        #[arg(long, conflicts_with = "coloring", required_unless_present = "coloring")]
        profile: Option<String>,
        #[arg(long)]
        coloring: Option<PathBuf>,
        #[arg(long, default_value_t = homophily_core::oracle::DEFAULT_ENUMERATION_LIMIT)]
        limit: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tail curve and indices for the perfect matching with two equal classes
    ToyCurve {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        edges: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Analyze { input, coloring, index, output } => {
            let opts = AnalyzeOptions {
                presets: index.preset.presets(),
                nu: index.nu.into(),
                dedupe: input.dedupe,
            };
            let report = analyze_files(&input.graph, &coloring, &opts)?;
            emit(&output, &report)?;
            Ok(EXIT_OK)
        }
        Command::Baseline { input, coloring, samples, seed, index, output } => {
            let opts = AnalyzeOptions {
                presets: index.preset.presets(),
                nu: index.nu.into(),
                dedupe: input.dedupe,
            };
            let report = baseline_files(&input.graph, &coloring, samples, seed, &opts)?;
            emit(&output, &report)?;
            Ok(EXIT_OK)
        }
        Command::OracleCheck { input, profile, coloring, limit, output } => {
            let g = report::load_graph(&input.graph, input.dedupe)?;
            let p = match (profile, coloring) {
                (Some(text), _) => check::parse_profile(&text)?,
                (None, Some(path)) => report::load_coloring_file(&path, &g)?.profile().clone(),
                (None, None) => return Err(CliError::Input("need --profile or --coloring".into())),
            };
            let report = oracle_check(&g, &p, limit)?;
            emit(&output, &report)?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::ToyCurve { edges, out } => {
            let csv = toy_curve(edges)?;
            write_to(out.as_deref(), csv.as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn emit<T: serde::Serialize>(output: &OutputArgs, value: &T) -> Result<(), CliError> {
    let text = match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
            s.push('\n');
            s
        }
        Format::Tsv => report::to_tsv(value).map_err(io::Error::other)?,
    };
    write_to(output.out.as_deref(), text.as_bytes())
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)?;
            lock.flush()?;
        }
    }
    Ok(())
}
