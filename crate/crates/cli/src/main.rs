//! `ppf` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 write failure,
//! 4 malformed input data.

mod commands;
mod inspect;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppf::config::{DEFAULT_BETA, DEFAULT_CUTOFF, REFERENCE_RATE_BYTES_PER_SEC};
use ppf::PpfError;

#[derive(Debug, Parser)]
#[command(name = "ppf", version, about = "Polyphase filter bank channelizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design prototype coefficients and write them to a file.
    Coeff(CoeffArgs),
    /// Channelize a raw complex f32 stream.
    Run(RunArgs),
    /// Measure real-time multiples over a channels x taps grid.
    Bench(BenchArgs),
    /// Summarize per-channel power of channelized output.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Kaiser window shape parameter, 0 for rectangular [default: 9]
    #[arg(long)]
    beta: Option<f64>,
    /// Prototype passband width in channel widths [default: 1.2]
    #[arg(long)]
    cutoff: Option<f64>,
}

impl DesignArgs {
    fn given(&self) -> bool {
        self.beta.is_some() || self.cutoff.is_some()
    }

    fn beta(&self) -> f64 {
        self.beta.unwrap_or(DEFAULT_BETA)
    }

    fn cutoff(&self) -> f64 {
        self.cutoff.unwrap_or(DEFAULT_CUTOFF)
    }
}

#[derive(Debug, Args)]
struct CoeffArgs {
    #[arg(long)]
    channels: usize,
    #[arg(long)]
    taps: usize,
    #[command(flatten)]
    design: DesignArgs,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// One decimal coefficient per line instead of the binary format.
    #[arg(long)]
    text: bool,
}

#[derive(Debug, Args)]
struct StreamArgs {
    #[arg(long, default_value_t = ppf_workers_default())]
    workers: usize,
    /// Spectra per processing block [default: max(4096, taps)]
    #[arg(long)]
    block_spectra: Option<usize>,
    /// Reference stream rate, bytes per second.
    #[arg(long, default_value_t = REFERENCE_RATE_BYTES_PER_SEC)]
    rate_bytes: u64,
    /// Pre-fill tap history with zeros (one output spectrum per input spectrum).
    #[arg(long)]
    zero_prime: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    taps: Option<usize>,
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    stream: StreamArgs,
    /// Coefficient file from `ppf coeff`; overrides inline design flags.
    #[arg(long)]
    coeff_file: Option<PathBuf>,
    /// Write `<out>.meta` with stream counters.
    #[arg(long)]
    meta: bool,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated channel counts.
    #[arg(long, value_delimiter = ',', required = true)]
    channels: Vec<usize>,
    /// Comma-separated tap counts.
    #[arg(long, value_delimiter = ',', required = true)]
    taps: Vec<usize>,
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    stream: StreamArgs,
    /// Input size per configuration, bytes.
    #[arg(long, default_value_t = 64_000_000)]
    total_bytes: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    channels: usize,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// Emit `spectrum,channel,power` rows instead of the summary.
    #[arg(long)]
    csv: bool,
}

fn ppf_workers_default() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn write(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError { code: 4, message: message.into() }
    }
}

impl From<PpfError> for CliError {
    fn from(e: PpfError) -> Self {
        let code = match e {
            PpfError::Write(_) => 3,
            PpfError::Decode { .. } | PpfError::Format(_) => 4,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Coeff(args) => commands::coeff(args),
        Command::Run(args) => commands::run(args),
        Command::Bench(args) => commands::bench(args),
        Command::Inspect(args) => commands::inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ppf: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
