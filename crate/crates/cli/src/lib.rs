//! Command-line front end for `ccc-core`.

pub mod chainfile;
pub mod commands;
pub mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use chainfile::{parse_chain, print_chain, ParseError};
pub use commands::{execute, CliError};
pub use report::{Outcome, Report, Status};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "ccc",
    version,
    about = "Construction C constellations: lattice tests, distance spectra, geometric uniformity and quantization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "CCC_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Include wall-clock runtime in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Tsv,
}

#[derive(Args, Debug, Clone)]
pub struct ChainSource {
    /// Chain file path, or '-' for standard input.
    #[arg(
        value_name = "CHAIN",
        required_unless_present = "preset",
        conflicts_with = "preset"
    )]
    pub path: Option<String>,

    /// Built-in chain: example1, example3, example5 or dplusN.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PartnerMode {
    Lemma1,
    CwBrute,
    EuclidBrute,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Codes, residue count, covolume and kissing numbers.
    Info {
        #[command(flatten)]
        chain: ChainSource,
    },
    /// Direct subgroup test of the residue set.
    Lattice {
        #[command(flatten)]
        chain: ChainSource,
    },
    /// Four independent lattice-ness statements.
    Theorem1 {
        #[command(flatten)]
        chain: ChainSource,
    },
    /// Distance spectrum around one member.
    Spectrum {
        #[command(flatten)]
        chain: ChainSource,
        /// Comma-separated center coordinates.
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        /// Largest squared distance counted.
        #[arg(long)]
        r2max: u64,
    },
    /// Equal distance spectra across all residues.
    Eds {
        #[command(flatten)]
        chain: ChainSource,
        /// Largest squared distance counted (default 4·4^L).
        #[arg(long)]
        r2max: Option<u64>,
    },
    /// Reflection certificate of geometric uniformity for two-level chains.
    Gu {
        #[command(flatten)]
        chain: ChainSource,
    },
    /// Spectrum refutation or signed-permutation certificate of geometric uniformity.
    GuSearch {
        #[command(flatten)]
        chain: ChainSource,
        /// Spectrum radius for the refutation step (default 4·4^L).
        #[arg(long)]
        r2max: Option<u64>,
    },
    /// Partner point y' for (x, y, x').
    Partner {
        #[command(flatten)]
        chain: ChainSource,
        #[arg(long, value_enum)]
        mode: PartnerMode,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, allow_hyphen_values = true)]
        xp: String,
    },
    /// Monte Carlo normalized second moment of the nearest-point quantizer.
    Nsm {
        #[command(flatten)]
        chain: ChainSource,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the repetition/even-weight two-level chain of length N.
    Dplus {
        #[arg(long)]
        n: usize,
    },
    /// List built-in chains.
    Presets,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Info { .. } => "info",
            Command::Lattice { .. } => "lattice",
            Command::Theorem1 { .. } => "theorem1",
            Command::Spectrum { .. } => "spectrum",
            Command::Eds { .. } => "eds",
            Command::Gu { .. } => "gu",
            Command::GuSearch { .. } => "gu-search",
            Command::Partner { .. } => "partner",
            Command::Nsm { .. } => "nsm",
            Command::Dplus { .. } => "dplus",
            Command::Presets => "presets",
        }
    }
}

/// Rendered output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Runs a parsed command line on a dedicated thread pool and renders it.
///
/// `stdin` supplies the chain text when the path is `-`.
pub fn run(cli: &Cli, stdin: impl FnOnce() -> std::io::Result<String> + Send) -> RunOutput {
    let fail = |err: CliError| RunOutput {
        stdout: report::render_error(cli, &err),
        stderr: format!("error: {err}\n"),
        code: err.exit_code(),
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => return fail(CliError::Input(format!("cannot build thread pool: {e}"))),
    };
    let start = std::time::Instant::now();
    let result = pool.install(|| execute(cli, stdin));
    let elapsed = start.elapsed();
    match result {
        Ok(mut outcome) => {
            if cli.global.timing {
                outcome.report.runtime_ms = Some(elapsed.as_secs_f64() * 1e3);
            }
            RunOutput {
                stdout: report::render(cli.global.format, &outcome),
                stderr: String::new(),
                code: outcome.report.status.exit_code(),
            }
        }
        Err(err) => fail(err),
    }
}
