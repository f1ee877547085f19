//! `rqg`: transmission sweeps over open metric graphs and their randomized
//! edge-deletion ensembles.

mod commands;
mod grid;
mod sink;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use grid::GridSpec;
use sink::Format;

const EXIT_HELP: &str = "Exit codes:
  0  success
  1  output could not be written
  2  invalid arguments, graph, mask, or grid
  3  scatter emitted singular-flagged rows (data still written)
  4  problem too large for this command
  5  ensemble aborted: too many singular subgraphs at one edge count

Graphs are either the family shorthand `kne:<n>` (complete graph on n
vertices minus one edge, unit lengths, leads at the removed edge's
endpoints) or a path to a definition file:

  vertices = 4
  edges = [[0, 1, 1.0], [0, 2, 1.0], [1, 2, 1.0], [1, 3, 1.0], [2, 3, 1.0]]
  leads = [0, 3]

Wavenumber grids are written `min:max:points` in units of k·length (the
`kl` of the output header); retention-probability grids use the same shape.
Every output begins with a `#` metadata header that pins down the run, so
re-running the printed configuration reproduces the file byte for byte.";

#[derive(Parser)]
#[command(
    name = "rqg",
    version,
    about = "Transmission through open metric graphs and randomized subgraph ensembles",
    after_long_help = EXIT_HELP,
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transmission and reflection of one graph over a wavenumber grid
    Scatter(ScatterArgs),
    /// Exact ensemble transmission surface by full subgraph enumeration
    RqgExact(SurfaceArgs),
    /// Monte Carlo ensemble transmission surface
    RqgMc(McArgs),
    /// Subgraph classes of a host up to lead-preserving isomorphism
    Classify(ClassifyArgs),
    /// Peak ensemble transmission (p_m, T_m) for the kne:6..8 hosts
    #[command(name = "table2")]
    Table2(Table2Args),
}

#[derive(Args)]
struct ScatterArgs {
    /// Family shorthand (kne:<n>) or graph definition file
    #[arg(long)]
    graph: String,
    /// Edge subset to scatter through, as a hex mask like 0x1b (default: all)
    #[arg(long)]
    mask: Option<String>,
    /// Wavenumber grid, min:max:points
    #[arg(long)]
    kl: GridSpec,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Family shorthand (kne:<n>) or graph definition file
    #[arg(long)]
    graph: String,
    /// Wavenumber grid, min:max:points
    #[arg(long)]
    kl: GridSpec,
    /// Retention-probability grid, min:max:points
    #[arg(long)]
    p: GridSpec,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Output file; its per-edge-count profile lands next to it (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Subgraphs sampled per edge count
    #[arg(long, default_value_t = 250)]
    cap: usize,
    /// Sampling seed
    #[arg(long, default_value_t = 42, env = "RQG_SEED")]
    seed: u64,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Family shorthand (kne:<n>) or graph definition file
    #[arg(long)]
    graph: String,
    /// Output file (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct Table2Args {
    /// Subgraphs sampled per edge count
    #[arg(long, default_value_t = 250)]
    cap: usize,
    /// Sampling seed
    #[arg(long, default_value_t = 42, env = "RQG_SEED")]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// A failed run, already sorted into its exit-code bucket.
#[derive(Debug)]
pub enum Failure {
    Io(std::io::Error),
    Usage(String),
    TooLarge(String),
    Aborted(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::TooLarge(_) => 4,
            Failure::Aborted(_) => 5,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(e) => format!("cannot write output: {e}"),
            Failure::Usage(m) | Failure::TooLarge(m) | Failure::Aborted(m) => m.clone(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Scatter(args) => commands::cmd_scatter(args),
        Command::RqgExact(args) => commands::cmd_rqg_exact(args),
        Command::RqgMc(args) => commands::cmd_rqg_mc(args),
        Command::Classify(args) => commands::cmd_classify(args),
        Command::Table2(args) => commands::cmd_table2(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            std::process::exit(failure.exit_code());
        }
    }
}
