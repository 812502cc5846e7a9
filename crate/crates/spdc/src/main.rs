use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spdc::{run, Command, Options};

/// SPDC biphoton wavefunctions, LG projections and spatial purity.
#[derive(Parser)]
#[command(name = "spdc", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Phase-matching function on a momentum/frequency grid
    PmfSlice(Common),
    /// Joint spectral (or spatial) intensity of the configured model
    Jsa(Common),
    /// Spatial purity over one swept parameter
    PuritySweep(Common),
    /// The same grid evaluated with all three models
    CompareModels(Common),
    /// Run the built-in invariant checks
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write SVG figures
    #[arg(long)]
    figures: bool,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    threads: Option<usize>,
    /// Record per-row wall time in sweep CSVs
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, c) = match cli.command {
        Cmd::PmfSlice(c) => (Command::PmfSlice, c),
        Cmd::Jsa(c) => (Command::Jsa, c),
        Cmd::PuritySweep(c) => (Command::PuritySweep, c),
        Cmd::CompareModels(c) => (Command::CompareModels, c),
        Cmd::Selftest(c) => (Command::Selftest, c),
    };
    let opts = Options {
        config: c.config,
        out: c.out,
        figures: c.figures,
        threads: c.threads,
        timing: c.timing,
    };
    match run(command, &opts) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
