//! `matryoshka`: generate and verify nested Bell states, run the extraction
//! conveyor and GHZ protocols, and sweep stray-field fidelity.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
//! contract violated (Krylov non-convergence, impure pair without `--force`,
//! failed verification), 1 I/O failure.

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CommandName, FileConfig, InitialArg, Overrides, PatternArg};
use error::CliError;

/// Environment variable fixing the worker-pool size.
const WORKERS_ENV: &str = "MATRYOSHKA_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "matryoshka", version, about = "Engineered XY spin-chain simulator")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// TOML file with [chain] and [options] tables; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Number of sites (odd, at least 3).
    #[arg(long = "n", global = true, value_name = "N")]
    n: Option<usize>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pattern: Option<PatternArg>,
    /// Comma-separated local Z fields, one per site, in coupling units.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    b_fields: Option<Vec<f64>>,
    /// Protocol period; defaults to π/(4λ).
    #[arg(long, global = true)]
    t_star: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve |0…0⟩ or |1…1⟩ to t* and verify the nested Bell structure.
    Generate {
        #[arg(long, value_enum)]
        initial: Option<InitialArg>,
    },
    /// Evolve an arbitrary Z-basis state to t* and check every mirror pair.
    Verify {
        /// One 0/1 character per site, site 1 first.
        #[arg(long)]
        bits: Option<String>,
    },
    /// Find the Z-strings the symmetric pair operators evolve into.
    FluxCheck,
    /// Repeated evolve-and-extract rounds.
    Conveyor {
        #[arg(long)]
        rounds: Option<usize>,
        /// Extract impure boundary pairs by projection instead of failing.
        #[arg(long)]
        force: bool,
    },
    /// Evolve, apply a Hadamard on the central site, evolve again.
    Ghz,
    /// Fidelity over a (B1/J, B2/J) grid for each B3/J slice; three-site chains only.
    Sweep {
        #[arg(long = "grid")]
        grid: Option<usize>,
        /// Comma-separated B3/J values in [0, 0.1].
        #[arg(long, value_delimiter = ',')]
        b3: Option<Vec<f64>>,
    },
    /// Fidelity at the cavity-array stray fields (7.8, 19.6, 12.6 MHz at J = 270 MHz).
    PaperPoint,
}

fn overrides(cli: &Cli) -> (CommandName, Overrides) {
    let c = &cli.common;
    let mut o = Overrides {
        n_sites: c.n,
        lambda: c.lambda,
        pattern: c.pattern,
        b_fields: c.b_fields.clone(),
        t_star: c.t_star,
        out: c.out.clone(),
        ..Default::default()
    };
    let name = match &cli.command {
        Command::Generate { initial } => {
            o.initial = *initial;
            CommandName::Generate
        }
        Command::Verify { bits } => {
            o.bits = bits.clone();
            CommandName::Verify
        }
        Command::FluxCheck => CommandName::FluxCheck,
        Command::Conveyor { rounds, force } => {
            o.rounds = *rounds;
            o.force = *force;
            CommandName::Conveyor
        }
        Command::Ghz => CommandName::Ghz,
        Command::Sweep { grid, b3 } => {
            o.grid_points = *grid;
            o.b3_ratios = b3.clone();
            CommandName::Sweep
        }
        Command::PaperPoint => CommandName::PaperPoint,
    };
    (name, o)
}

fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("{WORKERS_ENV}: {e}")))
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    files
        .iter()
        .map(|(name, contents)| {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?;
            Ok(path)
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_workers()?;
    let file = match &cli.common.config {
        Some(path) => config::load_file(path)?,
        None => FileConfig::default(),
    };
    let (name, flags) = overrides(&cli);
    let cfg = config::resolve(name, file, flags)?;
    let output = commands::run(&cfg)?;
    for line in &output.stdout {
        println!("{line}");
    }
    // paper-point only prints unless an output directory was requested.
    let target = match (&cfg.out, name) {
        (None, CommandName::PaperPoint) => None,
        (Some(dir), _) => Some(dir.clone()),
        (None, _) => Some(PathBuf::from(".")),
    };
    if let Some(dir) = target {
        for path in write_files(&dir, &output.files)? {
            eprintln!("wrote {}", path.display());
        }
    }
    match output.check_failure {
        Some(msg) => Err(CliError::Check(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
