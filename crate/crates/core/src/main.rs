use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nfem::cli::{self, EXIT_CONFIG, EXIT_SELFCHECK};
use nfem::geometry::Point;

/// Cavity reconstruction from interior electromagnetic near-field data.
#[derive(Parser)]
#[command(name = "nfem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize near-field data for a layered spherical configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Image a near-field data file with the linear sampling method.
    Reconstruct {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run forward-model diagnostics for a configuration.
    Selfcheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Report the regularized solve at a single sampling point.
    Probe {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = cli::parse_point, allow_hyphen_values = true)]
        z: Point,
    },
}

fn run(command: Command) -> nfem::Result<i32> {
    let mut stdout = io::stdout().lock();
    match command {
        Command::Simulate { config, out } => {
            cli::simulate(&config, out.as_deref(), &mut stdout).map(|_| 0)
        }
        Command::Reconstruct { data, config, out } => {
            cli::reconstruct(&data, &config, out.as_deref(), &mut stdout).map(|_| 0)
        }
        Command::Selfcheck { config } => {
            cli::selfcheck(&config, &mut stdout)
                .map(|r| if r.passed() { 0 } else { EXIT_SELFCHECK })
        }
        Command::Probe { data, config, z } => {
            cli::probe(&data, &config, &z, &mut stdout).map(|_| 0)
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let threads = match cli::threads_from_env(std::env::var("NFEM_THREADS").ok().as_deref()) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(args.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
