//! `ldca`: GHF, VQE, compilation, gradient and exact-diagonalization runs
//! driven by JSON experiment configs.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CompileInput;
use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "ldca", version, about = "Low-depth fermionic circuit benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Skip SVG plots.
    #[arg(long, global = true)]
    no_svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// GHF energy, purity and residual per sweep point.
    Ghf,
    /// Variational runs per sweep point and ansatz, with plots.
    Vqe,
    /// Compile a Bogoliubov transform to a matchgate circuit.
    Compile {
        /// Bogoliubov transform JSON.
        #[arg(conflicts_with = "identity")]
        transform: Option<PathBuf>,
        /// Compile the identity transform on this many modes.
        #[arg(long)]
        identity: Option<usize>,
    },
    /// Analytic gradients against finite differences and the ancilla circuit.
    Gradcheck,
    /// Exact ground energies, cross-checked between eigensolvers.
    Exact,
}

pub enum CliError {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
    Io(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            CliError::Config(e) | CliError::Numerical(e) | CliError::Io(e) => e,
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config(anyhow::anyhow!("--config is required")))?;
    let cfg = ExperimentConfig::load(path).map_err(CliError::Config)?;
    Ok(match cli.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(e.into()))?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Io(e.into()))?;
    match &cli.command {
        Command::Ghf => commands::ghf(&load(cli)?, &cli.out),
        Command::Vqe => commands::vqe(&load(cli)?, &cli.out, !cli.no_svg),
        Command::Exact => commands::exact(&load(cli)?, &cli.out),
        Command::Gradcheck => commands::gradcheck(&load(cli)?, &cli.out),
        Command::Compile { transform, identity } => {
            let input = match (transform, identity) {
                (Some(p), _) => CompileInput::File(p.clone()),
                (None, Some(m)) if *m > 0 => CompileInput::Identity(*m),
                _ => return Err(CliError::Config(anyhow::anyhow!("give a transform file or --identity <M>"))),
            };
            commands::compile(&input, cli.seed.unwrap_or(0), &cli.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error());
            ExitCode::from(e.code())
        }
    }
}
