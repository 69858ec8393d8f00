use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use topo_align::commands::{execute, Command};
use topo_align::config::parse_config;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Simulate,
    Solve,
    Study,
    Bounds,
    KernelCheck,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::Solve => Command::Solve,
            Cmd::Study => Command::Study,
            Cmd::Bounds => Command::Bounds,
            Cmd::KernelCheck => Command::KernelCheck,
        }
    }
}

/// Topological-alignment particle simulator, kinetic solver and chaos study harness.
#[derive(Debug, Parser)]
#[command(name = "topo-align", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,

    /// JSON study configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides `output_dir` in the config; default `out`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for ensemble runs (default: all cores).
    #[arg(long)]
    workers: Option<usize>,

    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Log verbosity: -v info, -vv debug.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut cfg = match parse_config(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    match execute(args.command.into(), &cfg, &out, args.workers) {
        Ok(files) => {
            log::info!("wrote {} files to {}", files.len(), out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
