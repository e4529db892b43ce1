use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use fracmap_cli::{commands, exit_code, ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "fracmap",
    version,
    about = "Experiments on the discrete fractional-order predator-prey-parasite map"
)]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir` in the config; default `out`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,

    /// Print the fully resolved configuration and exit
    #[arg(long, global = true)]
    dump_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Fixed points, existence and stability at the configured (alpha, s)
    FixedPoints,
    /// Step-size thresholds for every order in `alphas`
    Thresholds,
    /// Iterate the map from `init` and report where the orbit ends up
    Simulate,
    /// Attractor samples across the `[sweep]` range
    Bifurcate,
    /// Largest Lyapunov exponent across the `[sweep]` range
    Lyapunov,
}

fn run(cli: Cli) -> Result<()> {
    let path = cli
        .config
        .ok_or_else(|| ConfigError("--config is required".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(out) = cli.out {
        cfg.output_dir = Some(out);
    }
    let mut stdout = io::stdout();
    if cli.dump_config {
        stdout.write_all(cfg.to_toml().as_bytes())?;
        return Ok(());
    }
    let command = cli
        .command
        .ok_or_else(|| ConfigError("no subcommand given (see --help)".into()))?;
    let out = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n.into());
    }
    let pool = pool.build()?;
    pool.install(|| match command {
        Command::FixedPoints => commands::fixed_points_cmd(&cfg, &out, &mut stdout),
        Command::Thresholds => commands::thresholds_cmd(&cfg, &out, &mut stdout),
        Command::Simulate => commands::simulate_cmd(&cfg, &out, &mut stdout),
        Command::Bifurcate => commands::bifurcate_cmd(&cfg, &out, &mut stdout),
        Command::Lyapunov => commands::lyapunov_cmd(&cfg, &out, &mut stdout),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
