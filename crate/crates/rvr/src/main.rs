use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rvr::commands::{self, GridKind, Overrides};

/// Compares dynamic-weight AMM pools with rebalancing the same weights on a CEX.
#[derive(Debug, Parser)]
#[command(name = "rvr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single run with per-step outputs.
    Simulate(Common),
    /// Strategy grid from the `[sweep]` section.
    Sweep(Common),
    /// Cost cube from the `[cube]` section.
    Cube(Common),
    /// Cumulative-return series for constant and momentum pools.
    EmitFigureData(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid commands.
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// Seed for synthetic data (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run(cli: Cli) -> rvr::Result<()> {
    let (Command::Simulate(common) | Command::Sweep(common) | Command::Cube(common) | Command::EmitFigureData(common)) =
        &cli.command;
    let overrides = Overrides { out: common.out.clone(), seed: common.seed };
    let (config, dir) = commands::prepare(&common.config, &overrides)?;
    let workers = common.workers.max(1);
    match cli.command {
        Command::Simulate(_) => {
            let s = commands::simulate(&config, &dir)?.summary;
            println!(
                "final_rvr_usd={} scaled_rvr={} pool_return={} cex_return={} -> {}",
                s.final_rvr_usd,
                s.scaled_rvr,
                s.pool_return,
                s.cex_return,
                dir.display()
            );
        }
        Command::Sweep(_) => {
            let (path, rows) = commands::run_grid_command(&config, &dir, GridKind::Sweep, workers)?;
            println!("{rows} rows -> {}", path.display());
        }
        Command::Cube(_) => {
            let (path, rows) = commands::run_grid_command(&config, &dir, GridKind::Cube, workers)?;
            println!("{rows} rows -> {}", path.display());
        }
        Command::EmitFigureData(_) => {
            for path in commands::emit_figure_data(&config, &dir)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
