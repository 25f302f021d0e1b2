use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polariton_cli::{run, CliError, RunOptions, Task, THREADS_ENV};

#[derive(Parser)]
#[command(name = "polariton", version, about = "Cavity magnon polariton workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transmission map and branch frequencies across the anticrossing.
    Anticrossing(Common),
    /// Bloch-equation trajectory of a driven spin ensemble.
    Bloch(Common),
    /// Sideband spectrum of a modulated, pumped hybrid system.
    Sidebands(Common),
    /// Transverse-scheme field sensitivity.
    TsmSensitivity(Common),
    /// Longitudinal-scheme field sensitivity.
    LsmSensitivity(Common),
    /// Fit the coupled-oscillator model to a transmission map.
    Fit(Common),
    /// Radiometer field limit against integration time.
    ScanLimit(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Seed for every random draw; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace files left by an earlier run.
    #[arg(long)]
    force_overwrite: bool,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, common) = match cli.command {
        Command::Anticrossing(c) => (Task::Anticrossing, c),
        Command::Bloch(c) => (Task::Bloch, c),
        Command::Sidebands(c) => (Task::Sidebands, c),
        Command::TsmSensitivity(c) => (Task::TsmSensitivity, c),
        Command::LsmSensitivity(c) => (Task::LsmSensitivity, c),
        Command::Fit(c) => (Task::Fit, c),
        Command::ScanLimit(c) => (Task::ScanLimit, c),
    };
    let options = RunOptions {
        task,
        config: common.config,
        out: common.out,
        seed: common.seed,
        force_overwrite: common.force_overwrite,
    };
    match init_threads().and_then(|()| run(&options)) {
        Ok(manifest) => {
            print!("{}", manifest.render());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("polariton: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
