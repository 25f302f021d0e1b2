mod bloch;
mod fit;
mod sensitivity;
mod sidebands;
mod spectra;

use std::path::Path;

use polariton_core::hybrid::{HybridConfig, HybridSystemModel};
use polariton_core::sidebands::PumpPower;

use crate::artifacts::Artifact;
use crate::config::{RunConfig, Task};
use crate::{CliError, CliResult};

/// A validated task, ready to run.
pub(crate) trait Plan {
    /// Names of every file the run will produce.
    fn outputs(&self) -> Vec<String>;
    fn execute(&self, seed: u64) -> CliResult<Vec<Artifact>>;
}

pub(crate) fn prepare(task: Task, config: &RunConfig, base: &Path) -> CliResult<Box<dyn Plan>> {
    let allowed = task.blocks();
    let stray: Vec<&str> = config
        .present_blocks()
        .into_iter()
        .filter(|b| !allowed.contains(b))
        .collect();
    if !stray.is_empty() {
        return Err(CliError::Config(format!(
            "task `{}` does not use [{}]",
            task.name(),
            stray.join("], [")
        )));
    }
    Ok(match task {
        Task::Anticrossing => Box::new(spectra::Anticrossing::prepare(config)?),
        Task::Bloch => Box::new(bloch::BlochRun::prepare(config)?),
        Task::Sidebands => Box::new(sidebands::SidebandRun::prepare(config)?),
        Task::TsmSensitivity => Box::new(sensitivity::Budget::prepare_transverse(config)?),
        Task::LsmSensitivity => Box::new(sensitivity::Budget::prepare_longitudinal(config)?),
        Task::Fit => Box::new(fit::FitRun::prepare(config, base)?),
        Task::ScanLimit => Box::new(sensitivity::LimitScan::prepare(config)?),
    })
}

fn require<'a, T>(value: &'a Option<T>, what: &str) -> CliResult<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("missing {what}")))
}

fn model_from(config: &Option<HybridConfig>) -> CliResult<HybridSystemModel> {
    require(config, "[model] block")?
        .to_model()
        .map_err(CliError::from_setup)
}

fn pump_power(watts: Option<f64>, dbm: Option<f64>, block: &str) -> CliResult<f64> {
    let p = match (watts, dbm) {
        (Some(w), None) => PumpPower::Watts(w),
        (None, Some(d)) => PumpPower::Dbm(d),
        _ => {
            return Err(CliError::Config(format!(
                "[{block}] needs exactly one of pump_power_w and pump_power_dbm"
            )))
        }
    };
    let w = p.watts();
    if !(w > 0.0 && w.is_finite()) {
        return Err(CliError::Config(format!("[{block}] pump power must be positive, got {w} W")));
    }
    Ok(w)
}

/// Port by name, else `in`/`out` conventions, else first/last.
fn port_index(model: &HybridSystemModel, name: Option<&str>, fallback: &str, last: bool) -> CliResult<usize> {
    let ports = model.ports();
    if ports.is_empty() {
        return Err(CliError::Config("[model] needs at least one port".into()));
    }
    match name {
        Some(n) => ports
            .iter()
            .position(|p| p.name == n)
            .ok_or_else(|| CliError::Config(format!("no port named `{n}`"))),
        None => Ok(ports
            .iter()
            .position(|p| p.name == fallback)
            .unwrap_or(if last { ports.len() - 1 } else { 0 })),
    }
}

/// Run a core writer into a byte buffer.
fn render(write: impl FnOnce(&mut Vec<u8>) -> polariton_core::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(CliError::from_run)?;
    Ok(buf)
}

fn positive(value: f64, what: &str) -> CliResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Config(format!("{what} must be positive, got {value}")))
    }
}
