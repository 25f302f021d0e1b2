//! Run configuration. One TOML file per run; frequencies in Hz, fields in
//! tesla, powers in W (or dBm where named), times in seconds.

use std::path::PathBuf;

use clap::ValueEnum;
use polariton_core::bloch::Polarization;
use polariton_core::hybrid::HybridConfig;
use polariton_core::sensitivity::{ReadoutChain, SweepRange};
use serde::Deserialize;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Anticrossing,
    Bloch,
    Sidebands,
    TsmSensitivity,
    LsmSensitivity,
    Fit,
    ScanLimit,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Anticrossing => "anticrossing",
            Task::Bloch => "bloch",
            Task::Sidebands => "sidebands",
            Task::TsmSensitivity => "tsm-sensitivity",
            Task::LsmSensitivity => "lsm-sensitivity",
            Task::Fit => "fit",
            Task::ScanLimit => "scan-limit",
        }
    }

    /// Config blocks the task reads; any other block is rejected.
    pub(crate) fn blocks(&self) -> &'static [&'static str] {
        match self {
            Task::Anticrossing => &["model", "grid"],
            Task::Bloch => &["bloch"],
            Task::Sidebands => &["model", "modulation", "filter"],
            Task::TsmSensitivity => &["noise", "transverse", "radiometer", "sweep"],
            Task::LsmSensitivity => &["noise", "longitudinal", "model", "radiometer", "sweep"],
            Task::Fit => &["model", "grid", "fit"],
            Task::ScanLimit => &["noise", "transverse", "longitudinal", "scan"],
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Option<Task>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub model: Option<HybridConfig>,
    pub grid: Option<GridConfig>,
    pub bloch: Option<BlochConfig>,
    pub modulation: Option<ModulationConfig>,
    pub filter: Option<FilterConfig>,
    pub noise: Option<NoiseConfig>,
    pub transverse: Option<TransverseConfig>,
    pub longitudinal: Option<LongitudinalConfig>,
    pub radiometer: Option<RadiometerConfig>,
    pub sweep: Option<SweepConfig>,
    pub fit: Option<FitConfig>,
    pub scan: Option<ScanConfig>,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub(crate) fn present_blocks(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut add = |present: bool, name| {
            if present {
                v.push(name)
            }
        };
        add(self.model.is_some(), "model");
        add(self.grid.is_some(), "grid");
        add(self.bloch.is_some(), "bloch");
        add(self.modulation.is_some(), "modulation");
        add(self.filter.is_some(), "filter");
        add(self.noise.is_some(), "noise");
        add(self.transverse.is_some(), "transverse");
        add(self.longitudinal.is_some(), "longitudinal");
        add(self.radiometer.is_some(), "radiometer");
        add(self.sweep.is_some(), "sweep");
        add(self.fit.is_some(), "fit");
        add(self.scan.is_some(), "scan");
        v
    }
}

/// Map grid. Either `points` × `points` spanning `half_width_g` couplings
/// around the crossing of `pair`, or explicit limits.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub pair: Option<[usize; 2]>,
    pub points: Option<usize>,
    pub half_width_g: Option<f64>,
    pub field_min_t: Option<f64>,
    pub field_max_t: Option<f64>,
    pub field_points: Option<usize>,
    pub frequency_min_hz: Option<f64>,
    pub frequency_max_hz: Option<f64>,
    pub frequency_points: Option<usize>,
    pub input_port: Option<String>,
    pub output_port: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochConfig {
    pub bias_field_t: f64,
    pub drive_amplitude_t: f64,
    /// Defaults to the Larmor frequency.
    pub drive_frequency_hz: Option<f64>,
    pub relaxation_time_s: f64,
    pub spin_density_m3: f64,
    pub sample_volume_m3: f64,
    #[serde(default)]
    pub polarization: Polarization,
    pub duration_s: f64,
    pub max_step_s: f64,
    /// Drive periods averaged for the steady-state figures.
    #[serde(default = "default_average_periods")]
    pub average_periods: usize,
}

fn default_average_periods() -> usize {
    20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    pub b2_t: f64,
    pub frequency_hz: Option<f64>,
    /// Use the splitting between the pumped branch and its neighbour.
    #[serde(default)]
    pub frequency_at_splitting: bool,
    pub pump_frequency_hz: Option<f64>,
    /// Index of the hybrid branch (sorted by frequency) to pump on.
    pub pump_branch: Option<usize>,
    pub pump_power_w: Option<f64>,
    pub pump_power_dbm: Option<f64>,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default = "default_harmonics")]
    pub harmonics: usize,
}

fn default_periods() -> usize {
    4
}

fn default_harmonics() -> usize {
    16
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TimeDomain,
    HarmonicBalance,
    #[default]
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub cutoff_hz: f64,
    pub attenuation_db: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub temperature_k: Option<f64>,
    pub density_w_per_hz: Option<f64>,
    pub chain: Option<ReadoutChain>,
    /// Frequency for the quantum-limit term of `chain`; defaults to the
    /// transverse drive frequency.
    pub frequency_hz: Option<f64>,
    #[serde(default)]
    pub residual_w_per_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransverseConfig {
    pub spin_count: f64,
    pub frequency_hz: f64,
    pub relaxation_time_s: Option<f64>,
    /// Alternative to `relaxation_time_s`: fitted linewidths.
    pub gamma_c_hz: Option<f64>,
    pub gamma_m_hz: Option<f64>,
    #[serde(default = "half")]
    pub photon_weight: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LongitudinalConfig {
    pub bias_field_t: f64,
    /// Defaults to 1/2, or to the model's mode-pull coefficient of
    /// `pump_branch` when a `[model]` block is given.
    pub mode_pull: Option<f64>,
    pub pump_branch: Option<usize>,
    pub quality_factor: f64,
    pub pump_power_w: Option<f64>,
    pub pump_power_dbm: Option<f64>,
    #[serde(default = "one")]
    pub loss_factor: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiometerConfig {
    pub bandwidth_hz: f64,
    pub time_s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Any input name listed in the report echo, e.g. `spin_count`.
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl SweepConfig {
    pub fn range(&self) -> SweepRange {
        SweepRange {
            start: self.start,
            stop: self.stop,
            points: self.points,
            log: self.log,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Magnitude CSV in the map format; relative to the config file.
    pub data: Option<PathBuf>,
    pub phase: Option<PathBuf>,
    /// Generate data from `[model]` on `[grid]` instead of reading a file.
    #[serde(default)]
    pub synthetic: bool,
    /// Relative multiplicative noise added to synthetic data.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub loss: LossConfig,
    /// Seed free two-mode parameters from the map ridges.
    #[serde(default)]
    pub seed_from_ridges: bool,
    #[serde(default)]
    pub free: Vec<FreeConfig>,
    pub max_iterations: Option<usize>,
    pub mode_volume_m3: Option<f64>,
    #[serde(default = "one")]
    pub fill_factor: f64,
    #[serde(default = "half")]
    pub photon_weight: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossConfig {
    #[default]
    Linear,
    Log,
}

/// A free fit parameter; values in the parameter's external unit (Hz for
/// rates and frequencies).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeConfig {
    pub name: String,
    pub initial: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Use this sensitivity instead of evaluating `[transverse]`/`[longitudinal]`.
    pub sensitivity_t_per_rthz: Option<f64>,
    pub bandwidth_hz: f64,
    pub time_s: SweepRange,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("task = \"bloch\"\nbogus = 1\n").is_err());
        assert!(RunConfig::parse("[noise]\ntemperature = 1.0\n").is_err());
        let c = RunConfig::parse("task = \"tsm-sensitivity\"\n[noise]\ntemperature_k = 1.0\n").unwrap();
        assert_eq!(c.task, Some(Task::TsmSensitivity));
        assert_eq!(c.present_blocks(), vec!["noise"]);
    }

    #[test]
    fn sweep_range_values() {
        let c = RunConfig::parse("[sweep]\nparameter = \"spin_count\"\nstart = 1e18\nstop = 1e22\npoints = 5\nlog = true\n")
            .unwrap();
        let s = c.sweep.unwrap();
        assert_eq!(s.range().values().unwrap().len(), 5);
    }
}
