use std::fmt::Write as _;

use polariton_core::constants::hz_to_angular;
use polariton_core::fitting::relaxation_time_from_fit;
use polariton_core::hybrid::{hybrid_modes, mode_pull_coefficient};
use polariton_core::sensitivity::{
    integrated_field_limit, sweep, write_reports_csv, Noise, Radiometer, Scheme, SensitivityInputs,
};

use super::{model_from, positive, pump_power, render, require, Plan};
use crate::artifacts::Artifact;
use crate::config::{LongitudinalConfig, NoiseConfig, RunConfig, SweepConfig, TransverseConfig};
use crate::plot::Table;
use crate::{CliError, CliResult};

/// Noise input plus residual; `omega` feeds the quantum-limit term of a chain.
fn noise_from(cfg: &NoiseConfig, omega: Option<f64>) -> CliResult<(Noise, f64)> {
    let noise = match (cfg.temperature_k, cfg.density_w_per_hz, &cfg.chain) {
        (Some(t), None, None) => Noise::Temperature(t),
        (None, Some(d), None) => Noise::Density(d),
        (None, None, Some(chain)) => {
            let omega = cfg.frequency_hz.map(hz_to_angular).or(omega).ok_or_else(|| {
                CliError::Config("[noise] chain needs frequency_hz for this task".into())
            })?;
            Noise::Temperature(chain.system_noise_temperature(omega).map_err(CliError::from_setup)?)
        }
        _ => {
            return Err(CliError::Config(
                "[noise] needs exactly one of temperature_k, density_w_per_hz and chain".into(),
            ))
        }
    };
    noise.density(cfg.residual_w_per_hz).map_err(CliError::from_setup)?;
    Ok((noise, cfg.residual_w_per_hz))
}

fn transverse(noise: &NoiseConfig, t: &TransverseConfig) -> CliResult<SensitivityInputs> {
    let omega = hz_to_angular(positive(t.frequency_hz, "[transverse] frequency_hz")?);
    let relaxation = match (t.relaxation_time_s, t.gamma_c_hz, t.gamma_m_hz) {
        (Some(ts), None, None) => ts,
        (None, Some(gc), Some(gm)) => {
            relaxation_time_from_fit(hz_to_angular(gc), hz_to_angular(gm), t.photon_weight)
                .map_err(CliError::from_setup)?
        }
        _ => {
            return Err(CliError::Config(
                "[transverse] needs relaxation_time_s or both gamma_c_hz and gamma_m_hz".into(),
            ))
        }
    };
    let (n, residual) = noise_from(noise, Some(omega))?;
    let mut inputs = SensitivityInputs::transverse(n, t.spin_count, omega, relaxation);
    inputs.residual_noise = residual;
    Ok(inputs)
}

fn longitudinal(noise: &NoiseConfig, l: &LongitudinalConfig, config: &RunConfig) -> CliResult<SensitivityInputs> {
    let power = pump_power(l.pump_power_w, l.pump_power_dbm, "longitudinal")?;
    let (mode_pull, pump_omega) = match (&config.model, l.mode_pull) {
        (Some(_), None) => {
            let model = model_from(&config.model)?;
            let branch = l.pump_branch.ok_or_else(|| {
                CliError::Config("[longitudinal] needs pump_branch to take the mode pull from [model]".into())
            })?;
            let r = mode_pull_coefficient(&model, branch, l.bias_field_t).map_err(CliError::from_setup)?;
            let here = model.with_bias_field(l.bias_field_t).map_err(CliError::from_setup)?;
            let mut omegas: Vec<f64> = hybrid_modes(&here).map_err(CliError::from_setup)?.iter().map(|m| m.omega()).collect();
            omegas.sort_by(f64::total_cmp);
            (r, omegas.get(branch).copied())
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Config("[longitudinal] mode_pull conflicts with a [model] block".into()))
        }
        (None, r) => (r.unwrap_or(0.5), None),
    };
    let (n, residual) = noise_from(noise, pump_omega)?;
    let mut inputs = SensitivityInputs::longitudinal(n, l.bias_field_t, mode_pull, l.quality_factor, power);
    if let Scheme::Longitudinal { loss_factor, .. } = &mut inputs.scheme {
        *loss_factor = l.loss_factor;
    }
    inputs.residual_noise = residual;
    Ok(inputs)
}

pub(super) struct Budget {
    inputs: SensitivityInputs,
    sweep: Option<SweepConfig>,
}

impl Budget {
    fn finish(mut inputs: SensitivityInputs, config: &RunConfig) -> CliResult<Self> {
        if let Some(r) = config.radiometer {
            inputs.radiometer = Some(Radiometer {
                bandwidth: r.bandwidth_hz,
                time: r.time_s,
            });
        }
        inputs.evaluate().map_err(CliError::from_setup)?;
        if let Some(s) = &config.sweep {
            let values = s.range().values().map_err(CliError::from_setup)?;
            for v in [values[0], values[values.len() - 1]] {
                inputs.with_parameter(&s.parameter, v).map_err(CliError::from_setup)?;
            }
        }
        Ok(Self {
            inputs,
            sweep: config.sweep.clone(),
        })
    }

    pub fn prepare_transverse(config: &RunConfig) -> CliResult<Self> {
        let inputs = transverse(
            &config.noise.clone().unwrap_or_default(),
            require(&config.transverse, "[transverse] block")?,
        )?;
        Self::finish(inputs, config)
    }

    pub fn prepare_longitudinal(config: &RunConfig) -> CliResult<Self> {
        let inputs = longitudinal(
            &config.noise.clone().unwrap_or_default(),
            require(&config.longitudinal, "[longitudinal] block")?,
            config,
        )?;
        Self::finish(inputs, config)
    }
}

impl Plan for Budget {
    fn outputs(&self) -> Vec<String> {
        let mut v = vec!["report.txt".to_string()];
        if self.sweep.is_some() {
            v.push("sweep.csv".into());
            v.push("sweep.dat".into());
        }
        v
    }

    fn execute(&self, _seed: u64) -> CliResult<Vec<Artifact>> {
        let report = self.inputs.evaluate().map_err(CliError::from_run)?;
        let mut out = vec![Artifact::text("report.txt", report.to_key_value())];
        if let Some(s) = &self.sweep {
            let values = s.range().values().map_err(CliError::from_run)?;
            let reports = sweep(&self.inputs, &s.parameter, &values).map_err(CliError::from_run)?;
            out.push(Artifact::new("sweep.csv", render(|w| write_reports_csv(&reports, w))?));
            let mut t = Table::new(
                &format!("{} sensitivity sweep", report.formula()),
                &[&s.parameter, "sensitivity [T/rtHz]"],
            );
            for (v, r) in values.iter().zip(&reports) {
                t.row(&[*v, r.expected_sensitivity]);
            }
            out.push(Artifact::text("sweep.dat", t.finish()));
        }
        Ok(out)
    }
}

pub(super) struct LimitScan {
    sensitivity: f64,
    source: String,
    bandwidth: f64,
    times: Vec<f64>,
}

impl LimitScan {
    pub fn prepare(config: &RunConfig) -> CliResult<Self> {
        let scan = require(&config.scan, "[scan] block")?;
        let noise = config.noise.clone().unwrap_or_default();
        let (sensitivity, source) = match (scan.sensitivity_t_per_rthz, &config.transverse, &config.longitudinal) {
            (Some(s), None, None) => (positive(s, "[scan] sensitivity_t_per_rthz")?, "given".to_string()),
            (None, Some(t), None) => {
                let r = transverse(&noise, t)?.evaluate().map_err(CliError::from_setup)?;
                (r.expected_sensitivity, r.to_key_value())
            }
            (None, None, Some(l)) => {
                let r = longitudinal(&noise, l, config)?.evaluate().map_err(CliError::from_setup)?;
                (r.expected_sensitivity, r.to_key_value())
            }
            _ => {
                return Err(CliError::Config(
                    "scan-limit needs exactly one of [scan] sensitivity_t_per_rthz, [transverse], [longitudinal]".into(),
                ))
            }
        };
        let times = scan.time_s.values().map_err(CliError::from_setup)?;
        let bandwidth = positive(scan.bandwidth_hz, "[scan] bandwidth_hz")?;
        for &t in &times {
            positive(t, "[scan] time_s values")?;
        }
        Ok(Self {
            sensitivity,
            source,
            bandwidth,
            times,
        })
    }
}

impl Plan for LimitScan {
    fn outputs(&self) -> Vec<String> {
        ["limit.csv", "limit.dat", "report.txt"].map(String::from).to_vec()
    }

    fn execute(&self, _seed: u64) -> CliResult<Vec<Artifact>> {
        let limits = self
            .times
            .iter()
            .map(|&t| integrated_field_limit(self.sensitivity, self.bandwidth, t))
            .collect::<polariton_core::Result<Vec<_>>>()
            .map_err(CliError::from_run)?;
        let mut csv = String::from("time_s,field_limit_t\n");
        let mut t = Table::new("radiometer field limit", &["time [s]", "field limit [T]"]);
        for (time, b) in self.times.iter().zip(&limits) {
            let _ = writeln!(csv, "{time:e},{b:e}");
            t.row(&[*time, *b]);
        }
        let mut s = String::new();
        let _ = writeln!(s, "task = scan-limit");
        let _ = writeln!(s, "sensitivity_t_per_rthz = {:e}", self.sensitivity);
        let _ = writeln!(s, "bandwidth_hz = {:e}", self.bandwidth);
        let _ = writeln!(s, "field_limit_method = radiometer estimate");
        if self.source == "given" {
            let _ = writeln!(s, "sensitivity_source = given");
        } else {
            let _ = writeln!(s, "sensitivity_source = evaluated");
            for line in self.source.lines() {
                let _ = writeln!(s, "budget.{line}");
            }
        }
        Ok(vec![
            Artifact::text("limit.csv", csv),
            Artifact::text("limit.dat", t.finish()),
            Artifact::text("report.txt", s),
        ])
    }
}
