use std::fmt::Write as _;

use polariton_core::bloch::{absorbed_power, integrate_bloch, steady_state_transverse, BlochParameters};
use polariton_core::constants::{angular_to_hz, hz_to_angular};

use super::{positive, render, require, Plan};
use crate::artifacts::Artifact;
use crate::config::RunConfig;
use crate::plot::Table;
use crate::{CliError, CliResult};

pub(super) struct BlochRun {
    params: BlochParameters,
    duration: f64,
    max_step: f64,
    periods: usize,
}

impl BlochRun {
    pub fn prepare(config: &RunConfig) -> CliResult<Self> {
        let c = require(&config.bloch, "[bloch] block")?;
        let larmor = polariton_core::constants::GYROMAGNETIC_RATIO * c.bias_field_t;
        let drive = c.drive_frequency_hz.map(hz_to_angular).unwrap_or(larmor);
        let params = BlochParameters::from_spin_density(
            c.bias_field_t,
            c.drive_amplitude_t,
            drive,
            c.relaxation_time_s,
            c.spin_density_m3,
            c.sample_volume_m3,
            c.polarization,
        )
        .map_err(CliError::from_setup)?;
        let duration = positive(c.duration_s, "[bloch] duration_s")?;
        let max_step = positive(c.max_step_s, "[bloch] max_step_s")?;
        if !(drive > 0.0) {
            return Err(CliError::Config("[bloch] drive frequency must be positive".into()));
        }
        let period = std::f64::consts::TAU / drive;
        if c.average_periods == 0 || c.average_periods as f64 * period > duration {
            return Err(CliError::Config(format!(
                "[bloch] average_periods = {} does not fit in duration_s = {duration}",
                c.average_periods
            )));
        }
        Ok(Self {
            params,
            duration,
            max_step,
            periods: c.average_periods,
        })
    }
}

impl Plan for BlochRun {
    fn outputs(&self) -> Vec<String> {
        ["trajectory.csv", "trajectory.dat", "summary.txt"].map(String::from).to_vec()
    }

    fn execute(&self, _seed: u64) -> CliResult<Vec<Artifact>> {
        let p = &self.params;
        let traj = integrate_bloch(p, self.duration, self.max_step).map_err(CliError::from_run)?;

        let mut table = Table::new(
            "Bloch trajectory",
            &["t [s]", "Mx [A/m]", "My [A/m]", "Mz [A/m]"],
        );
        for (t, m) in traj.times.iter().zip(&traj.magnetization) {
            table.row(&[*t, m[0], m[1], m[2]]);
        }

        let phasor = traj.demodulate(p.drive_omega, self.periods).map_err(CliError::from_run)?;
        let numeric_power = traj.absorbed_power(p, self.periods).map_err(CliError::from_run)?;
        let detuning = p.larmor_omega() - p.drive_omega;
        let lorentzian = 1.0 / (1.0 + (detuning * p.relaxation_time).powi(2));
        let formula_power = absorbed_power(p.spin_count, p.drive_omega, p.co_rotating_amplitude(), p.relaxation_time)
            .map_err(CliError::from_run)?
            * lorentzian;

        let mut s = String::new();
        let _ = writeln!(s, "task = bloch");
        let _ = writeln!(s, "larmor_frequency_hz = {:e}", angular_to_hz(p.larmor_omega()));
        let _ = writeln!(s, "drive_frequency_hz = {:e}", angular_to_hz(p.drive_omega));
        let _ = writeln!(s, "spin_count = {:e}", p.spin_count);
        let _ = writeln!(s, "tip_ratio = {:e}", p.tip_ratio());
        let _ = writeln!(s, "linear_response = {}", p.is_linear_response());
        let _ = writeln!(s, "samples = {}", traj.len());
        let _ = writeln!(s, "average_periods = {}", self.periods);
        let _ = writeln!(s, "transverse_amplitude_numeric = {:e}", phasor.norm());
        let _ = writeln!(s, "transverse_phase_numeric = {:e}", phasor.arg());
        match steady_state_transverse(p) {
            Ok((amp, phase)) => {
                let _ = writeln!(s, "transverse_amplitude_analytic = {amp:e}");
                let _ = writeln!(s, "transverse_phase_analytic = {phase:e}");
                let _ = writeln!(s, "transverse_amplitude_relative_error = {:e}", (phasor.norm() - amp).abs() / amp);
            }
            Err(e) => {
                let _ = writeln!(s, "transverse_amplitude_analytic = not available ({e})");
            }
        }
        let _ = writeln!(s, "absorbed_power_numeric_w = {numeric_power:e}");
        let _ = writeln!(s, "absorbed_power_formula_w = {formula_power:e}");
        let _ = writeln!(
            s,
            "absorbed_power_relative_error = {:e}",
            (numeric_power - formula_power).abs() / formula_power
        );
        if !p.is_linear_response() {
            let _ = writeln!(s, "warning = tip ratio above the linear-response limit; formula values are not trusted");
        }

        Ok(vec![
            Artifact::new("trajectory.csv", render(|w| traj.write_csv(w))?),
            Artifact::text("trajectory.dat", table.finish()),
            Artifact::text("summary.txt", s),
        ])
    }
}
