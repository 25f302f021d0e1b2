use std::fmt::Write as _;

use polariton_core::constants::{angular_to_hz, hz_to_angular};
use polariton_core::hybrid::{hybrid_modes, HybridSystemModel};
use polariton_core::sidebands::{
    attenuation_from_db, harmonic_balance_sidebands, simulate_modulated_pmhs, waveguide_filter, ModulationDrive,
    Spectrum,
};

use super::{model_from, pump_power, render, require, Plan};
use crate::artifacts::Artifact;
use crate::config::{Method, RunConfig};
use crate::plot::Table;
use crate::{CliError, CliResult};

pub(super) struct SidebandRun {
    model: HybridSystemModel,
    drive: ModulationDrive,
    method: Method,
    periods: usize,
    harmonics: usize,
    /// Cutoff (rad/s) and power attenuation ratio.
    filter: Option<(f64, f64)>,
}

impl SidebandRun {
    pub fn prepare(config: &RunConfig) -> CliResult<Self> {
        let model = model_from(&config.model)?;
        let c = require(&config.modulation, "[modulation] block")?;

        let mut branches: Vec<f64> = hybrid_modes(&model)
            .map_err(CliError::from_setup)?
            .iter()
            .map(|m| m.omega())
            .collect();
        branches.sort_by(f64::total_cmp);
        let branch = |k: usize| -> CliResult<f64> {
            branches.get(k).copied().ok_or_else(|| {
                CliError::Config(format!("[modulation] pump_branch = {k}, model has {} branches", branches.len()))
            })
        };

        let pump_omega = match (c.pump_frequency_hz, c.pump_branch) {
            (Some(f), None) => hz_to_angular(f),
            (None, Some(k)) => branch(k)?,
            _ => {
                return Err(CliError::Config(
                    "[modulation] needs exactly one of pump_frequency_hz and pump_branch".into(),
                ))
            }
        };
        let omega2 = match (c.frequency_hz, c.frequency_at_splitting) {
            (Some(f), false) => hz_to_angular(f),
            (None, true) => {
                let k = c.pump_branch.ok_or_else(|| {
                    CliError::Config("[modulation] frequency_at_splitting needs pump_branch".into())
                })?;
                let here = branch(k)?;
                let neighbours = [k.checked_sub(1), Some(k + 1)];
                neighbours
                    .into_iter()
                    .flatten()
                    .filter_map(|j| branches.get(j))
                    .map(|w| (w - here).abs())
                    .min_by(f64::total_cmp)
                    .ok_or_else(|| CliError::Config("[modulation] frequency_at_splitting needs two branches".into()))?
            }
            _ => {
                return Err(CliError::Config(
                    "[modulation] needs exactly one of frequency_hz and frequency_at_splitting".into(),
                ))
            }
        };
        let power = pump_power(c.pump_power_w, c.pump_power_dbm, "modulation")?;
        let drive = ModulationDrive::new(c.b2_t, omega2, pump_omega, power).map_err(CliError::from_setup)?;
        if c.periods == 0 {
            return Err(CliError::Config("[modulation] periods must be at least 1".into()));
        }
        if c.harmonics < 3 {
            return Err(CliError::Config("[modulation] harmonics must be at least 3".into()));
        }
        let filter = match &config.filter {
            Some(f) => {
                if !(f.cutoff_hz >= 0.0) || !(f.attenuation_db >= 0.0) {
                    return Err(CliError::Config("[filter] cutoff_hz and attenuation_db must be non-negative".into()));
                }
                Some((hz_to_angular(f.cutoff_hz), attenuation_from_db(f.attenuation_db)))
            }
            None => None,
        };
        Ok(Self {
            model,
            drive,
            method: c.method,
            periods: c.periods,
            harmonics: c.harmonics,
            filter,
        })
    }

    fn methods(&self) -> Vec<&'static str> {
        match self.method {
            Method::TimeDomain => vec!["time_domain"],
            Method::HarmonicBalance => vec!["harmonic_balance"],
            Method::Both => vec!["time_domain", "harmonic_balance"],
        }
    }
}

fn spectrum_table(title: &str, spectrum: &Spectrum) -> String {
    let carrier = spectrum.carrier().norm_sqr();
    let mut t = Table::new(title, &["offset [Hz]", "power [dBc]"]);
    t.comment(&format!("pump at {:e} Hz", angular_to_hz(spectrum.pump_omega)));
    for l in &spectrum.lines {
        t.row(&[angular_to_hz(l.offset_omega), 10.0 * (l.power() / carrier).log10()]);
    }
    t.finish()
}

impl Plan for SidebandRun {
    fn outputs(&self) -> Vec<String> {
        let mut v = Vec::new();
        for m in self.methods() {
            v.push(format!("spectrum_{m}.csv"));
            v.push(format!("spectrum_{m}.dat"));
            if self.filter.is_some() {
                v.push(format!("spectrum_{m}_filtered.csv"));
            }
        }
        if self.method != Method::HarmonicBalance {
            v.push("time_series.csv".into());
        }
        v.push("summary.txt".into());
        v
    }

    fn execute(&self, _seed: u64) -> CliResult<Vec<Artifact>> {
        let mut out = Vec::new();
        let mut s = String::new();
        let d = &self.drive;
        let _ = writeln!(s, "task = sidebands");
        let _ = writeln!(s, "pump_frequency_hz = {:e}", angular_to_hz(d.pump_omega));
        let _ = writeln!(s, "pump_power_w = {:e}", d.pump_power);
        let _ = writeln!(s, "modulation_frequency_hz = {:e}", angular_to_hz(d.omega2));
        let _ = writeln!(s, "b2_t = {:e}", d.b2);
        let mut warnings = d.warnings(&self.model).map_err(CliError::from_run)?;

        let mut spectra = Vec::new();
        for m in self.methods() {
            let spectrum = if m == "time_domain" {
                let run = simulate_modulated_pmhs(&self.model, d, self.periods).map_err(CliError::from_run)?;
                let _ = writeln!(s, "time_domain.parseval_error = {:e}", run.parseval_error());
                let _ = writeln!(s, "time_domain.discarded_periods = {}", run.discarded_periods);
                let _ = writeln!(s, "time_domain.transient_change = {:e}", run.transient_change);
                warnings.extend(run.warnings.iter().cloned());
                out.push(Artifact::new("time_series.csv", render(|w| run.write_time_series_csv(w))?));
                run.spectrum
            } else {
                harmonic_balance_sidebands(&self.model, d, self.harmonics).map_err(CliError::from_run)?
            };
            for n in [-2, -1, 1, 2] {
                let _ = writeln!(s, "{m}.relative_amplitude_{n} = {:e}", spectrum.relative_amplitude(n));
            }
            out.push(Artifact::new(format!("spectrum_{m}.csv"), render(|w| spectrum.write_csv(w))?));
            out.push(Artifact::text(
                format!("spectrum_{m}.dat"),
                spectrum_table(&format!("sideband spectrum ({m})"), &spectrum),
            ));
            if let Some((cutoff, attenuation)) = self.filter {
                let filtered = waveguide_filter(&spectrum, cutoff, attenuation).map_err(CliError::from_run)?;
                out.push(Artifact::new(format!("spectrum_{m}_filtered.csv"), render(|w| filtered.write_csv(w))?));
            }
            spectra.push(spectrum);
        }
        if let [a, b] = spectra.as_slice() {
            let worst = a
                .lines
                .iter()
                .filter_map(|l| b.line(l.harmonic).map(|r| (l.amplitude - r.amplitude).norm()))
                .fold(0.0, f64::max)
                / a.carrier().norm();
            let _ = writeln!(s, "method_agreement = {worst:e}");
        }
        for w in &warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        out.push(Artifact::text("summary.txt", s));
        Ok(out)
    }
}
