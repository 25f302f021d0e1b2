use std::f64::consts::{LN_10, PI};
use std::io::Write;

use num_complex::Complex64;

use super::{check_model, harmonic_lines, ModulationDrive, Spectrum};
use crate::constants::GYROMAGNETIC_RATIO;
use crate::hybrid::{dynamical_matrix, hybrid_modes, port_vectors, HybridSystemModel};
use crate::linalg::{self, CMatrix};
use crate::ode::{self, IntegratorConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSettings {
    pub input_port: usize,
    pub output_port: usize,
    /// Output samples per modulation period; also the number of harmonics
    /// resolved by demodulation.
    pub samples_per_period: usize,
    /// Product of step size and fastest rate in the pump frame.
    pub step_scale: f64,
    /// The transient is integrated until a free hybrid mode would have
    /// decayed in amplitude by this many decades.
    pub settle_decades: f64,
    /// Largest allowed change of any harmonic between the last two periods,
    /// relative to the carrier.
    pub transient_tolerance: f64,
}

impl SimulationSettings {
    /// Defaults with ports named `in` and `out` (else the first and last port).
    pub fn for_model(model: &HybridSystemModel) -> Self {
        let ports = model.ports();
        let find = |name: &str, fallback: usize| ports.iter().position(|p| p.name == name).unwrap_or(fallback);
        Self {
            input_port: find("in", 0),
            output_port: find("out", ports.len().saturating_sub(1)),
            samples_per_period: 64,
            step_scale: 1e-2,
            settle_decades: 10.0,
            transient_tolerance: 1e-8,
        }
    }
}

/// Periodic steady state of a modulated, pumped hybrid system.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationRun {
    pub drive: ModulationDrive,
    pub settings: SimulationSettings,
    /// Sample times of the demodulation window (s).
    pub times: Vec<f64>,
    /// Output amplitude in the frame rotating at the pump (√W).
    pub output: Vec<Complex64>,
    pub spectrum: Spectrum,
    pub warnings: Vec<String>,
    pub discarded_periods: usize,
    pub steps_per_sample: usize,
    /// Largest harmonic change between the last two periods, relative to the carrier.
    pub transient_change: f64,
}

impl ModulationRun {
    /// Time-averaged output power over the window (W).
    pub fn mean_power(&self) -> f64 {
        self.output.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.output.len() as f64
    }

    /// Relative mismatch between time-series power and total line power.
    pub fn parseval_error(&self) -> f64 {
        let p = self.mean_power();
        (p - self.spectrum.total_power()).abs() / p
    }

    /// CSV with columns `t,re,im` of the pump-frame output amplitude.
    pub fn write_time_series_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,re,im")?;
        for (t, z) in self.times.iter().zip(&self.output) {
            writeln!(w, "{t},{},{}", z.re, z.im)?;
        }
        Ok(())
    }
}

pub fn simulate_modulated_pmhs(model: &HybridSystemModel, drive: &ModulationDrive, n_periods: usize) -> Result<ModulationRun> {
    simulate_modulated_pmhs_with(model, drive, n_periods, &SimulationSettings::for_model(model))
}

/// Integrate `dã/dt = −i(M(t) − ω_p)ã − k_in √P` in the frame rotating at the
/// pump, starting from the unmodulated steady state, discard the transient and
/// demodulate `n_periods` modulation periods.
pub fn simulate_modulated_pmhs_with(
    model: &HybridSystemModel,
    drive: &ModulationDrive,
    n_periods: usize,
    settings: &SimulationSettings,
) -> Result<ModulationRun> {
    drive.validate()?;
    check_model(model)?;
    if n_periods == 0 {
        return Err(Error::InvalidParameter {
            name: "n_periods",
            reason: "need at least one modulation period".into(),
        });
    }
    if settings.samples_per_period < 4 {
        return Err(Error::InvalidParameter {
            name: "samples_per_period",
            reason: "need at least 4 samples per period".into(),
        });
    }
    if !(settings.step_scale > 0.0 && settings.step_scale <= 0.5) {
        return Err(Error::InvalidParameter {
            name: "step_scale",
            reason: format!("must lie in (0, 0.5], got {}", settings.step_scale),
        });
    }
    let warnings = drive.warnings(model)?;
    let (k_in, k_out) = port_vectors(model, settings.input_port, settings.output_port)?;
    let n = model.len();
    let source = drive.pump_power.sqrt();

    let mut a: CMatrix = dynamical_matrix(model);
    for j in 0..n {
        a[(j, j)] -= drive.pump_omega;
    }
    let magnon: Vec<bool> = model.modes().iter().map(|m| m.is_magnon()).collect();
    let depth = GYROMAGNETIC_RATIO * drive.b2;

    // unmodulated steady state: i(ω_p − M) ã = k_in √P
    let lhs = a.map(|z| -Complex64::i() * z);
    let start = linalg::solve(&lhs, &(&k_in * Complex64::new(source, 0.0)))?;

    let slowest = hybrid_modes(model)?
        .iter()
        .map(|m| m.linewidth())
        .fold(f64::INFINITY, f64::min);
    let period = 2.0 * PI / drive.omega2;
    let settle = 2.0 * settings.settle_decades * LN_10 / slowest;
    let discarded_periods = ((settle / period).ceil() as usize).max(1);

    let fastest = (0..n)
        .map(|j| (0..n).map(|k| a[(j, k)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        + depth
        + drive.omega2;
    let per = settings.samples_per_period;
    let dt = period / per as f64;
    let steps_per_sample = ((dt * fastest / settings.step_scale).ceil() as usize).max(1);
    let h = dt / steps_per_sample as f64;

    let total_periods = discarded_periods + n_periods + 1;
    // sample k sits at t = k·dt; the recorded span starts on a period boundary
    let record_from = discarded_periods * per;
    let sample_count = total_periods * per;
    let output_times: Vec<f64> = (1..sample_count).map(|k| k as f64 * dt).collect();

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let shift = depth * (drive.omega2 * t).sin();
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += a[(j, k)] * Complex64::new(y[2 * k], y[2 * k + 1]);
            }
            if magnon[j] {
                acc += shift * Complex64::new(y[2 * j], y[2 * j + 1]);
            }
            let d = -Complex64::i() * acc - k_in[j] * source;
            dy[2 * j] = d.re;
            dy[2 * j + 1] = d.im;
        }
    };
    let y0: Vec<f64> = start.iter().flat_map(|z| [z.re, z.im]).collect();
    let mut recorded = Vec::with_capacity((n_periods + 1) * per);
    let mut times = Vec::with_capacity((n_periods + 1) * per);
    let mut index = 0usize;
    ode::integrate(rhs, 0.0, &y0, &output_times, &IntegratorConfig::fixed(h), |t, y| {
        index += 1;
        if index >= record_from {
            let out: Complex64 = (0..n).map(|j| k_out[j] * Complex64::new(y[2 * j], y[2 * j + 1])).sum();
            recorded.push(out);
            times.push(t);
        }
    })?;

    // recorded[0..per] is the period before the window
    let previous = demodulate(&recorded[..per], per);
    let last = demodulate(&recorded[recorded.len() - per..], per);
    let carrier = last[per / 2].norm();
    let transient_change = previous
        .iter()
        .zip(&last)
        .map(|(p, l)| (p - l).norm())
        .fold(0.0, f64::max)
        / carrier;
    if !(transient_change <= settings.transient_tolerance) {
        return Err(Error::TransientNotConverged {
            change: transient_change,
            tolerance: settings.transient_tolerance,
        });
    }

    let window = recorded.split_off(per);
    let coefficients = demodulate(&window, per);
    let half = (per / 2) as i32;
    let spectrum = harmonic_lines(
        drive.pump_omega,
        drive.omega2,
        coefficients.into_iter().enumerate().map(|(i, c)| (i as i32 - half, c)),
    );
    Ok(ModulationRun {
        drive: *drive,
        settings: *settings,
        times: times.split_off(per),
        output: window,
        spectrum,
        warnings,
        discarded_periods,
        steps_per_sample,
        transient_change,
    })
}

/// Harmonics `n = −per/2 .. per/2 − 1` of samples taken `per` times per
/// period over an integer number of periods, `c_n = ⟨x e^{inω₂t}⟩`.
fn demodulate(samples: &[Complex64], per: usize) -> Vec<Complex64> {
    let half = (per / 2) as i64;
    let count = samples.len() as f64;
    (-half..per as i64 - half)
        .map(|n| {
            let sum: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    let phase = 2.0 * PI * ((n * k as i64).rem_euclid(per as i64)) as f64 / per as f64;
                    x * Complex64::from_polar(1.0, phase)
                })
                .sum();
            sum / count
        })
        .collect()
}
