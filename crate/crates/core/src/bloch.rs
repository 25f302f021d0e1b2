//! Bloch dynamics of a transversely driven magnetization.
//!
//! The integrated equation is
//!
//! ```text
//! dM/dt = γ M × (b_x(t) x̂ + b_y(t) ŷ + B₀ ẑ) − (M − M₀ ẑ) / T_s
//! ```
//!
//! with a single relaxation time for all components. A linearly polarized
//! drive `b₁ cos(ω₁t) x̂` splits into two counter-rotating halves of
//! amplitude `b₁/2`; only the co-rotating half is resonant, so the analytic
//! steady state and [`absorbed_power`] are expressed through the co-rotating
//! amplitude ([`BlochParameters::co_rotating_amplitude`]). The free
//! precession sense is `M_x + iM_y ∝ e^{−iγB₀t}`.

use std::io::Write;

use num_complex::Complex64;

use crate::constants::{BOHR_MAGNETON, GYROMAGNETIC_RATIO};
use crate::error::{non_negative, positive};
use crate::ode::{self, IntegratorConfig, StepControl};
use crate::{Error, Result};

/// Tip ratio `γ b₁ T_s` above which the linear-response formulas are not trusted.
pub const LINEAR_RESPONSE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// `b₁ cos(ω₁t) x̂`
    #[default]
    Linear,
    /// Co-rotating field of amplitude `b₁`.
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochParameters {
    /// Static field along z (T).
    pub bias_field: f64,
    /// Transverse drive amplitude (T).
    pub drive_amplitude: f64,
    /// Drive angular frequency (rad/s).
    pub drive_omega: f64,
    /// Relaxation time (s).
    pub relaxation_time: f64,
    /// Equilibrium magnetization (A/m).
    pub equilibrium_magnetization: f64,
    /// Spins per m³.
    pub spin_density: f64,
    pub spin_count: f64,
    /// m³
    pub sample_volume: f64,
    pub polarization: Polarization,
}

impl BlochParameters {
    pub fn new(
        bias_field: f64,
        drive_amplitude: f64,
        drive_omega: f64,
        relaxation_time: f64,
        equilibrium_magnetization: f64,
        spin_density: f64,
        sample_volume: f64,
        spin_count: f64,
        polarization: Polarization,
    ) -> Result<Self> {
        non_negative("bias_field", bias_field)?;
        non_negative("drive_amplitude", drive_amplitude)?;
        non_negative("drive_omega", drive_omega)?;
        positive("relaxation_time", relaxation_time)?;
        positive("equilibrium_magnetization", equilibrium_magnetization)?;
        positive("spin_density", spin_density)?;
        positive("sample_volume", sample_volume)?;
        positive("spin_count", spin_count)?;
        let expected = spin_density * sample_volume;
        if ((spin_count - expected) / expected).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "spin_count",
                reason: format!("{spin_count} differs from spin_density * sample_volume = {expected}"),
            });
        }
        Ok(Self {
            bias_field,
            drive_amplitude,
            drive_omega,
            relaxation_time,
            equilibrium_magnetization,
            spin_density,
            spin_count,
            sample_volume,
            polarization,
        })
    }

    /// Parameters for a sample of `spin_density` with one Bohr magneton per
    /// spin, so `M₀ = μ_B n_s` and `N_s = n_s V`.
    pub fn from_spin_density(
        bias_field: f64,
        drive_amplitude: f64,
        drive_omega: f64,
        relaxation_time: f64,
        spin_density: f64,
        sample_volume: f64,
        polarization: Polarization,
    ) -> Result<Self> {
        Self::new(
            bias_field,
            drive_amplitude,
            drive_omega,
            relaxation_time,
            BOHR_MAGNETON * spin_density,
            spin_density,
            sample_volume,
            spin_density * sample_volume,
            polarization,
        )
    }

    /// Larmor frequency `γ B₀`.
    pub fn larmor_omega(&self) -> f64 {
        GYROMAGNETIC_RATIO * self.bias_field
    }

    /// Amplitude of the drive component rotating with the precession.
    pub fn co_rotating_amplitude(&self) -> f64 {
        match self.polarization {
            Polarization::Linear => 0.5 * self.drive_amplitude,
            Polarization::Circular => self.drive_amplitude,
        }
    }

    /// `γ b₁ T_s`.
    pub fn tip_ratio(&self) -> f64 {
        GYROMAGNETIC_RATIO * self.drive_amplitude * self.relaxation_time
    }

    /// Linear-response validity flag (reported, not enforced here).
    pub fn is_linear_response(&self) -> bool {
        self.tip_ratio() < LINEAR_RESPONSE_LIMIT
    }

    /// Transverse drive field at time `t`.
    pub fn drive_field(&self, t: f64) -> [f64; 2] {
        let phase = self.drive_omega * t;
        match self.polarization {
            Polarization::Linear => [self.drive_amplitude * phase.cos(), 0.0],
            Polarization::Circular => [self.drive_amplitude * phase.cos(), -self.drive_amplitude * phase.sin()],
        }
    }

    /// Time derivative of the transverse drive field.
    pub fn drive_field_rate(&self, t: f64) -> [f64; 2] {
        let phase = self.drive_omega * t;
        let a = self.drive_amplitude * self.drive_omega;
        match self.polarization {
            Polarization::Linear => [-a * phase.sin(), 0.0],
            Polarization::Circular => [-a * phase.sin(), -a * phase.cos()],
        }
    }

    fn rhs(&self, t: f64, m: &[f64], dm: &mut [f64]) {
        let [bx, by] = self.drive_field(t);
        let bz = self.bias_field;
        let g = GYROMAGNETIC_RATIO;
        let inv_t = 1.0 / self.relaxation_time;
        dm[0] = g * (m[1] * bz - m[2] * by) - m[0] * inv_t;
        dm[1] = g * (m[2] * bx - m[0] * bz) - m[1] * inv_t;
        dm[2] = g * (m[0] * by - m[1] * bx) - (m[2] - self.equilibrium_magnetization) * inv_t;
    }
}

/// Magnetization samples; `magnetization[k]` is (Mx, My, Mz) in A/m at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochTrajectory {
    pub times: Vec<f64>,
    pub magnetization: Vec<[f64; 3]>,
    /// Samples per drive period (0 when there is no reference period).
    pub samples_per_period: usize,
}

impl BlochTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with columns `t,Mx,My,Mz`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,Mx,My,Mz")?;
        for (t, m) in self.times.iter().zip(&self.magnetization) {
            writeln!(w, "{t},{},{},{}", m[0], m[1], m[2])?;
        }
        Ok(())
    }

    /// Synchronous demodulation of `M_x + iM_y` at `omega` over the last
    /// `periods` drive periods: the returned phasor `A` satisfies
    /// `M_x + iM_y ≈ A e^{−iωt}` for the co-rotating component.
    pub fn demodulate(&self, omega: f64, periods: usize) -> Result<Complex64> {
        let count = self.tail_samples(periods)?;
        let start = self.len() - count;
        let sum: Complex64 = (start..self.len())
            .map(|k| {
                let m = self.magnetization[k];
                Complex64::new(m[0], m[1]) * Complex64::from_polar(1.0, omega * self.times[k])
            })
            .sum();
        Ok(sum / count as f64)
    }

    fn tail_samples(&self, periods: usize) -> Result<usize> {
        if self.samples_per_period == 0 || periods == 0 {
            return Err(Error::InvalidParameter {
                name: "periods",
                reason: "trajectory has no drive period to average over".into(),
            });
        }
        let count = periods * self.samples_per_period;
        if count > self.len() {
            return Err(Error::InvalidParameter {
                name: "periods",
                reason: format!("asked for {count} samples, trajectory has {}", self.len()),
            });
        }
        Ok(count)
    }

    /// Cycle-averaged power absorbed from the drive, `−V ⟨M · db/dt⟩`, over
    /// the last `periods` drive periods (W).
    pub fn absorbed_power(&self, params: &BlochParameters, periods: usize) -> Result<f64> {
        let count = self.tail_samples(periods)?;
        let start = self.len() - count;
        let mean = (start..self.len())
            .map(|k| {
                let m = self.magnetization[k];
                let [dbx, dby] = params.drive_field_rate(self.times[k]);
                -(m[0] * dbx + m[1] * dby)
            })
            .sum::<f64>()
            / count as f64;
        Ok(mean * params.sample_volume)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSettings {
    pub max_step: f64,
    pub control: StepControl,
    /// Initial magnetization; defaults to `M₀ ẑ`.
    pub initial: Option<[f64; 3]>,
}

impl BlochSettings {
    /// Adaptive DP5(4) with relative tolerance 1e-9.
    pub fn adaptive(max_step: f64, equilibrium_magnetization: f64) -> Self {
        Self {
            max_step,
            control: StepControl::Adaptive {
                rtol: 1e-9,
                atol: 1e-14 * equilibrium_magnetization,
            },
            initial: None,
        }
    }
}

/// Integrate from equilibrium for `duration` seconds with adaptive steps no
/// longer than `max_step`.
pub fn integrate_bloch(params: &BlochParameters, duration: f64, max_step: f64) -> Result<BlochTrajectory> {
    integrate_bloch_with(
        params,
        duration,
        &BlochSettings::adaptive(max_step, params.equilibrium_magnetization),
    )
}

pub fn integrate_bloch_with(
    params: &BlochParameters,
    duration: f64,
    settings: &BlochSettings,
) -> Result<BlochTrajectory> {
    positive("duration", duration)?;
    positive("max_step", settings.max_step)?;
    let fastest = params.larmor_omega().max(params.drive_omega);
    if fastest > 0.0 && settings.max_step >= 2.0 * std::f64::consts::PI / (10.0 * fastest) {
        return Err(Error::InvalidParameter {
            name: "max_step",
            reason: format!(
                "{:e} s resolves fewer than 10 steps per period of the fastest rotation",
                settings.max_step
            ),
        });
    }

    // sample on a grid commensurate with the drive period
    let (interval, per_period) = if params.drive_omega > 0.0 {
        let period = 2.0 * std::f64::consts::PI / params.drive_omega;
        let per = (period / settings.max_step).ceil().max(1.0) as usize;
        (period / per as f64, per)
    } else {
        (settings.max_step, 0)
    };
    let count = (duration / interval).floor() as usize;
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "duration",
            reason: "shorter than one sample interval".into(),
        });
    }
    let output: Vec<f64> = (1..=count).map(|k| k as f64 * interval).collect();

    let m0 = settings
        .initial
        .unwrap_or([0.0, 0.0, params.equilibrium_magnetization]);
    let mut times = Vec::with_capacity(count + 1);
    let mut mags = Vec::with_capacity(count + 1);
    times.push(0.0);
    mags.push(m0);
    let config = IntegratorConfig {
        control: settings.control,
        max_step: settings.max_step,
        min_step: settings.max_step * 1e-9,
    };
    ode::integrate(
        |t, y, dy| params.rhs(t, y, dy),
        0.0,
        &m0,
        &output,
        &config,
        |t, y| {
            times.push(t);
            mags.push([y[0], y[1], y[2]]);
        },
    )?;
    Ok(BlochTrajectory {
        times,
        magnetization: mags,
        samples_per_period: per_period,
    })
}

/// Analytic linear-response steady state of the transverse magnetization.
///
/// Returns `(amplitude, phase)` such that the co-rotating transverse
/// component is `M_x + iM_y = amplitude · e^{i(phase − ω₁t)}`, i.e.
/// `M_x(t) = amplitude · cos(ω₁t − phase)`. On resonance the amplitude is
/// `γ b_co T_s M₀` with `b_co` the co-rotating drive amplitude (`b₁/2` for a
/// linear drive) and the phase is π/2; off resonance the amplitude follows a
/// Lorentzian of half-width `1/T_s`.
pub fn steady_state_transverse(params: &BlochParameters) -> Result<(f64, f64)> {
    if !params.is_linear_response() {
        return Err(Error::LinearRegimeViolated { tip: params.tip_ratio() });
    }
    let a = steady_state_phasor(params);
    Ok((a.norm(), a.arg()))
}

fn steady_state_phasor(params: &BlochParameters) -> Complex64 {
    let detuning = params.larmor_omega() - params.drive_omega;
    let numerator = Complex64::new(
        0.0,
        GYROMAGNETIC_RATIO * params.equilibrium_magnetization * params.co_rotating_amplitude(),
    );
    numerator / Complex64::new(1.0 / params.relaxation_time, detuning)
}

/// Power absorbed on resonance, `P₁ = γ μ_B N_s ω₁ b₁² T_s` (W), for a
/// co-rotating drive amplitude `b₁`.
pub fn absorbed_power(spin_count: f64, drive_omega: f64, drive_amplitude: f64, relaxation_time: f64) -> Result<f64> {
    positive("spin_count", spin_count)?;
    positive("drive_omega", drive_omega)?;
    non_negative("drive_amplitude", drive_amplitude)?;
    positive("relaxation_time", relaxation_time)?;
    Ok(GYROMAGNETIC_RATIO
        * BOHR_MAGNETON
        * spin_count
        * drive_omega
        * drive_amplitude
        * drive_amplitude
        * relaxation_time)
}
