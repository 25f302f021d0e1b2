//! Hybrid systems whose magnon frequency is modulated by a slow longitudinal
//! field `b₂ sin(ω₂t)` while a monochromatic pump drives one port.
//!
//! Every magnon mode follows `ω_m(t) = γ(B₀ + b₂ sin ω₂t) + offset`. The
//! output is a carrier at the pump frequency plus sidebands at
//! `ω_p + nω₂`. Line amplitudes are in √W for a pump amplitude `√P`, so
//! `|c_n|²` is the power carried by line `n`.
//!
//! Two independent solvers are provided: [`simulate_modulated_pmhs`]
//! integrates the coupled-mode equations in time and demodulates the
//! periodic steady state, [`harmonic_balance_sidebands`] solves for the
//! harmonics directly.

mod balance;
mod time_domain;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::angular_to_hz;
use crate::error::{non_negative, positive};
use crate::hybrid::{hybrid_modes, HybridSystemModel};
use crate::{Error, Result};

pub use balance::harmonic_balance_sidebands;
pub use time_domain::{simulate_modulated_pmhs, simulate_modulated_pmhs_with, ModulationRun, SimulationSettings};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Pump power as given in a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpPower {
    Watts(f64),
    Dbm(f64),
}

impl PumpPower {
    pub fn watts(&self) -> f64 {
        match *self {
            PumpPower::Watts(w) => w,
            PumpPower::Dbm(d) => dbm_to_watts(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationDrive {
    /// Modulation amplitude (T).
    pub b2: f64,
    /// Modulation angular frequency (rad/s).
    pub omega2: f64,
    /// rad/s
    pub pump_omega: f64,
    /// W
    pub pump_power: f64,
}

impl ModulationDrive {
    pub fn new(b2: f64, omega2: f64, pump_omega: f64, pump_power: f64) -> Result<Self> {
        let d = Self {
            b2,
            omega2,
            pump_omega,
            pump_power,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("b2", self.b2)?;
        positive("omega2", self.omega2)?;
        positive("pump_omega", self.pump_omega)?;
        positive("pump_power", self.pump_power)?;
        if self.omega2 >= self.pump_omega / 10.0 {
            return Err(Error::InvalidParameter {
                name: "omega2",
                reason: format!(
                    "modulation {} rad/s is not slow against the pump {} rad/s",
                    self.omega2, self.pump_omega
                ),
            });
        }
        Ok(())
    }

    /// Non-fatal diagnostics for this drive on `model`.
    pub fn warnings(&self, model: &HybridSystemModel) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let b0 = model.bias_field();
        if self.b2 >= b0 / 100.0 {
            out.push(format!("b2 = {:e} T is not small against B0 = {b0} T", self.b2));
        }
        let modes = hybrid_modes(model)?;
        let near = modes
            .iter()
            .any(|m| (m.omega() - self.pump_omega).abs() <= 5.0 * m.linewidth().max(f64::MIN_POSITIVE));
        if !near {
            out.push(format!(
                "pump at {:.6e} Hz is not within 5 linewidths of any hybrid mode",
                angular_to_hz(self.pump_omega)
            ));
        }
        Ok(out)
    }
}

pub(crate) fn check_model(model: &HybridSystemModel) -> Result<()> {
    if !model.modes().iter().any(|m| m.is_magnon()) {
        return Err(Error::InvalidModel("modulation needs at least one magnon mode".into()));
    }
    Ok(())
}

/// One spectral line at `pump_omega + harmonic·ω₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandLine {
    pub harmonic: i32,
    /// rad/s relative to the pump.
    pub offset_omega: f64,
    /// √W
    pub amplitude: Complex64,
}

impl SidebandLine {
    pub fn power(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub pump_omega: f64,
    /// Sorted by harmonic index.
    pub lines: Vec<SidebandLine>,
}

impl Spectrum {
    pub fn line(&self, harmonic: i32) -> Option<&SidebandLine> {
        self.lines.iter().find(|l| l.harmonic == harmonic)
    }

    pub fn carrier(&self) -> Complex64 {
        self.line(0).map(|l| l.amplitude).unwrap_or_default()
    }

    pub fn total_power(&self) -> f64 {
        self.lines.iter().map(SidebandLine::power).sum()
    }

    /// `|c_n| / |c_0|`.
    pub fn relative_amplitude(&self, harmonic: i32) -> f64 {
        self.line(harmonic).map(|l| l.amplitude.norm()).unwrap_or(0.0) / self.carrier().norm()
    }

    /// CSV with columns `harmonic,offset_hz,power_w,power_dbc`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let carrier = self.carrier().norm_sqr();
        writeln!(w, "harmonic,offset_hz,power_w,power_dbc")?;
        for l in &self.lines {
            writeln!(
                w,
                "{},{},{:e},{}",
                l.harmonic,
                angular_to_hz(l.offset_omega),
                l.power(),
                10.0 * (l.power() / carrier).log10()
            )?;
        }
        Ok(())
    }
}

/// Ideal high-pass: lines whose absolute frequency is below `cutoff_omega`
/// lose a factor `attenuation` in power.
pub fn waveguide_filter(spectrum: &Spectrum, cutoff_omega: f64, attenuation: f64) -> Result<Spectrum> {
    non_negative("cutoff_omega", cutoff_omega)?;
    if !(attenuation >= 1.0) || !attenuation.is_finite() {
        return Err(Error::InvalidParameter {
            name: "attenuation",
            reason: format!("must be a finite power ratio >= 1, got {attenuation}"),
        });
    }
    let scale = 1.0 / attenuation.sqrt();
    let lines = spectrum
        .lines
        .iter()
        .map(|l| {
            let mut l = *l;
            if spectrum.pump_omega + l.offset_omega < cutoff_omega {
                l.amplitude *= scale;
            }
            l
        })
        .collect();
    Ok(Spectrum {
        pump_omega: spectrum.pump_omega,
        lines,
    })
}

/// Attenuation ratio for a stop band given in dB.
pub fn attenuation_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// First-order sideband level `ζ₁ = π A_p² Q b₂ / (2B₀)` (W) for pump power
/// `A_p²`, valid for a modulation within the magnon linewidth.
pub fn first_sideband_amplitude(pump_power: f64, quality_factor: f64, b2: f64, bias_field: f64) -> Result<f64> {
    positive("pump_power", pump_power)?;
    positive("quality_factor", quality_factor)?;
    non_negative("b2", b2)?;
    positive("bias_field", bias_field)?;
    Ok(PI * pump_power * quality_factor * b2 / (2.0 * bias_field))
}

/// Detected first-sideband power `ζ₁² / A_p²` with the hybrid mode pulled at
/// rate `r` (W). Setting this equal to the readout noise in 1 Hz gives the
/// longitudinal sensitivity.
pub fn detected_sideband_power(
    pump_power: f64,
    quality_factor: f64,
    b2: f64,
    bias_field: f64,
    mode_pull: f64,
) -> Result<f64> {
    positive("mode_pull", mode_pull)?;
    let zeta = first_sideband_amplitude(pump_power, quality_factor, b2, bias_field)?;
    Ok(mode_pull * mode_pull * zeta * zeta / pump_power)
}

pub(crate) fn harmonic_lines(pump_omega: f64, omega2: f64, harmonics: impl Iterator<Item = (i32, Complex64)>) -> Spectrum {
    let mut lines: Vec<SidebandLine> = harmonics
        .map(|(n, amplitude)| SidebandLine {
            harmonic: n,
            offset_omega: n as f64 * omega2,
            amplitude,
        })
        .collect();
    lines.sort_by_key(|l| l.harmonic);
    Spectrum { pump_omega, lines }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensitivity::{lsm_sensitivity, noise_density};
    use proptest::prelude::*;

    fn two_line() -> Spectrum {
        harmonic_lines(
            1e10,
            1e8,
            [(0, Complex64::new(1.0, 0.0)), (-1, Complex64::new(0.0, 0.1)), (1, Complex64::new(0.05, 0.0))].into_iter(),
        )
    }

    #[test]
    fn power_units() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((watts_to_dbm(0.2e-3) - -6.9897).abs() < 1e-4);
        assert_eq!(PumpPower::Watts(0.1).watts(), 0.1);
    }

    #[test]
    fn drive_validation() {
        assert!(ModulationDrive::new(1e-9, 1e6, 6e10, 1e-3).is_ok());
        assert!(ModulationDrive::new(1e-9, 1e10, 6e10, 1e-3).is_err());
        assert!(ModulationDrive::new(-1e-9, 1e6, 6e10, 1e-3).is_err());
        assert!(ModulationDrive::new(1e-9, 1e6, 6e10, 0.0).is_err());
    }

    #[test]
    fn filter_selects_below_cutoff() {
        let s = two_line();
        assert_eq!(waveguide_filter(&s, 2e10, 1.0).unwrap(), s);
        let f = waveguide_filter(&s, 1e10 - 5e7, attenuation_from_db(30.0)).unwrap();
        assert_eq!(f.line(0).unwrap().amplitude, s.line(0).unwrap().amplitude);
        assert_eq!(f.line(1).unwrap().amplitude, s.line(1).unwrap().amplitude);
        let ratio = f.line(-1).unwrap().power() / s.line(-1).unwrap().power();
        assert!((ratio - 1e-3).abs() < 1e-15);
        assert!(waveguide_filter(&s, 1e10, 0.5).is_err());
    }

    #[test]
    fn csv_has_dbc_column() {
        let mut buf = Vec::new();
        two_line().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], "harmonic,offset_hz,power_w,power_dbc");
        assert!(rows[1].starts_with("-1,"));
        assert!(rows[1].ends_with(",-20"), "{}", rows[1]);
        assert!(rows[2].ends_with(",0"));
    }

    #[test]
    fn first_sideband_examples() {
        assert_eq!(first_sideband_amplitude(1.0, 1e4, 0.0, 0.4).unwrap(), 0.0);
        let z = first_sideband_amplitude(1.0, 1e4, 1e-12, 0.4).unwrap();
        assert!((z / 3.93e-8 - 1.0).abs() < 1e-3, "{z:e}");
        let z2 = first_sideband_amplitude(1.0, 1e4, 2e-12, 0.4).unwrap();
        assert!((z2 / z - 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn detected_sideband_inverts_longitudinal_sensitivity(
            b0 in 0.01f64..2.0, q in 1e2f64..1e6, t in 0.01f64..1000.0, p in 1e-6f64..1.0
        ) {
            let sigma = noise_density(t).unwrap();
            let b2 = lsm_sensitivity(b0, 1.0, q, sigma, p).unwrap();
            let detected = detected_sideband_power(p, q, b2, b0, 1.0).unwrap();
            prop_assert!(((detected - sigma) / sigma).abs() < 1e-12);
        }
    }
}
