//! Noise budget and magnetic sensitivity of the two magnetometer schemes.
//!
//! * Transverse scheme: a field `b₁` resonant with the hybrid mode deposits
//!   `γ μ_B N_s ω₁ b₁² T_s`; equating that to the readout noise density gives
//!   `σ_b₁ = √(σ_P / (γ μ_B N_s ω₁ T_s))`.
//! * Longitudinal scheme: a slow field `b₂` along the bias phase-modulates a
//!   pump of power `A_p²`; the detected sideband sets
//!   `σ_b₂ = 2B₀/(π r Q) · √(σ_P / A_p²)`.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::constants::{BOHR_MAGNETON, BOLTZMANN, GYROMAGNETIC_RATIO, REDUCED_PLANCK};
use crate::error::{non_negative, positive};
use crate::{Error, Result};

/// Mode-pull coefficient at degeneracy.
pub const DEFAULT_MODE_PULL: f64 = 0.5;

/// `σ_P = k_B T_n` (W/Hz).
pub fn noise_density(noise_temperature: f64) -> Result<f64> {
    positive("noise_temperature", noise_temperature)?;
    Ok(BOLTZMANN * noise_temperature)
}

/// `ħω / k_B` (K).
pub fn quantum_limit_temperature(omega: f64) -> Result<f64> {
    positive("omega", omega)?;
    Ok(REDUCED_PLANCK * omega / BOLTZMANN)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifierStage {
    /// Power gain (linear).
    pub gain: f64,
    /// K
    pub noise_temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutChain {
    pub stages: Vec<AmplifierStage>,
    /// Temperature of the input load (K).
    #[serde(default)]
    pub physical_temperature: f64,
    #[serde(default)]
    pub quantum_limit_included: bool,
}

impl ReadoutChain {
    pub fn new(stages: Vec<AmplifierStage>, physical_temperature: f64, quantum_limit_included: bool) -> Result<Self> {
        let chain = Self {
            stages,
            physical_temperature,
            quantum_limit_included,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::InvalidParameter {
                name: "stages",
                reason: "readout chain needs at least one stage".into(),
            });
        }
        for s in &self.stages {
            if !(s.gain > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "gain",
                    reason: format!("must be positive, got {}", s.gain),
                });
            }
            non_negative("noise_temperature", s.noise_temperature)?;
        }
        non_negative("physical_temperature", self.physical_temperature)
    }

    /// Input load + amplifier cascade + (optionally) `ħω/k_B`.
    pub fn system_noise_temperature(&self, omega: f64) -> Result<f64> {
        let mut t = self.physical_temperature + cascade_noise_temperature(self)?;
        if self.quantum_limit_included {
            t += quantum_limit_temperature(omega)?;
        }
        Ok(t)
    }
}

/// `T₁ + T₂/G₁ + T₃/(G₁G₂) + …`
pub fn cascade_noise_temperature(chain: &ReadoutChain) -> Result<f64> {
    chain.validate()?;
    let mut total = 0.0;
    let mut gain = 1.0;
    for s in &chain.stages {
        total += s.noise_temperature / gain;
        gain *= s.gain;
    }
    Ok(total)
}

/// Transverse-scheme sensitivity (T/√Hz).
pub fn tsm_sensitivity(sigma_p: f64, spin_count: f64, omega: f64, relaxation_time: f64) -> Result<f64> {
    positive("sigma_p", sigma_p)?;
    positive("spin_count", spin_count)?;
    positive("omega", omega)?;
    positive("relaxation_time", relaxation_time)?;
    Ok((sigma_p / (GYROMAGNETIC_RATIO * BOHR_MAGNETON * spin_count * omega * relaxation_time)).sqrt())
}

/// Longitudinal-scheme sensitivity (T/√Hz).
pub fn lsm_sensitivity(bias_field: f64, mode_pull: f64, quality_factor: f64, sigma_p: f64, pump_power: f64) -> Result<f64> {
    positive("bias_field", bias_field)?;
    if !(mode_pull > 0.0 && mode_pull <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "mode_pull",
            reason: format!("must lie in (0, 1], got {mode_pull}"),
        });
    }
    positive("quality_factor", quality_factor)?;
    positive("sigma_p", sigma_p)?;
    positive("pump_power", pump_power)?;
    Ok(2.0 * bias_field / (std::f64::consts::PI * mode_pull * quality_factor) * (sigma_p / pump_power).sqrt())
}

/// Radiometer estimate of the smallest detectable field after integrating
/// `time` seconds in `bandwidth`: `σ_b (bandwidth/time)^{1/4}`.
pub fn integrated_field_limit(sigma_b: f64, bandwidth: f64, time: f64) -> Result<f64> {
    positive("sigma_b", sigma_b)?;
    positive("bandwidth", bandwidth)?;
    positive("time", time)?;
    if bandwidth * time < 1.0 {
        return Err(Error::InvalidParameter {
            name: "time",
            reason: format!("time-bandwidth product {} is below 1", bandwidth * time),
        });
    }
    Ok(sigma_b * (bandwidth / time).powf(0.25))
}

/// Readout noise, either as an effective temperature or a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    /// K
    Temperature(f64),
    /// W/Hz
    Density(f64),
}

impl Noise {
    /// σ_P including an additive residual term (W/Hz).
    pub fn density(&self, residual: f64) -> Result<f64> {
        non_negative("residual_noise", residual)?;
        let base = match *self {
            Noise::Temperature(t) => noise_density(t)?,
            Noise::Density(d) => {
                positive("noise_density", d)?;
                d
            }
        };
        Ok(base + residual)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Radiometer {
    /// Hz
    pub bandwidth: f64,
    /// s
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Transverse {
        spin_count: f64,
        /// rad/s
        omega: f64,
        /// s
        relaxation_time: f64,
    },
    Longitudinal {
        /// T
        bias_field: f64,
        mode_pull: f64,
        quality_factor: f64,
        /// W
        pump_power: f64,
        /// Multiplies the result to account for readout losses.
        loss_factor: f64,
    },
}

/// Everything needed to evaluate one sensitivity figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityInputs {
    pub noise: Noise,
    /// Additive residual pump noise (W/Hz).
    pub residual_noise: f64,
    pub scheme: Scheme,
    pub radiometer: Option<Radiometer>,
}

impl SensitivityInputs {
    pub fn transverse(noise: Noise, spin_count: f64, omega: f64, relaxation_time: f64) -> Self {
        Self {
            noise,
            residual_noise: 0.0,
            scheme: Scheme::Transverse {
                spin_count,
                omega,
                relaxation_time,
            },
            radiometer: None,
        }
    }

    pub fn longitudinal(noise: Noise, bias_field: f64, mode_pull: f64, quality_factor: f64, pump_power: f64) -> Self {
        Self {
            noise,
            residual_noise: 0.0,
            scheme: Scheme::Longitudinal {
                bias_field,
                mode_pull,
                quality_factor,
                pump_power,
                loss_factor: 1.0,
            },
            radiometer: None,
        }
    }

    pub fn evaluate(&self) -> Result<SensitivityReport> {
        let sigma_p = self.noise.density(self.residual_noise)?;
        let (sensitivity, reported) = match self.scheme {
            Scheme::Transverse {
                spin_count,
                omega,
                relaxation_time,
            } => {
                let s = tsm_sensitivity(sigma_p, spin_count, omega, relaxation_time)?;
                (s, s)
            }
            Scheme::Longitudinal {
                bias_field,
                mode_pull,
                quality_factor,
                pump_power,
                loss_factor,
            } => {
                positive("loss_factor", loss_factor)?;
                let s = lsm_sensitivity(bias_field, mode_pull, quality_factor, sigma_p, pump_power)?;
                (s, s * loss_factor)
            }
        };
        let field_limit = match self.radiometer {
            Some(r) => Some(integrated_field_limit(reported, r.bandwidth, r.time)?),
            None => None,
        };
        Ok(SensitivityReport {
            inputs: *self,
            sigma_p,
            sensitivity,
            expected_sensitivity: reported,
            field_limit,
        })
    }

    /// Named scalar inputs with units, in echo order.
    pub fn echo(&self) -> Vec<(&'static str, f64)> {
        let mut v = Vec::new();
        match self.noise {
            Noise::Temperature(t) => v.push(("noise_temperature_k", t)),
            Noise::Density(d) => v.push(("noise_density_w_per_hz", d)),
        }
        v.push(("residual_noise_w_per_hz", self.residual_noise));
        match self.scheme {
            Scheme::Transverse {
                spin_count,
                omega,
                relaxation_time,
            } => {
                v.push(("spin_count", spin_count));
                v.push(("omega_rad_per_s", omega));
                v.push(("relaxation_time_s", relaxation_time));
            }
            Scheme::Longitudinal {
                bias_field,
                mode_pull,
                quality_factor,
                pump_power,
                loss_factor,
            } => {
                v.push(("bias_field_t", bias_field));
                v.push(("mode_pull", mode_pull));
                v.push(("quality_factor", quality_factor));
                v.push(("pump_power_w", pump_power));
                v.push(("loss_factor", loss_factor));
            }
        }
        if let Some(r) = self.radiometer {
            v.push(("bandwidth_hz", r.bandwidth));
            v.push(("integration_time_s", r.time));
        }
        v
    }

    /// Replace one named input (as listed by [`echo`](Self::echo)).
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut out = *self;
        let mut hit = true;
        match name {
            "noise_temperature_k" => out.noise = Noise::Temperature(value),
            "noise_density_w_per_hz" => out.noise = Noise::Density(value),
            "residual_noise_w_per_hz" => out.residual_noise = value,
            "bandwidth_hz" | "integration_time_s" => {
                let mut r = out.radiometer.unwrap_or(Radiometer { bandwidth: 1.0, time: 1.0 });
                if name == "bandwidth_hz" {
                    r.bandwidth = value;
                } else {
                    r.time = value;
                }
                out.radiometer = Some(r);
            }
            _ => hit = false,
        }
        if !hit {
            hit = true;
            match &mut out.scheme {
                Scheme::Transverse {
                    spin_count,
                    omega,
                    relaxation_time,
                } => match name {
                    "spin_count" => *spin_count = value,
                    "omega_rad_per_s" => *omega = value,
                    "relaxation_time_s" => *relaxation_time = value,
                    _ => hit = false,
                },
                Scheme::Longitudinal {
                    bias_field,
                    mode_pull,
                    quality_factor,
                    pump_power,
                    loss_factor,
                } => match name {
                    "bias_field_t" => *bias_field = value,
                    "mode_pull" => *mode_pull = value,
                    "quality_factor" => *quality_factor = value,
                    "pump_power_w" => *pump_power = value,
                    "loss_factor" => *loss_factor = value,
                    _ => hit = false,
                },
            }
        }
        if hit {
            Ok(out)
        } else {
            Err(Error::Config(format!("unknown sweep parameter `{name}` for this scheme")))
        }
    }

    fn from_echo(formula: &str, values: &[(String, f64)]) -> Result<Self> {
        let get = |k: &str| values.iter().find(|(n, _)| n == k).map(|(_, v)| *v);
        let need = |k: &str| get(k).ok_or_else(|| Error::Parse(format!("report lacks `{k}`")));
        let noise = match (get("noise_temperature_k"), get("noise_density_w_per_hz")) {
            (Some(t), None) => Noise::Temperature(t),
            (None, Some(d)) => Noise::Density(d),
            _ => return Err(Error::Parse("report must echo exactly one noise input".into())),
        };
        let scheme = match formula {
            "transverse" => Scheme::Transverse {
                spin_count: need("spin_count")?,
                omega: need("omega_rad_per_s")?,
                relaxation_time: need("relaxation_time_s")?,
            },
            "longitudinal" => Scheme::Longitudinal {
                bias_field: need("bias_field_t")?,
                mode_pull: need("mode_pull")?,
                quality_factor: need("quality_factor")?,
                pump_power: need("pump_power_w")?,
                loss_factor: need("loss_factor")?,
            },
            other => return Err(Error::Parse(format!("unknown formula `{other}`"))),
        };
        let radiometer = match (get("bandwidth_hz"), get("integration_time_s")) {
            (Some(bandwidth), Some(time)) => Some(Radiometer { bandwidth, time }),
            (None, None) => None,
            _ => return Err(Error::Parse("radiometer inputs must come in pairs".into())),
        };
        Ok(Self {
            noise,
            residual_noise: need("residual_noise_w_per_hz")?,
            scheme,
            radiometer,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityReport {
    pub inputs: SensitivityInputs,
    /// W/Hz
    pub sigma_p: f64,
    /// T/√Hz, before the loss factor.
    pub sensitivity: f64,
    /// T/√Hz, including the loss factor (equals `sensitivity` for the transverse scheme).
    pub expected_sensitivity: f64,
    /// T, radiometer estimate when a bandwidth and time were given.
    pub field_limit: Option<f64>,
}

impl SensitivityReport {
    pub fn formula(&self) -> &'static str {
        match self.inputs.scheme {
            Scheme::Transverse { .. } => "transverse",
            Scheme::Longitudinal { .. } => "longitudinal",
        }
    }

    pub fn notes(&self) -> Vec<&'static str> {
        let mut notes = match self.inputs.scheme {
            Scheme::Transverse { .. } => vec![
                "assumes the signal coherence time exceeds the relaxation time",
                "assumes the signal coherence length exceeds the sample size",
            ],
            Scheme::Longitudinal { .. } => vec![
                "quality factor is that of the pumped hybrid mode",
                "modulation frequency must lie within the magnon linewidth",
            ],
        };
        if self.field_limit.is_some() {
            notes.push("field limit is a radiometer estimate (fourth-root scaling)");
        }
        notes
    }

    /// Flat `key = value` text; inputs are prefixed with `input.`.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "formula = {}", self.formula());
        for (k, v) in self.inputs.echo() {
            let _ = writeln!(s, "input.{k} = {v:e}");
        }
        let _ = writeln!(s, "sigma_p_w_per_hz = {:e}", self.sigma_p);
        let _ = writeln!(s, "sensitivity_t_per_rthz = {:e}", self.sensitivity);
        let _ = writeln!(s, "expected_sensitivity_t_per_rthz = {:e}", self.expected_sensitivity);
        if let Some(b) = self.field_limit {
            let _ = writeln!(s, "field_limit_t = {b:e}");
            let _ = writeln!(s, "field_limit_method = radiometer estimate");
        }
        for n in self.notes() {
            let _ = writeln!(s, "note = {n}");
        }
        s
    }

    /// Recover the inputs echoed by [`to_key_value`](Self::to_key_value).
    pub fn parse_inputs(text: &str) -> Result<SensitivityInputs> {
        let mut formula = None;
        let mut values = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected `key = value`, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "formula" {
                formula = Some(v.to_string());
            } else if let Some(name) = k.strip_prefix("input.") {
                let x: f64 = v.parse().map_err(|_| Error::Parse(format!("bad number for `{k}`: `{v}`")))?;
                values.push((name.to_string(), x));
            }
        }
        let formula = formula.ok_or_else(|| Error::Parse("report lacks `formula`".into()))?;
        SensitivityInputs::from_echo(&formula, &values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl SweepRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(Error::InvalidParameter {
                name: "points",
                reason: "a sweep needs at least 2 points".into(),
            });
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidParameter {
                name: "start",
                reason: "sweep limits must be finite".into(),
            });
        }
        let n = self.points - 1;
        if self.log {
            positive("start", self.start)?;
            positive("stop", self.stop)?;
            let (a, b) = (self.start.ln(), self.stop.ln());
            Ok((0..=n).map(|k| (a + (b - a) * k as f64 / n as f64).exp()).collect())
        } else {
            Ok((0..=n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / n as f64)
                .collect())
        }
    }
}

/// Evaluate `base` with `parameter` set to each value.
pub fn sweep(base: &SensitivityInputs, parameter: &str, values: &[f64]) -> Result<Vec<SensitivityReport>> {
    values
        .iter()
        .map(|&v| base.with_parameter(parameter, v)?.evaluate())
        .collect()
}

/// One CSV row per report: every echoed input, then σ_P and sensitivities.
pub fn write_reports_csv<W: Write>(reports: &[SensitivityReport], mut w: W) -> Result<()> {
    let Some(first) = reports.first() else {
        return Ok(());
    };
    let keys: Vec<&str> = first.inputs.echo().iter().map(|(k, _)| *k).collect();
    let mut header = keys.join(",");
    header.push_str(",sigma_p_w_per_hz,sensitivity_t_per_rthz,expected_sensitivity_t_per_rthz,field_limit_t");
    writeln!(w, "{header}")?;
    for r in reports {
        let echo = r.inputs.echo();
        if echo.iter().map(|(k, _)| *k).ne(keys.iter().copied()) {
            return Err(Error::InvalidParameter {
                name: "reports",
                reason: "all rows must share the same inputs".into(),
            });
        }
        let mut row: Vec<String> = echo.iter().map(|(_, v)| format!("{v:e}")).collect();
        row.push(format!("{:e}", r.sigma_p));
        row.push(format!("{:e}", r.sensitivity));
        row.push(format!("{:e}", r.expected_sensitivity));
        row.push(r.field_limit.map(|b| format!("{b:e}")).unwrap_or_default());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::absorbed_power;
    use crate::constants::hz_to_angular;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn noise_density_examples() {
        assert!(rel(noise_density(1.0).unwrap(), 1.38e-23) < 1e-3);
        assert!(rel(noise_density(300.0).unwrap(), 4.14e-21) < 1e-3);
        assert!(noise_density(0.0).is_err());
    }

    #[test]
    fn quantum_limit_examples() {
        let t = quantum_limit_temperature(hz_to_angular(10.4e9)).unwrap();
        assert!(rel(t, 0.499) < 1e-3, "{t}");
        assert!(rel(quantum_limit_temperature(hz_to_angular(20.8e9)).unwrap(), 2.0 * t) < 1e-15);
        assert!(quantum_limit_temperature(0.0).is_err());
    }

    #[test]
    fn cascade_examples() {
        let one = ReadoutChain::new(vec![AmplifierStage { gain: 10.0, noise_temperature: 3.0 }], 0.0, false).unwrap();
        assert_eq!(cascade_noise_temperature(&one).unwrap(), 3.0);
        let two = ReadoutChain::new(
            vec![
                AmplifierStage { gain: 100.0, noise_temperature: 0.5 },
                AmplifierStage { gain: 10.0, noise_temperature: 5.0 },
            ],
            0.0,
            false,
        )
        .unwrap();
        assert!(rel(cascade_noise_temperature(&two).unwrap(), 0.55) < 1e-14);
        let huge = ReadoutChain::new(
            vec![
                AmplifierStage { gain: f64::INFINITY, noise_temperature: 0.5 },
                AmplifierStage { gain: 10.0, noise_temperature: 5.0 },
            ],
            0.0,
            false,
        )
        .unwrap();
        assert_eq!(cascade_noise_temperature(&huge).unwrap(), 0.5);
        assert!(ReadoutChain::new(vec![], 0.0, false).is_err());
        assert!(ReadoutChain::new(vec![AmplifierStage { gain: 0.0, noise_temperature: 1.0 }], 0.0, false).is_err());
    }

    #[test]
    fn system_temperature_adds_load_and_quantum_limit() {
        let chain = ReadoutChain::new(vec![AmplifierStage { gain: 100.0, noise_temperature: 0.5 }], 0.02, true).unwrap();
        let w = hz_to_angular(10.4e9);
        let t = chain.system_noise_temperature(w).unwrap();
        assert!(rel(t, 0.52 + quantum_limit_temperature(w).unwrap()) < 1e-14);
    }

    #[test]
    fn transverse_reference_point() {
        let s = tsm_sensitivity(noise_density(1.0).unwrap(), 1e21, hz_to_angular(10.4e9), 168e-9).unwrap();
        assert!(rel(s, 0.88e-18) < 0.01, "{s:e}");
        let s4 = tsm_sensitivity(noise_density(1.0).unwrap(), 4e21, hz_to_angular(10.4e9), 168e-9).unwrap();
        assert!(rel(s4, s / 2.0) < 1e-14);
        let s100 = tsm_sensitivity(100.0 * noise_density(1.0).unwrap(), 1e21, hz_to_angular(10.4e9), 168e-9).unwrap();
        assert!(rel(s100, 10.0 * s) < 1e-14);
    }

    #[test]
    fn longitudinal_reference_points() {
        let s = lsm_sensitivity(0.4, 0.5, 1e4, noise_density(300.0).unwrap(), 0.1).unwrap();
        assert!(rel(s, 10.4e-15) < 0.01, "{s:e}");
        let proto = 2.1 * lsm_sensitivity(0.4, 0.5, 2750.0, 4e-21, 0.2e-3).unwrap();
        assert!((1.7e-12..=1.9e-12).contains(&proto), "{proto:e}");
        let s4 = lsm_sensitivity(0.4, 0.5, 1e4, noise_density(300.0).unwrap(), 0.4).unwrap();
        assert!(rel(s4, s / 2.0) < 1e-14);
        assert!(lsm_sensitivity(0.4, 1.5, 1e4, 1e-21, 0.1).is_err());
        assert!(lsm_sensitivity(0.4, 0.0, 1e4, 1e-21, 0.1).is_err());
    }

    #[test]
    fn radiometer_examples() {
        let b = integrated_field_limit(0.88e-18, 5e3, 3.6e4).unwrap();
        assert!(rel(b, 5.4e-19) < 0.01, "{b:e}");
        assert_eq!(integrated_field_limit(2e-18, 1.0, 1.0).unwrap(), 2e-18);
        let b16 = integrated_field_limit(0.88e-18, 5e3, 16.0 * 3.6e4).unwrap();
        assert!(rel(b16, b / 2.0) < 1e-14);
        assert!(integrated_field_limit(1e-18, 1.0, 0.5).is_err());
    }

    #[test]
    fn report_round_trips_bit_exactly() {
        let mut inputs = SensitivityInputs::longitudinal(Noise::Density(4e-21), 0.4, 0.5, 2750.0, 0.2e-3);
        inputs.residual_noise = 4e-23;
        if let Scheme::Longitudinal { loss_factor, .. } = &mut inputs.scheme {
            *loss_factor = 2.1;
        }
        inputs.radiometer = Some(Radiometer { bandwidth: 5e3, time: 3.6e4 });
        let report = inputs.evaluate().unwrap();
        let text = report.to_key_value();
        assert!(text.contains("radiometer estimate"));
        let parsed = SensitivityReport::parse_inputs(&text).unwrap();
        assert_eq!(parsed, inputs);
        let again = parsed.evaluate().unwrap();
        assert_eq!(again.sensitivity.to_bits(), report.sensitivity.to_bits());
        assert_eq!(again.field_limit.unwrap().to_bits(), report.field_limit.unwrap().to_bits());

        let t = SensitivityInputs::transverse(Noise::Temperature(1.0), 1e21, hz_to_angular(10.4e9), 168e-9);
        let r = t.evaluate().unwrap();
        let text = r.to_key_value();
        assert!(text.contains("coherence time"));
        assert_eq!(SensitivityReport::parse_inputs(&text).unwrap(), t);
    }

    #[test]
    fn sweep_and_csv() {
        let base = SensitivityInputs::transverse(Noise::Temperature(1.0), 1e21, hz_to_angular(10.4e9), 168e-9);
        let values = SweepRange { start: 1e20, stop: 1e22, points: 5, log: true }.values().unwrap();
        let reports = sweep(&base, "spin_count", &values).unwrap();
        assert!(reports.windows(2).all(|w| w[1].sensitivity < w[0].sensitivity));
        let mut buf = Vec::new();
        write_reports_csv(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("noise_temperature_k,residual_noise_w_per_hz,spin_count,"));
        assert!(sweep(&base, "quality_factor", &values).is_err());
    }

    fn positive_value() -> impl Strategy<Value = f64> {
        (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn transverse_inverts_absorbed_power(
            n in positive_value(), w in positive_value(), b in positive_value(), ts in positive_value()
        ) {
            let (n, w, b, ts) = (n * 1e21, w * 6.5e10, b * 1e-18, ts * 1e-7);
            let p = absorbed_power(n, w, b, ts).unwrap();
            let back = tsm_sensitivity(p, n, w, ts).unwrap();
            prop_assert!(rel(back, b) < 1e-12);
        }

        #[test]
        fn transverse_monotone(
            s in positive_value(), n in positive_value(), w in positive_value(), ts in positive_value(), k in 1.01f64..10.0
        ) {
            let base = tsm_sensitivity(s, n, w, ts).unwrap();
            prop_assert!(tsm_sensitivity(s, n * k, w, ts).unwrap() < base);
            prop_assert!(tsm_sensitivity(s, n, w, ts * k).unwrap() < base);
            prop_assert!(tsm_sensitivity(s * k, n, w, ts).unwrap() > base);
        }

        #[test]
        fn longitudinal_monotone(
            b0 in positive_value(), r in 0.01f64..0.99, q in positive_value(), s in positive_value(),
            p in positive_value(), k in 1.001f64..10.0
        ) {
            let base = lsm_sensitivity(b0, r, q, s, p).unwrap();
            prop_assert!(lsm_sensitivity(b0, r, q * k, s, p).unwrap() < base);
            prop_assert!(lsm_sensitivity(b0, r, q, s, p * k).unwrap() < base);
            prop_assert!(lsm_sensitivity(b0, (r * k).min(1.0), q, s, p).unwrap() < base);
            prop_assert!(lsm_sensitivity(b0, r, q, s * k, p).unwrap() > base);
            prop_assert!(lsm_sensitivity(b0 * k, r, q, s, p).unwrap() > base);
        }
    }
}
