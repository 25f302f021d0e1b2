use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::{angular_to_hz, hz_to_angular, GYROMAGNETIC_RATIO};
use crate::error::{non_negative, positive};
use crate::{Error, Result};

/// Kittel-mode angular frequency `γ·B₀ + offset`.
pub fn kittel_frequency(bias_field: f64, field_offset: f64) -> Result<f64> {
    if !(bias_field >= 0.0) || !bias_field.is_finite() {
        return Err(Error::InvalidParameter {
            name: "bias_field",
            reason: format!("must be non-negative, got {bias_field}"),
        });
    }
    Ok(GYROMAGNETIC_RATIO * bias_field + field_offset)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Cavity,
    Magnon,
}

/// A single damped oscillator. `gamma` is the full (FWHM) energy decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorMode {
    pub kind: ModeKind,
    pub omega: f64,
    pub gamma: f64,
    /// Additive offset of a magnon frequency (anisotropy); ignored for cavities.
    pub field_offset: f64,
}

impl OscillatorMode {
    pub fn cavity(omega: f64, gamma: f64) -> Self {
        Self {
            kind: ModeKind::Cavity,
            omega,
            gamma,
            field_offset: 0.0,
        }
    }

    /// Magnon mode; its frequency is filled in from the bias field by the model.
    pub fn magnon(gamma: f64, field_offset: f64) -> Self {
        Self {
            kind: ModeKind::Magnon,
            omega: 0.0,
            gamma,
            field_offset,
        }
    }

    pub fn is_magnon(&self) -> bool {
        self.kind == ModeKind::Magnon
    }
}

/// External port; `kappa[j]` is the coupling rate of the port to mode `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub name: String,
    pub kappa: Vec<f64>,
}

/// Photon–magnon hybrid system as coupled damped oscillators.
///
/// Magnon frequencies always track the bias field; construct new models
/// through [`HybridSystemModel::with_bias_field`] rather than mutating modes.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridSystemModel {
    modes: Vec<OscillatorMode>,
    couplings: DMatrix<f64>,
    bias_field: f64,
    ports: Vec<Port>,
}

impl HybridSystemModel {
    pub fn new(
        mut modes: Vec<OscillatorMode>,
        couplings: DMatrix<f64>,
        bias_field: f64,
        ports: Vec<Port>,
    ) -> Result<Self> {
        let n = modes.len();
        if n == 0 {
            return Err(Error::InvalidModel("model needs at least one mode".into()));
        }
        if couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::InvalidModel(format!(
                "coupling matrix is {}x{}, expected {n}x{n}",
                couplings.nrows(),
                couplings.ncols()
            )));
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::InvalidModel(format!("coupling diagonal ({i},{i}) must be zero")));
            }
            for j in 0..n {
                let g = couplings[(i, j)];
                if !(g >= 0.0) || !g.is_finite() {
                    return Err(Error::InvalidModel(format!("coupling ({i},{j}) = {g} must be non-negative")));
                }
                if g != couplings[(j, i)] {
                    return Err(Error::InvalidModel(format!("coupling matrix not symmetric at ({i},{j})")));
                }
            }
        }
        for m in modes.iter_mut() {
            non_negative("gamma", m.gamma)?;
            match m.kind {
                ModeKind::Cavity => positive("omega", m.omega)?,
                ModeKind::Magnon => {
                    m.omega = kittel_frequency(bias_field, m.field_offset)?;
                    if !(m.omega >= 0.0) {
                        return Err(Error::InvalidModel(format!(
                            "magnon frequency {} rad/s is negative at B0 = {bias_field} T",
                            m.omega
                        )));
                    }
                }
            }
        }
        for p in &ports {
            if p.kappa.len() != n {
                return Err(Error::InvalidModel(format!(
                    "port `{}` lists {} couplings for {n} modes",
                    p.name,
                    p.kappa.len()
                )));
            }
            for &k in &p.kappa {
                non_negative("kappa", k)?;
            }
        }
        Ok(Self {
            modes,
            couplings,
            bias_field,
            ports,
        })
    }

    /// Two-mode photon–magnon system with one port coupled to the cavity.
    /// The magnon offset is chosen so both modes are degenerate at `bias_field`
    /// when `detuning` is zero (`ω_m = ω_c + detuning`).
    pub fn two_mode(
        omega_c: f64,
        gamma_c: f64,
        gamma_m: f64,
        coupling: f64,
        bias_field: f64,
        detuning: f64,
        kappa: f64,
    ) -> Result<Self> {
        let offset = omega_c + detuning - GYROMAGNETIC_RATIO * bias_field;
        let modes = vec![
            OscillatorMode::cavity(omega_c, gamma_c),
            OscillatorMode::magnon(gamma_m, offset),
        ];
        let couplings = DMatrix::from_row_slice(2, 2, &[0.0, coupling, coupling, 0.0]);
        let ports = vec![
            Port {
                name: "in".into(),
                kappa: vec![kappa, 0.0],
            },
            Port {
                name: "out".into(),
                kappa: vec![kappa, 0.0],
            },
        ];
        Self::new(modes, couplings, bias_field, ports)
    }

    pub fn modes(&self) -> &[OscillatorMode] {
        &self.modes
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[(i, j)]
    }

    pub fn bias_field(&self) -> f64 {
        self.bias_field
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// True when the model has at least one cavity and one magnon mode.
    pub fn is_pmhs(&self) -> bool {
        self.modes.iter().any(|m| m.kind == ModeKind::Cavity) && self.modes.iter().any(|m| m.is_magnon())
    }

    pub fn indices_of(&self, kind: ModeKind) -> Vec<usize> {
        (0..self.modes.len()).filter(|&i| self.modes[i].kind == kind).collect()
    }

    /// Same system at another bias field; magnon frequencies are recomputed.
    pub fn with_bias_field(&self, bias_field: f64) -> Result<Self> {
        let mut next = self.clone();
        next.bias_field = bias_field;
        for m in next.modes.iter_mut().filter(|m| m.is_magnon()) {
            m.omega = kittel_frequency(bias_field, m.field_offset)?;
        }
        Ok(next)
    }

    /// Replace one mode's parameters, keeping the magnon-frequency invariant.
    pub fn with_mode(&self, index: usize, mode: OscillatorMode) -> Result<Self> {
        let mut modes = self.modes.clone();
        modes[index] = mode;
        Self::new(modes, self.couplings.clone(), self.bias_field, self.ports.clone())
    }

    /// Set the symmetric coupling between `i` and `j`.
    pub fn with_coupling(&self, i: usize, j: usize, g: f64) -> Result<Self> {
        let mut c = self.couplings.clone();
        c[(i, j)] = g;
        c[(j, i)] = g;
        Self::new(self.modes.clone(), c, self.bias_field, self.ports.clone())
    }

    pub fn with_ports(&self, ports: Vec<Port>) -> Result<Self> {
        Self::new(self.modes.clone(), self.couplings.clone(), self.bias_field, ports)
    }

    /// Field at which magnon `m` is degenerate with mode `c` (bare frequencies).
    pub fn crossing_field(&self, c: usize, m: usize) -> Result<f64> {
        let magnon = &self.modes[m];
        if !magnon.is_magnon() {
            return Err(Error::InvalidParameter {
                name: "magnon",
                reason: format!("mode {m} is not a magnon"),
            });
        }
        let b = (self.modes[c].omega - magnon.field_offset) / GYROMAGNETIC_RATIO;
        if b < 0.0 {
            return Err(Error::InvalidModel(format!(
                "modes {c} and {m} never cross at a non-negative field"
            )));
        }
        Ok(b)
    }

    /// `g_ij > max(γ_i, γ_j)/2`.
    pub fn is_strongly_coupled(&self, i: usize, j: usize) -> bool {
        let g = self.couplings[(i, j)];
        g > 0.5 * self.modes[i].gamma.max(self.modes[j].gamma)
    }

    /// Strong-coupling predicate for every coupled pair.
    pub fn strong_coupling_report(&self) -> Vec<(usize, usize, bool)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.couplings[(i, j)] > 0.0 {
                    out.push((i, j, self.is_strongly_coupled(i, j)));
                }
            }
        }
        out
    }

    pub fn to_config(&self) -> HybridConfig {
        HybridConfig {
            bias_field_t: self.bias_field,
            modes: self
                .modes
                .iter()
                .map(|m| ModeConfig {
                    kind: m.kind,
                    omega_hz: (m.kind == ModeKind::Cavity).then(|| angular_to_hz(m.omega)),
                    gamma_hz: angular_to_hz(m.gamma),
                    field_offset_hz: angular_to_hz(m.field_offset),
                })
                .collect(),
            couplings_hz: (0..self.len())
                .map(|i| (0..self.len()).map(|j| angular_to_hz(self.couplings[(i, j)])).collect())
                .collect(),
            ports: self
                .ports
                .iter()
                .map(|p| PortConfig {
                    name: p.name.clone(),
                    kappa_hz: p.kappa.iter().map(|&k| angular_to_hz(k)).collect(),
                })
                .collect(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: HybridConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.to_model()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_config()).expect("hybrid config serializes")
    }
}

/// On-disk form of a [`HybridSystemModel`]; all frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridConfig {
    pub bias_field_t: f64,
    pub modes: Vec<ModeConfig>,
    pub couplings_hz: Vec<Vec<f64>>,
    #[serde(default)]
    pub ports: Vec<PortConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub kind: ModeKind,
    /// Required for cavities; magnon frequencies follow the bias field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_hz: Option<f64>,
    pub gamma_hz: f64,
    #[serde(default)]
    pub field_offset_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortConfig {
    pub name: String,
    pub kappa_hz: Vec<f64>,
}

impl HybridConfig {
    pub fn to_model(&self) -> Result<HybridSystemModel> {
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(i, m)| match m.kind {
                ModeKind::Cavity => {
                    let f = m
                        .omega_hz
                        .ok_or_else(|| Error::Config(format!("modes[{i}]: cavity needs omega_hz")))?;
                    Ok(OscillatorMode::cavity(hz_to_angular(f), hz_to_angular(m.gamma_hz)))
                }
                ModeKind::Magnon => {
                    if m.omega_hz.is_some() {
                        return Err(Error::Config(format!(
                            "modes[{i}]: magnon frequency follows bias_field_t; use field_offset_hz"
                        )));
                    }
                    Ok(OscillatorMode::magnon(
                        hz_to_angular(m.gamma_hz),
                        hz_to_angular(m.field_offset_hz),
                    ))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let n = modes.len();
        if self.couplings_hz.len() != n || self.couplings_hz.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("couplings_hz must be a {n}x{n} matrix")));
        }
        let couplings = DMatrix::from_fn(n, n, |i, j| hz_to_angular(self.couplings_hz[i][j]));
        let ports = self
            .ports
            .iter()
            .map(|p| Port {
                name: p.name.clone(),
                kappa: p.kappa_hz.iter().map(|&k| hz_to_angular(k)).collect(),
            })
            .collect();
        HybridSystemModel::new(modes, couplings, self.bias_field_t, ports)
    }
}
