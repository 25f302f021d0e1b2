//! Browser bindings for three quick looks at a two-mode polariton: the
//! transmission map across the anticrossing, the sideband spectrum under a
//! slow field modulation, and a sensitivity curve. Inputs use the units a
//! slider would show (GHz, MHz, µT, K); outputs are flat arrays for a canvas.

use polariton_core::constants::{angular_to_hz, hz_to_angular};
use polariton_core::hybrid::{anticrossing_map, default_grids, hybrid_modes, HybridSystemModel};
use polariton_core::sensitivity::{sweep, Noise, SensitivityInputs, SweepRange};
use polariton_core::sidebands::{harmonic_balance_sidebands, ModulationDrive};
use wasm_bindgen::prelude::*;

const CAVITY_GHZ: f64 = 10.4;
const BIAS_FIELD_T: f64 = 0.37;
const PUMP_POWER_W: f64 = 1e-3;

fn two_mode(coupling_mhz: f64, gamma_c_mhz: f64, gamma_m_mhz: f64) -> Result<HybridSystemModel, String> {
    let mhz = |v: f64| hz_to_angular(v * 1e6);
    let gamma_c = mhz(gamma_c_mhz);
    HybridSystemModel::two_mode(
        hz_to_angular(CAVITY_GHZ * 1e9),
        gamma_c,
        mhz(gamma_m_mhz),
        mhz(coupling_mhz),
        BIAS_FIELD_T,
        0.0,
        gamma_c / 4.0,
    )
    .map_err(|e| e.to_string())
}

/// |S21| in dB on a `points` × `points` grid, field-major.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct MapView {
    fields_t: Vec<f64>,
    frequencies_hz: Vec<f64>,
    magnitude_db: Vec<f64>,
}

#[wasm_bindgen]
impl MapView {
    #[wasm_bindgen(getter)]
    pub fn fields_t(&self) -> Vec<f64> {
        self.fields_t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn frequencies_hz(&self) -> Vec<f64> {
        self.frequencies_hz.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn magnitude_db(&self) -> Vec<f64> {
        self.magnitude_db.clone()
    }
}

pub fn compute_map(coupling_mhz: f64, gamma_c_mhz: f64, gamma_m_mhz: f64, points: usize) -> Result<MapView, String> {
    let model = two_mode(coupling_mhz, gamma_c_mhz, gamma_m_mhz)?;
    let (fields, freqs) = default_grids(&model, (0, 1), points, 5.0).map_err(|e| e.to_string())?;
    let map = anticrossing_map(&model, &fields, &freqs, 0, 1).map_err(|e| e.to_string())?;
    Ok(MapView {
        magnitude_db: map.values().iter().map(|z| 20.0 * z.norm().max(1e-12).log10()).collect(),
        frequencies_hz: freqs.into_iter().map(angular_to_hz).collect(),
        fields_t: fields,
    })
}

#[wasm_bindgen]
pub fn anticrossing(coupling_mhz: f64, gamma_c_mhz: f64, gamma_m_mhz: f64, points: usize) -> Result<MapView, JsError> {
    compute_map(coupling_mhz, gamma_c_mhz, gamma_m_mhz, points).map_err(|e| JsError::new(&e))
}

/// Sideband lines relative to the carrier.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct SidebandView {
    offsets_hz: Vec<f64>,
    power_dbc: Vec<f64>,
    modulation_hz: f64,
}

#[wasm_bindgen]
impl SidebandView {
    #[wasm_bindgen(getter)]
    pub fn offsets_hz(&self) -> Vec<f64> {
        self.offsets_hz.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn power_dbc(&self) -> Vec<f64> {
        self.power_dbc.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn modulation_hz(&self) -> f64 {
        self.modulation_hz
    }
}

/// Pump the upper polariton and modulate at the polariton splitting, or at
/// `modulation_mhz` when it is positive.
pub fn compute_sidebands(coupling_mhz: f64, b2_ut: f64, modulation_mhz: f64, harmonics: usize) -> Result<SidebandView, String> {
    let model = two_mode(coupling_mhz, 1.0, 1.0)?;
    let modes = hybrid_modes(&model).map_err(|e| e.to_string())?;
    let upper = modes[modes.len() - 1].omega();
    let omega2 = if modulation_mhz > 0.0 {
        hz_to_angular(modulation_mhz * 1e6)
    } else {
        upper - modes[0].omega()
    };
    let drive = ModulationDrive::new(b2_ut * 1e-6, omega2, upper, PUMP_POWER_W).map_err(|e| e.to_string())?;
    let spectrum = harmonic_balance_sidebands(&model, &drive, harmonics).map_err(|e| e.to_string())?;
    let carrier = spectrum.carrier().norm_sqr();
    Ok(SidebandView {
        offsets_hz: spectrum.lines.iter().map(|l| angular_to_hz(l.offset_omega)).collect(),
        power_dbc: spectrum.lines.iter().map(|l| 10.0 * (l.power() / carrier).log10()).collect(),
        modulation_hz: angular_to_hz(omega2),
    })
}

#[wasm_bindgen]
pub fn sidebands(coupling_mhz: f64, b2_ut: f64, modulation_mhz: f64, harmonics: usize) -> Result<SidebandView, JsError> {
    compute_sidebands(coupling_mhz, b2_ut, modulation_mhz, harmonics).map_err(|e| JsError::new(&e))
}

/// Sensitivity (T/√Hz) against the swept input.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct CurveView {
    x: Vec<f64>,
    sensitivity: Vec<f64>,
}

#[wasm_bindgen]
impl CurveView {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sensitivity(&self) -> Vec<f64> {
        self.sensitivity.clone()
    }
}

/// `scheme = "transverse"` sweeps the spin count at 10.4 GHz with the given
/// relaxation time; `"longitudinal"` sweeps the pump power (W) at
/// B0 = 0.4 T, r = 1/2 and the given quality factor. `parameter` is the
/// relaxation time in ns or the quality factor respectively.
pub fn compute_curve(
    scheme: &str,
    noise_k: f64,
    parameter: f64,
    start: f64,
    stop: f64,
    points: usize,
) -> Result<CurveView, String> {
    let noise = Noise::Temperature(noise_k);
    let (base, name) = match scheme {
        "transverse" => (
            SensitivityInputs::transverse(noise, start, hz_to_angular(CAVITY_GHZ * 1e9), parameter * 1e-9),
            "spin_count",
        ),
        "longitudinal" => (SensitivityInputs::longitudinal(noise, 0.4, 0.5, parameter, start), "pump_power_w"),
        other => return Err(format!("unknown scheme `{other}`")),
    };
    let x = SweepRange {
        start,
        stop,
        points,
        log: true,
    }
    .values()
    .map_err(|e| e.to_string())?;
    let reports = sweep(&base, name, &x).map_err(|e| e.to_string())?;
    Ok(CurveView {
        sensitivity: reports.iter().map(|r| r.expected_sensitivity).collect(),
        x,
    })
}

#[wasm_bindgen]
pub fn sensitivity_curve(
    scheme: &str,
    noise_k: f64,
    parameter: f64,
    start: f64,
    stop: f64,
    points: usize,
) -> Result<CurveView, JsError> {
    compute_curve(scheme, noise_k, parameter, start, stop, points).map_err(|e| JsError::new(&e))
}
