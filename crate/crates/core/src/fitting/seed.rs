//! Starting values for two-mode fits from the ridges of a transmission map.

use crate::constants::GYROMAGNETIC_RATIO;
use crate::hybrid::SpectrumMap;
use crate::{Error, Result};

/// Peak frequencies (rad/s) of the two branches at one field point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgePoint {
    pub field: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeSeed {
    /// rad/s
    pub omega_c: f64,
    /// rad/s; the magnon sits at `γB + field_offset`.
    pub field_offset: f64,
    pub coupling: f64,
    pub gamma_c: f64,
    pub gamma_m: f64,
}

/// Sub-grid peak position from a parabola through the three samples around `k`.
fn refine(col: &[f64], axis: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= col.len() {
        return axis[k];
    }
    let (a, b, c) = (col[k - 1], col[k], col[k + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return axis[k];
    }
    let shift = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    let step = if shift >= 0.0 { axis[k + 1] - axis[k] } else { axis[k] - axis[k - 1] };
    axis[k] + shift * step
}

/// Follow the two strongest peaks of every field column. Where only one
/// peak is found it is given to the branch that was closer in the previous
/// column.
pub fn trace_ridges(map: &SpectrumMap, min_relative: f64) -> Vec<RidgePoint> {
    let axis = map.frequency_axis();
    let mut out: Vec<RidgePoint> = Vec::with_capacity(map.field_axis().len());
    for (i, &field) in map.field_axis().iter().enumerate() {
        let col = map.magnitude_column(i);
        let mut peaks: Vec<f64> = map
            .column_peaks(i, min_relative)
            .into_iter()
            .take(2)
            .map(|(k, _)| refine(&col, axis, k))
            .collect();
        peaks.sort_by(f64::total_cmp);
        let point = match peaks.as_slice() {
            [lo, hi] => RidgePoint {
                field,
                lower: Some(*lo),
                upper: Some(*hi),
            },
            [only] => {
                let prev = out.iter().rev().find(|p| p.lower.is_some() || p.upper.is_some());
                let to_upper = match prev {
                    Some(p) => {
                        let d = |x: Option<f64>| x.map(|x| (x - only).abs()).unwrap_or(f64::INFINITY);
                        d(p.upper) < d(p.lower)
                    }
                    None => *only > 0.5 * (axis[0] + axis[axis.len() - 1]),
                };
                RidgePoint {
                    field,
                    lower: (!to_upper).then_some(*only),
                    upper: to_upper.then_some(*only),
                }
            }
            _ => RidgePoint {
                field,
                lower: None,
                upper: None,
            },
        };
        out.push(point);
    }
    out
}

/// Full width at half maximum (in power) of the peak nearest `omega` in
/// column `i`, never less than one grid step.
fn peak_width(map: &SpectrumMap, i: usize, omega: f64) -> f64 {
    let axis = map.frequency_axis();
    let col = map.magnitude_column(i);
    let k = (0..axis.len())
        .min_by(|&a, &b| (axis[a] - omega).abs().total_cmp(&(axis[b] - omega).abs()))
        .unwrap_or(0);
    let half = col[k] / 2f64.sqrt();
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = k;
        for j in range {
            if col[j] < half {
                let t = (col[prev] - half) / (col[prev] - col[j]);
                return Some(axis[prev] + t * (axis[j] - axis[prev]));
            }
            prev = j;
        }
        None
    };
    let left = crossing(&mut (0..k).rev());
    let right = crossing(&mut (k + 1..axis.len()));
    let step = axis[1] - axis[0];
    let width = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (axis[k] - l),
        (None, Some(r)) => 2.0 * (r - axis[k]),
        (None, None) => step,
    };
    width.max(step)
}

/// Two-mode starting values. Branch pairs `ω±` obey
/// `ω₊ + ω₋ = ω_c + γB + offset` and `ω₊ω₋ = ω_c(γB + offset) − g²`; both are
/// straight lines in the field, so two regressions give `ω_c`, the offset
/// and `g`. Linewidths come from the cavity-like peak at the field edge
/// farthest from the crossing and from the hybrid peak width at the crossing.
pub fn ridge_seed(map: &SpectrumMap) -> Result<RidgeSeed> {
    let ridges = trace_ridges(map, 1e-3);
    let axis = map.frequency_axis();
    let center = 0.5 * (axis[0] + axis[axis.len() - 1]);
    let pairs: Vec<(f64, f64, f64)> = ridges
        .iter()
        .filter_map(|p| Some((p.field, p.lower? - center, p.upper? - center)))
        .collect();
    if pairs.len() < 3 {
        return Err(Error::InvalidModel(format!(
            "only {} field columns show two branches; cannot seed a two-mode fit",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    // sum: u_c + off' where off' = offset − center
    let c1 = pairs.iter().map(|(b, lo, hi)| lo + hi - GYROMAGNETIC_RATIO * b).sum::<f64>() / n;
    // product against field: slope u_c·γ, intercept u_c·off' − g²
    let mb = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mp = pairs.iter().map(|(_, lo, hi)| lo * hi).sum::<f64>() / n;
    let sbb: f64 = pairs.iter().map(|(b, _, _)| (b - mb).powi(2)).sum();
    let sbp: f64 = pairs.iter().map(|(b, lo, hi)| (b - mb) * (lo * hi - mp)).sum();
    if !(sbb > 0.0) {
        return Err(Error::InvalidModel("two-branch columns span no field range".into()));
    }
    let slope = sbp / sbb;
    let intercept = mp - slope * mb;
    let uc = slope / GYROMAGNETIC_RATIO;
    let off = c1 - uc;
    let g2 = uc * off - intercept;
    let min_gap = pairs.iter().map(|(_, lo, hi)| hi - lo).fold(f64::INFINITY, f64::min);
    let coupling = if g2 > 0.0 { g2.sqrt() } else { 0.5 * min_gap };

    let omega_c = uc + center;
    let field_offset = off + center;
    let crossing_field = (omega_c - field_offset) / GYROMAGNETIC_RATIO;
    let fields = map.field_axis();
    let nearest = |b: f64| {
        (0..fields.len())
            .min_by(|&x, &y| (fields[x] - b).abs().total_cmp(&(fields[y] - b).abs()))
            .unwrap_or(0)
    };
    let far = if (fields[0] - crossing_field).abs() > (fields[fields.len() - 1] - crossing_field).abs() {
        0
    } else {
        fields.len() - 1
    };
    let far_point = ridges[far];
    let cavity_like = [far_point.lower, far_point.upper]
        .into_iter()
        .flatten()
        .min_by(|a, b| (a - omega_c).abs().total_cmp(&(b - omega_c).abs()))
        .unwrap_or(omega_c);
    let gamma_c = peak_width(map, far, cavity_like);
    let cross = nearest(crossing_field);
    let hybrid = [ridges[cross].lower, ridges[cross].upper]
        .into_iter()
        .flatten()
        .next()
        .unwrap_or(omega_c - coupling);
    let hybrid_width = peak_width(map, cross, hybrid);
    let gamma_m = (2.0 * hybrid_width - gamma_c).max(0.1 * hybrid_width);
    Ok(RidgeSeed {
        omega_c,
        field_offset,
        coupling,
        gamma_c,
        gamma_m,
    })
}
