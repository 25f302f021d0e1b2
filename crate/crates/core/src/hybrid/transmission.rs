use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use super::eigen::dynamical_matrix;
use super::model::HybridSystemModel;
use crate::constants::{angular_to_hz, hz_to_angular, GYROMAGNETIC_RATIO};
use crate::linalg::{self, CVector};
use crate::{Error, Result};

/// Complex transmission from `input_port` to `output_port` at `probe_omega`:
/// `S21 = k_outᵀ [i(ω − M)]⁻¹ k_in` with `k = √κ` per mode.
pub fn s21(model: &HybridSystemModel, probe_omega: f64, input_port: usize, output_port: usize) -> Result<Complex64> {
    let (k_in, k_out) = port_vectors(model, input_port, output_port)?;
    s21_with(model, probe_omega, &k_in, &k_out)
}

pub(crate) fn port_vectors(model: &HybridSystemModel, input_port: usize, output_port: usize) -> Result<(CVector, CVector)> {
    let ports = model.ports();
    let get = |idx: usize, name: &'static str| {
        ports.get(idx).ok_or_else(|| Error::InvalidParameter {
            name,
            reason: format!("model has {} ports, asked for {idx}", ports.len()),
        })
    };
    let pin = get(input_port, "input_port")?;
    let pout = get(output_port, "output_port")?;
    for p in [pin, pout] {
        if !p.kappa.iter().any(|&k| k > 0.0) {
            return Err(Error::InvalidParameter {
                name: "port",
                reason: format!("port `{}` is not coupled to any mode", p.name),
            });
        }
    }
    if let Some((j, _)) = model.modes().iter().enumerate().find(|(_, m)| !(m.gamma > 0.0)) {
        return Err(Error::InvalidModel(format!(
            "transmission needs every damping rate > 0 (mode {j} has none)"
        )));
    }
    let to_vec = |k: &[f64]| CVector::from_iterator(k.len(), k.iter().map(|&x| Complex64::new(x.sqrt(), 0.0)));
    Ok((to_vec(&pin.kappa), to_vec(&pout.kappa)))
}

fn s21_with(model: &HybridSystemModel, probe_omega: f64, k_in: &CVector, k_out: &CVector) -> Result<Complex64> {
    let mut a = dynamical_matrix(model);
    let n = a.nrows();
    // i(ω − M)
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { Complex64::new(probe_omega, 0.0) } else { Complex64::new(0.0, 0.0) };
            a[(i, j)] = Complex64::i() * (delta - a[(i, j)]);
        }
    }
    let x = linalg::solve(&a, k_in)?;
    Ok(k_out.iter().zip(x.iter()).map(|(k, v)| k * v).sum())
}

/// Complex transmission over a (bias field, probe frequency) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMap {
    field_axis: Vec<f64>,
    frequency_axis: Vec<f64>,
    /// Row-major: `values[i * n_freq + j]` at `field_axis[i]`, `frequency_axis[j]`.
    values: Vec<Complex64>,
}

fn strictly_increasing(name: &'static str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() || axis.windows(2).any(|w| !(w[1] > w[0])) || axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter {
            name,
            reason: "axis must be non-empty, finite and strictly increasing".into(),
        });
    }
    Ok(())
}

impl SpectrumMap {
    pub fn new(field_axis: Vec<f64>, frequency_axis: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        strictly_increasing("field_axis", &field_axis)?;
        strictly_increasing("frequency_axis", &frequency_axis)?;
        if values.len() != field_axis.len() * frequency_axis.len() {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!(
                    "{} values for a {}x{} grid",
                    values.len(),
                    field_axis.len(),
                    frequency_axis.len()
                ),
            });
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "non-finite transmission value".into(),
            });
        }
        Ok(Self {
            field_axis,
            frequency_axis,
            values,
        })
    }

    pub fn field_axis(&self) -> &[f64] {
        &self.field_axis
    }

    /// Probe frequencies in rad/s.
    pub fn frequency_axis(&self) -> &[f64] {
        &self.frequency_axis
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, field_index: usize, frequency_index: usize) -> Complex64 {
        self.values[field_index * self.frequency_axis.len() + frequency_index]
    }

    /// |S21| along the frequency axis at one field point.
    pub fn magnitude_column(&self, field_index: usize) -> Vec<f64> {
        let n = self.frequency_axis.len();
        self.values[field_index * n..(field_index + 1) * n].iter().map(|z| z.norm()).collect()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    /// Local maxima of |S21| along frequency at one field point, as
    /// (frequency index, magnitude), strongest first. Plateau-free data assumed.
    pub fn column_peaks(&self, field_index: usize, min_relative: f64) -> Vec<(usize, f64)> {
        let col = self.magnitude_column(field_index);
        let top = col.iter().cloned().fold(0.0, f64::max);
        let mut peaks: Vec<(usize, f64)> = (1..col.len().saturating_sub(1))
            .filter(|&j| col[j] > col[j - 1] && col[j] >= col[j + 1] && col[j] >= min_relative * top)
            .map(|j| (j, col[j]))
            .collect();
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
        peaks
    }

    /// Write |S21| as CSV: header row of frequencies (Hz), first column field (T).
    pub fn write_magnitude_csv<W: Write>(&self, w: W) -> Result<()> {
        self.write_csv(w, |z| z.norm())
    }

    /// Companion file with arg(S21) in radians, same layout.
    pub fn write_phase_csv<W: Write>(&self, w: W) -> Result<()> {
        self.write_csv(w, |z| z.arg())
    }

    fn write_csv<W: Write>(&self, mut w: W, cell: impl Fn(&Complex64) -> f64) -> Result<()> {
        write!(w, "field_t")?;
        for f in &self.frequency_axis {
            write!(w, ",{}", angular_to_hz(*f))?;
        }
        writeln!(w)?;
        let n = self.frequency_axis.len();
        for (i, b) in self.field_axis.iter().enumerate() {
            write!(w, "{b}")?;
            for z in &self.values[i * n..(i + 1) * n] {
                write!(w, ",{}", cell(z))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Read a magnitude CSV (and optionally its phase companion).
    pub fn read_csv<R: BufRead>(magnitude: R, phase: Option<R>) -> Result<Self> {
        let (fields, freqs_hz, mags) = parse_grid_csv(magnitude)?;
        let phases = match phase {
            Some(p) => {
                let (pf, pq, ph) = parse_grid_csv(p)?;
                if pf != fields || pq != freqs_hz {
                    return Err(Error::Parse("phase file axes differ from magnitude file".into()));
                }
                ph
            }
            None => vec![0.0; mags.len()],
        };
        let values = mags.iter().zip(&phases).map(|(&m, &p)| Complex64::from_polar(m, p)).collect();
        Self::new(fields, freqs_hz.into_iter().map(hz_to_angular).collect(), values)
    }
}

fn parse_grid_csv<R: BufRead>(r: R) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))??;
    let parse = |s: &str, line: usize| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("line {line}: `{s}`: {e}")))
    };
    let freqs = header
        .split(',')
        .skip(1)
        .map(|s| parse(s, 1))
        .collect::<Result<Vec<_>>>()?;
    let mut fields = Vec::new();
    let mut cells = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        fields.push(parse(it.next().unwrap_or(""), k + 2)?);
        let row = it.map(|s| parse(s, k + 2)).collect::<Result<Vec<_>>>()?;
        if row.len() != freqs.len() {
            return Err(Error::Parse(format!(
                "line {}: {} cells, expected {}",
                k + 2,
                row.len(),
                freqs.len()
            )));
        }
        cells.extend(row);
    }
    Ok((fields, freqs, cells))
}

/// Transmission map over the grid; magnon frequencies follow each field value.
/// Field columns are evaluated in parallel.
pub fn anticrossing_map(
    model: &HybridSystemModel,
    field_grid: &[f64],
    frequency_grid: &[f64],
    input_port: usize,
    output_port: usize,
) -> Result<SpectrumMap> {
    strictly_increasing("field_grid", field_grid)?;
    strictly_increasing("frequency_grid", frequency_grid)?;
    let (k_in, k_out) = port_vectors(model, input_port, output_port)?;
    let columns = field_grid
        .par_iter()
        .map(|&b| {
            let at = |source: Error, w: f64| Error::GridPoint {
                field: b,
                frequency_hz: angular_to_hz(w),
                source: Box::new(source),
            };
            let local = model.with_bias_field(b).map_err(|e| at(e, frequency_grid[0]))?;
            frequency_grid
                .iter()
                .map(|&w| s21_with(&local, w, &k_in, &k_out).map_err(|e| at(e, w)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SpectrumMap::new(field_grid.to_vec(), frequency_grid.to_vec(), columns.concat())
}

/// Default grids: `points` × `points` spanning ±`half_width_in_g`·g around
/// the (cavity, magnon) crossing, in detuning for the field axis.
pub fn default_grids(
    model: &HybridSystemModel,
    pair: (usize, usize),
    points: usize,
    half_width_in_g: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (c, m) = pair;
    let g = model.coupling(c, m);
    let gam = model.modes()[c].gamma.max(model.modes()[m].gamma);
    let half = half_width_in_g * g.max(gam);
    if !(half > 0.0) {
        return Err(Error::InvalidModel("default grid needs a non-zero coupling or linewidth".into()));
    }
    if points < 2 {
        return Err(Error::InvalidParameter {
            name: "points",
            reason: "need at least two grid points".into(),
        });
    }
    let center = model.crossing_field(c, m)?;
    let wc = model.modes()[c].omega;
    let lin = |lo: f64, hi: f64| -> Vec<f64> {
        (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect()
    };
    let db = half / GYROMAGNETIC_RATIO;
    Ok((lin(center - db, center + db), lin(wc - half, wc + half)))
}
