use std::fmt::Write as _;

use polariton_core::constants::{angular_to_hz, hz_to_angular};
use polariton_core::hybrid::{
    anticrossing_map, default_grids, kittel_frequency, rabi_splitting, track_branches, HybridSystemModel, ModeKind,
};

use super::{model_from, port_index, render, Plan};
use crate::artifacts::Artifact;
use crate::config::{GridConfig, RunConfig};
use crate::plot::Table;
use crate::{CliError, CliResult};

/// Field and frequency axes (T, rad/s) plus the probe ports.
pub(super) struct Grid {
    pub fields: Vec<f64>,
    pub freqs: Vec<f64>,
    pub input: usize,
    pub output: usize,
    pub pair: Option<(usize, usize)>,
}

fn default_pair(model: &HybridSystemModel) -> Option<(usize, usize)> {
    let c = *model.indices_of(ModeKind::Cavity).first()?;
    let m = *model.indices_of(ModeKind::Magnon).first()?;
    Some((c, m))
}

pub(super) fn grid(model: &HybridSystemModel, cfg: &GridConfig) -> CliResult<Grid> {
    let pair = match cfg.pair {
        Some([c, m]) => {
            let kinds = model.modes();
            if c >= kinds.len() || m >= kinds.len() || kinds[c].kind != ModeKind::Cavity || kinds[m].kind != ModeKind::Magnon {
                return Err(CliError::Config(format!("[grid] pair [{c}, {m}] must name a cavity and a magnon mode")));
            }
            Some((c, m))
        }
        None => default_pair(model),
    };
    let explicit = [cfg.field_min_t, cfg.field_max_t, cfg.frequency_min_hz, cfg.frequency_max_hz];
    let (fields, freqs) = if explicit.iter().all(Option::is_some) {
        let lin = |lo: f64, hi: f64, n: usize, what: &str| -> CliResult<Vec<f64>> {
            if n < 2 || !(hi > lo) {
                return Err(CliError::Config(format!("[grid] {what} needs max > min and at least 2 points")));
            }
            Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
        };
        let points = cfg.points.unwrap_or(201);
        let fields = lin(
            cfg.field_min_t.unwrap_or_default(),
            cfg.field_max_t.unwrap_or_default(),
            cfg.field_points.unwrap_or(points),
            "field",
        )?;
        let freqs = lin(
            hz_to_angular(cfg.frequency_min_hz.unwrap_or_default()),
            hz_to_angular(cfg.frequency_max_hz.unwrap_or_default()),
            cfg.frequency_points.unwrap_or(points),
            "frequency",
        )?;
        (fields, freqs)
    } else if explicit.iter().any(Option::is_some) {
        return Err(CliError::Config(
            "[grid] explicit limits need all of field_min_t, field_max_t, frequency_min_hz, frequency_max_hz".into(),
        ));
    } else {
        let pair = pair.ok_or_else(|| {
            CliError::Config("default grid needs a cavity and a magnon mode; give explicit [grid] limits".into())
        })?;
        default_grids(model, pair, cfg.points.unwrap_or(201), cfg.half_width_g.unwrap_or(5.0))
            .map_err(CliError::from_setup)?
    };
    if fields[0] < 0.0 {
        return Err(CliError::Config("[grid] field axis must be non-negative".into()));
    }
    Ok(Grid {
        fields,
        freqs,
        input: port_index(model, cfg.input_port.as_deref(), "in", false)?,
        output: port_index(model, cfg.output_port.as_deref(), "out", true)?,
        pair,
    })
}

pub(super) struct Anticrossing {
    model: HybridSystemModel,
    grid: Grid,
}

impl Anticrossing {
    pub fn prepare(config: &RunConfig) -> CliResult<Self> {
        let model = model_from(&config.model)?;
        let grid = grid(&model, &config.grid.clone().unwrap_or_default())?;
        Ok(Self { model, grid })
    }
}

impl Plan for Anticrossing {
    fn outputs(&self) -> Vec<String> {
        let mut v: Vec<String> = ["s21_magnitude.csv", "s21_phase.csv", "branches.csv", "s21_magnitude.dat", "summary.txt"]
            .map(String::from)
            .to_vec();
        v.extend((0..self.model.len()).map(|j| format!("bare_mode_{j}.dat")));
        v
    }

    fn execute(&self, _seed: u64) -> CliResult<Vec<Artifact>> {
        let g = &self.grid;
        let map = anticrossing_map(&self.model, &g.fields, &g.freqs, g.input, g.output).map_err(CliError::from_run)?;
        let branches = track_branches(&self.model, &g.fields).map_err(CliError::from_run)?;

        let mut out = vec![
            Artifact::new("s21_magnitude.csv", render(|w| map.write_magnitude_csv(w))?),
            Artifact::new("s21_phase.csv", render(|w| map.write_phase_csv(w))?),
        ];

        let mut csv = String::from("field_t");
        for k in 0..branches.len() {
            let _ = write!(csv, ",branch_{k}_hz,branch_{k}_linewidth_hz");
        }
        csv.push('\n');
        for (i, b) in g.fields.iter().enumerate() {
            let _ = write!(csv, "{b}");
            for br in &branches {
                let _ = write!(csv, ",{},{}", angular_to_hz(br[i].re), angular_to_hz(-2.0 * br[i].im));
            }
            csv.push('\n');
        }
        out.push(Artifact::text("branches.csv", csv));

        let mut table = Table::new("|S21| over the field-frequency grid", &["field [T]", "frequency [Hz]", "|S21|"]);
        let nf = g.freqs.len();
        for (i, b) in g.fields.iter().enumerate() {
            for (k, w) in g.freqs.iter().enumerate() {
                table.row(&[*b, angular_to_hz(*w), map.values()[i * nf + k].norm()]);
            }
            table.block();
        }
        out.push(Artifact::text("s21_magnitude.dat", table.finish()));

        let mut summary = String::new();
        let _ = writeln!(summary, "task = anticrossing");
        let _ = writeln!(summary, "grid.fields = {}", g.fields.len());
        let _ = writeln!(summary, "grid.frequencies = {}", g.freqs.len());
        if let Some(pair) = g.pair {
            match rabi_splitting(&self.model, Some(pair)) {
                Ok(r) => {
                    let _ = writeln!(summary, "rabi_splitting_hz = {:e}", angular_to_hz(r.splitting));
                    let _ = writeln!(summary, "rabi_field_t = {:e}", r.field);
                }
                Err(e) => {
                    let _ = writeln!(summary, "rabi_splitting = not determined ({e})");
                }
            }
        }
        if let Some((c, m)) = g.pair {
            let _ = writeln!(summary, "strong_coupling_{c}_{m} = {}", self.model.is_strongly_coupled(c, m));
        }
        for (i, j, strong) in self.model.strong_coupling_report() {
            if g.pair != Some((i, j)) && g.pair != Some((j, i)) {
                let _ = writeln!(summary, "strong_coupling_{i}_{j} = {strong}");
            }
        }

        for (j, mode) in self.model.modes().iter().enumerate() {
            let kind = match mode.kind {
                ModeKind::Cavity => "cavity",
                ModeKind::Magnon => "magnon",
            };
            let mut t = Table::new(&format!("bare {kind} mode {j}"), &["field [T]", "frequency [Hz]"]);
            for &b in [g.fields[0], g.fields[g.fields.len() - 1]].iter() {
                let w = match mode.kind {
                    ModeKind::Cavity => mode.omega,
                    ModeKind::Magnon => kittel_frequency(b, mode.field_offset).map_err(CliError::from_run)?,
                };
                t.row(&[b, angular_to_hz(w)]);
            }
            out.push(Artifact::text(format!("bare_mode_{j}.dat"), t.finish()));
        }
        out.insert(4, Artifact::text("summary.txt", summary));
        Ok(out)
    }
}
