use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use polariton_core::constants::{angular_to_hz, hz_to_angular};
use polariton_core::fitting::{
    add_multiplicative_noise, fit_anticrossing, relaxation_time_from_fit, ridge_seed, spins_from_coupling,
    FitProblem, FreeParameter, Loss, ParamId,
};
use polariton_core::hybrid::{anticrossing_map, HybridSystemModel, ModeKind, SpectrumMap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::spectra::{grid, Grid};
use super::{model_from, positive, render, require, Plan};
use crate::artifacts::Artifact;
use crate::config::{FitConfig, LossConfig, RunConfig};
use crate::plot::Table;
use crate::{CliError, CliResult};

enum Data {
    File(SpectrumMap),
    Synthetic { grid: Grid, noise: f64 },
}

/// A free parameter before its starting value is known.
struct Free {
    id: ParamId,
    initial: Option<f64>,
    lower: Option<f64>,
    upper: Option<f64>,
}

pub(super) struct FitRun {
    template: HybridSystemModel,
    data: Data,
    free: Vec<Free>,
    loss: Loss,
    seed_from_ridges: bool,
    max_iterations: Option<usize>,
    config: FitConfig,
}

fn to_internal(id: ParamId, value: f64) -> f64 {
    match id {
        ParamId::Gain => value,
        _ => hz_to_angular(value),
    }
}

fn template_value(model: &HybridSystemModel, id: ParamId) -> f64 {
    match id {
        ParamId::Omega(j) => model.modes()[j].omega,
        ParamId::Gamma(j) => model.modes()[j].gamma,
        ParamId::FieldOffset(j) => model.modes()[j].field_offset,
        ParamId::Coupling(i, j) => model.coupling(i, j),
        ParamId::Kappa(p, j) => model.ports()[p].kappa[j],
        ParamId::Gain => 1.0,
    }
}

fn exists(model: &HybridSystemModel, id: ParamId) -> bool {
    let n = model.len();
    match id {
        ParamId::Omega(j) | ParamId::Gamma(j) | ParamId::FieldOffset(j) => j < n,
        ParamId::Coupling(i, j) => i < n && j < n,
        ParamId::Kappa(p, j) => p < model.ports().len() && j < n,
        ParamId::Gain => true,
    }
}

fn read_map(path: &Path, phase: Option<&Path>) -> CliResult<SpectrumMap> {
    let open = |p: &Path| {
        File::open(p)
            .map(BufReader::new)
            .map_err(|e| CliError::Io(format!("cannot open {}: {e}", p.display())))
    };
    let mag = open(path)?;
    let phase = phase.map(open).transpose()?;
    SpectrumMap::read_csv(mag, phase).map_err(|e| match e {
        polariton_core::Error::Io(io) => CliError::Io(io.to_string()),
        other => CliError::Config(format!("{}: {other}", path.display())),
    })
}

impl FitRun {
    pub fn prepare(config: &RunConfig, base: &Path) -> CliResult<Self> {
        let template = model_from(&config.model)?;
        let fc = require(&config.fit, "[fit] block")?.clone();
        let data = match (&fc.data, fc.synthetic) {
            (Some(path), false) => {
                if config.grid.is_some() {
                    return Err(CliError::Config("[grid] is only used with synthetic = true".into()));
                }
                if fc.noise != 0.0 {
                    return Err(CliError::Config("[fit] noise is only used with synthetic = true".into()));
                }
                let phase = fc.phase.as_ref().map(|p| base.join(p));
                Data::File(read_map(&base.join(path), phase.as_deref())?)
            }
            (None, true) => {
                if !(fc.noise >= 0.0 && fc.noise < 1.0) {
                    return Err(CliError::Config(format!("[fit] noise must lie in [0, 1), got {}", fc.noise)));
                }
                Data::Synthetic {
                    grid: grid(&template, &config.grid.clone().unwrap_or_default())?,
                    noise: fc.noise,
                }
            }
            _ => return Err(CliError::Config("[fit] needs exactly one of data and synthetic = true".into())),
        };
        if fc.free.is_empty() {
            return Err(CliError::Config("[fit] lists no free parameters".into()));
        }
        let free = fc
            .free
            .iter()
            .map(|f| {
                let id = ParamId::parse(&f.name).map_err(CliError::from_setup)?;
                Ok(Free {
                    id,
                    initial: f.initial.map(|v| to_internal(id, v)),
                    lower: f.lower.map(|v| to_internal(id, v)),
                    upper: f.upper.map(|v| to_internal(id, v)),
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        if let Some(v) = fc.mode_volume_m3 {
            positive(v, "[fit] mode_volume_m3")?;
        }
        let loss = match fc.loss {
            LossConfig::Linear => Loss::Linear,
            LossConfig::Log => Loss::Log,
        };
        let run = Self {
            template,
            data,
            free,
            loss,
            seed_from_ridges: fc.seed_from_ridges,
            max_iterations: fc.max_iterations,
            config: fc,
        };
        let data = match &run.data {
            Data::File(map) => map.clone(),
            Data::Synthetic { grid, .. } => {
                anticrossing_map(&run.template, &grid.fields, &grid.freqs, grid.input, grid.output)
                    .map_err(CliError::from_setup)?
            }
        };
        run.problem(data, false)?.validate().map_err(CliError::from_setup)?;
        Ok(run)
    }

    fn problem(&self, data: SpectrumMap, ridges: bool) -> CliResult<FitProblem> {
        let seed = if ridges { Some(ridge_seed(&data).map_err(CliError::from_run)?) } else { None };
        let cavity = self.template.indices_of(ModeKind::Cavity).first().copied();
        let magnon = self.template.indices_of(ModeKind::Magnon).first().copied();
        let from_seed = |id: ParamId| -> Option<f64> {
            let s = seed?;
            match id {
                ParamId::Omega(j) if Some(j) == cavity => Some(s.omega_c),
                ParamId::FieldOffset(j) if Some(j) == magnon => Some(s.field_offset),
                ParamId::Coupling(i, j) if [Some(i), Some(j)] == [cavity, magnon] || [Some(j), Some(i)] == [cavity, magnon] => {
                    Some(s.coupling)
                }
                ParamId::Gamma(j) if Some(j) == cavity => Some(s.gamma_c),
                ParamId::Gamma(j) if Some(j) == magnon => Some(s.gamma_m),
                _ => None,
            }
        };
        let mut free = Vec::with_capacity(self.free.len());
        for f in &self.free {
            if !exists(&self.template, f.id) {
                return Err(CliError::Config(format!(
                    "fit parameter `{}` does not exist in this model",
                    f.id.name()
                )));
            }
            let mut p = FreeParameter::new(f.id, 0.0);
            p.lower = f.lower.unwrap_or(p.lower);
            p.upper = f.upper.unwrap_or(p.upper);
            p.initial = match (f.initial, from_seed(f.id)) {
                (Some(v), _) => v,
                (None, Some(v)) => v.clamp(p.lower, p.upper),
                (None, None) => template_value(&self.template, f.id),
            };
            free.push(p);
        }
        let mut problem = FitProblem::new(data, self.template.clone(), free, self.loss);
        if let Some(n) = self.max_iterations {
            problem.settings.max_iterations = n;
        }
        Ok(problem)
    }

    fn derived(&self, model: &HybridSystemModel) -> String {
        let mut s = String::new();
        let (Some(&c), Some(&m)) = (
            self.template.indices_of(ModeKind::Cavity).first(),
            self.template.indices_of(ModeKind::Magnon).first(),
        ) else {
            return s;
        };
        let omega_c = model.modes()[c].omega;
        let (gc, gm) = (model.modes()[c].gamma, model.modes()[m].gamma);
        match relaxation_time_from_fit(gc, gm, self.config.photon_weight) {
            Ok(t) => {
                let _ = writeln!(s, "derived.relaxation_time_s = {t:e}");
            }
            Err(e) => {
                let _ = writeln!(s, "derived.relaxation_time_s = not available ({e})");
            }
        }
        if let Some(v) = self.config.mode_volume_m3 {
            match spins_from_coupling(model.coupling(c, m), omega_c, v, self.config.fill_factor) {
                Ok(n) => {
                    let _ = writeln!(s, "derived.spin_count = {n:e}");
                }
                Err(e) => {
                    let _ = writeln!(s, "derived.spin_count = not available ({e})");
                }
            }
        }
        let _ = writeln!(s, "derived.cavity_frequency_hz = {:e}", angular_to_hz(omega_c));
        s
    }
}

impl Plan for FitRun {
    fn outputs(&self) -> Vec<String> {
        let mut v: Vec<String> = ["fit.txt", "residuals.csv", "residuals.dat", "fitted_model.toml"]
            .map(String::from)
            .to_vec();
        if matches!(self.data, Data::Synthetic { .. }) {
            v.push("data_magnitude.csv".into());
        }
        v
    }

    fn execute(&self, seed: u64) -> CliResult<Vec<Artifact>> {
        let mut out = Vec::new();
        let data = match &self.data {
            Data::File(map) => map.clone(),
            Data::Synthetic { grid, noise } => {
                let clean = anticrossing_map(&self.template, &grid.fields, &grid.freqs, grid.input, grid.output)
                    .map_err(CliError::from_run)?;
                let map = if *noise > 0.0 {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    add_multiplicative_noise(&clean, *noise, &mut rng).map_err(CliError::from_run)?
                } else {
                    clean
                };
                out.push(Artifact::new("data_magnitude.csv", render(|w| map.write_magnitude_csv(w))?));
                map
            }
        };
        let problem = self.problem(data, self.seed_from_ridges)?;
        problem.validate().map_err(CliError::from_run)?;
        let result = fit_anticrossing(&problem).map_err(CliError::from_run)?;

        let mut text = String::from("task = fit\n");
        if let Data::Synthetic { noise, .. } = self.data {
            let _ = writeln!(text, "data = synthetic");
            let _ = writeln!(text, "data.noise = {noise:e}");
            let _ = writeln!(text, "data.seed = {seed}");
        } else {
            let _ = writeln!(text, "data = file");
        }
        for p in &problem.free {
            let _ = writeln!(text, "start.{} = {:e}", p.id.name(), p.id.external(p.initial));
        }
        text.push_str(&result.to_key_value());
        text.push_str(&self.derived(&result.model));

        let mut table = Table::new("fit residuals", &["field [T]", "frequency [Hz]", "residual"]);
        let nf = result.frequency_axis.len();
        for (i, b) in result.field_axis.iter().enumerate() {
            for (k, w) in result.frequency_axis.iter().enumerate() {
                table.row(&[*b, angular_to_hz(*w), result.residuals[i * nf + k]]);
            }
            table.block();
        }

        out.push(Artifact::text("fit.txt", text));
        out.push(Artifact::new("residuals.csv", render(|w| result.write_residual_csv(w))?));
        out.push(Artifact::text("residuals.dat", table.finish()));
        out.push(Artifact::text("fitted_model.toml", result.model.to_toml()));
        Ok(out)
    }
}
