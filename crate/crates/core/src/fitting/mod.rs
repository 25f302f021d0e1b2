//! Least-squares extraction of coupled-oscillator parameters from
//! transmission maps, plus the quantities derived from them.

mod derived;
mod lm;
mod seed;

use std::fmt::Write as _;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::constants::angular_to_hz;
use crate::hybrid::{anticrossing_map, HybridSystemModel, ModeKind, OscillatorMode, Port, SpectrumMap};
use crate::{Error, Result};

pub use derived::{coupling_from_spins, relaxation_time_from_fit, spins_from_coupling, COUPLING_PREFACTOR};
pub use lm::{LmSettings, Termination};
pub use seed::{ridge_seed, trace_ridges, RidgeSeed};

/// Model quantity that a fit may vary. All rates are angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamId {
    /// Frequency of a cavity mode.
    Omega(usize),
    Gamma(usize),
    /// Field offset of a magnon mode.
    FieldOffset(usize),
    Coupling(usize, usize),
    /// `(port, mode)`
    Kappa(usize, usize),
    /// Overall scale of the transmitted amplitude.
    Gain,
}

impl ParamId {
    pub fn name(&self) -> String {
        match *self {
            ParamId::Omega(j) => format!("omega_{j}"),
            ParamId::Gamma(j) => format!("gamma_{j}"),
            ParamId::FieldOffset(j) => format!("offset_{j}"),
            ParamId::Coupling(i, j) => format!("g_{i}_{j}"),
            ParamId::Kappa(p, j) => format!("kappa_{p}_{j}"),
            ParamId::Gain => "gain".into(),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown fit parameter `{name}`"));
        let idx = |s: &str| s.parse::<usize>().map_err(|_| bad());
        if name == "gain" {
            return Ok(ParamId::Gain);
        }
        let (head, rest) = name.split_once('_').ok_or_else(bad)?;
        Ok(match head {
            "omega" => ParamId::Omega(idx(rest)?),
            "gamma" => ParamId::Gamma(idx(rest)?),
            "offset" => ParamId::FieldOffset(idx(rest)?),
            "g" | "kappa" => {
                let (a, b) = rest.split_once('_').ok_or_else(bad)?;
                if head == "g" {
                    ParamId::Coupling(idx(a)?, idx(b)?)
                } else {
                    ParamId::Kappa(idx(a)?, idx(b)?)
                }
            }
            _ => return Err(bad()),
        })
    }

    /// Unit of the external (reported) value.
    pub fn unit(&self) -> &'static str {
        match self {
            ParamId::Gain => "",
            _ => "Hz",
        }
    }

    /// Convert an internal value to the reported unit.
    pub fn external(&self, value: f64) -> f64 {
        match self {
            ParamId::Gain => value,
            _ => angular_to_hz(value),
        }
    }

    fn check(&self, model: &HybridSystemModel) -> Result<()> {
        let n = model.len();
        let ok = match *self {
            ParamId::Omega(j) => j < n && model.modes()[j].kind == ModeKind::Cavity,
            ParamId::Gamma(j) => j < n,
            ParamId::FieldOffset(j) => j < n && model.modes()[j].is_magnon(),
            ParamId::Coupling(i, j) => i < n && j < n && i != j,
            ParamId::Kappa(p, j) => p < model.ports().len() && j < n,
            ParamId::Gain => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("fit parameter `{}` does not exist in this model", self.name())))
        }
    }

    fn default_bounds(&self) -> (f64, f64) {
        match self {
            ParamId::FieldOffset(_) => (f64::NEG_INFINITY, f64::INFINITY),
            ParamId::Coupling(..) => (0.0, f64::INFINITY),
            _ => (f64::MIN_POSITIVE, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParameter {
    pub id: ParamId,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FreeParameter {
    /// Default bounds: rates positive, offsets unbounded.
    pub fn new(id: ParamId, initial: f64) -> Self {
        let (lower, upper) = id.default_bounds();
        Self {
            id,
            initial,
            lower,
            upper,
        }
    }

    pub fn bounded(id: ParamId, initial: f64, lower: f64, upper: f64) -> Self {
        Self {
            id,
            initial,
            lower,
            upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// Least squares on `|S21|`.
    #[default]
    Linear,
    /// Least squares on `ln|S21|`.
    Log,
}

/// A transmission map together with the model to fit to it.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub data: SpectrumMap,
    /// Frozen values come from here; free ones are overwritten.
    pub template: HybridSystemModel,
    pub free: Vec<FreeParameter>,
    pub loss: Loss,
    pub input_port: usize,
    pub output_port: usize,
    /// Frozen gain when [`ParamId::Gain`] is not free.
    pub gain: f64,
    pub settings: LmSettings,
}

impl FitProblem {
    pub fn new(data: SpectrumMap, template: HybridSystemModel, free: Vec<FreeParameter>, loss: Loss) -> Self {
        let ports = template.ports();
        let find = |name: &str, fallback: usize| ports.iter().position(|p| p.name == name).unwrap_or(fallback);
        let (input_port, output_port) = (find("in", 0), find("out", ports.len().saturating_sub(1)));
        Self {
            data,
            template,
            free,
            loss,
            input_port,
            output_port,
            gain: 1.0,
            settings: LmSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let points = self.data.values().len();
        if self.free.len() * 10 >= points {
            return Err(Error::Config(format!(
                "{} free parameters need more than {} data points",
                self.free.len(),
                10 * self.free.len()
            )));
        }
        for (k, p) in self.free.iter().enumerate() {
            p.id.check(&self.template)?;
            if self.free[..k].iter().any(|q| q.id == p.id) {
                return Err(Error::Config(format!("fit parameter `{}` listed twice", p.id.name())));
            }
            if !(p.lower <= p.initial && p.initial <= p.upper) || !p.initial.is_finite() {
                return Err(Error::Config(format!(
                    "initial value {} of `{}` is outside [{}, {}]",
                    p.initial,
                    p.id.name(),
                    p.lower,
                    p.upper
                )));
            }
        }
        if self.loss == Loss::Log && self.data.values().iter().any(|z| !(z.norm() > 0.0)) {
            return Err(Error::Config("log loss needs non-zero data magnitudes".into()));
        }
        Ok(())
    }

    /// Model and gain for a full parameter vector (ordered as `free`).
    pub fn model_at(&self, values: &[f64]) -> Result<(HybridSystemModel, f64)> {
        let mut modes: Vec<OscillatorMode> = self.template.modes().to_vec();
        let mut couplings = self.template.couplings().clone();
        let mut ports: Vec<Port> = self.template.ports().to_vec();
        let mut gain = self.gain;
        for (p, &v) in self.free.iter().zip(values) {
            match p.id {
                ParamId::Omega(j) => modes[j].omega = v,
                ParamId::Gamma(j) => modes[j].gamma = v,
                ParamId::FieldOffset(j) => modes[j].field_offset = v,
                ParamId::Coupling(i, j) => {
                    couplings[(i, j)] = v;
                    couplings[(j, i)] = v;
                }
                ParamId::Kappa(port, j) => ports[port].kappa[j] = v,
                ParamId::Gain => gain = v,
            }
        }
        let model = HybridSystemModel::new(modes, couplings, self.template.bias_field(), ports)?;
        Ok((model, gain))
    }

    fn prediction(&self, values: &[f64]) -> Result<Vec<f64>> {
        let (model, gain) = self.model_at(values)?;
        let map = anticrossing_map(
            &model,
            self.data.field_axis(),
            self.data.frequency_axis(),
            self.input_port,
            self.output_port,
        )?;
        Ok(map.values().iter().map(|z| gain * z.norm()).collect())
    }

    /// Residual vector (model − data) in the chosen loss.
    pub fn residuals(&self, values: &[f64]) -> Result<Vec<f64>> {
        let model = self.prediction(values)?;
        Ok(model
            .iter()
            .zip(self.data.values())
            .map(|(&m, d)| match self.loss {
                Loss::Linear => m - d.norm(),
                Loss::Log => m.ln() - d.norm().ln(),
            })
            .collect())
    }

    pub fn initial_values(&self) -> Vec<f64> {
        self.free.iter().map(|p| p.initial).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedParameter {
    pub id: ParamId,
    /// Internal units (rad/s for rates).
    pub value: f64,
    /// One-sigma error from the local quadratic approximation.
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub parameters: Vec<FittedParameter>,
    pub model: HybridSystemModel,
    pub gain: f64,
    pub initial_residual_norm: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// Residuals on the data grid, row-major `[field][frequency]`.
    pub residuals: Vec<f64>,
    pub field_axis: Vec<f64>,
    pub frequency_axis: Vec<f64>,
    pub loss: Loss,
}

impl FitResult {
    pub fn value(&self, id: ParamId) -> Option<f64> {
        self.parameters.iter().find(|p| p.id == id).map(|p| p.value)
    }

    pub fn std_error(&self, id: ParamId) -> Option<f64> {
        self.parameters.iter().find(|p| p.id == id).map(|p| p.std_error)
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let loss = match self.loss {
            Loss::Linear => "linear",
            Loss::Log => "log",
        };
        let _ = writeln!(s, "loss = {loss}");
        let _ = writeln!(s, "termination = {}", self.termination.as_str());
        let _ = writeln!(s, "iterations = {}", self.iterations);
        let _ = writeln!(s, "initial_residual_norm = {:e}", self.initial_residual_norm);
        let _ = writeln!(s, "residual_norm = {:e}", self.residual_norm);
        for p in &self.parameters {
            let unit = p.id.unit();
            let suffix = if unit.is_empty() { String::new() } else { format!("_{}", unit.to_lowercase()) };
            let _ = writeln!(s, "param.{}{suffix} = {:e}", p.id.name(), p.id.external(p.value));
            let _ = writeln!(s, "param.{}{suffix}.std_error = {:e}", p.id.name(), p.id.external(p.std_error));
        }
        s
    }

    /// Residual grid in the map CSV layout (`field_t,<frequency Hz>...`).
    pub fn write_residual_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "field_t")?;
        for f in &self.frequency_axis {
            write!(w, ",{}", angular_to_hz(*f))?;
        }
        writeln!(w)?;
        let cols = self.frequency_axis.len();
        for (i, b) in self.field_axis.iter().enumerate() {
            write!(w, "{b}")?;
            for r in &self.residuals[i * cols..(i + 1) * cols] {
                write!(w, ",{r:e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Fit the problem's free parameters with damped Gauss–Newton steps.
pub fn fit_anticrossing(problem: &FitProblem) -> Result<FitResult> {
    problem.validate()?;
    let x0 = problem.initial_values();
    let r0 = problem.residuals(&x0)?;
    let norm0 = r0.iter().map(|r| r * r).sum::<f64>().sqrt();
    let finish = |x: Vec<f64>, std: Vec<f64>, residuals: Vec<f64>, iterations, termination| -> Result<FitResult> {
        let (model, gain) = problem.model_at(&x)?;
        let residual_norm = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
        Ok(FitResult {
            parameters: problem
                .free
                .iter()
                .zip(x.iter().zip(std))
                .map(|(p, (&value, std_error))| FittedParameter {
                    id: p.id,
                    value,
                    std_error,
                })
                .collect(),
            model,
            gain,
            initial_residual_norm: norm0,
            residual_norm,
            iterations,
            termination,
            residuals,
            field_axis: problem.data.field_axis().to_vec(),
            frequency_axis: problem.data.frequency_axis().to_vec(),
            loss: problem.loss,
        })
    };
    if problem.free.is_empty() {
        return finish(x0, Vec::new(), r0, 0, Termination::NoFreeParameters);
    }
    let names: Vec<String> = problem.free.iter().map(|p| p.id.name()).collect();
    let lower: Vec<f64> = problem.free.iter().map(|p| p.lower).collect();
    let upper: Vec<f64> = problem.free.iter().map(|p| p.upper).collect();
    let typical = typical_scales(problem);
    let out = lm::minimize(
        |x| problem.residuals(x),
        x0,
        r0,
        &lower,
        &upper,
        &typical,
        &names,
        &problem.settings,
    )?;
    finish(out.x, out.std_errors, out.residuals, out.iterations, out.termination)
}

/// Magnitude below which a parameter is treated as zero when sizing
/// finite-difference steps.
fn typical_scales(problem: &FitProblem) -> Vec<f64> {
    let rates = problem
        .free
        .iter()
        .filter(|p| matches!(p.id, ParamId::Gamma(_) | ParamId::Coupling(..) | ParamId::Kappa(..)))
        .map(|p| p.initial.abs())
        .fold(0.0, f64::max)
        .max(problem.template.couplings().iter().fold(0.0, |a: f64, &b| a.max(b)))
        .max(problem.template.modes().iter().fold(0.0, |a: f64, m| a.max(m.gamma)));
    problem
        .free
        .iter()
        .map(|p| match p.id {
            ParamId::Gain => p.initial.abs().max(1e-300),
            _ => p.initial.abs().max(rates).max(1.0),
        })
        .collect()
}

/// Copy of `map` with every value multiplied by `1 + rel·N(0,1)`.
pub fn add_multiplicative_noise<R: Rng + ?Sized>(map: &SpectrumMap, rel: f64, rng: &mut R) -> Result<SpectrumMap> {
    let normal = Normal::new(0.0, rel).map_err(|e| Error::InvalidParameter {
        name: "rel",
        reason: e.to_string(),
    })?;
    let values = map.values().iter().map(|z| z * (1.0 + normal.sample(rng))).collect();
    SpectrumMap::new(map.field_axis().to_vec(), map.frequency_axis().to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_angular;
    use crate::hybrid::default_grids;

    fn truth() -> HybridSystemModel {
        HybridSystemModel::two_mode(
            hz_to_angular(10.4e9),
            hz_to_angular(5e6),
            hz_to_angular(3e6),
            hz_to_angular(50e6),
            0.37,
            0.0,
            hz_to_angular(1e6),
        )
        .unwrap()
    }

    fn data(model: &HybridSystemModel, points: usize) -> SpectrumMap {
        let (fields, freqs) = default_grids(model, (0, 1), points, 5.0).unwrap();
        anticrossing_map(model, &fields, &freqs, 0, 1).unwrap()
    }

    #[test]
    fn parameter_names_round_trip() {
        for id in [
            ParamId::Omega(0),
            ParamId::Gamma(3),
            ParamId::FieldOffset(1),
            ParamId::Coupling(0, 2),
            ParamId::Kappa(1, 0),
            ParamId::Gain,
        ] {
            assert_eq!(ParamId::parse(&id.name()).unwrap(), id);
        }
        assert!(ParamId::parse("omega").is_err());
        assert!(ParamId::parse("width_0").is_err());
    }

    #[test]
    fn zero_free_parameters_return_the_template() {
        let m = truth();
        let d = data(&m.with_coupling(0, 1, hz_to_angular(60e6)).unwrap(), 41);
        let p = FitProblem::new(d, m.clone(), vec![], Loss::Linear);
        let r = fit_anticrossing(&p).unwrap();
        assert_eq!(r.termination, Termination::NoFreeParameters);
        assert_eq!(r.model, m);
        assert!(r.residual_norm > 0.0);
        assert_eq!(r.residual_norm, r.initial_residual_norm);
    }

    #[test]
    fn invariants_are_checked() {
        let m = truth();
        let d = data(&m, 5);
        let free: Vec<FreeParameter> = (0..3).map(|_| FreeParameter::new(ParamId::Gamma(0), 1.0)).collect();
        assert!(FitProblem::new(d.clone(), m.clone(), free, Loss::Linear).validate().is_err());
        let d = data(&m, 21);
        let bad = FreeParameter::bounded(ParamId::Coupling(0, 1), 5.0, 0.0, 1.0);
        assert!(FitProblem::new(d.clone(), m.clone(), vec![bad], Loss::Linear).validate().is_err());
        let wrong = FreeParameter::new(ParamId::Omega(1), 1.0);
        assert!(FitProblem::new(d, m, vec![wrong], Loss::Linear).validate().is_err());
    }

    #[test]
    fn recovers_coupling_from_a_low_guess() {
        let m = truth();
        let d = data(&m, 61);
        let g = m.coupling(0, 1);
        let p = FitProblem::new(d, m.clone(), vec![FreeParameter::new(ParamId::Coupling(0, 1), 0.8 * g)], Loss::Linear);
        let r = fit_anticrossing(&p).unwrap();
        let got = r.value(ParamId::Coupling(0, 1)).unwrap();
        assert!(((got - g) / g).abs() < 1e-3, "{got} vs {g}");
        assert!(r.residual_norm <= r.initial_residual_norm);
        assert!(r.to_key_value().contains("param.g_0_1_hz = "));
        let mut buf = Vec::new();
        r.write_residual_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 62);
    }

    #[test]
    fn degenerate_parameters_are_reported() {
        let m = truth();
        let d = data(&m, 41);
        let free = vec![
            FreeParameter::new(ParamId::Kappa(0, 0), m.ports()[0].kappa[0]),
            FreeParameter::new(ParamId::Kappa(1, 0), m.ports()[1].kappa[0]),
            FreeParameter::new(ParamId::Gain, 1.1),
        ];
        let err = fit_anticrossing(&FitProblem::new(d, m, free, Loss::Log)).unwrap_err();
        let Error::SingularJacobian { combination } = err else {
            panic!("expected a singular Jacobian, got {err:?}");
        };
        assert_eq!(combination.len(), 3);
    }

    #[test]
    fn noise_is_multiplicative() {
        use rand::SeedableRng;
        let m = truth();
        let d = data(&m, 21);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let noisy = add_multiplicative_noise(&d, 0.01, &mut rng).unwrap();
        let ratios: Vec<f64> = noisy
            .values()
            .iter()
            .zip(d.values())
            .map(|(a, b)| (a / b).re - 1.0)
            .collect();
        let sd = (ratios.iter().map(|r| r * r).sum::<f64>() / ratios.len() as f64).sqrt();
        assert!((sd - 0.01).abs() < 1e-3, "{sd}");
    }
}
