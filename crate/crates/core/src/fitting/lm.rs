//! Bounded Levenberg–Marquardt with forward-difference Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub ftol: f64,
    /// Stop when every step component is below this fraction of the parameter.
    pub xtol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Reciprocal condition number of the column-scaled Jacobian below which
    /// the problem is declared non-identifiable.
    pub singular_threshold: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            ftol: 1e-12,
            xtol: 1e-10,
            fd_step: 1e-7,
            singular_threshold: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    NoFreeParameters,
    ZeroResidual,
    /// Relative cost decrease below `ftol`.
    CostConverged,
    /// Step below `xtol`.
    StepConverged,
    /// No damping level yields a lower cost.
    NoImprovement,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::NoFreeParameters => "no free parameters",
            Termination::ZeroResidual => "zero residual",
            Termination::CostConverged => "cost converged",
            Termination::StepConverged => "step converged",
            Termination::NoImprovement => "no further improvement",
        }
    }
}

pub(crate) struct LmOutput {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
}

fn cost(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

struct Jacobian {
    j: DMatrix<f64>,
    /// Column norms.
    scale: Vec<f64>,
}

fn jacobian<F>(
    f: &F,
    x: &[f64],
    r: &[f64],
    upper: &[f64],
    typical: &[f64],
    names: &[String],
    settings: &LmSettings,
) -> Result<Jacobian>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let (m, n) = (r.len(), x.len());
    let mut j = DMatrix::zeros(m, n);
    for k in 0..n {
        let mut h = settings.fd_step * x[k].abs().max(typical[k]);
        if x[k] + h > upper[k] {
            h = -h;
        }
        let mut xp = x.to_vec();
        xp[k] += h;
        let rp = f(&xp)?;
        for i in 0..m {
            j[(i, k)] = (rp[i] - r[i]) / h;
        }
    }
    let scale: Vec<f64> = (0..n).map(|k| j.column(k).norm()).collect();
    let mut js = j.clone();
    for k in 0..n {
        if !(scale[k] > 0.0) {
            return Err(Error::SingularJacobian {
                combination: vec![(names[k].clone(), 1.0)],
            });
        }
        js.column_mut(k).scale_mut(1.0 / scale[k]);
    }
    let svd = js.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (kmin, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, &s)| if s < acc.1 { (k, s) } else { acc });
    let smax = svd.singular_values.max();
    if !(smin > settings.singular_threshold * smax) {
        let combination = names
            .iter()
            .enumerate()
            .map(|(k, name)| (name.clone(), v_t[(kmin, k)]))
            .filter(|(_, c)| c.abs() > 1e-6)
            .collect();
        return Err(Error::SingularJacobian { combination });
    }
    Ok(Jacobian { j, scale })
}

/// Minimize `½‖f(x)‖²` subject to `lower ≤ x ≤ upper`. Every accepted step
/// strictly lowers the cost. Steps use Marquardt's diagonal scaling, so the
/// iteration does not depend on parameter units.
#[allow(clippy::too_many_arguments)]
pub(crate) fn minimize<F>(
    f: F,
    x0: Vec<f64>,
    r0: Vec<f64>,
    lower: &[f64],
    upper: &[f64],
    typical: &[f64],
    names: &[String],
    settings: &LmSettings,
) -> Result<LmOutput>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let mut x = x0;
    let mut r = r0;
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut termination = None;
    let mut iterations = 0;

    while termination.is_none() {
        if c == 0.0 {
            termination = Some(Termination::ZeroResidual);
            break;
        }
        if iterations == settings.max_iterations {
            return Err(Error::FitNotConverged { iterations });
        }
        iterations += 1;
        let jac = jacobian(&f, &x, &r, upper, typical, names, settings)?;
        let a = jac.j.tr_mul(&jac.j);
        let g = jac.j.tr_mul(&DVector::from_column_slice(&r));
        loop {
            let mut damped = a.clone();
            for k in 0..n {
                damped[(k, k)] += lambda * a[(k, k)];
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let trial: Vec<f64> = (0..n).map(|k| (x[k] + delta[k]).clamp(lower[k], upper[k])).collect();
            let moved = (0..n)
                .map(|k| (trial[k] - x[k]).abs() / x[k].abs().max(typical[k]))
                .fold(0.0, f64::max);
            if moved == 0.0 {
                termination = Some(Termination::StepConverged);
                break;
            }
            let accepted = match f(&trial) {
                Ok(rt) => {
                    let ct = cost(&rt);
                    (ct < c).then_some((rt, ct))
                }
                Err(_) => None,
            };
            match accepted {
                Some((rt, ct)) => {
                    let decrease = (c - ct) / c;
                    x = trial;
                    r = rt;
                    c = ct;
                    lambda = (lambda / 3.0).max(1e-12);
                    if decrease < settings.ftol {
                        termination = Some(Termination::CostConverged);
                    } else if moved < settings.xtol {
                        termination = Some(Termination::StepConverged);
                    }
                    break;
                }
                None => {
                    lambda *= 4.0;
                    if lambda > 1e20 {
                        termination = Some(Termination::NoImprovement);
                        break;
                    }
                }
            }
        }
    }

    let std_errors = if c == 0.0 {
        vec![0.0; n]
    } else {
        let jac = jacobian(&f, &x, &r, upper, typical, names, settings)?;
        let m = r.len();
        let dof = m.saturating_sub(n).max(1) as f64;
        let s2 = 2.0 * c / dof;
        let mut js = jac.j.clone();
        for k in 0..n {
            js.column_mut(k).scale_mut(1.0 / jac.scale[k]);
        }
        let inv = js
            .tr_mul(&js)
            .try_inverse()
            .ok_or_else(|| Error::Singular("normal matrix at the solution".into()))?;
        (0..n).map(|k| (s2 * inv[(k, k)]).sqrt() / jac.scale[k]).collect()
    };
    Ok(LmOutput {
        x,
        residuals: r,
        std_errors,
        iterations,
        termination: termination.expect("loop exits with a reason"),
    })
}
