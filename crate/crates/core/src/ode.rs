//! Explicit Runge–Kutta integration (Dormand–Prince 5(4)).
//!
//! States are flat `f64` slices; complex systems pack (re, im) pairs.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Error-controlled steps bounded by `max_step`.
    Adaptive { rtol: f64, atol: f64 },
    /// Constant steps of `max_step` (the last step into each output time is shortened).
    /// When `tolerance` is set the final embedded error estimate must stay below it.
    Fixed { tolerance: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub control: StepControl,
    pub max_step: f64,
    pub min_step: f64,
}

impl IntegratorConfig {
    pub fn adaptive(rtol: f64, atol: f64, max_step: f64) -> Self {
        Self {
            control: StepControl::Adaptive { rtol, atol },
            max_step,
            min_step: max_step * 1e-12,
        }
    }

    pub fn fixed(step: f64) -> Self {
        Self {
            control: StepControl::Fixed { tolerance: None },
            max_step: step,
            min_step: step * 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Scaled error estimate of the last step (≤ 1 means within tolerance).
    pub last_error: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Workspace {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
        }
    }
}

/// Integrate `dy/dt = f(t, y)` from `t0`, reporting the state at each of
/// `output_times` (strictly increasing, all > `t0`) through `observer`.
pub fn integrate<F, O>(
    f: F,
    t0: f64,
    y0: &[f64],
    output_times: &[f64],
    config: &IntegratorConfig,
    mut observer: O,
) -> Result<IntegrationStats>
where
    F: Fn(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]),
{
    if !(config.max_step > 0.0) || !config.max_step.is_finite() {
        return Err(Error::InvalidParameter {
            name: "max_step",
            reason: format!("must be positive, got {}", config.max_step),
        });
    }
    let mut ws = Workspace::new(y0.len());
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut h = config.max_step;
    let mut stats = IntegrationStats::default();
    let mut have_fsal = false;

    for &t_out in output_times {
        if !(t_out > t) {
            return Err(Error::InvalidParameter {
                name: "output_times",
                reason: "must be strictly increasing and after t0".into(),
            });
        }
        while t < t_out {
            let remaining = t_out - t;
            let land = h >= remaining * (1.0 - 1e-12);
            let step = if land { remaining } else { h.min(config.max_step) };
            if !have_fsal {
                f(t, &y, &mut ws.k[0]);
                have_fsal = true;
            }
            let err = dopri_step(&f, t, &y, step, &mut ws);
            match config.control {
                StepControl::Fixed { tolerance } => {
                    stats.last_error = err;
                    if let Some(tol) = tolerance {
                        if land && t_out == *output_times.last().unwrap() && err > tol {
                            return Err(Error::ToleranceNotMet { error: err, tolerance: tol });
                        }
                    }
                    accept(&mut y, &mut t, step, land, t_out, &mut ws);
                    stats.accepted += 1;
                    h = config.max_step;
                }
                StepControl::Adaptive { rtol, atol } => {
                    let scaled = scaled_error(&y, &ws, rtol, atol);
                    if scaled <= 1.0 {
                        stats.last_error = scaled;
                        accept(&mut y, &mut t, step, land, t_out, &mut ws);
                        stats.accepted += 1;
                        let factor = if scaled == 0.0 { 5.0 } else { (0.9 * scaled.powf(-0.2)).clamp(0.2, 5.0) };
                        // keep the pre-landing step size when landing truncated the step
                        h = (if land { h.max(step) } else { step } * factor).min(config.max_step);
                    } else {
                        stats.rejected += 1;
                        h = step * (0.9 * scaled.powf(-0.2)).clamp(0.1, 0.9);
                        if h < config.min_step {
                            return Err(Error::StepSizeUnderflow { time: t, step: h });
                        }
                    }
                }
            }
        }
        observer(t, &y);
    }
    Ok(stats)
}

fn accept(y: &mut Vec<f64>, t: &mut f64, step: f64, land: bool, t_out: f64, ws: &mut Workspace) {
    std::mem::swap(y, &mut ws.y_new);
    *t = if land { t_out } else { *t + step };
    // first-same-as-last: k7 at the new point becomes k1
    let (first, rest) = ws.k.split_at_mut(1);
    first[0].copy_from_slice(&rest[5]);
}

fn scaled_error(y: &[f64], ws: &Workspace, rtol: f64, atol: f64) -> f64 {
    let n = y.len();
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let sc = atol + rtol * y[i].abs().max(ws.y_new[i].abs());
        let r = ws.tmp[i] / sc;
        acc += r * r;
    }
    (acc / n as f64).sqrt()
}

/// One DP5 step; leaves the 5th-order solution in `ws.y_new`, the raw
/// error vector in `ws.tmp` and returns its RMS norm.
fn dopri_step<F>(f: &F, t: f64, y: &[f64], h: f64, ws: &mut Workspace) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    for s in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, a) in A[s].iter().enumerate().take(s) {
                acc += a * ws.k[j][i];
            }
            ws.tmp[i] = y[i] + h * acc;
        }
        f(t + C[s] * h, &ws.tmp, &mut ws.k[s]);
    }
    // stage 7 was evaluated at the 5th-order point, which equals y + h*sum(A[6]*k)
    for i in 0..n {
        let mut acc = 0.0;
        for (j, a) in A[6].iter().enumerate() {
            acc += a * ws.k[j][i];
        }
        ws.y_new[i] = y[i] + h * acc;
    }
    let mut rms = 0.0;
    for i in 0..n {
        let mut e = 0.0;
        for (j, c) in E.iter().enumerate() {
            e += c * ws.k[j][i];
        }
        ws.tmp[i] = h * e;
        rms += ws.tmp[i] * ws.tmp[i];
    }
    if n == 0 {
        0.0
    } else {
        (rms / n as f64).sqrt()
    }
}
