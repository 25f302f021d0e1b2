use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    EigenNoConvergence { iterations: usize },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("minimum of the branch separation lies on the scan boundary at B0 = {field} T")]
    MinimumOnBoundary { field: f64 },

    #[error("branch tracking failed: {0}")]
    BranchTracking(String),

    #[error("step size underflow at t = {time:e} s (h = {step:e} s)")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("integration tolerance not met: estimated error {error:e} > {tolerance:e}")]
    ToleranceNotMet { error: f64, tolerance: f64 },

    #[error("linear-response regime violated: gamma*b1*Ts = {tip:e}")]
    LinearRegimeViolated { tip: f64 },

    #[error("transient not converged: harmonic change {change:e} > {tolerance:e}")]
    TransientNotConverged { change: f64, tolerance: f64 },

    #[error("harmonic truncation not converged: edge harmonic {edge:e} of carrier > {tolerance:e}")]
    TruncationNotConverged { edge: f64, tolerance: f64 },

    #[error("at grid point (B0 = {field} T, f = {frequency_hz} Hz): {source}")]
    GridPoint {
        field: f64,
        frequency_hz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("fit did not converge after {iterations} iterations")]
    FitNotConverged { iterations: usize },

    #[error("singular Jacobian, non-identifiable combination: {}", format_combination(.combination))]
    SingularJacobian { combination: Vec<(String, f64)> },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_combination(c: &[(String, f64)]) -> String {
    c.iter()
        .map(|(name, w)| format!("{w:+.3}*{name}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {value}"),
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be non-negative and finite, got {value}"),
        })
    }
}
