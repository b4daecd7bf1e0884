use thiserror::Error;

/// Errors produced by construction, validation and the iterative solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("roughness profile must be strictly positive, got h_min = {h_min}")]
    NonPositiveHeight { h_min: f64 },

    #[error("sampled profile grid is empty or inconsistent: {reason}")]
    BadSampledGrid { reason: String },

    #[error("grid too coarse: {what}")]
    GridTooCoarse { what: String },

    #[error("{what} = {value} out of range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error(
        "{solver} did not converge: residual {residual:.3e} after {iterations} iterations (target {tol:.3e})"
    )]
    NoConvergence {
        solver: &'static str,
        residual: f64,
        iterations: usize,
        tol: f64,
    },

    #[error("mobility is not symmetric positive definite: [[{a11:.6e}, {a12:.6e}], [{a21:.6e}, {a22:.6e}]]")]
    NotSpd {
        a11: f64,
        a12: f64,
        a21: f64,
        a22: f64,
    },

    #[error("cell box too small: h_max = {h_max} exceeds grid box height {box_height}")]
    BoxTooSmall { h_max: f64, box_height: f64 },

    #[error("profile is not separable in direction {direction}")]
    NotSeparable { direction: usize },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown verification suite `{name}`; available: {available}")]
    UnknownSuite { name: String, available: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}
