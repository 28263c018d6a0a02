use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("state is not normalized: |norm² - 1| = {deviation:e}")]
    NotNormalized { deviation: f64 },

    #[error("profile has zero norm on its grid")]
    ZeroNorm,

    #[error("profile sample at x = {x} is not finite")]
    NonFinite { x: f64 },

    #[error("quadrature grid of {grid} points undersamples a support of half-width {n_max} (need >= {required})")]
    Undersampled {
        grid: usize,
        n_max: u64,
        required: usize,
    },

    #[error("outcome density integrates to {total} (drift {drift:e} exceeds 1e-6)")]
    DensityDrift { total: f64, drift: f64 },

    #[error("profile has mass {magnitude:e} at the domain boundary; derivative quadrature is invalid")]
    BoundaryMass { magnitude: f64 },

    #[error("constraint is inactive at zero multiplier: (N²)_av = {value} <= {target}; enlarge the truncation window")]
    InactiveConstraint { value: f64, target: f64 },

    #[error("multiplier search failed to bracket the constraint after {iterations} doublings")]
    BracketFailure { iterations: usize },

    #[error("{what} did not converge within {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical procedure, as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DensityDrift { .. }
                | Error::InactiveConstraint { .. }
                | Error::BracketFailure { .. }
                | Error::NoConvergence { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
