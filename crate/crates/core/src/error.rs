use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("radius {0} outside [0, 1)")]
    Domain(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e}, error {error:e}) within {evals} evaluations")]
    QuadratureFailure {
        tol: f64,
        estimate: f64,
        error: f64,
        evals: usize,
    },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("value underflows the representable range (ln value {0})")]
    Underflow(f64),

    #[error("value overflows the representable range (ln value {0})")]
    Overflow(f64),

    #[error("series did not converge within {terms} terms (|t| = {modulus})")]
    NonConvergence { terms: usize, modulus: f64 },

    #[error("point outside the mesh: {0}")]
    Resolution(String),

    #[error("tabulated weight: {0}")]
    Table(String),
}

impl Error {
    /// True for errors caused by running out of an evaluation budget.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure { .. } | Error::NonConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
