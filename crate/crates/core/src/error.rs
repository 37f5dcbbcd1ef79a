use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `H2(z) + C0` must stay positive for the square-root auxiliary variable.
    #[error("SAV reformulation infeasible: H2 + C0 = {radicand:e} is not positive")]
    ReformulationInfeasible { radicand: f64 },

    #[error("exponent overflow: |H2/C0| = {exponent:e} exceeds {limit}")]
    Overflow { exponent: f64, limit: f64 },

    #[error("singular linear operator at Fourier mode {mode}")]
    SingularOperator { mode: usize },

    #[error("degenerate SAV step: denominator {denominator:e}")]
    DegenerateStep { denominator: f64 },

    #[error(
        "fixed-point iteration did not converge in {iterations} sweeps (residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
