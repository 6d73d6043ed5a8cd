use alloc::string::String;

use crate::grid::{Cube, ValidationReport};

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong in the library.
///
/// Variants fall into three families, see [`Error::kind`]: configuration
/// mistakes, domain errors (parameters outside their admissible region,
/// degenerate data) and mathematical precondition failures (the input is not
/// in the class a theorem assumes).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("cube {0} does not fit the grid")]
    InvalidCube(Cube),

    #[error("invalid enumeration mode: {0}")]
    InvalidMode(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid data: {0}")]
    Validation(ValidationReport),

    #[error("parameter constraint violated: {0}")]
    Parameter(String),

    #[error("zero-mass cube {0}")]
    ZeroMassCube(Cube),

    #[error("empty measure: no enumerated cube has positive mass")]
    EmptyMeasure,

    #[error("input not in GR_mu(epsilon): cube {witness} has ratio {ratio} > epsilon = {epsilon}")]
    NotInGr {
        witness: Cube,
        ratio: f64,
        epsilon: f64,
    },

    #[error("input not in A_inf(alpha, beta): cube {witness} has level fraction {fraction} <= alpha = {alpha}")]
    NotInAInfty {
        witness: Cube,
        fraction: f64,
        alpha: f64,
    },

    #[error("covering precondition failed: mu(E) = {set_mass} exceeds rho * mu(Q0) = {bound}")]
    CoveringPrecondition { set_mass: f64, bound: f64 },
}

/// Coarse classification used for exit codes and error routing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration, parameters or input data.
    Usage,
    /// The data is fine but is not in the class the operation assumes.
    Precondition,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NotInGr { .. }
            | Error::NotInAInfty { .. }
            | Error::CoveringPrecondition { .. } => ErrorKind::Precondition,
            _ => ErrorKind::Usage,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
