use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "quadrature did not reach abs_tol={abs_tol:e} within {max_subdivisions} subdivisions (X={x}, Z={z}, m={m})"
    )]
    QuadratureNotConverged {
        abs_tol: f64,
        max_subdivisions: usize,
        x: f64,
        z: f64,
        m: usize,
    },

    #[error("kernel tail at the end of the grid is {contribution:e}, above the allowed {limit:e}; enlarge the domain")]
    TailNotNegligible { contribution: f64, limit: f64 },

    #[error("grid mismatch: operator has {expected} points over length {expected_length}, profile has {found} over {found_length}")]
    GridMismatch {
        expected: usize,
        expected_length: f64,
        found: usize,
        found_length: f64,
    },

    #[error("compatibility condition d^{order}f(0)=0 violated: trace {trace:e} exceeds {tol:e}")]
    CompatibilityViolated { order: usize, trace: f64, tol: f64 },

    #[error("Picard iteration diverged: iterate sup-norm {sup:e} exceeds {limit:e}")]
    PicardDiverged { sup: f64, limit: f64 },

    #[error("F(a)={value:e} is below the floor {floor:e}; G is undefined")]
    DegenerateF { value: f64, floor: f64 },

    #[error("beta={0} is outside the admissible range")]
    InvalidBeta(f64),

    #[error("sample index {index} out of range for a trace of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("time {t:e} is below the minimum resolvable time {t_min:e}; refine the grid instead")]
    TimeTooSmall { t: f64, t_min: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
