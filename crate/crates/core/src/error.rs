use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("sample error: non-finite value {value} at x = {x}")]
    SampleError { x: f64, value: f64 },
    #[error("fractional order s = {0} outside (0, 1)")]
    InvalidOrder(f64),
    #[error("Hölder exponent {0} outside (0, 1]")]
    InvalidExponent(f64),
    #[error("resolvent shift sigma = {0} must be positive")]
    InvalidShift(f64),
    #[error("quadrature tolerance {0:e} unreachable")]
    ToleranceUnreachable(f64),
    #[error("grid mismatch: field has n = {field}, operator expects n = {expected}")]
    GridMismatch { field: usize, expected: usize },

    #[error("positivity violated: min u = {min_u:e}")]
    PositivityViolated { min_u: f64 },
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterExceeded { iterations: usize, residual: f64 },
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("fixed-point iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("invalid sub/supersolution pair: eta exceeds beta by {excess:e}")]
    InvalidPair { excess: f64 },
    #[error("invalid problem data: {0}")]
    InvalidProblem(String),

    #[error("continuation seed failed: {0}")]
    SeedFailed(String),
    #[error("arclength step collapsed below {0:e}")]
    StepCollapse(f64),
    #[error("branch contains no fold")]
    NoFoldInBranch,
    #[error("no sign change bracketing a root")]
    NoBracket,
    #[error("homotopy stalled at lambda = {lambda}")]
    HomotopyStall { lambda: f64 },

    #[error("window growth exceeded (is g coercive?)")]
    WindowGrowthExceeded,
    #[error("drift c > 0 required")]
    DriftRequired,
    #[error("beta must be strictly positive (min {0:e})")]
    InvalidBeta(f64),
    #[error("root bracketing failed: phi has no sign change")]
    RootBracketFailed,
    #[error("missing certificate constant: {0}")]
    MissingCertificate(&'static str),

    #[error("expression error: {0}")]
    Expr(String),
    #[error("schema error at {path}: {message}")]
    SchemaError { path: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
