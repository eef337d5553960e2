use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("field has non-finite value at cell {index}")]
    NonFinite { index: usize },
    #[error("field must be strictly positive, found {value} at cell {index}")]
    NonPositiveField { index: usize, value: f64 },
    #[error("invalid exponent p = {0}, need p >= 1")]
    InvalidExponent(f64),
    #[error("helmholtz solve residual {residual:e} above tolerance {tolerance:e}")]
    SolveFailure { residual: f64, tolerance: f64 },
    #[error("mode {max_mode} not resolvable on a grid with n = {n}")]
    UnresolvableMode { max_mode: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("attractiveness must be positive, found {value} at cell {index}")]
    NonPositiveA { index: usize, value: f64 },
    #[error("criminal density must be nonnegative, found {value} at cell {index}")]
    NegativeN { index: usize, value: f64 },
    #[error("criminal density must be positive, found {value} at cell {index}")]
    NonPositiveN { index: usize, value: f64 },
    #[error("attractiveness {value} below sensitivity floor {floor} at cell {index}")]
    FloorViolation { index: usize, value: f64, floor: f64 },
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error("positivity breach: {0}")]
    PositivityBreach(String),
    #[error("entropy integrand negative ({value}) at cell {index}")]
    NegativeEntropyIntegrand { index: usize, value: f64 },
    #[error("field is constant")]
    ConstantField,
    #[error("degenerate field: {0}")]
    DegenerateField(String),
    #[error("entropy regime infeasible: c1 = {c1} <= 0 (sigma = {sigma})")]
    InfeasibleRegime { sigma: f64, c1: f64 },
    #[error("trajectory window is not uniformly spaced")]
    NonUniformWindow,
    #[error("{0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
