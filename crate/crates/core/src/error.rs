use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("function has non-zero mean {0:e}")]
    NonZeroMean(f64),
    #[error("value out of range: {0}")]
    RangeError(String),
    #[error("degree {degree} does not fit a grid of {m} points")]
    DegreeOverflow { degree: usize, m: usize },
    #[error("function is not analytic: coefficient {index} has modulus {modulus:e}")]
    NotAnalytic { index: i64, modulus: f64 },
    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("conditional expectation of an arity-0 function")]
    ArityZero,
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("martingale is not Hardy at step {step}")]
    NotHardy { step: usize },
    #[error("martingale is not dyadic at step {step}")]
    NotDyadic { step: usize },
    #[error("frequency ladder needs a grid of at least {required_m} points")]
    ResolutionExceeded { required_m: usize },
    #[error("frequency {0} is outside the lacunary set")]
    UnsupportedFrequency(i64),
    #[error("invalid grid size {0}: must be a power of two and at least 4")]
    InvalidGrid(usize),
    #[error("depth {depth} exceeds the cap {cap}")]
    DepthCap { depth: usize, cap: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
