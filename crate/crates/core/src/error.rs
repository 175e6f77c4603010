use std::path::PathBuf;

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent experiment configuration.
    Config,
    /// A numerical precondition (resolvability, CFL, admissibility) does not hold.
    Numerical,
    /// Filesystem or serialization failure.
    Io,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("component count mismatch: expected {expected}, found {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("under-resolved kernel: delta = {delta} is below the floor 8h = {floor}")]
    UnderResolvedKernel { delta: f64, floor: f64 },
    #[error("support exceeds torus: delta = {delta} > 1/4")]
    SupportExceedsTorus { delta: f64 },
    #[error("cost guard exceeded: {points} grid points exceeds the direct-quadrature limit {limit}")]
    CostGuard { points: usize, limit: usize },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("field is not in L^{p}: {reason}")]
    NotInLp { p: f64, reason: String },
    #[error("CFL violation: dt = {dt} exceeds the stable step {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::UnknownPreset(_) => ErrorClass::Config,
            Error::Output { .. } | Error::Io(_) | Error::Json(_) | Error::Format(_) => {
                ErrorClass::Io
            }
            _ => ErrorClass::Numerical,
        }
    }

    /// Exit code for the command-line front end: 2 for configuration
    /// problems, 3 for numerical preconditions. I/O failures share 2.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Config | ErrorClass::Io => 2,
            ErrorClass::Numerical => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
