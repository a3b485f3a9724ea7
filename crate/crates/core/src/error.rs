use thiserror::Error;

/// Coarse error classes, used by the command line tool to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Format,
    Invariant,
    Numerical,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Usage => 2,
            Category::Format => 3,
            Category::Invariant => 4,
            Category::Numerical => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Usage => "usage",
            Category::Format => "format",
            Category::Invariant => "invariant",
            Category::Numerical => "numerical-stability",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid axis: {0}")]
    Axis(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported state kind: {0}")]
    UnsupportedKind(String),
    #[error("weights must lie in [0,1] and sum to 1: {0}")]
    Weight(String),
    #[error("argument outside its domain: {0}")]
    Domain(String),
    #[error("polynomial degree {degree} exceeds the limit {max}")]
    Degree { degree: usize, max: usize },
    #[error("invalid potential: {0}")]
    Potential(String),

    #[error("format error: {0}")]
    Format(String),
    #[error("payload length mismatch: expected {expected} bytes, found {actual}")]
    PayloadLength { expected: usize, actual: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("degenerate tomogram: integral {integral:e} at angle index {index}")]
    DegenerateTomogram { index: usize, integral: f64 },
    #[error("marginal varies with the dropped angle by {deviation:e} (tolerance {tolerance:e})")]
    MarginalAngleDependence { deviation: f64, tolerance: f64 },

    #[error("{leak:e} of the mass falls outside the X range at angle index {index}")]
    SupportOverflow { index: usize, leak: f64 },
    #[error("ramp filter normalization error {error:e} exceeds 1e-3")]
    FilterInstability { error: f64 },
    #[error("trace {trace} deviates from 1 by more than 1e-2 before renormalization")]
    TraceCollapse { trace: f64 },
    #[error("per-angle norm deviates by {deviation:e}")]
    NormLoss { deviation: f64 },
    #[error("unstable time step: {0}")]
    Stability(String),
    #[error("CFL violation: {0}")]
    CflViolation(String),
    #[error("momentum tails hold {tail:e} of the norm")]
    GridAliasing { tail: f64 },
}

impl Error {
    pub fn category(&self) -> Category {
        use Error::*;
        match self {
            Axis(_) | GridMismatch(_) | Shape(_) | InvalidArgument(_) | UnsupportedKind(_)
            | Weight(_) | Domain(_) | Degree { .. } | Potential(_) => Category::Usage,
            Format(_) | PayloadLength { .. } | Io(_) => Category::Format,
            Invariant(_) | DegenerateTomogram { .. } | MarginalAngleDependence { .. } => {
                Category::Invariant
            }
            SupportOverflow { .. } | FilterInstability { .. } | TraceCollapse { .. }
            | NormLoss { .. } | Stability(_) | CflViolation(_) | GridAliasing { .. } => {
                Category::Numerical
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
