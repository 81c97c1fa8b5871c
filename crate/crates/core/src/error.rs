use thiserror::Error;

use crate::lasso::Solution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure classes, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Parse,
    Numeric,
    DegenerateData,
}

#[derive(Debug, Error)]
pub enum Error {
    /// Column labels are 1-based.
    #[error("column {column} has zero variance")]
    ConstantColumn { column: usize },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("column {column} is not standardized (sum {sum:e}, sum of squares {sum_sq:e})")]
    NotStandardized { column: usize, sum: f64, sum_sq: f64 },
    #[error("need at least {required} samples, got {n}")]
    TooFewSamples { n: usize, required: usize },
    #[error("degenerate tuning grid: r_max = {r_max}")]
    DegenerateGrid { r_max: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("residual is exactly zero")]
    ZeroResidual,
    #[error("residual is orthogonal to every column")]
    ZeroCorrelation,
    #[error(
        "solver hit the iteration limit ({} iterations, best gap {:e})",
        .0.trace.iterations,
        .0.trace.final_gap
    )]
    MaxItersExceeded(Box<Solution>),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("signal X*beta vanished before rescaling")]
    DegenerateSignal,
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("node {node}: {source}")]
    Node {
        node: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: duplicate feature index {index}")]
    DuplicateIndex { line: usize, index: usize },
    #[error("line {line}: non-finite value")]
    NonFiniteValue { line: usize },
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRows { line: usize, expected: usize, found: usize },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::UnknownMethod(_) => ErrorKind::Usage,
            Error::Parse { .. }
            | Error::DuplicateIndex { .. }
            | Error::NonFiniteValue { .. }
            | Error::RaggedRows { .. }
            | Error::MissingColumn(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorKind::Parse,
            Error::DimensionMismatch { .. }
            | Error::ZeroResidual
            | Error::ZeroCorrelation
            | Error::MaxItersExceeded(_)
            | Error::IndexOutOfRange { .. } => ErrorKind::Numeric,
            Error::ConstantColumn { .. }
            | Error::NonFiniteInput
            | Error::NotStandardized { .. }
            | Error::TooFewSamples { .. }
            | Error::DegenerateGrid { .. }
            | Error::DegenerateSignal => ErrorKind::DegenerateData,
            Error::Node { source, .. } => source.kind(),
        }
    }

    /// Process exit code: 2 usage, 3 parse, 4 numeric/solver, 5 degenerate data.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Usage => 2,
            ErrorKind::Parse => 3,
            ErrorKind::Numeric => 4,
            ErrorKind::DegenerateData => 5,
        }
    }
}
