use crate::symbolic::ExprError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    /// An expression uses variables outside the chart it was supplied for.
    #[error("{0}")]
    Chart(String),
    #[error("fibre hessian rank is not constant: generic rank {generic}, witnesses {witnesses:?}")]
    NonConstantRank { generic: usize, witnesses: Vec<String> },
    #[error("unsupported lagrangian: {0}")]
    Unsupported(String),
    #[error("constraints rejected: {}", .0.join("; "))]
    ConstraintsRejected(Vec<String>),
    #[error("inconsistent system: {0}")]
    Inconsistent(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("state is off the constraint surface: {}", .0.join(", "))]
    OffSurface(Vec<String>),
    #[error("trajectory blew up at t = {t}")]
    BlowUp { t: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("all {0} samples hit a singular denominator")]
    AllSamplesSkipped(usize),
    #[error("system file line {line}: {message}")]
    Spec { line: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Expr(e) if e.is_syntax() => 2,
            Error::Spec { .. } | Error::InvalidArgument(_) | Error::Io(_) => 2,
            Error::Chart(_)
            | Error::NonConstantRank { .. }
            | Error::Unsupported(_)
            | Error::ConstraintsRejected(_)
            | Error::Inconsistent(_) => 3,
            Error::OffSurface(_) => 5,
            _ => 4,
        }
    }
}
