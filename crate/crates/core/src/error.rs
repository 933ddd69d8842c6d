use thiserror::Error;

use crate::expr::JetExpr;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("undeclared identifier `{name}` at {pos}")]
    Undeclared { name: String, pos: usize },

    #[error("zero denominator")]
    ZeroDenominator,

    #[error("expression contains a nonlocal (fiber) coordinate")]
    NonlocalCoordinate,

    #[error("invalid variable declarations: {0}")]
    InvalidContext(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("shape mismatch: expected {expected} components, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("expression has no differential-polynomial antiderivative")]
    NotExact { integrand: JetExpr },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("ansatz has {size} monomials, limit is {limit}")]
    AnsatzTooLarge { size: usize, limit: usize },

    #[error("fiber coordinate sets do not match: {0}")]
    MismatchedFibers(String),

    #[error("malformed input file, line {line}: {msg}")]
    File { line: usize, msg: String },
}

impl Error {
    /// Short machine-readable tag.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::Undeclared { .. } => "undeclared",
            Error::ZeroDenominator => "zero-denominator",
            Error::NonlocalCoordinate => "nonlocal-coordinate",
            Error::InvalidContext(_) => "invalid-context",
            Error::InvalidSystem(_) => "invalid-system",
            Error::ShapeMismatch { .. } => "shape-mismatch",
            Error::NotExact { .. } => "not-exact",
            Error::Unsupported(_) => "unsupported",
            Error::AnsatzTooLarge { .. } => "ansatz-too-large",
            Error::MismatchedFibers(_) => "mismatched-fibers",
            Error::File { .. } => "file",
        }
    }

    /// Errors that stem from malformed input rather than a mathematical outcome.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::Undeclared { .. }
                | Error::InvalidContext(_)
                | Error::InvalidSystem(_)
                | Error::File { .. }
                | Error::ShapeMismatch { .. }
                | Error::MismatchedFibers(_)
        )
    }
}
