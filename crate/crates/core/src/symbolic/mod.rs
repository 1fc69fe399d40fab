//! Exact symbolic algebra: multivariate rational functions over a fixed
//! variable registry, a parser and printer, and linear algebra on top.

pub mod compiled;
mod expr;
pub mod gcd;
pub mod matrix;
mod parse;
pub mod poly;
mod registry;

pub use expr::{sum_over, Expr};
pub use matrix::{ExprMatrix, Solution};
pub use parse::parse;
pub use poly::{rat, Monomial, Poly, Rational};
pub use registry::{is_identifier, Role, VariableRegistry};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("division by the zero expression")]
    DivisionByZero,
    #[error("substitution produced a zero denominator")]
    ZeroDenominator,
    #[error("evaluation hit a pole (|denominator| = {magnitude:e})")]
    Pole { magnitude: f64 },
    #[error("no value assigned to variable `{0}`")]
    Unassigned(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
}

impl ExprError {
    /// Errors caused by the input text rather than by evaluation.
    pub fn is_syntax(&self) -> bool {
        matches!(
            self,
            ExprError::Syntax { .. }
                | ExprError::UnknownVariable(_)
                | ExprError::InvalidName(_)
                | ExprError::DuplicateName(_)
                | ExprError::DivisionByZero
        )
    }
}
