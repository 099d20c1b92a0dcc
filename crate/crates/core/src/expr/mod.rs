//! Coordinate expression DSL.
//!
//! Metric and cubic-form entries are plain-text expressions in the chart
//! coordinates `t1..tn`.  The surface is small on purpose: arithmetic,
//! powers, and a fixed set of analytic functions, so that every field can
//! be differentiated twice exactly by forward-mode jets.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := NUMBER | COORD | FUNC '(' expr ')' | '(' expr ')' | 'pi' | 'e'
//! FUNC   := sin cos tan exp log sqrt sinh cosh tanh
//! COORD  := 't' [1-9] [0-9]*
//! ```
//!
//! `NUMBER` is a decimal literal with optional exponent.  `^` binds
//! tightest and associates right, then unary minus, then `*` `/`, then
//! `+` `-`.  Whitespace is insignificant and `#` starts a line comment.
//!
//! ```
//! use igeo_core::expr::ScalarField;
//!
//! let f = ScalarField::parse("1 / t2^2", 2).unwrap();
//! let jet = f.eval_jet2(&[0.0, 2.0]).unwrap();
//! assert_eq!(jet.value, 0.25);
//! ```

mod ast;
mod deriv;
mod jet;
mod lexer;
mod parser;

pub use ast::{BinOp, Expr, Func};
pub use jet::Jet2;

use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("coordinate t{index} at byte {offset} exceeds dimension {dim}")]
    CoordOutOfRange {
        offset: usize,
        index: usize,
        dim: usize,
    },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: String },
}

/// A parsed scalar field on an `dim`-dimensional chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    dim: usize,
    root: Expr,
}

impl ScalarField {
    /// Parses `src` against the grammar above.  Coordinates above `dim`
    /// are rejected here, not at evaluation time.
    pub fn parse(src: &str, dim: usize) -> Result<ScalarField, ParseError> {
        let root = parser::parse_expr_str(src, dim)?;
        Ok(ScalarField { dim, root })
    }

    /// Wraps an already-built tree.  The caller is responsible for keeping
    /// coordinate indices below `dim`.
    pub fn from_expr(dim: usize, root: Expr) -> ScalarField {
        ScalarField { dim, root }
    }

    pub fn zero(dim: usize) -> ScalarField {
        ScalarField {
            dim,
            root: Expr::Num(0.0),
        }
    }

    pub fn constant(dim: usize, v: f64) -> ScalarField {
        ScalarField {
            dim,
            root: Expr::Num(v),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> &Expr {
        &self.root
    }

    /// Structurally zero (the literal `0`); used by writers to omit
    /// entries whose absence means zero.
    pub fn is_zero(&self) -> bool {
        matches!(self.root, Expr::Num(v) if v == 0.0)
    }

    /// Value, gradient, and Hessian at `point`, all exact up to rounding.
    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        assert_eq!(point.len(), self.dim, "point dimension mismatch");
        jet::eval(&self.root, point)
    }

    /// Value only, with the same domain checks as the jet path.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        assert_eq!(point.len(), self.dim, "point dimension mismatch");
        jet::eval_value(&self.root, point)
    }

    /// Symbolic partial derivative along the 1-based coordinate `coord`.
    pub fn partial(&self, coord: usize) -> ScalarField {
        assert!(
            coord >= 1 && coord <= self.dim,
            "coordinate {coord} out of range 1..={}",
            self.dim
        );
        ScalarField {
            dim: self.dim,
            root: deriv::partial(&self.root, coord - 1),
        }
    }

    /// Constant folding and unit/zero elimination; evaluation-equivalent
    /// on the field's domain.
    pub fn simplified(&self) -> ScalarField {
        ScalarField {
            dim: self.dim,
            root: deriv::simplify(&self.root),
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Tree combinators used by the family builders; all apply the same light
/// simplification as [`ScalarField::simplified`].
pub mod build {
    use super::ast::Expr;
    use super::deriv;

    pub fn add(a: Expr, b: Expr) -> Expr {
        deriv::add(a, b)
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        deriv::sub(a, b)
    }
    pub fn mul(a: Expr, b: Expr) -> Expr {
        deriv::mul(a, b)
    }
    pub fn div(a: Expr, b: Expr) -> Expr {
        deriv::div(a, b)
    }
    pub fn neg(a: Expr) -> Expr {
        deriv::neg(a)
    }
    pub fn pow(a: Expr, b: Expr) -> Expr {
        deriv::pow(a, b)
    }
    pub fn call(func: super::Func, a: Expr) -> Expr {
        deriv::call(func, a)
    }
}
