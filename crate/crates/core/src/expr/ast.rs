//! Expression trees for coordinate scalar fields.

use std::fmt;

/// Unary function heads admitted by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "tan" => Some(Func::Tan),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "sinh" => Some(Func::Sinh),
            "cosh" => Some(Func::Cosh),
            "tanh" => Some(Func::Tanh),
            _ => None,
        }
    }
}

/// Binary operators. `Pow` is right-associative and binds tightest,
/// then unary minus, then `Mul`/`Div`, then `Add`/`Sub`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// A parsed expression over coordinates `t1..tn`.
///
/// Coordinate indices are stored 0-based; the textual form is 1-based
/// (`Coord(0)` prints as `t1`).  `pi` and `e` are folded to numeric
/// literals during parsing.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    /// Printing precedence. Anything below the context's minimum gets
    /// parenthesized, which makes `print` ∘ `parse` the identity on trees
    /// up to negative-literal/unary-minus equivalence.
    fn prec(&self) -> u8 {
        match self {
            // A negative literal prints with a leading '-', so it binds
            // like unary minus, not like an atom.
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Num(_) | Expr::Coord(_) | Expr::Call(..) => 5,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Bin(BinOp::Mul, ..) | Expr::Bin(BinOp::Div, ..) => 2,
            Expr::Bin(BinOp::Add, ..) | Expr::Bin(BinOp::Sub, ..) => 1,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.prec() < min_prec {
            write!(f, "(")?;
            self.write(f, 0)?;
            return write!(f, ")");
        }
        match self {
            // Integral values print without a trailing `.0`; everything
            // else uses {:?}, the shortest digit string that round-trips
            // the exact f64.  Either way emitted text re-parses to the
            // same value.
            Expr::Num(v) if v.fract() == 0.0 && v.abs() < 9.0e15 => {
                write!(f, "{}", *v as i64)
            }
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Coord(i) => write!(f, "t{}", i + 1),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write(f, 3)
            }
            Expr::Bin(op, a, b) => {
                let (sym, lp, rp) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => (" * ", 2, 3),
                    BinOp::Div => (" / ", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                a.write(f, lp)?;
                write!(f, "{sym}")?;
                b.write(f, rp)
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}
