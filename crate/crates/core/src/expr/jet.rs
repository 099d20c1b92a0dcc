//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries a value, a gradient, and a full Hessian, propagated
//! exactly through expression trees by the chain rule.  Derivatives are
//! analytic, not finite differences; the only error in the output is f64
//! rounding.  The Hessian is written symmetrically (each off-diagonal pair
//! is computed once and mirrored), so `hess(i, j)` and `hess(j, i)` are
//! bitwise equal.

use super::ast::{BinOp, Expr, Func};
use super::EvalError;

/// Value, gradient, and Hessian of a scalar field at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    dim: usize,
    pub value: f64,
    /// `grad[i]` is the partial derivative along coordinate `i` (0-based).
    pub grad: Vec<f64>,
    /// Row-major `dim x dim` Hessian; symmetric by construction.
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(dim: usize, value: f64) -> Jet2 {
        Jet2 {
            dim,
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    pub fn coordinate(dim: usize, axis: usize, value: f64) -> Jet2 {
        let mut jet = Jet2::constant(dim, value);
        jet.grad[axis] = 1.0;
        jet
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim + j]
    }

    fn is_constant(&self) -> bool {
        self.grad.iter().all(|&g| g == 0.0) && self.hess.iter().all(|&h| h == 0.0)
    }

    fn neg(mut self) -> Jet2 {
        self.value = -self.value;
        for g in &mut self.grad {
            *g = -*g;
        }
        for h in &mut self.hess {
            *h = -*h;
        }
        self
    }

    fn add(mut self, rhs: &Jet2) -> Jet2 {
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        for (a, b) in self.hess.iter_mut().zip(&rhs.hess) {
            *a += b;
        }
        self
    }

    fn sub(mut self, rhs: &Jet2) -> Jet2 {
        self.value -= rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a -= b;
        }
        for (a, b) in self.hess.iter_mut().zip(&rhs.hess) {
            *a -= b;
        }
        self
    }

    fn mul(&self, rhs: &Jet2) -> Jet2 {
        let n = self.dim;
        let mut out = Jet2::constant(n, self.value * rhs.value);
        for i in 0..n {
            out.grad[i] = self.grad[i] * rhs.value + self.value * rhs.grad[i];
        }
        for i in 0..n {
            for j in i..n {
                let h = self.hess[i * n + j] * rhs.value
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i]
                    + self.value * rhs.hess[i * n + j];
                out.hess[i * n + j] = h;
                out.hess[j * n + i] = h;
            }
        }
        out
    }

    /// Quotient computed from `q = a / b` via `a = q b`:
    /// `q_i = (a_i - q b_i) / b` and
    /// `q_ij = (a_ij - q_i b_j - q_j b_i - q b_ij) / b`.
    fn div(&self, rhs: &Jet2) -> Jet2 {
        let n = self.dim;
        let mut out = Jet2::constant(n, self.value / rhs.value);
        for i in 0..n {
            out.grad[i] = (self.grad[i] - out.value * rhs.grad[i]) / rhs.value;
        }
        for i in 0..n {
            for j in i..n {
                let h = (self.hess[i * n + j]
                    - out.grad[i] * rhs.grad[j]
                    - out.grad[j] * rhs.grad[i]
                    - out.value * rhs.hess[i * n + j])
                    / rhs.value;
                out.hess[i * n + j] = h;
                out.hess[j * n + i] = h;
            }
        }
        out
    }

    /// Composition with a scalar function given its value and first two
    /// derivatives at `self.value`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let n = self.dim;
        let mut out = Jet2::constant(n, f0);
        for i in 0..n {
            out.grad[i] = f1 * self.grad[i];
        }
        for i in 0..n {
            for j in i..n {
                let h = f2 * self.grad[i] * self.grad[j] + f1 * self.hess[i * n + j];
                out.hess[i * n + j] = h;
                out.hess[j * n + i] = h;
            }
        }
        out
    }
}

pub(super) fn eval(expr: &Expr, point: &[f64]) -> Result<Jet2, EvalError> {
    let jet = eval_inner(expr, point)?;
    if !jet.value.is_finite()
        || jet.grad.iter().any(|g| !g.is_finite())
        || jet.hess.iter().any(|h| !h.is_finite())
    {
        return Err(domain(expr, "non-finite derivative or value"));
    }
    Ok(jet)
}

fn domain(expr: &Expr, reason: impl Into<String>) -> EvalError {
    EvalError::Domain {
        subexpr: expr.to_string(),
        reason: reason.into(),
    }
}

fn eval_inner(expr: &Expr, point: &[f64]) -> Result<Jet2, EvalError> {
    let n = point.len();
    let jet = match expr {
        Expr::Num(v) => Jet2::constant(n, *v),
        Expr::Coord(i) => Jet2::coordinate(n, *i, point[*i]),
        Expr::Neg(a) => eval_inner(a, point)?.neg(),
        Expr::Bin(op, a, b) => {
            let ja = eval_inner(a, point)?;
            let jb = eval_inner(b, point)?;
            match op {
                BinOp::Add => ja.add(&jb),
                BinOp::Sub => ja.sub(&jb),
                BinOp::Mul => ja.mul(&jb),
                BinOp::Div => {
                    if jb.value == 0.0 {
                        return Err(domain(expr, "division by zero"));
                    }
                    ja.div(&jb)
                }
                BinOp::Pow => pow(expr, &ja, &jb)?,
            }
        }
        Expr::Call(func, a) => {
            let ja = eval_inner(a, point)?;
            apply_func(expr, *func, &ja)?
        }
    };
    if !jet.value.is_finite() {
        return Err(domain(expr, "non-finite value"));
    }
    Ok(jet)
}

/// Powers split three ways.  A constant integer exponent uses the integer
/// power rule (valid for negative bases).  A constant non-integer exponent
/// requires a positive base.  A coordinate-dependent exponent rewrites to
/// `exp(b * log a)`; at second order this agrees with the constant paths
/// whenever the exponent's 2-jet is constant.
fn pow(expr: &Expr, base: &Jet2, exponent: &Jet2) -> Result<Jet2, EvalError> {
    if exponent.is_constant() {
        let c = exponent.value;
        let is_int = c.fract() == 0.0 && c.abs() <= 2f64.powi(31);
        if is_int {
            let k = c as i32;
            if base.value == 0.0 && k < 0 {
                return Err(domain(expr, "zero raised to a negative power"));
            }
            let f0 = base.value.powi(k);
            let f1 = if k == 0 {
                0.0
            } else {
                f64::from(k) * base.value.powi(k - 1)
            };
            let coeff = f64::from(k) * f64::from(k - 1);
            let f2 = if coeff == 0.0 {
                0.0
            } else {
                coeff * base.value.powi(k - 2)
            };
            return Ok(base.chain(f0, f1, f2));
        }
        if base.value <= 0.0 {
            return Err(domain(
                expr,
                format!(
                    "non-integer power of non-positive base {}",
                    base.value
                ),
            ));
        }
        let f0 = base.value.powf(c);
        let f1 = c * base.value.powf(c - 1.0);
        let f2 = c * (c - 1.0) * base.value.powf(c - 2.0);
        return Ok(base.chain(f0, f1, f2));
    }
    if base.value <= 0.0 {
        return Err(domain(
            expr,
            format!("variable power of non-positive base {}", base.value),
        ));
    }
    let v = base.value;
    let log_base = base.chain(v.ln(), 1.0 / v, -1.0 / (v * v));
    let prod = exponent.mul(&log_base);
    let e = prod.value.exp();
    Ok(prod.chain(e, e, e))
}

fn apply_func(expr: &Expr, func: Func, a: &Jet2) -> Result<Jet2, EvalError> {
    let v = a.value;
    let jet = match func {
        Func::Sin => a.chain(v.sin(), v.cos(), -v.sin()),
        Func::Cos => a.chain(v.cos(), -v.sin(), -v.cos()),
        Func::Tan => {
            let u = v.tan();
            let d = 1.0 + u * u;
            a.chain(u, d, 2.0 * u * d)
        }
        Func::Exp => {
            let e = v.exp();
            a.chain(e, e, e)
        }
        Func::Log => {
            if v <= 0.0 {
                return Err(domain(expr, format!("log of non-positive value {v}")));
            }
            a.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
        }
        Func::Sqrt => {
            // The derivative of sqrt is singular at 0, so 0 is rejected
            // along with negative arguments.
            if v <= 0.0 {
                return Err(domain(expr, format!("sqrt of non-positive value {v}")));
            }
            let s = v.sqrt();
            a.chain(s, 0.5 / s, -0.25 / (s * v))
        }
        Func::Sinh => a.chain(v.sinh(), v.cosh(), v.sinh()),
        Func::Cosh => a.chain(v.cosh(), v.sinh(), v.cosh()),
        Func::Tanh => {
            let u = v.tanh();
            let d = 1.0 - u * u;
            a.chain(u, d, -2.0 * u * d)
        }
    };
    Ok(jet)
}

/// Plain value evaluation, sharing the domain checks of the jet path.
pub(super) fn eval_value(expr: &Expr, point: &[f64]) -> Result<f64, EvalError> {
    let v = match expr {
        Expr::Num(v) => *v,
        Expr::Coord(i) => point[*i],
        Expr::Neg(a) => -eval_value(a, point)?,
        Expr::Bin(op, a, b) => {
            let va = eval_value(a, point)?;
            let vb = eval_value(b, point)?;
            match op {
                BinOp::Add => va + vb,
                BinOp::Sub => va - vb,
                BinOp::Mul => va * vb,
                BinOp::Div => {
                    if vb == 0.0 {
                        return Err(domain(expr, "division by zero"));
                    }
                    va / vb
                }
                BinOp::Pow => {
                    let is_int = vb.fract() == 0.0 && vb.abs() <= 2f64.powi(31);
                    if is_int {
                        if va == 0.0 && vb < 0.0 {
                            return Err(domain(expr, "zero raised to a negative power"));
                        }
                        va.powi(vb as i32)
                    } else {
                        if va <= 0.0 {
                            return Err(domain(
                                expr,
                                format!("non-integer power of non-positive base {va}"),
                            ));
                        }
                        va.powf(vb)
                    }
                }
            }
        }
        Expr::Call(func, a) => {
            let va = eval_value(a, point)?;
            match func {
                Func::Sin => va.sin(),
                Func::Cos => va.cos(),
                Func::Tan => va.tan(),
                Func::Exp => va.exp(),
                Func::Log => {
                    if va <= 0.0 {
                        return Err(domain(expr, format!("log of non-positive value {va}")));
                    }
                    va.ln()
                }
                Func::Sqrt => {
                    if va < 0.0 {
                        return Err(domain(expr, format!("sqrt of negative value {va}")));
                    }
                    va.sqrt()
                }
                Func::Sinh => va.sinh(),
                Func::Cosh => va.cosh(),
                Func::Tanh => va.tanh(),
            }
        }
    };
    if !v.is_finite() {
        return Err(domain(expr, "non-finite value"));
    }
    Ok(v)
}
