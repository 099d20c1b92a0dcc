//! Symbolic differentiation and light tree simplification.
//!
//! The family builders materialize metric and cubic-form entries as
//! expression trees (Hessians of potentials, conformal rescalings, and so
//! on), so derivatives here are trees, not numbers.  Simplification is
//! deliberately shallow: constant folding and unit/zero elimination, enough
//! to keep emitted files readable without attempting symbolic algebra.

use super::ast::{BinOp, Expr, Func};

/// `d expr / d t_axis` (0-based axis), built with the simplifying
/// constructors below.
pub(super) fn partial(expr: &Expr, axis: usize) -> Expr {
    match expr {
        Expr::Num(_) => Expr::Num(0.0),
        Expr::Coord(i) => Expr::Num(if *i == axis { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(partial(a, axis)),
        Expr::Bin(BinOp::Add, a, b) => add(partial(a, axis), partial(b, axis)),
        Expr::Bin(BinOp::Sub, a, b) => sub(partial(a, axis), partial(b, axis)),
        Expr::Bin(BinOp::Mul, a, b) => add(
            mul(partial(a, axis), (**b).clone()),
            mul((**a).clone(), partial(b, axis)),
        ),
        Expr::Bin(BinOp::Div, a, b) => div(
            sub(
                mul(partial(a, axis), (**b).clone()),
                mul((**a).clone(), partial(b, axis)),
            ),
            pow((**b).clone(), Expr::Num(2.0)),
        ),
        Expr::Bin(BinOp::Pow, a, b) => match &**b {
            // d(a^c) = c * a^(c-1) * da
            Expr::Num(c) => mul(
                mul(Expr::Num(*c), pow((**a).clone(), Expr::Num(c - 1.0))),
                partial(a, axis),
            ),
            // d(a^b) = a^b * (db * log a + b * da / a)
            _ => mul(
                expr.clone(),
                add(
                    mul(partial(b, axis), call(Func::Log, (**a).clone())),
                    div(mul((**b).clone(), partial(a, axis)), (**a).clone()),
                ),
            ),
        },
        Expr::Call(func, a) => {
            let da = partial(a, axis);
            let outer = match func {
                Func::Sin => call(Func::Cos, (**a).clone()),
                Func::Cos => neg(call(Func::Sin, (**a).clone())),
                Func::Tan => div(
                    Expr::Num(1.0),
                    pow(call(Func::Cos, (**a).clone()), Expr::Num(2.0)),
                ),
                Func::Exp => expr.clone(),
                Func::Log => div(Expr::Num(1.0), (**a).clone()),
                Func::Sqrt => div(Expr::Num(0.5), expr.clone()),
                Func::Sinh => call(Func::Cosh, (**a).clone()),
                Func::Cosh => call(Func::Sinh, (**a).clone()),
                Func::Tanh => div(
                    Expr::Num(1.0),
                    pow(call(Func::Cosh, (**a).clone()), Expr::Num(2.0)),
                ),
            };
            mul(outer, da)
        }
    }
}

fn num_of(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        _ => None,
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 1.0)
}

pub(super) fn add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return b;
    }
    if is_zero(&b) {
        return a;
    }
    if let (Some(x), Some(y)) = (num_of(&a), num_of(&b)) {
        let v = x + y;
        if v.is_finite() {
            return Expr::Num(v);
        }
    }
    Expr::Bin(BinOp::Add, Box::new(a), Box::new(b))
}

pub(super) fn sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        return a;
    }
    if is_zero(&a) {
        return neg(b);
    }
    if let (Some(x), Some(y)) = (num_of(&a), num_of(&b)) {
        let v = x - y;
        if v.is_finite() {
            return Expr::Num(v);
        }
    }
    Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b))
}

/// Zero annihilation (`0 * x = 0`) assumes `x` evaluates without a domain
/// error; builder-produced trees stay inside their declared domains, where
/// that holds.
pub(super) fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        return Expr::Num(0.0);
    }
    if is_one(&a) {
        return b;
    }
    if is_one(&b) {
        return a;
    }
    if let (Some(x), Some(y)) = (num_of(&a), num_of(&b)) {
        let v = x * y;
        if v.is_finite() {
            return Expr::Num(v);
        }
    }
    Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b))
}

pub(super) fn div(a: Expr, b: Expr) -> Expr {
    if is_one(&b) {
        return a;
    }
    if is_zero(&a) {
        return Expr::Num(0.0);
    }
    if let (Some(x), Some(y)) = (num_of(&a), num_of(&b)) {
        if y != 0.0 {
            let v = x / y;
            if v.is_finite() {
                return Expr::Num(v);
            }
        }
    }
    Expr::Bin(BinOp::Div, Box::new(a), Box::new(b))
}

pub(super) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub(super) fn pow(a: Expr, b: Expr) -> Expr {
    if let Some(c) = num_of(&b) {
        if c == 1.0 {
            return a;
        }
        // x^0 folds to 1; the only tree this mis-folds at x = 0 comes from
        // the power rule's `c * x^(c-1)` with c = 1, where the factor is
        // multiplied by derivative 1 and the correct limit is also 1.
        if c == 0.0 {
            return Expr::Num(1.0);
        }
        if let Some(x) = num_of(&a) {
            if c.fract() == 0.0 && c.abs() <= 2f64.powi(31) {
                let v = x.powi(c as i32);
                if v.is_finite() {
                    return Expr::Num(v);
                }
            } else if x > 0.0 {
                let v = x.powf(c);
                if v.is_finite() {
                    return Expr::Num(v);
                }
            }
        }
    }
    Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b))
}

pub(super) fn call(func: Func, a: Expr) -> Expr {
    Expr::Call(func, Box::new(a))
}

/// Bottom-up rebuild through the simplifying constructors.
pub(super) fn simplify(expr: &Expr) -> Expr {
    match expr {
        Expr::Num(_) | Expr::Coord(_) => expr.clone(),
        Expr::Neg(a) => neg(simplify(a)),
        Expr::Bin(op, a, b) => {
            let sa = simplify(a);
            let sb = simplify(b);
            match op {
                BinOp::Add => add(sa, sb),
                BinOp::Sub => sub(sa, sb),
                BinOp::Mul => mul(sa, sb),
                BinOp::Div => div(sa, sb),
                BinOp::Pow => pow(sa, sb),
            }
        }
        Expr::Call(func, a) => call(*func, simplify(a)),
    }
}
