//! Gaussian quadrature.
//!
//! Nodes are computed from the orthonormal three-term recurrences by
//! interlacing bisection: the roots of the degree-k polynomial strictly
//! separate the roots of degree k+1, so each root sits in a sign-change
//! bracket and bisection converges to the floating-point fixpoint.  The
//! weight at a node is the Christoffel number `1 / sum_k p_k(x)^2` over
//! the orthonormal family below the rule's degree.  Everything here is
//! deterministic: the same rule always produces the same bits.
//!
//! Two rules are exposed: Gauss-Legendre (weight 1 on [-1, 1]), used by the
//! adaptive line integrator for prior volumes, and Gauss-Hermite (weight
//! `exp(-x^2)` on the real line), used by the Fisher-information cross
//! check of the normal family.

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum IntegrateError {
    #[error("adaptive refinement exceeded depth limit on [{a}, {b}]")]
    DepthExceeded { a: f64, b: f64 },
}

/// Orthonormal-recurrence coefficients: `x p_k = c[k+1] p_{k+1} + c[k] p_{k-1}`.
trait Recurrence {
    /// `p_0`, a constant.
    fn p0(&self) -> f64;
    /// `c[k]` for `k >= 1`.
    fn coeff(&self, k: usize) -> f64;
    /// Interval guaranteed to contain every root of `p_n`.
    fn outer_bounds(&self, n: usize) -> (f64, f64);
}

struct Legendre;

impl Recurrence for Legendre {
    fn p0(&self) -> f64 {
        0.5f64.sqrt()
    }
    fn coeff(&self, k: usize) -> f64 {
        let k = k as f64;
        k / (4.0 * k * k - 1.0).sqrt()
    }
    fn outer_bounds(&self, _n: usize) -> (f64, f64) {
        (-1.0, 1.0)
    }
}

struct Hermite;

impl Recurrence for Hermite {
    fn p0(&self) -> f64 {
        std::f64::consts::PI.powf(-0.25)
    }
    fn coeff(&self, k: usize) -> f64 {
        (k as f64 / 2.0).sqrt()
    }
    fn outer_bounds(&self, n: usize) -> (f64, f64) {
        // Largest root of the degree-n Hermite polynomial is below
        // sqrt(2n + 1); pad by one to keep a strict sign change.
        let b = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
        (-b, b)
    }
}

/// Evaluates `p_n(x)` by the recurrence.  `coeff` is only defined for
/// `k >= 1`; the `k = 0` back-term is zero because `p_{-1} = 0`.
fn eval_poly(rec: &impl Recurrence, n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = rec.p0();
    for k in 0..n {
        let back = if k == 0 { 0.0 } else { rec.coeff(k) * prev };
        let next = (x * cur - back) / rec.coeff(k + 1);
        prev = cur;
        cur = next;
    }
    cur
}

/// Christoffel number `1 / sum_{k<n} p_k(x)^2`.
fn weight_at(rec: &impl Recurrence, n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = rec.p0();
    let mut sum = cur * cur;
    for k in 0..n - 1 {
        let back = if k == 0 { 0.0 } else { rec.coeff(k) * prev };
        let next = (x * cur - back) / rec.coeff(k + 1);
        prev = cur;
        cur = next;
        sum += cur * cur;
    }
    1.0 / sum
}

fn bisect(rec: &impl Recurrence, n: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = eval_poly(rec, n, lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let fmid = eval_poly(rec, n, mid);
        if fmid == 0.0 {
            return mid;
        }
        if (flo < 0.0) == (fmid < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
}

fn rule(rec: &impl Recurrence, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature rule needs at least one node");
    let mut roots = vec![0.0f64];
    for k in 2..=n {
        let (lo, hi) = rec.outer_bounds(k);
        let mut brackets = Vec::with_capacity(k + 1);
        brackets.push(lo);
        brackets.extend_from_slice(&roots);
        brackets.push(hi);
        let mut next = Vec::with_capacity(k);
        for w in brackets.windows(2) {
            next.push(bisect(rec, k, w[0], w[1]));
        }
        roots = next;
    }
    // Both families are symmetric about zero; fold the halves together to
    // remove the residual bisection asymmetry.
    for i in 0..n / 2 {
        let m = 0.5 * (roots[i] - roots[n - 1 - i]);
        roots[i] = m;
        roots[n - 1 - i] = -m;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.0;
    }
    let weights = roots.iter().map(|&x| weight_at(rec, n, x)).collect();
    (roots, weights)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    rule(&Legendre, n)
}

/// Gauss-Hermite nodes and weights for the weight `exp(-x^2)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    rule(&Hermite, n)
}

const PANEL_NODES: usize = 15;
const MAX_DEPTH: usize = 40;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    use std::sync::OnceLock;
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_NODES))
}

/// Adaptive Gauss-Legendre integration of `f` from `a` to `b` (either
/// orientation) to the given absolute tolerance.  Panels are split until
/// the two-half estimate agrees with the single-panel estimate.
pub fn integrate_adaptive<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<f64, Result<IntegrateError, E>> {
    if a == b {
        return Ok(0.0);
    }
    let whole = panel_estimate(f, a, b)?;
    refine(f, a, b, whole, abs_tol, MAX_DEPTH)
}

fn panel_estimate<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
) -> Result<f64, Result<IntegrateError, E>> {
    let (nodes, weights) = panel_rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x).map_err(Err)?;
    }
    Ok(sum * half)
}

fn refine<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    whole: f64,
    abs_tol: f64,
    depth: usize,
) -> Result<f64, Result<IntegrateError, E>> {
    let mid = 0.5 * (a + b);
    let left = panel_estimate(f, a, mid)?;
    let right = panel_estimate(f, mid, b)?;
    let refined = left + right;
    if (refined - whole).abs() <= abs_tol {
        return Ok(refined);
    }
    if depth == 0 {
        return Err(Ok(IntegrateError::DepthExceeded { a, b }));
    }
    let l = refine(f, a, mid, left, 0.5 * abs_tol, depth - 1)?;
    let r = refine(f, mid, b, right, 0.5 * abs_tol, depth - 1)?;
    Ok(l + r)
}
