//! Score-moment oracle for the normal location-scale family.
//!
//! [`normal_family`](super::normal_family) writes its metric and cubic
//! form as closed-form expressions.  This module recomputes both from
//! nothing but the log-density: at a parameter point it takes exact jets
//! of `log p(x; t)` in the parameters for each Gauss-Hermite node `x` and
//! forms score moments under the sampling distribution.  Agreement is
//! then a check of the closed forms against the defining expectations,
//! with no shared derivation between the two routes.
//!
//! With scores `s_i = d_i log p` and curvatures `h_ij = d_i d_j log p`:
//!
//! * metric: `g_ij = E[s_i s_j]`, equal to `-E[h_ij]`;
//! * lowered primal symbols: `c_ij,k = E[h_ij s_k]`;
//! * metric derivative: `d_i g_jk = E[h_ij s_k + s_j h_ik + s_i s_j s_k]`;
//! * cubic form: `Q_ijk = d_i g_jk - c_ij,k - c_ik,j`, which collapses to
//!   the third score moment `E[s_i s_j s_k]`.
//!
//! Both the connection route and the third-moment shortcut are exposed so
//! tests can require them to coincide.

use crate::expr::{build, EvalError, Expr, Func, ScalarField};
use crate::quadrature::gauss_hermite;

const LOG_TWO_PI: f64 = 1.8378770664093453;

/// Score-moment summary of the family at one parameter point.
#[derive(Clone, Debug)]
pub struct NormalPointOracle {
    /// Fisher metric `E[s_i s_j]`, row-major 2x2.
    pub g: [[f64; 2]; 2],
    /// Curvature route to the same metric, `-E[h_ij]`.
    pub g_from_hessian: [[f64; 2]; 2],
    /// Cubic form from the connection route, indices `[i][j][k]`.
    pub q: [[[f64; 2]; 2]; 2],
    /// Third score moment `E[s_i s_j s_k]`.
    pub skewness: [[[f64; 2]; 2]; 2],
}

/// Evaluates the oracle at `(mean, sigma)` with an `n`-node rule.
///
/// The integrand per entry is a polynomial in the standardized residual
/// of degree at most 6, so any `n >= 4` is exact up to rounding; the
/// default callers use much larger rules to keep the rule itself out of
/// the error budget.
pub fn at(mean: f64, sigma: f64, n: usize) -> Result<NormalPointOracle, EvalError> {
    assert!(sigma > 0.0, "sigma must be positive");
    let (nodes, weights) = gauss_hermite(n);
    let norm = std::f64::consts::PI.sqrt();
    let point = [mean, sigma];

    let mut g = [[0.0; 2]; 2];
    let mut g_from_hessian = [[0.0; 2]; 2];
    let mut dg = [[[0.0; 2]; 2]; 2];
    let mut gamma = [[[0.0; 2]; 2]; 2];
    let mut skewness = [[[0.0; 2]; 2]; 2];

    for (u, w) in nodes.iter().zip(&weights) {
        // Gauss-Hermite abscissas integrate against exp(-u^2); the
        // substitution x = mean + sqrt(2) sigma u makes the sum an
        // expectation under the density at the evaluation point.
        let x = mean + std::f64::consts::SQRT_2 * sigma * u;
        let jet = log_density(x).eval_jet2(&point)?;
        let wt = w / norm;
        let s = [jet.grad[0], jet.grad[1]];
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] += wt * s[i] * s[j];
                g_from_hessian[i][j] -= wt * jet.hess_at(i, j);
                for k in 0..2 {
                    let h_ij = jet.hess_at(i, j);
                    let h_ik = jet.hess_at(i, k);
                    gamma[i][j][k] += wt * h_ij * s[k];
                    dg[i][j][k] += wt * (h_ij * s[k] + s[j] * h_ik + s[i] * s[j] * s[k]);
                    skewness[i][j][k] += wt * s[i] * s[j] * s[k];
                }
            }
        }
    }

    let mut q = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                q[i][j][k] = dg[i][j][k] - gamma[i][j][k] - gamma[i][k][j];
            }
        }
    }

    Ok(NormalPointOracle {
        g,
        g_from_hessian,
        q,
        skewness,
    })
}

/// `log p(x; t1, t2)` for a fixed observation, as a field over the
/// parameters: `-log(t2) - log(2 pi)/2 - (x - t1)^2 / (2 t2^2)`.
fn log_density(x: f64) -> ScalarField {
    let resid = build::sub(Expr::Num(x), Expr::Coord(0));
    let expr = build::sub(
        build::sub(
            build::neg(build::call(Func::Log, Expr::Coord(1))),
            Expr::Num(0.5 * LOG_TWO_PI),
        ),
        build::div(
            build::pow(resid, Expr::Num(2.0)),
            build::mul(Expr::Num(2.0), build::pow(Expr::Coord(1), Expr::Num(2.0))),
        ),
    );
    ScalarField::from_expr(2, expr)
}
