//! Pointwise geometry from second-order jets.
//!
//! One call to [`geometry_at`] evaluates every metric and cubic entry once
//! with a 2-jet and materializes all derivative arrays the rest of the
//! crate needs: the metric and its inverse, first and second metric
//! derivatives, the cubic form and its first derivatives, the Levi-Civita
//! symbols, the difference tensor `K^k_ij = g^kl Q_lij`, and the first
//! derivatives of both.  Downstream code (curvature, diagnostics, priors)
//! only combines these arrays; no further evaluation happens.
//!
//! Index layout of the stored arrays, all 0-based internally:
//!
//! * `dg[(a, i, j)] = d_a g_ij`
//! * `d2g[(a, b, i, j)] = d_a d_b g_ij`
//! * `dq[(a, i, j, k)] = d_a Q_ijk`
//! * `gamma0[(k, i, j)] = Gamma^k_ij`, symbols of the Levi-Civita
//!   connection, symmetric in `(i, j)` to exact equality
//! * `dgamma0[(a, k, i, j)] = d_a Gamma^k_ij`
//! * `k[(k, i, j)] = K^k_ij` and `dk[(a, k, i, j)] = d_a K^k_ij`
//!
//! The `alpha`-connection family is affine in `alpha`:
//! `Gamma(alpha) = gamma0 - (alpha/2) K`, with the primal connection at
//! `alpha = 1` and its dual at `alpha = -1`.

use super::ManifoldSpec;
use crate::expr::EvalError;
use crate::linalg::{Cholesky, SpdError};
use crate::tensor::{Tensor, Variance};
use thiserror::Error;
use Variance::{Lower, Upper};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("entry {entry} at point {point:?}: {source}")]
    Eval {
        entry: String,
        point: Vec<f64>,
        source: EvalError,
    },
    #[error("metric at point {point:?}: {source}")]
    NotSpd {
        point: Vec<f64>,
        source: SpdError,
    },
}

/// Every derivative array the diagnostics need, evaluated at one point.
#[derive(Clone, Debug)]
pub struct GeometryAtPoint {
    pub point: Vec<f64>,
    pub g: Tensor,
    pub g_inv: Tensor,
    pub dg: Tensor,
    pub d2g: Tensor,
    /// `d_a g^kl`, index `(a, k, l)`.
    pub dg_inv: Tensor,
    pub q: Tensor,
    pub dq: Tensor,
    pub gamma0: Tensor,
    pub dgamma0: Tensor,
    pub k: Tensor,
    pub dk: Tensor,
    pub log_det_g: f64,
}

pub fn geometry_at(spec: &ManifoldSpec, point: &[f64]) -> Result<GeometryAtPoint, GeometryError> {
    let n = spec.dim();
    assert_eq!(point.len(), n, "point dimension mismatch");

    let mut g = Tensor::zeros(n, &[Lower, Lower]);
    let mut dg = Tensor::zeros(n, &[Lower, Lower, Lower]);
    let mut d2g = Tensor::zeros(n, &[Lower, Lower, Lower, Lower]);
    {
        let mut slot = 0;
        for i in 0..n {
            for j in i..n {
                let field = &spec.metric_fields()[slot];
                slot += 1;
                let jet = field.eval_jet2(point).map_err(|source| GeometryError::Eval {
                    entry: format!("g {} {}", i + 1, j + 1),
                    point: point.to_vec(),
                    source,
                })?;
                g.set(&[i, j], jet.value);
                g.set(&[j, i], jet.value);
                for a in 0..n {
                    dg.set(&[a, i, j], jet.grad[a]);
                    dg.set(&[a, j, i], jet.grad[a]);
                    for b in 0..n {
                        d2g.set(&[a, b, i, j], jet.hess_at(a, b));
                        d2g.set(&[a, b, j, i], jet.hess_at(a, b));
                    }
                }
            }
        }
    }

    let chol = Cholesky::new(&g).map_err(|source| GeometryError::NotSpd {
        point: point.to_vec(),
        source,
    })?;
    let g_inv = chol.inverse();
    let log_det_g = chol.log_det();

    let mut q = Tensor::zeros(n, &[Lower, Lower, Lower]);
    let mut dq = Tensor::zeros(n, &[Lower, Lower, Lower, Lower]);
    {
        let mut slot = 0;
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let field = &spec.cubic_fields()[slot];
                    slot += 1;
                    if field.is_zero() {
                        continue;
                    }
                    let jet = field.eval_jet2(point).map_err(|source| GeometryError::Eval {
                        entry: format!("Q {} {} {}", i + 1, j + 1, k + 1),
                        point: point.to_vec(),
                        source,
                    })?;
                    // Write the value into all distinct permutations of the
                    // sorted triple; Q is totally symmetric by storage.
                    for (x, y, z) in permutations3(i, j, k) {
                        q.set(&[x, y, z], jet.value);
                        for a in 0..n {
                            dq.set(&[a, x, y, z], jet.grad[a]);
                        }
                    }
                }
            }
        }
    }

    // d_a g^kl = -g^km (d_a g_mn) g^nl.
    let mut dg_inv = Tensor::zeros(n, &[Lower, Upper, Upper]);
    for a in 0..n {
        for k in 0..n {
            for l in 0..n {
                let mut sum = 0.0;
                for m in 0..n {
                    for p in 0..n {
                        sum += g_inv.get(&[k, m]) * dg.get(&[a, m, p]) * g_inv.get(&[p, l]);
                    }
                }
                dg_inv.set(&[a, k, l], -sum);
            }
        }
    }

    // Gamma^k_ij = (1/2) g^kl (d_i g_jl + d_j g_il - d_l g_ij).
    let mut gamma0 = Tensor::zeros(n, &[Upper, Lower, Lower]);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut sum = 0.0;
                for l in 0..n {
                    sum += g_inv.get(&[k, l])
                        * (dg.get(&[i, j, l]) + dg.get(&[j, i, l]) - dg.get(&[l, i, j]));
                }
                gamma0.set(&[k, i, j], 0.5 * sum);
            }
        }
    }

    // d_a Gamma^k_ij by the product rule through g^kl.
    let mut dgamma0 = Tensor::zeros(n, &[Lower, Upper, Lower, Lower]);
    for a in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut sum = 0.0;
                    for l in 0..n {
                        let bracket =
                            dg.get(&[i, j, l]) + dg.get(&[j, i, l]) - dg.get(&[l, i, j]);
                        let dbracket = d2g.get(&[a, i, j, l]) + d2g.get(&[a, j, i, l])
                            - d2g.get(&[a, l, i, j]);
                        sum += dg_inv.get(&[a, k, l]) * bracket + g_inv.get(&[k, l]) * dbracket;
                    }
                    dgamma0.set(&[a, k, i, j], 0.5 * sum);
                }
            }
        }
    }

    // K^k_ij = g^kl Q_lij and its first derivatives.
    let mut k = Tensor::zeros(n, &[Upper, Lower, Lower]);
    let mut dk = Tensor::zeros(n, &[Lower, Upper, Lower, Lower]);
    for kk in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut sum = 0.0;
                for l in 0..n {
                    sum += g_inv.get(&[kk, l]) * q.get(&[l, i, j]);
                }
                k.set(&[kk, i, j], sum);
                for a in 0..n {
                    let mut dsum = 0.0;
                    for l in 0..n {
                        dsum += dg_inv.get(&[a, kk, l]) * q.get(&[l, i, j])
                            + g_inv.get(&[kk, l]) * dq.get(&[a, l, i, j]);
                    }
                    dk.add_at(&[a, kk, i, j], dsum);
                }
            }
        }
    }

    Ok(GeometryAtPoint {
        point: point.to_vec(),
        g,
        g_inv,
        dg,
        d2g,
        dg_inv,
        q,
        dq,
        gamma0,
        dgamma0,
        k,
        dk,
        log_det_g,
    })
}

fn permutations3(i: usize, j: usize, k: usize) -> Vec<(usize, usize, usize)> {
    let mut out = vec![
        (i, j, k),
        (i, k, j),
        (j, i, k),
        (j, k, i),
        (k, i, j),
        (k, j, i),
    ];
    out.sort_unstable();
    out.dedup();
    out
}

/// Symbols of the `alpha`-connection: `gamma0 - (alpha/2) K`.
pub fn christoffel_alpha(geo: &GeometryAtPoint, alpha: f64) -> Tensor {
    geo.gamma0.sub(&geo.k.scale(0.5 * alpha))
}

/// First derivatives of the `alpha`-connection symbols, index `(a, k, i, j)`.
pub fn dchristoffel_alpha(geo: &GeometryAtPoint, alpha: f64) -> Tensor {
    geo.dgamma0.sub(&geo.dk.scale(0.5 * alpha))
}

/// Covariant derivative of the metric under the `alpha`-connection,
/// index `(i, j, k)` for `(nabla_i g)(j, k)`.  Equals `alpha * Q` up to
/// rounding; the identity is checked by the diagnostics, not assumed here.
pub fn nabla_g(geo: &GeometryAtPoint, alpha: f64) -> Tensor {
    let n = geo.g.dim();
    let gamma = christoffel_alpha(geo, alpha);
    let mut out = Tensor::zeros(n, &[Lower, Lower, Lower]);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = geo.dg.get(&[i, j, k]);
                for l in 0..n {
                    v -= gamma.get(&[l, i, j]) * geo.g.get(&[l, k]);
                    v -= gamma.get(&[l, i, k]) * geo.g.get(&[j, l]);
                }
                out.set(&[i, j, k], v);
            }
        }
    }
    out
}
