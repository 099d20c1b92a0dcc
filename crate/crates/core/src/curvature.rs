//! Curvature of the `alpha`-connection family.
//!
//! Conventions, fixed here and used everywhere downstream:
//!
//! * `R(e_a, e_b) e_c = R^d_{c a b} e_d`, stored with index order
//!   `(d, c, a, b)`, variance `[U, L, L, L]`;
//! * `R^d_{c a b} = d_a G^d_{bc} - d_b G^d_{ac}
//!   + G^d_{am} G^m_{bc} - G^d_{bm} G^m_{ac}` where `G` are the
//!   `alpha`-connection symbols and their derivatives come from exact
//!   jets, never finite differences;
//! * lowered curvature `Rlow_{abcd} = g(R(e_a, e_b) e_c, e_d)`, stored
//!   `(a, b, c, d)`;
//! * `Ric_{bc} = sum_a R^a_{c a b}`, the metric trace of
//!   `(X, W) -> g(R(X, e_b) e_c, W)`.
//!
//! The interpolation formula for the Ricci tensor of the family,
//!
//! `Ric(alpha) = (1+alpha)/2 Ric(1) + (1-alpha)/2 Ric(-1)
//!  + (1-alpha^2)/4 (T1 - T2)`,
//!
//! involves two trace corrections built from the difference tensor:
//! `T1(Y, Z) = tr(V -> K(K(V, Z), Y))` and
//! `T2(Y, Z) = tr(V -> K(V, K(Y, Z)))`.  The trace arguments admit a
//! second reading with `Y` and `Z` swapped; both readings coincide
//! identically because `K` is symmetric in its two arguments, which makes
//! `T1` and `T2` individually symmetric in `(Y, Z)`.  The test suite
//! confirms the coincidence numerically on random manifolds before
//! relying on either form.

use crate::manifold::geometry::{christoffel_alpha, dchristoffel_alpha, GeometryAtPoint};
use crate::tensor::{Tensor, Variance};
use Variance::{Lower, Upper};

/// Curvature arrays of one `alpha`-connection at one point.
#[derive(Clone, Debug)]
pub struct CurvatureAtPoint {
    pub alpha: f64,
    /// `R^d_{c a b}` stored `(d, c, a, b)`.
    pub r: Tensor,
    /// `Rlow_{abcd} = g_{de} R^e_{c a b}` stored `(a, b, c, d)`.
    pub r_low: Tensor,
    /// `Ric_{bc} = sum_a R^a_{c a b}`.
    pub ric: Tensor,
}

pub fn riemann(geo: &GeometryAtPoint, alpha: f64) -> CurvatureAtPoint {
    let n = geo.g.dim();
    let gamma = christoffel_alpha(geo, alpha);
    let dgamma = dchristoffel_alpha(geo, alpha);

    let mut r = Tensor::zeros(n, &[Upper, Lower, Lower, Lower]);
    for d in 0..n {
        for c in 0..n {
            for a in 0..n {
                // Antisymmetry in (a, b) is exact: the b < a block is the
                // negated mirror of the a < b block, and b = a is zero.
                for b in (a + 1)..n {
                    let mut v = dgamma.get(&[a, d, b, c]) - dgamma.get(&[b, d, a, c]);
                    for m in 0..n {
                        v += gamma.get(&[d, a, m]) * gamma.get(&[m, b, c])
                            - gamma.get(&[d, b, m]) * gamma.get(&[m, a, c]);
                    }
                    r.set(&[d, c, a, b], v);
                    r.set(&[d, c, b, a], -v);
                }
            }
        }
    }

    let mut r_low = Tensor::zeros(n, &[Lower, Lower, Lower, Lower]);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = 0.0;
                    for e in 0..n {
                        v += geo.g.get(&[d, e]) * r.get(&[e, c, a, b]);
                    }
                    r_low.set(&[a, b, c, d], v);
                }
            }
        }
    }

    let mut ric = Tensor::zeros(n, &[Lower, Lower]);
    for b in 0..n {
        for c in 0..n {
            let mut v = 0.0;
            for a in 0..n {
                v += r.get(&[a, c, a, b]);
            }
            ric.set(&[b, c], v);
        }
    }

    CurvatureAtPoint {
        alpha,
        r,
        r_low,
        ric,
    }
}

/// Ricci tensor of the `alpha`-connection assembled from the two extreme
/// Ricci tensors and the difference-tensor traces, without computing the
/// `alpha`-curvature itself.  Must agree with `riemann(geo, alpha).ric`;
/// the diagnostics enforce that agreement.
pub fn ricci_alpha_closed_form(
    geo: &GeometryAtPoint,
    ric_plus: &Tensor,
    ric_minus: &Tensor,
    alpha: f64,
) -> Tensor {
    let n = geo.g.dim();
    let mut out = Tensor::zeros(n, &[Lower, Lower]);
    let cp = 0.5 * (1.0 + alpha);
    let cm = 0.5 * (1.0 - alpha);
    let ct = 0.25 * (1.0 - alpha * alpha);
    for b in 0..n {
        for c in 0..n {
            let mut t1 = 0.0;
            let mut t2 = 0.0;
            for a in 0..n {
                for m in 0..n {
                    t1 += geo.k.get(&[m, a, c]) * geo.k.get(&[a, m, b]);
                    t2 += geo.k.get(&[a, a, m]) * geo.k.get(&[m, b, c]);
                }
            }
            let v = cp * ric_plus.get(&[b, c]) + cm * ric_minus.get(&[b, c]) + ct * (t1 - t2);
            out.set(&[b, c], v);
        }
    }
    out
}

/// Max-abs residual of `Ric(alpha) - Ric(-alpha) - alpha (Ric(1) - Ric(-1))`,
/// the linear-in-`alpha` law for the difference across the family.
pub fn ricci_alpha_antisym_relation(
    ric_a: &Tensor,
    ric_ma: &Tensor,
    ric_plus: &Tensor,
    ric_minus: &Tensor,
    alpha: f64,
) -> f64 {
    let lhs = ric_a.sub(ric_ma);
    let rhs = ric_plus.sub(ric_minus).scale(alpha);
    lhs.max_abs_diff(&rhs)
}

/// Best constant `K` fitting `Rlow_{abcd} = K (g_{bc} g_{ad} - g_{ac} g_{bd})`
/// across the given pointwise curvatures, in the max-abs objective, plus
/// the residual at the optimum.  The objective is piecewise linear and
/// convex in `K`: a least-squares seed brackets the optimum, a coarse
/// grid narrows it, and golden-section finishes.  A degenerate fit (the
/// pattern tensor vanishes everywhere, as in dimension 1) returns `K = 0`.
pub fn constant_curvature_fit(fits: &[(Tensor, Tensor)]) -> (f64, f64) {
    // Least-squares seed: minimizes the quadratic surrogate exactly.
    let mut num = 0.0;
    let mut den = 0.0;
    for (g, r_low) in fits {
        let s = pattern(g);
        let n = g.dim();
        for idx in crate::tensor::multi_indices(n, 4) {
            let sv = s.get(&idx[..4]);
            num += r_low.get(&idx[..4]) * sv;
            den += sv * sv;
        }
    }
    if den < f64::EPSILON {
        return (0.0, objective(fits, 0.0));
    }
    let seed = num / den;

    let width = 0.5 * (1.0 + seed.abs());
    let (lo, hi) = (seed - width, seed + width);
    let mut best = (seed, objective(fits, seed));
    for i in 0..=200 {
        let k = lo + (hi - lo) * (i as f64) / 200.0;
        let obj = objective(fits, k);
        if obj < best.1 {
            best = (k, obj);
        }
    }
    let step = (hi - lo) / 200.0;

    // Golden-section on the convex max-abs objective, bracketed one grid
    // step around the coarse minimum.
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut a = best.0 - step;
    let mut b = best.0 + step;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = objective(fits, c);
    let mut fd = objective(fits, d);
    while (b - a).abs() > 1e-12 * (1.0 + best.0.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = objective(fits, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = objective(fits, d);
        }
    }
    let k_hat = 0.5 * (a + b);
    let final_obj = objective(fits, k_hat);
    if final_obj < best.1 {
        (k_hat, final_obj)
    } else {
        best
    }
}

/// `S_{abcd} = g_{bc} g_{ad} - g_{ac} g_{bd}`, the lowered constant-curvature
/// pattern in the `(a, b, c, d)` storage convention.
fn pattern(g: &Tensor) -> Tensor {
    let n = g.dim();
    let mut s = Tensor::zeros(n, &[Lower, Lower, Lower, Lower]);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = g.get(&[b, c]) * g.get(&[a, d]) - g.get(&[a, c]) * g.get(&[b, d]);
                    s.set(&[a, b, c, d], v);
                }
            }
        }
    }
    s
}

fn objective(fits: &[(Tensor, Tensor)], k: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (g, r_low) in fits {
        let s = pattern(g);
        let resid = r_low.sub(&s.scale(k)).max_abs();
        worst = worst.max(resid);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarField;
    use crate::manifold::geometry::geometry_at;
    use crate::manifold::ManifoldSpec;
    use crate::tensor::SymGroup;

    fn spec(
        dim: usize,
        domain: &[(f64, f64)],
        g: &[(usize, usize, &str)],
        q: &[(usize, usize, usize, &str)],
    ) -> ManifoldSpec {
        ManifoldSpec::from_parts(
            "test",
            dim,
            domain.to_vec(),
            g.iter()
                .map(|&(i, j, s)| (i, j, ScalarField::parse(s, dim).unwrap()))
                .collect(),
            q.iter()
                .map(|&(i, j, k, s)| (i, j, k, ScalarField::parse(s, dim).unwrap()))
                .collect(),
        )
        .unwrap()
    }

    fn sphere() -> ManifoldSpec {
        spec(
            2,
            &[(0.3, 2.8), (0.0, 3.0)],
            &[(1, 1, "1"), (2, 2, "sin(t1)^2")],
            &[],
        )
    }

    fn generic() -> ManifoldSpec {
        spec(
            2,
            &[(-0.5, 0.5), (-0.5, 0.5)],
            &[
                (1, 1, "1 + 0.3*t1^2"),
                (1, 2, "0.2*t1*t2"),
                (2, 2, "2 - 0.1*t2 + 0.2*t2^2"),
            ],
            &[
                (1, 1, 1, "0.3*t2"),
                (1, 1, 2, "0.2 - 0.1*t1"),
                (1, 2, 2, "0.15*t1*t2"),
                (2, 2, 2, "0.25"),
            ],
        )
    }

    #[test]
    fn euclidean_curvature_vanishes() {
        let flat = spec(
            3,
            &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
            &[(1, 1, "1"), (2, 2, "1"), (3, 3, "1")],
            &[],
        );
        let geo = geometry_at(&flat, &[0.1, 0.2, 0.3]).unwrap();
        for alpha in [-2.0, 0.0, 1.0] {
            let c = riemann(&geo, alpha);
            assert_eq!(c.r.max_abs(), 0.0);
            assert_eq!(c.ric.max_abs(), 0.0);
        }
    }

    #[test]
    fn sphere_ricci_equals_metric() {
        // The round unit sphere has Ric = g in any chart.
        let m = sphere();
        for p in [[0.7, 0.4], [1.3, 2.0], [2.2, 0.9]] {
            let geo = geometry_at(&m, &p).unwrap();
            let c = riemann(&geo, 0.0);
            assert!(c.ric.max_abs_diff(&geo.g) < 1e-12, "point {p:?}");
        }
    }

    #[test]
    fn curvature_is_antisymmetric_exactly() {
        let geo = geometry_at(&generic(), &[0.2, -0.3]).unwrap();
        let c = riemann(&geo, 0.7);
        let n = 2;
        for d in 0..n {
            for cc in 0..n {
                for a in 0..n {
                    assert_eq!(c.r.get(&[d, cc, a, a]), 0.0);
                    for b in (a + 1)..n {
                        let lhs = c.r.get(&[d, cc, a, b]);
                        let rhs = -c.r.get(&[d, cc, b, a]);
                        assert_eq!(lhs.to_bits(), rhs.to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn first_bianchi_holds() {
        let geo = geometry_at(&generic(), &[0.31, 0.12]).unwrap();
        for alpha in [-1.0, 0.0, 1.0, 2.5] {
            let c = riemann(&geo, alpha);
            for d in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        for cc in 0..2 {
                            let cyc = c.r.get(&[d, cc, a, b])
                                + c.r.get(&[d, a, b, cc])
                                + c.r.get(&[d, b, cc, a]);
                            assert!(cyc.abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn levi_civita_lowered_curvature_is_skew_in_last_pair() {
        let geo = geometry_at(&generic(), &[-0.21, 0.4]).unwrap();
        let c = riemann(&geo, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let v = c.r_low.get(&[a, b, cc, d]) + c.r_low.get(&[a, b, d, cc]);
                        assert!(v.abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn dual_curvature_pairing_holds() {
        // g(R(X,Y)Z,W) + g(R*(X,Y)W,Z) = 0 for the dual pair.
        let geo = geometry_at(&generic(), &[0.11, -0.27]).unwrap();
        let cp = riemann(&geo, 1.0);
        let cm = riemann(&geo, -1.0);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let v = cp.r_low.get(&[a, b, c, d]) + cm.r_low.get(&[a, b, d, c]);
                        assert!(v.abs() < 1e-12, "{a}{b}{c}{d}: {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_direct_ricci() {
        let geo = geometry_at(&generic(), &[0.18, 0.33]).unwrap();
        let ric_plus = riemann(&geo, 1.0).ric;
        let ric_minus = riemann(&geo, -1.0).ric;
        for alpha in [-2.0, -0.5, 0.0, 0.3, 1.7] {
            let direct = riemann(&geo, alpha).ric;
            let closed = ricci_alpha_closed_form(&geo, &ric_plus, &ric_minus, alpha);
            assert!(
                direct.max_abs_diff(&closed) < 1e-12,
                "alpha {alpha}: {}",
                direct.max_abs_diff(&closed)
            );
        }
    }

    #[test]
    fn trace_corrections_are_symmetric() {
        // Both trace corrections are symmetric bilinear forms, which is
        // why the two readings of their arguments coincide.
        let geo = geometry_at(&generic(), &[0.4, -0.4]).unwrap();
        let n = 2;
        let mut t1 = Tensor::zeros(n, &[Lower, Lower]);
        let mut t2 = Tensor::zeros(n, &[Lower, Lower]);
        for b in 0..n {
            for c in 0..n {
                let mut s1 = 0.0;
                let mut s2 = 0.0;
                for a in 0..n {
                    for m in 0..n {
                        s1 += geo.k.get(&[m, a, c]) * geo.k.get(&[a, m, b]);
                        s2 += geo.k.get(&[a, a, m]) * geo.k.get(&[m, b, c]);
                    }
                }
                t1.set(&[b, c], s1);
                t2.set(&[b, c], s2);
            }
        }
        assert!(t1.sym_residual(SymGroup::Swap(1, 2)).unwrap() < 1e-14);
        assert!(t2.sym_residual(SymGroup::Swap(1, 2)).unwrap() < 1e-14);
    }

    #[test]
    fn alpha_difference_is_linear() {
        let geo = geometry_at(&generic(), &[-0.12, 0.22]).unwrap();
        let ric_plus = riemann(&geo, 1.0).ric;
        let ric_minus = riemann(&geo, -1.0).ric;
        for alpha in [0.5, 1.7, -2.0] {
            let ric_a = riemann(&geo, alpha).ric;
            let ric_ma = riemann(&geo, -alpha).ric;
            let resid =
                ricci_alpha_antisym_relation(&ric_a, &ric_ma, &ric_plus, &ric_minus, alpha);
            assert!(resid < 1e-12, "alpha {alpha}: {resid}");
        }
    }

    #[test]
    fn sphere_fits_unit_constant_curvature() {
        let m = sphere();
        let mut fits = Vec::new();
        for p in [[0.6, 0.5], [1.1, 1.9], [1.9, 0.2], [2.5, 2.7]] {
            let geo = geometry_at(&m, &p).unwrap();
            let c = riemann(&geo, 0.0);
            fits.push((geo.g.clone(), c.r_low));
        }
        let (k_hat, resid) = constant_curvature_fit(&fits);
        assert!((k_hat - 1.0).abs() < 1e-9, "k_hat {k_hat}");
        assert!(resid < 1e-9, "residual {resid}");
    }

    #[test]
    fn flat_fit_is_degenerate_zero() {
        let flat = spec(2, &[(-1.0, 1.0), (-1.0, 1.0)], &[(1, 1, "1"), (2, 2, "1")], &[]);
        let geo = geometry_at(&flat, &[0.0, 0.0]).unwrap();
        let c = riemann(&geo, 0.0);
        let (k_hat, resid) = constant_curvature_fit(&[(geo.g.clone(), c.r_low)]);
        // The pattern tensor is nonzero (g is SPD) but the curvature is
        // zero, so the optimum is K = 0 with zero residual.
        assert!(k_hat.abs() < 1e-12);
        assert!(resid < 1e-12);
    }

    #[test]
    fn generic_manifold_rejects_constant_fit() {
        let m = generic();
        let mut fits = Vec::new();
        for p in [[0.1, 0.1], [-0.3, 0.2], [0.4, -0.4]] {
            let geo = geometry_at(&m, &p).unwrap();
            fits.push((geo.g.clone(), riemann(&geo, 1.0).r_low));
        }
        let (_, resid) = constant_curvature_fit(&fits);
        assert!(resid > 1e-4, "generic spec should not fit: {resid}");
    }
}
