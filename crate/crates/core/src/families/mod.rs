//! Built-in manifold constructions.
//!
//! Everything here materializes `(g, Q)` as expression trees, so the
//! derived fields stay inside the jet-exact evaluation path: a builder
//! differentiates or combines parsed trees symbolically and hands the
//! result to [`ManifoldSpec`] like any hand-written file.  The builders
//! double as the witness suite: flat space, the round sphere, dually flat
//! exponential families, the normal location-scale family, metrics with a
//! prescribed recurrence 1-form, conformal rescalings with their
//! parameter-dependent connection, and seeded random manifolds for the
//! unconditional identity checks.

pub mod normal_quadrature;

use crate::expr::{build, Expr, Func, ScalarField};
use crate::manifold::{ManifoldSpec, SpecError};
use crate::sampling::SamplePlan;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("potential is not strictly convex near {point:?}: {problem}")]
    NotConvex { point: Vec<f64>, problem: String },
    #[error("base metric is not positive definite near {point:?}: {problem}")]
    NotSpd { point: Vec<f64>, problem: String },
    #[error(
        "cubic form lost total symmetry at {point:?}: |Q{i}{j}{k} - Q{j}{i}{k}| = {residual:.3e}"
    )]
    NotSymmetric {
        i: usize,
        j: usize,
        k: usize,
        point: Vec<f64>,
        residual: f64,
    },
    #[error("symbolic metric inversion supports dimension 1 to 3, got {dim}")]
    UnsupportedDim { dim: usize },
}

/// Flat space: identity metric, zero cubic form, box `[-1, 1]^n`.
pub fn euclidean(n: usize) -> ManifoldSpec {
    let g = (1..=n)
        .map(|i| (i, i, ScalarField::constant(n, 1.0)))
        .collect();
    ManifoldSpec::from_parts(
        &format!("euclidean_{n}"),
        n,
        vec![(-1.0, 1.0); n],
        g,
        vec![],
    )
    .expect("euclidean construction is always valid")
}

/// Polar chart of the round unit sphere with zero cubic form.  All the
/// connections in the family coincide with Levi-Civita here, and the
/// curvature fits the constant-curvature pattern with constant 1.
pub fn sphere_chart() -> ManifoldSpec {
    ManifoldSpec::from_parts(
        "sphere",
        2,
        vec![(0.3, 2.8), (0.0, 3.0)],
        vec![
            (1, 1, ScalarField::parse("1", 2).unwrap()),
            (2, 2, ScalarField::parse("sin(t1)^2", 2).unwrap()),
        ],
        vec![],
    )
    .expect("sphere chart is always valid")
}

/// Statistical manifold of an exponential family in natural coordinates:
/// `g` is the Hessian of the potential and `Q` its third derivatives,
/// both materialized symbolically.  In these coordinates the primal
/// connection has vanishing symbols, so the curvature at the two extreme
/// family members is zero.
pub fn exponential_family_from_potential(
    name: &str,
    psi: &ScalarField,
    domain: Vec<(f64, f64)>,
) -> Result<ManifoldSpec, FamilyError> {
    let n = psi.dim();
    let mut g = Vec::new();
    let mut q = Vec::new();
    for i in 1..=n {
        let di = psi.partial(i);
        for j in i..=n {
            let dij = di.partial(j).simplified();
            for k in j..=n {
                let dijk = dij.partial(k).simplified();
                if !dijk.is_zero() {
                    q.push((i, j, k, dijk));
                }
            }
            g.push((i, j, dij));
        }
    }
    let spec = ManifoldSpec::from_parts(name, n, domain, g, q)?;
    let report = spec.validate(SamplePlan {
        count: 64,
        seed: 1,
    });
    if let Some(f) = report.failures.first() {
        return Err(FamilyError::NotConvex {
            point: f.point.clone(),
            problem: f.problem.clone(),
        });
    }
    Ok(spec)
}

/// Location-scale normal family in coordinates `(t1, t2) = (mean,
/// standard deviation)`.  The metric entries are the score covariances
/// and the cubic form belongs to the exponential-connection structure;
/// [`normal_quadrature`] recomputes both from the log-density by
/// Gauss-Hermite quadrature and the test suite holds this spec to that
/// oracle.
pub fn normal_family() -> ManifoldSpec {
    ManifoldSpec::from_parts(
        "normal",
        2,
        vec![(-1.0, 1.0), (0.5, 2.0)],
        vec![
            (1, 1, ScalarField::parse("1 / t2^2", 2).unwrap()),
            (2, 2, ScalarField::parse("2 / t2^2", 2).unwrap()),
        ],
        vec![
            (1, 1, 2, ScalarField::parse("2 / t2^3", 2).unwrap()),
            (2, 2, 2, ScalarField::parse("8 / t2^3", 2).unwrap()),
        ],
    )
    .expect("normal family construction is always valid")
}

/// Manifold whose cubic form is the symmetrized product of a 1-form with
/// the metric: `Q_ijk = w_i g_jk + w_j g_ik + w_k g_ij`.  The metric
/// derivative of the primal connection then recurs along `omega`.
pub fn recurrent_from(
    name: &str,
    domain: Vec<(f64, f64)>,
    g_entries: Vec<(usize, usize, ScalarField)>,
    omega: &[ScalarField],
) -> Result<ManifoldSpec, FamilyError> {
    let n = omega.len();
    let gm = full_symmetric(n, &g_entries)?;
    let w: Vec<Expr> = omega.iter().map(|f| f.expr().clone()).collect();
    let mut q = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let term = build::add(
                    build::add(
                        build::mul(w[i].clone(), gm[j][k].clone()),
                        build::mul(w[j].clone(), gm[i][k].clone()),
                    ),
                    build::mul(w[k].clone(), gm[i][j].clone()),
                );
                let field = ScalarField::from_expr(n, term).simplified();
                if !field.is_zero() {
                    q.push((i + 1, j + 1, k + 1, field));
                }
            }
        }
    }
    let spec = ManifoldSpec::from_parts(name, n, domain, g_entries, q)?;
    check_spd(&spec)?;
    Ok(spec)
}

/// A metric-only chart: the carrier for conformal constructions.
#[derive(Clone, Debug)]
pub struct RiemannianSpec {
    spec: ManifoldSpec,
}

impl RiemannianSpec {
    pub fn new(
        name: &str,
        dim: usize,
        domain: Vec<(f64, f64)>,
        h_entries: Vec<(usize, usize, ScalarField)>,
    ) -> Result<RiemannianSpec, FamilyError> {
        let spec = ManifoldSpec::from_parts(name, dim, domain, h_entries, vec![])?;
        check_spd(&spec)?;
        Ok(RiemannianSpec { spec })
    }

    pub fn identity(n: usize, domain: Vec<(f64, f64)>) -> RiemannianSpec {
        let h = (1..=n)
            .map(|i| (i, i, ScalarField::constant(n, 1.0)))
            .collect();
        RiemannianSpec::new("identity", n, domain, h).expect("identity metric is always valid")
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        self.spec.domain()
    }

    pub fn metric_entry(&self, i: usize, j: usize) -> &ScalarField {
        self.spec.metric_entry(i, j)
    }
}

/// Conformal rescaling of a base metric, `g = exp(phi) h`, paired with
/// the parameter-dependent torsion-free connection
///
/// `G^m_ij = Gh^m_ij + (1-alpha)/2 (phi_i d^m_j + phi_j d^m_i)
///  - (1+alpha)/2 h_ij h^ml phi_l`
///
/// where `Gh` are the base metric's Levi-Civita symbols and `phi_i` the
/// partials of the conformal factor.  The cubic form is materialized as
/// `Q_ijk = d_i g_jk - G^m_ij g_mk - G^m_ik g_jm`, the metric derivative
/// of that connection; its total symmetry is a consequence of the
/// construction and is asserted on sampled points rather than assumed.
/// The result carries a recurrent metric with recurrence 1-form
/// `alpha d(phi)` and, since that form is exact, a closed one.
pub fn alpha_conformal(
    name: &str,
    h: &RiemannianSpec,
    phi: &ScalarField,
    alpha: f64,
) -> Result<ManifoldSpec, FamilyError> {
    let n = h.dim();
    assert_eq!(phi.dim(), n, "conformal factor dimension mismatch");

    let mut h_entries = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            h_entries.push((i, j, h.metric_entry(i, j).clone()));
        }
    }
    let hm = full_symmetric(n, &h_entries)?;
    let hinv = symbolic_inverse(n, &hm).ok_or(FamilyError::UnsupportedDim { dim: n })?;

    let dphi: Vec<Expr> = (1..=n).map(|i| phi.partial(i).expr().clone()).collect();
    let dh: Vec<Vec<Vec<Expr>>> = (1..=n)
        .map(|a| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            ScalarField::from_expr(n, hm[i][j].clone())
                                .partial(a)
                                .expr()
                                .clone()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    // Levi-Civita symbols of the base metric, as trees.
    let mut gamma_h = vec![vec![vec![Expr::Num(0.0); n]; n]; n];
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut sum = Expr::Num(0.0);
                for l in 0..n {
                    let bracket = build::sub(
                        build::add(dh[i][j][l].clone(), dh[j][i][l].clone()),
                        dh[l][i][j].clone(),
                    );
                    sum = build::add(sum, build::mul(hinv[m][l].clone(), bracket));
                }
                gamma_h[m][i][j] = build::mul(Expr::Num(0.5), sum);
            }
        }
    }

    // Gradient of the conformal factor with respect to the base metric.
    let grad: Vec<Expr> = (0..n)
        .map(|m| {
            let mut sum = Expr::Num(0.0);
            for l in 0..n {
                sum = build::add(sum, build::mul(hinv[m][l].clone(), dphi[l].clone()));
            }
            sum
        })
        .collect();

    let cm = 0.5 * (1.0 - alpha);
    let cp = 0.5 * (1.0 + alpha);
    let mut gamma = vec![vec![vec![Expr::Num(0.0); n]; n]; n];
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut e = gamma_h[m][i][j].clone();
                if m == j {
                    e = build::add(e, build::mul(Expr::Num(cm), dphi[i].clone()));
                }
                if m == i {
                    e = build::add(e, build::mul(Expr::Num(cm), dphi[j].clone()));
                }
                e = build::sub(
                    e,
                    build::mul(
                        Expr::Num(cp),
                        build::mul(hm[i][j].clone(), grad[m].clone()),
                    ),
                );
                gamma[m][i][j] = e;
            }
        }
    }

    let ephi = build::call(Func::Exp, phi.expr().clone());
    let gm: Vec<Vec<Expr>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| build::mul(ephi.clone(), hm[i][j].clone()))
                .collect()
        })
        .collect();

    // d_i g_jk = exp(phi) (phi_i h_jk + d_i h_jk).
    let dg = |i: usize, j: usize, k: usize| -> Expr {
        build::mul(
            ephi.clone(),
            build::add(
                build::mul(dphi[i].clone(), hm[j][k].clone()),
                dh[i][j][k].clone(),
            ),
        )
    };

    let q_tree = |i: usize, j: usize, k: usize| -> Expr {
        let mut e = dg(i, j, k);
        for m in 0..n {
            e = build::sub(e, build::mul(gamma[m][i][j].clone(), gm[m][k].clone()));
            e = build::sub(e, build::mul(gamma[m][i][k].clone(), gm[j][m].clone()));
        }
        e
    };

    // Total symmetry holds by construction; verify the nontrivial swap on
    // sampled points before trusting the sorted-triple storage.
    let sample = crate::sampling::sample_box(h.domain(), SamplePlan { count: 24, seed: 5 });
    let mut q_entries = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let sorted = ScalarField::from_expr(n, q_tree(i, j, k)).simplified();
                if i != j {
                    let swapped = ScalarField::from_expr(n, q_tree(j, i, k));
                    for p in &sample {
                        let a = sorted.eval(p).map_err(|e| spd_from_eval(p, e))?;
                        let b = swapped.eval(p).map_err(|e| spd_from_eval(p, e))?;
                        let scale = 1.0f64.max(a.abs());
                        if (a - b).abs() > 1e-9 * scale {
                            return Err(FamilyError::NotSymmetric {
                                i: i + 1,
                                j: j + 1,
                                k: k + 1,
                                point: p.clone(),
                                residual: (a - b).abs(),
                            });
                        }
                    }
                }
                if !sorted.is_zero() {
                    q_entries.push((i + 1, j + 1, k + 1, sorted));
                }
            }
        }
    }

    let mut g_entries = Vec::new();
    for i in 0..n {
        for j in i..n {
            let field = ScalarField::from_expr(n, gm[i][j].clone()).simplified();
            g_entries.push((i + 1, j + 1, field));
        }
    }

    let spec = ManifoldSpec::from_parts(name, n, h.domain().to_vec(), g_entries, q_entries)?;
    check_spd(&spec)?;
    Ok(spec)
}

/// Seeded random manifold: `g = L Lt + I` with polynomial `L` entries, so
/// the metric is positive definite by construction, and polynomial cubic
/// entries of the given amplitude.  The same arguments always produce the
/// same spec, byte for byte.
pub fn random_spec(dim: usize, seed: u64, degree: usize, amplitude: f64) -> ManifoldSpec {
    assert!((1..=5).contains(&dim), "random specs cover dimensions 1-5");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l: Vec<Vec<ScalarField>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| random_polynomial(&mut rng, dim, degree, amplitude))
                .collect()
        })
        .collect();
    let mut g = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            let mut e = if i == j { Expr::Num(1.0) } else { Expr::Num(0.0) };
            for m in 0..dim {
                e = build::add(
                    e,
                    build::mul(l[i][m].expr().clone(), l[j][m].expr().clone()),
                );
            }
            g.push((i + 1, j + 1, ScalarField::from_expr(dim, e).simplified()));
        }
    }
    let mut q = Vec::new();
    for i in 1..=dim {
        for j in i..=dim {
            for k in j..=dim {
                let field = random_polynomial(&mut rng, dim, degree, amplitude);
                if !field.is_zero() {
                    q.push((i, j, k, field));
                }
            }
        }
    }
    ManifoldSpec::from_parts(
        &format!("random_{dim}d_seed{seed}"),
        dim,
        vec![(-0.5, 0.5); dim],
        g,
        q,
    )
    .expect("random spec construction is always valid")
}

/// Random multivariate polynomial of bounded total degree with uniform
/// coefficients in `[-amplitude, amplitude]`.  Monomials are enumerated
/// in a fixed order, so a seeded generator yields a reproducible field.
pub fn random_polynomial(
    rng: &mut impl Rng,
    dim: usize,
    degree: usize,
    amplitude: f64,
) -> ScalarField {
    let mut expr = Expr::Num(0.0);
    let mut exponents = vec![0usize; dim];
    loop {
        let coeff = if amplitude == 0.0 {
            0.0
        } else {
            rng.gen_range(-amplitude..=amplitude)
        };
        if coeff != 0.0 {
            let mut term = Expr::Num(coeff);
            for (axis, &e) in exponents.iter().enumerate() {
                if e > 0 {
                    term = build::mul(
                        term,
                        build::pow(Expr::Coord(axis), Expr::Num(e as f64)),
                    );
                }
            }
            expr = build::add(expr, term);
        }
        if !next_exponent(&mut exponents, degree) {
            break;
        }
    }
    ScalarField::from_expr(dim, expr).simplified()
}

/// Advances a multi-exponent through all vectors of total degree at most
/// `degree`, in lexicographic order; returns false after the last one.
fn next_exponent(exponents: &mut [usize], degree: usize) -> bool {
    let total: usize = exponents.iter().sum();
    if total < degree {
        exponents[exponents.len() - 1] += 1;
        return true;
    }
    for i in (0..exponents.len()).rev() {
        if exponents[i] > 0 {
            exponents[i] = 0;
            if i == 0 {
                return false;
            }
            exponents[i - 1] += 1;
            return true;
        }
    }
    false
}

fn full_symmetric(
    n: usize,
    entries: &[(usize, usize, ScalarField)],
) -> Result<Vec<Vec<Expr>>, FamilyError> {
    let mut m = vec![vec![Expr::Num(0.0); n]; n];
    for (i, j, f) in entries {
        if *i < 1 || *j < 1 || *i > n || *j > n {
            return Err(FamilyError::Spec(SpecError::IndexRange {
                entry: format!("g {i} {j}"),
                dim: n,
            }));
        }
        m[i - 1][j - 1] = f.expr().clone();
        m[j - 1][i - 1] = f.expr().clone();
    }
    Ok(m)
}

/// Adjugate-over-determinant inverse for symmetric matrices of trees.
/// Practical only at small dimension; callers get `None` above 3.
fn symbolic_inverse(n: usize, m: &[Vec<Expr>]) -> Option<Vec<Vec<Expr>>> {
    let det2 = |a: &Expr, b: &Expr, c: &Expr, d: &Expr| -> Expr {
        build::sub(
            build::mul(a.clone(), d.clone()),
            build::mul(b.clone(), c.clone()),
        )
    };
    match n {
        1 => Some(vec![vec![build::div(Expr::Num(1.0), m[0][0].clone())]]),
        2 => {
            let det = det2(&m[0][0], &m[0][1], &m[1][0], &m[1][1]);
            let e = |expr: Expr| build::div(expr, det.clone());
            Some(vec![
                vec![e(m[1][1].clone()), e(build::neg(m[0][1].clone()))],
                vec![e(build::neg(m[1][0].clone())), e(m[0][0].clone())],
            ])
        }
        3 => {
            // Cofactor expansion; the matrix is symmetric so the adjugate
            // is as well.
            let cof = |r0: usize, r1: usize, c0: usize, c1: usize| -> Expr {
                det2(&m[r0][c0], &m[r0][c1], &m[r1][c0], &m[r1][c1])
            };
            let c00 = cof(1, 2, 1, 2);
            let c01 = build::neg(cof(1, 2, 0, 2));
            let c02 = cof(1, 2, 0, 1);
            let c11 = cof(0, 2, 0, 2);
            let c12 = build::neg(cof(0, 2, 0, 1));
            let c22 = cof(0, 1, 0, 1);
            let det = build::add(
                build::add(
                    build::mul(m[0][0].clone(), c00.clone()),
                    build::mul(m[0][1].clone(), c01.clone()),
                ),
                build::mul(m[0][2].clone(), c02.clone()),
            );
            let e = |expr: &Expr| build::div(expr.clone(), det.clone());
            Some(vec![
                vec![e(&c00), e(&c01), e(&c02)],
                vec![e(&c01), e(&c11), e(&c12)],
                vec![e(&c02), e(&c12), e(&c22)],
            ])
        }
        _ => None,
    }
}

fn check_spd(spec: &ManifoldSpec) -> Result<(), FamilyError> {
    let report = spec.validate(SamplePlan {
        count: 64,
        seed: 1,
    });
    if let Some(f) = report.failures.first() {
        return Err(FamilyError::NotSpd {
            point: f.point.clone(),
            problem: f.problem.clone(),
        });
    }
    Ok(())
}

fn spd_from_eval(point: &[f64], e: crate::expr::EvalError) -> FamilyError {
    FamilyError::NotSpd {
        point: point.to_vec(),
        problem: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::riemann;
    use crate::manifold::geometry::{christoffel_alpha, geometry_at};

    #[test]
    fn euclidean_is_trivial_everywhere() {
        let m = euclidean(3);
        let geo = geometry_at(&m, &[0.3, -0.2, 0.9]).unwrap();
        assert_eq!(geo.gamma0.max_abs(), 0.0);
        assert_eq!(riemann(&geo, 1.0).r.max_abs(), 0.0);
    }

    #[test]
    fn quadratic_potential_gives_euclidean() {
        let psi = ScalarField::parse("t1^2 / 2 + t2^2 / 2", 2).unwrap();
        let m = exponential_family_from_potential("quad", &psi, vec![(-1.0, 1.0); 2]).unwrap();
        assert!(m.cubic_is_zero());
        let geo = geometry_at(&m, &[0.4, -0.7]).unwrap();
        assert_eq!(geo.g.get(&[0, 0]), 1.0);
        assert_eq!(geo.g.get(&[0, 1]), 0.0);
    }

    #[test]
    fn exponential_potential_is_dually_flat() {
        let psi = ScalarField::parse("exp(t1) + exp(t2)", 2).unwrap();
        let m = exponential_family_from_potential("exp2", &psi, vec![(-1.0, 1.0); 2]).unwrap();
        for p in [[0.2, -0.5], [-0.9, 0.8]] {
            let geo = geometry_at(&m, &p).unwrap();
            // Primal symbols vanish in natural coordinates.
            assert!(christoffel_alpha(&geo, 1.0).max_abs() < 1e-12);
            assert!(riemann(&geo, 1.0).r.max_abs() < 1e-12);
            assert!(riemann(&geo, -1.0).r.max_abs() < 1e-12);
        }
    }

    #[test]
    fn bernoulli_potential_metric() {
        let psi = ScalarField::parse("log(1 + exp(t1))", 1).unwrap();
        let m = exponential_family_from_potential("bernoulli", &psi, vec![(-2.0, 2.0)]).unwrap();
        // Fisher information of the Bernoulli natural parameter at 0 is 1/4.
        let geo = geometry_at(&m, &[0.0]).unwrap();
        assert!((geo.g.get(&[0, 0]) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn concave_potential_is_rejected() {
        let psi = ScalarField::parse("t1^3", 1).unwrap();
        let err =
            exponential_family_from_potential("bad", &psi, vec![(-1.0, 1.0)]).unwrap_err();
        assert!(matches!(err, FamilyError::NotConvex { .. }));
    }

    #[test]
    fn recurrent_constant_form_entries() {
        let g = vec![
            (1, 1, ScalarField::constant(2, 1.0)),
            (2, 2, ScalarField::constant(2, 1.0)),
        ];
        let omega = [ScalarField::constant(2, 0.4), ScalarField::zero(2)];
        let m = recurrent_from("rec", vec![(-1.0, 1.0); 2], g, &omega).unwrap();
        let p = [0.3, 0.3];
        assert!((m.cubic_entry(1, 1, 1).eval(&p).unwrap() - 1.2).abs() < 1e-15);
        assert!((m.cubic_entry(1, 2, 2).eval(&p).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(m.cubic_entry(1, 1, 2).eval(&p).unwrap(), 0.0);
    }

    #[test]
    fn conformal_zero_factor_is_identity_transform() {
        let h = RiemannianSpec::identity(2, vec![(-1.0, 1.0); 2]);
        let phi = ScalarField::zero(2);
        let m = alpha_conformal("triv", &h, &phi, 0.7).unwrap();
        assert!(m.cubic_is_zero());
        let geo = geometry_at(&m, &[0.2, 0.2]).unwrap();
        assert_eq!(geo.g.get(&[0, 0]), 1.0);
        assert_eq!(geo.g.get(&[1, 1]), 1.0);
    }

    #[test]
    fn conformal_cubic_matches_recurrence_pattern() {
        // With base identity and factor phi the cubic form must equal
        // alpha (phi_i g_jk + phi_j g_ik + phi_k g_ij).
        let h = RiemannianSpec::identity(2, vec![(-0.8, 0.8); 2]);
        let phi = ScalarField::parse("t1 + 0.5 * t2", 2).unwrap();
        let alpha = 0.6;
        let m = alpha_conformal("conf", &h, &phi, alpha).unwrap();
        for p in [[0.3, -0.2], [-0.5, 0.6]] {
            let geo = geometry_at(&m, &p).unwrap();
            let w = [alpha * 1.0, alpha * 0.5];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        let expect = w[i] * geo.g.get(&[j, k])
                            + w[j] * geo.g.get(&[i, k])
                            + w[k] * geo.g.get(&[i, j]);
                        assert!(
                            (geo.q.get(&[i, j, k]) - expect).abs() < 1e-12,
                            "Q{i}{j}{k} at {p:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn conformal_duality_swaps_parameter_sign() {
        let h = RiemannianSpec::new(
            "curved",
            2,
            vec![(-0.8, 0.8); 2],
            vec![
                (1, 1, ScalarField::constant(2, 1.0)),
                (2, 2, ScalarField::parse("1 + t1^2", 2).unwrap()),
            ],
        )
        .unwrap();
        let phi = ScalarField::parse("t1 * t2", 2).unwrap();
        let plus = alpha_conformal("plus", &h, &phi, 0.5).unwrap();
        let minus = alpha_conformal("minus", &h, &phi, -0.5).unwrap();
        for p in [[0.1, 0.4], [-0.6, -0.3]] {
            let gp = geometry_at(&plus, &p).unwrap();
            let gm = geometry_at(&minus, &p).unwrap();
            // The dual connection of one instance is the primal of the
            // sign-flipped instance.
            let dual = christoffel_alpha(&gp, -1.0);
            let primal = christoffel_alpha(&gm, 1.0);
            assert!(dual.max_abs_diff(&primal) < 1e-12, "at {p:?}");
        }
    }

    #[test]
    fn conformal_dimension_four_is_unsupported() {
        let h = RiemannianSpec::identity(4, vec![(-1.0, 1.0); 4]);
        let phi = ScalarField::parse("t1", 4).unwrap();
        assert!(matches!(
            alpha_conformal("big", &h, &phi, 0.0),
            Err(FamilyError::UnsupportedDim { dim: 4 })
        ));
    }

    #[test]
    fn random_specs_are_reproducible_and_valid() {
        let a = random_spec(3, 42, 2, 0.3);
        let b = random_spec(3, 42, 2, 0.3);
        assert_eq!(a.to_file_string(), b.to_file_string());
        let c = random_spec(3, 43, 2, 0.3);
        assert_ne!(a.to_file_string(), c.to_file_string());
        assert!(a
            .validate(SamplePlan {
                count: 50,
                seed: 0
            })
            .passed());
    }

    #[test]
    fn zero_amplitude_random_spec_is_flat() {
        let m = random_spec(2, 7, 2, 0.0);
        let geo = geometry_at(&m, &[0.1, -0.2]).unwrap();
        assert_eq!(geo.gamma0.max_abs(), 0.0);
        assert_eq!(geo.q.max_abs(), 0.0);
    }

    #[test]
    fn exponent_enumeration_covers_all_monomials() {
        let mut e = vec![0usize; 2];
        let mut seen = vec![e.clone()];
        while next_exponent(&mut e, 2) {
            seen.push(e.clone());
        }
        // Degree <= 2 in two variables: 6 monomials.
        assert_eq!(seen.len(), 6);
        assert!(seen.contains(&vec![0, 0]));
        assert!(seen.contains(&vec![2, 0]));
        assert!(seen.contains(&vec![1, 1]));
        assert!(seen.contains(&vec![0, 2]));
    }
}
