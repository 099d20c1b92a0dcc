//! Parallel volume forms of equiaffine `alpha`-connections.
//!
//! A torsion-free connection admits a parallel volume form
//! `f dt1 ^ ... ^ dtn` exactly when the trace form `tau_i = G^k_{ki}` of
//! its symbols is closed; then `d(log f) = tau` and `log f` is the line
//! integral of `tau` from a base point, unique up to the additive
//! constant fixed by `log f(base) = 0`.  Closedness is verified on the
//! whole requested grid before any integration happens, so a reported
//! grid is never the artifact of a path choice.
//!
//! Integration runs along axis-ordered polylines (move `t1` first, then
//! `t2`, ...).  Grid columns share their polyline prefixes, so each lattice
//! line is integrated once as a cumulative sweep rather than once per
//! point.

use crate::manifold::geometry::{christoffel_alpha, dchristoffel_alpha, geometry_at, GeometryAtPoint, GeometryError};
use crate::manifold::ManifoldSpec;
use crate::quadrature::{integrate_adaptive, IntegrateError};
use crate::tensor::{Tensor, Variance};
use thiserror::Error;

/// Absolute quadrature tolerance for each polyline segment.
const SEGMENT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PriorError {
    #[error("trace form is not closed at alpha = {alpha}: residual {residual:.3e} at {point:?} exceeds {tol:.3e}")]
    NotEquiaffine {
        alpha: f64,
        residual: f64,
        point: Vec<f64>,
        tol: f64,
    },
    #[error("grid point {point:?} leaves the domain box")]
    OutsideDomain { point: Vec<f64> },
    #[error("per-axis grid counts {got} do not match dimension {dim}")]
    GridShape { got: usize, dim: usize },
    #[error("grid axis {axis} needs at least 2 points")]
    GridTooCoarse { axis: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quadrature(#[from] IntegrateError),
}

/// Log-density of a parallel volume form sampled on an axis-aligned
/// lattice.  `log_f` is stored row-major over the lattice (last axis
/// fastest) and normalized so the base point has log-density zero.
#[derive(Clone, Debug)]
pub struct PriorGrid {
    pub alpha: f64,
    pub base_point: Vec<f64>,
    /// Per-axis sorted coordinate values of the lattice.
    pub axes: Vec<Vec<f64>>,
    pub log_f: Vec<f64>,
    /// Max-abs of `d_i tau_j - d_j tau_i` over the lattice.
    pub closedness_residual: f64,
}

/// Trace form `tau_i = G^k_{ki}` of the `alpha`-connection symbols.
pub fn tau(geo: &GeometryAtPoint, alpha: f64) -> Tensor {
    let n = geo.g.dim();
    let gamma = christoffel_alpha(geo, alpha);
    let mut out = Tensor::zeros(n, &[Variance::Lower]);
    for i in 0..n {
        let mut v = 0.0;
        for k in 0..n {
            v += gamma.get(&[k, k, i]);
        }
        out.set(&[i], v);
    }
    out
}

/// Exterior derivative `(d tau)_{ij} = d_i tau_j - d_j tau_i`, max-abs.
pub fn tau_closedness_residual(geo: &GeometryAtPoint, alpha: f64) -> f64 {
    let n = geo.g.dim();
    let dgamma = dchristoffel_alpha(geo, alpha);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut dij = 0.0;
            let mut dji = 0.0;
            for k in 0..n {
                dij += dgamma.get(&[i, k, k, j]);
                dji += dgamma.get(&[j, k, k, i]);
            }
            worst = worst.max((dij - dji).abs());
        }
    }
    worst
}

/// One component of `tau` evaluated at a point, for segment integrands.
fn tau_component(
    spec: &ManifoldSpec,
    point: &[f64],
    axis: usize,
    alpha: f64,
) -> Result<f64, GeometryError> {
    let geo = geometry_at(spec, point)?;
    Ok(tau(&geo, alpha).get(&[axis]))
}

/// Computes the `alpha`-parallel volume form on the lattice spanned by
/// `counts[j]` evenly spaced values across the domain box (endpoints
/// included).  `base` defaults to the box center when `None`.
///
/// Closedness of the trace form is checked at every lattice point first;
/// failure means the connection is not equiaffine on the probed region
/// and no integral is attempted.
pub fn parallel_volume(
    spec: &ManifoldSpec,
    alpha: f64,
    base: Option<&[f64]>,
    counts: &[usize],
    closedness_tol: f64,
) -> Result<PriorGrid, PriorError> {
    let n = spec.dim();
    if counts.len() != n {
        return Err(PriorError::GridShape {
            got: counts.len(),
            dim: n,
        });
    }
    for (j, &c) in counts.iter().enumerate() {
        if c < 2 {
            return Err(PriorError::GridTooCoarse { axis: j + 1 });
        }
    }
    let domain = spec.domain();
    let base_point: Vec<f64> = match base {
        Some(b) => {
            assert_eq!(b.len(), n, "base point dimension mismatch");
            b.to_vec()
        }
        None => domain.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect(),
    };
    for (j, &x) in base_point.iter().enumerate() {
        let (lo, hi) = domain[j];
        if x < lo || x > hi {
            return Err(PriorError::OutsideDomain {
                point: base_point.clone(),
            });
        }
    }

    let axes: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let (lo, hi) = domain[j];
            let c = counts[j];
            (0..c)
                .map(|m| lo + (hi - lo) * (m as f64) / ((c - 1) as f64))
                .collect()
        })
        .collect();

    let total: usize = counts.iter().product();

    // Closedness pregate over the whole lattice.
    let mut closedness_residual: f64 = 0.0;
    let mut worst_point = base_point.clone();
    for flat in 0..total {
        let p = lattice_point(&axes, counts, flat);
        let geo = geometry_at(spec, &p)?;
        let r = tau_closedness_residual(&geo, alpha);
        if r > closedness_residual {
            closedness_residual = r;
            worst_point = p;
        }
    }
    if closedness_residual > closedness_tol {
        return Err(PriorError::NotEquiaffine {
            alpha,
            residual: closedness_residual,
            point: worst_point,
            tol: closedness_tol,
        });
    }

    // The polyline to lattice point x runs axis by axis:
    // segment j moves t_j from base_j to x_j while coordinates < j sit at
    // (x_1..x_{j-1}) and coordinates > j sit at the base.  Points sharing
    // a prefix share every segment integral, so each lattice line is one
    // cumulative sweep from base_j through the sorted axis values.
    let mut log_f = vec![0.0f64; total];
    for axis in 0..n {
        let prefix_total: usize = counts[..axis].iter().product();
        let suffix_total: usize = counts[axis + 1..].iter().product();
        for prefix_flat in 0..prefix_total {
            let mut line_base = base_point.clone();
            {
                let mut rem = prefix_flat;
                for j in (0..axis).rev() {
                    line_base[j] = axes[j][rem % counts[j]];
                    rem /= counts[j];
                }
            }
            let segments = cumulative_line(spec, alpha, &line_base, axis, &axes[axis])?;
            for (m, &seg) in segments.iter().enumerate() {
                // All lattice points with this prefix and axis value share
                // the segment integral regardless of their suffix.
                let base_flat = (prefix_flat * counts[axis] + m) * suffix_total;
                for s in 0..suffix_total {
                    log_f[base_flat + s] += seg;
                }
            }
        }
    }

    Ok(PriorGrid {
        alpha,
        base_point,
        axes,
        log_f,
        closedness_residual,
    })
}

/// Integrals of `tau_axis` from `base[axis]` to each value in `values`,
/// along the line through `base` parallel to `axis`.  One adaptive pass
/// per consecutive pair plus one from the base into the sorted sequence.
fn cumulative_line(
    spec: &ManifoldSpec,
    alpha: f64,
    base: &[f64],
    axis: usize,
    values: &[f64],
) -> Result<Vec<f64>, PriorError> {
    let mut point = base.to_vec();
    let mut f = |t: f64| -> Result<f64, GeometryError> {
        point[axis] = t;
        tau_component(spec, &point, axis, alpha)
    };
    let mut segment = |a: f64, b: f64| -> Result<f64, PriorError> {
        integrate_adaptive(&mut f, a, b, SEGMENT_TOL).map_err(|e| match e {
            Ok(q) => PriorError::Quadrature(q),
            Err(g) => PriorError::Geometry(g),
        })
    };

    let b0 = base[axis];
    let mut out = vec![0.0f64; values.len()];
    // Nearest grid value at or above the base anchors the two sweeps.
    let split = values.partition_point(|&v| v < b0);
    let mut acc = 0.0;
    for m in split..values.len() {
        let from = if m == split { b0 } else { values[m - 1] };
        acc += segment(from, values[m])?;
        out[m] = acc;
    }
    acc = 0.0;
    for m in (0..split).rev() {
        let from = if m + 1 == split { b0 } else { values[m + 1] };
        acc += segment(from, values[m])?;
        out[m] = acc;
    }
    Ok(out)
}

fn lattice_point(axes: &[Vec<f64>], counts: &[usize], flat: usize) -> Vec<f64> {
    let n = counts.len();
    let mut p = vec![0.0; n];
    let mut rem = flat;
    for j in (0..n).rev() {
        p[j] = axes[j][rem % counts[j]];
        rem /= counts[j];
    }
    p
}

impl PriorGrid {
    pub fn counts(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Lattice point for a row-major flat index (last axis fastest).
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let counts = self.counts();
        lattice_point(&self.axes, &counts, flat)
    }

    /// CSV with header `t1,...,tn,log_f`, one row per lattice point in
    /// row-major order, every value at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.axes.len();
        let mut out = String::new();
        for j in 1..=n {
            out.push_str(&format!("t{j},"));
        }
        out.push_str("log_f\n");
        for (flat, &lf) in self.log_f.iter().enumerate() {
            let p = self.point(flat);
            for x in p {
                out.push_str(&format!("{x:.16e},"));
            }
            out.push_str(&format!("{lf:.16e}\n"));
        }
        out
    }

    /// Log of the trapezoid-rule integral of `exp(log_f)` over the
    /// lattice.  Subtracting it from every entry rescales the density
    /// to unit mass on the box (when the integral is finite there).
    pub fn log_normalizer(&self) -> f64 {
        let counts = self.counts();
        let peak = self.log_f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (flat, &lf) in self.log_f.iter().enumerate() {
            let mut w = 1.0;
            let mut rem = flat;
            for j in (0..counts.len()).rev() {
                let i = rem % counts[j];
                rem /= counts[j];
                let axis = &self.axes[j];
                let step = axis[1] - axis[0];
                w *= if i == 0 || i == counts[j] - 1 {
                    step / 2.0
                } else {
                    step
                };
            }
            total += w * (lf - peak).exp();
        }
        peak + total.ln()
    }
}

/// Difference between integrating `tau` from `p` to `q` along the
/// axis-ordered polyline (axis 1 first) and along the reversed axis
/// order.  Near zero iff the trace form is closed on the probed region.
pub fn path_independence_probe(
    spec: &ManifoldSpec,
    alpha: f64,
    p: &[f64],
    q: &[f64],
) -> Result<f64, PriorError> {
    let n = spec.dim();
    assert_eq!(p.len(), n);
    assert_eq!(q.len(), n);
    let forward = polyline_integral(spec, alpha, p, q, &(0..n).collect::<Vec<_>>())?;
    let backward = polyline_integral(spec, alpha, p, q, &(0..n).rev().collect::<Vec<_>>())?;
    Ok((forward - backward).abs())
}

fn polyline_integral(
    spec: &ManifoldSpec,
    alpha: f64,
    p: &[f64],
    q: &[f64],
    axis_order: &[usize],
) -> Result<f64, PriorError> {
    let mut current = p.to_vec();
    let mut total = 0.0;
    for &axis in axis_order {
        let a = current[axis];
        let b = q[axis];
        let mut point = current.clone();
        let mut f = |t: f64| -> Result<f64, GeometryError> {
            point[axis] = t;
            tau_component(spec, &point, axis, alpha)
        };
        total += integrate_adaptive(&mut f, a, b, SEGMENT_TOL).map_err(|e| match e {
            Ok(qe) => PriorError::Quadrature(qe),
            Err(g) => PriorError::Geometry(g),
        })?;
        current[axis] = b;
    }
    Ok(total)
}
