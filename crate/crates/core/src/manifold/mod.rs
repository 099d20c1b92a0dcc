//! Manifold specifications.
//!
//! A [`ManifoldSpec`] is one coordinate chart carrying a metric `g` and a
//! totally symmetric cubic form `Q`, both given entrywise as expression
//! fields over `t1..tn`.  Only the upper triangle of `g` (`i <= j`) and the
//! sorted triples of `Q` (`i <= j <= k`) are stored; the symmetric
//! completions are implied.  Together with a domain box this is the whole
//! input: every connection, curvature tensor, and prior in this crate is
//! derived from `(g, Q)` pointwise.

pub mod format;
pub mod geometry;

pub use format::FormatError;
pub use geometry::{
    christoffel_alpha, dchristoffel_alpha, geometry_at, nabla_g, GeometryAtPoint, GeometryError,
};

use crate::expr::ScalarField;
use crate::linalg::Cholesky;
use crate::sampling::{sample_box, SamplePlan};
use crate::tensor::{Tensor, Variance};
use thiserror::Error;

/// Charts above this dimension are rejected; every algorithm here is
/// dense in `dim^4`.
pub const MAX_DIM: usize = 8;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("dimension {0} out of range 1..={MAX_DIM}")]
    BadDim(usize),
    #[error("domain must list one interval per coordinate ({expected}), got {got}")]
    DomainLength { expected: usize, got: usize },
    #[error("domain interval {axis} is empty: [{lo}, {hi}]")]
    EmptyInterval { axis: usize, lo: f64, hi: f64 },
    #[error("{entry}: indices must be sorted ascending")]
    IndexOrder { entry: String },
    #[error("{entry}: index out of range 1..={dim}")]
    IndexRange { entry: String, dim: usize },
    #[error("{entry}: duplicate entry")]
    Duplicate { entry: String },
    #[error("{entry}: field is declared on dimension {field_dim}, spec has {dim}")]
    FieldDim {
        entry: String,
        field_dim: usize,
        dim: usize,
    },
}

/// A chart with metric and cubic form entries as expression fields.
#[derive(Clone, Debug)]
pub struct ManifoldSpec {
    name: String,
    dim: usize,
    domain: Vec<(f64, f64)>,
    /// Upper triangle of `g`, row-major: (1,1), (1,2), ..., (1,n), (2,2), ...
    g: Vec<ScalarField>,
    /// Sorted triples of `Q` in lexicographic order.
    q: Vec<ScalarField>,
}

fn pair_slot(n: usize, i: usize, j: usize) -> usize {
    // 0-based, i <= j.
    let mut base = 0;
    for a in 0..i {
        base += n - a;
    }
    base + (j - i)
}

fn triple_slot(n: usize, i: usize, j: usize, k: usize) -> usize {
    // 0-based, i <= j <= k.
    let mut base = 0;
    for a in 0..i {
        let m = n - a;
        base += m * (m + 1) / 2;
    }
    base + pair_slot(n - i, j - i, k - i)
}

fn pair_count(n: usize) -> usize {
    n * (n + 1) / 2
}

fn triple_count(n: usize) -> usize {
    n * (n + 1) * (n + 2) / 6
}

impl ManifoldSpec {
    /// Builds a spec from explicit entries.  Indices are 1-based and must
    /// be sorted ascending within each entry; anything unlisted is zero.
    pub fn from_parts(
        name: impl Into<String>,
        dim: usize,
        domain: Vec<(f64, f64)>,
        g_entries: Vec<(usize, usize, ScalarField)>,
        q_entries: Vec<(usize, usize, usize, ScalarField)>,
    ) -> Result<ManifoldSpec, SpecError> {
        if dim < 1 || dim > MAX_DIM {
            return Err(SpecError::BadDim(dim));
        }
        if domain.len() != dim {
            return Err(SpecError::DomainLength {
                expected: dim,
                got: domain.len(),
            });
        }
        for (axis, &(lo, hi)) in domain.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(SpecError::EmptyInterval {
                    axis: axis + 1,
                    lo,
                    hi,
                });
            }
        }
        let mut g = vec![ScalarField::zero(dim); pair_count(dim)];
        let mut g_seen = vec![false; g.len()];
        for (i, j, field) in g_entries {
            let entry = format!("g {i} {j}");
            check_entry(&entry, &[i, j], dim, &field)?;
            let slot = pair_slot(dim, i - 1, j - 1);
            if g_seen[slot] {
                return Err(SpecError::Duplicate { entry });
            }
            g_seen[slot] = true;
            g[slot] = field;
        }
        let mut q = vec![ScalarField::zero(dim); triple_count(dim)];
        let mut q_seen = vec![false; q.len()];
        for (i, j, k, field) in q_entries {
            let entry = format!("Q {i} {j} {k}");
            check_entry(&entry, &[i, j, k], dim, &field)?;
            let slot = triple_slot(dim, i - 1, j - 1, k - 1);
            if q_seen[slot] {
                return Err(SpecError::Duplicate { entry });
            }
            q_seen[slot] = true;
            q[slot] = field;
        }
        Ok(ManifoldSpec {
            name: name.into(),
            dim,
            domain,
            g,
            q,
        })
    }

    /// Parses the manifold file format; see the crate README for the
    /// layout.  Errors carry 1-based line numbers.
    pub fn parse_str(text: &str) -> Result<ManifoldSpec, FormatError> {
        format::parse(text)
    }

    /// Renders the spec in the file format, skipping structurally zero
    /// entries.  `parse_str` of the output reproduces the spec.
    pub fn to_file_string(&self) -> String {
        format::write(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn domain_center(&self) -> Vec<f64> {
        self.domain.iter().map(|&(a, b)| 0.5 * (a + b)).collect()
    }

    /// Metric entry by 1-based coordinate indices, in either order.
    pub fn metric_entry(&self, i: usize, j: usize) -> &ScalarField {
        assert!(i >= 1 && i <= self.dim && j >= 1 && j <= self.dim);
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        &self.g[pair_slot(self.dim, a - 1, b - 1)]
    }

    /// Cubic form entry by 1-based coordinate indices, in any order.
    pub fn cubic_entry(&self, i: usize, j: usize, k: usize) -> &ScalarField {
        assert!((1..=self.dim).contains(&i));
        assert!((1..=self.dim).contains(&j));
        assert!((1..=self.dim).contains(&k));
        let mut s = [i, j, k];
        s.sort_unstable();
        &self.q[triple_slot(self.dim, s[0] - 1, s[1] - 1, s[2] - 1)]
    }

    pub(crate) fn metric_fields(&self) -> &[ScalarField] {
        &self.g
    }

    pub(crate) fn cubic_fields(&self) -> &[ScalarField] {
        &self.q
    }

    /// True when every stored cubic entry is the literal zero.
    pub fn cubic_is_zero(&self) -> bool {
        self.q.iter().all(|f| f.is_zero())
    }

    /// Samples the domain and checks that `g` evaluates and is SPD at
    /// every point.  Failures are reported per point, never thrown.
    pub fn validate(&self, plan: SamplePlan) -> ValidationReport {
        let points = sample_box(&self.domain, plan);
        let mut failures = Vec::new();
        for point in &points {
            if let Some(problem) = self.point_problem(point) {
                failures.push(PointFailure {
                    point: point.clone(),
                    problem,
                });
            }
        }
        ValidationReport {
            manifold: self.name.clone(),
            points: points.len(),
            failures,
        }
    }

    fn point_problem(&self, point: &[f64]) -> Option<String> {
        let n = self.dim;
        let mut g = Tensor::zeros(n, &[Variance::Lower, Variance::Lower]);
        for i in 0..n {
            for j in i..n {
                match self.g[pair_slot(n, i, j)].eval(point) {
                    Ok(v) => {
                        g.set(&[i, j], v);
                        g.set(&[j, i], v);
                    }
                    Err(e) => return Some(format!("g {} {}: {e}", i + 1, j + 1)),
                }
            }
        }
        if let Err(e) = Cholesky::new(&g) {
            return Some(e.to_string());
        }
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let field = &self.q[triple_slot(n, i, j, k)];
                    if field.is_zero() {
                        continue;
                    }
                    if let Err(e) = field.eval(point) {
                        return Some(format!("Q {} {} {}: {e}", i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        None
    }
}

fn check_entry(
    entry: &str,
    indices: &[usize],
    dim: usize,
    field: &ScalarField,
) -> Result<(), SpecError> {
    for &i in indices {
        if i < 1 || i > dim {
            return Err(SpecError::IndexRange {
                entry: entry.to_string(),
                dim,
            });
        }
    }
    if indices.windows(2).any(|w| w[0] > w[1]) {
        return Err(SpecError::IndexOrder {
            entry: entry.to_string(),
        });
    }
    if field.dim() != dim {
        return Err(SpecError::FieldDim {
            entry: entry.to_string(),
            field_dim: field.dim(),
            dim,
        });
    }
    Ok(())
}

/// Per-point validation outcome for a sampled domain.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub manifold: String,
    pub points: usize,
    pub failures: Vec<PointFailure>,
}

#[derive(Clone, Debug)]
pub struct PointFailure {
    pub point: Vec<f64>,
    pub problem: String,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Plain-text rendering used by the CLI.
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "manifold: {}", self.manifold);
        let _ = writeln!(out, "points sampled: {}", self.points);
        if self.failures.is_empty() {
            let _ = writeln!(out, "all points pass: metric SPD, all entries evaluate");
            let _ = writeln!(out, "verdict: pass");
        } else {
            let _ = writeln!(out, "failures: {}", self.failures.len());
            for f in self.failures.iter().take(10) {
                let coords: Vec<String> = f.point.iter().map(|c| format!("{c:.6}")).collect();
                let _ = writeln!(out, "  at ({}): {}", coords.join(", "), f.problem);
            }
            if self.failures.len() > 10 {
                let _ = writeln!(out, "  ... and {} more", self.failures.len() - 10);
            }
            let _ = writeln!(out, "verdict: fail");
        }
        out
    }
}
