//! Exact-to-rounding geometry of statistical manifolds on a single chart.
//!
//! A manifold is specified by a Riemannian metric `g` and a totally
//! symmetric cubic form `Q`, both given as closed-form expression fields
//! in chart coordinates `t1..tn`.  From that pair the crate derives the
//! whole dual-connection apparatus with second-order jets (no finite
//! differencing anywhere in the evaluation path): the Levi-Civita
//! connection, the difference tensor, the `alpha`-connection family and
//! its curvature, and the parallel volume forms of equiaffine members of
//! the family.
//!
//! The public surface is organized in layers:
//!
//! * [`expr`]: the expression language (parser, 2-jets, symbolic partials)
//! * [`tensor`], [`linalg`]: dense small-rank tensors and SPD solves
//! * [`manifold`]: specification type, file format, pointwise geometry
//! * [`curvature`]: Riemann and Ricci tensors of any `alpha`-connection
//! * [`diagnostics`]: the named identity and theorem checks
//! * [`volume`]: `alpha`-parallel prior volume forms on a grid
//! * [`families`]: built-in and randomly generated manifold specifications

pub mod curvature;
pub mod diagnostics;
pub mod expr;
pub mod families;
pub mod linalg;
pub mod manifold;
pub mod quadrature;
pub mod sampling;
pub mod tensor;
pub mod volume;

pub use curvature::{
    constant_curvature_fit, ricci_alpha_antisym_relation, ricci_alpha_closed_form, riemann,
    CurvatureAtPoint,
};
pub use diagnostics::{
    run_suite, CheckContext, CheckResult, DiagnosticReport, DiagnosticsError, SuiteConfig, Verdict,
};
pub use expr::{EvalError, Jet2, ParseError, ScalarField};
pub use families::{
    alpha_conformal, euclidean, exponential_family_from_potential, normal_family, random_spec,
    recurrent_from, sphere_chart, FamilyError, RiemannianSpec,
};
pub use linalg::{Cholesky, SpdError};
pub use manifold::format::FormatError;
pub use manifold::geometry::{
    christoffel_alpha, dchristoffel_alpha, geometry_at, nabla_g, GeometryAtPoint, GeometryError,
};
pub use manifold::{ManifoldSpec, PointFailure, SpecError, ValidationReport, MAX_DIM};
pub use sampling::{sample_box, SamplePlan};
pub use tensor::{SymGroup, Tensor, TensorError, Variance};
pub use volume::{
    parallel_volume, path_independence_probe, tau, tau_closedness_residual, PriorError, PriorGrid,
};
