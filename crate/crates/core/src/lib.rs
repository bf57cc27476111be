//! Curvature toolkit for doubly warped metrics on the complement of a
//! totally geodesic real hyperbolic plane inside the complex hyperbolic
//! plane.
//!
//! The metric is described in polar coordinates around the removed
//! hyperplane by three radial warp functions: `v` scaling the angular
//! circle, and `h_theta`, `h_r` scaling the two directions along the
//! hyperplane. The crate provides
//!
//! * exact curvature formulas for such metrics in an orthonormal frame,
//!   plus an independent connection-based oracle ([`frame`]),
//! * the background model metric, its complex structure and the
//!   structure constants of the frame bracket ([`model`]),
//! * a piecewise construction of warp functions that interpolate between
//!   a cusp-like collar near the hyperplane and the model metric far
//!   away, with controlled corner smoothing ([`schedule`]),
//! * a negative-curvature audit of the constructed metric: pointwise
//!   certificates, randomized plane searches and a deep-collar
//!   regularity probe ([`audit`]).
//!
//! Everything radial is done in log space. The interesting radii span
//! thousands of units, over which the warps themselves overflow `f64`;
//! `ln v`, `(ln v)'` and `(ln v)''` stay tame and the curvature formulas
//! only ever need those three numbers per warp.

// `!(x > 0.0)` guards are deliberate: unlike `x <= 0.0` they also reject
// NaN, which is exactly what the domain checks need. Index loops over the
// 4x4x(4x4) tensors stay index-based to mirror the tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod audit;
pub mod error;
pub mod frame;
pub mod model;
pub mod schedule;

pub use audit::{
    audit_point, audit_profile, aregularity_probe, certify_point, default_scan_bounds,
    inequality_margins, plane_extremes, region6_components, region6_reduced_p,
    region6_reduced_vertex,
    sectional_curvature, sectional_curvature_equal_warp, sectional_curvature_general,
    AuditOptions, AuditReport, AuditRow, CertRoute, CertStatus, Certificate, InequalityMargins,
    PlaneExtremes, PlaneSpec, RegionStats, TailProbe, TailProbeOptions,
};
pub use error::{Error, Result};
pub use frame::{
    bianchi_residual, curvature_components, curvature_components_equal_warp,
    curvature_components_equal_warp_log, curvature_components_log, expand_full_tensor,
    koszul_curvature_oracle, koszul_full_tensor, lie_brackets, lie_brackets_log,
    BracketCoefficients, BracketTable, ConnectionCoefficients, CurvatureComponents, FullTensor,
    LogWarpState, WarpFunctions, WarpState,
};
pub use model::{
    alpha_system, belegradek_consistency, bracket_of, kahler_curvature, model_components,
    model_state, nijenhuis_residual, solve_alpha, AlphaSolution, AlphaSystem, ComplexStructure,
    ModelProfile,
};
pub use schedule::{
    build_profile, compute_schedule, CornerSmoother, CubicInterpolant, ProfileConfig,
    RegionSchedule, WarpProfile,
};
