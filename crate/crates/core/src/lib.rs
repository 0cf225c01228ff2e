//! Volume-of-tubes geometric constants and tail probabilities for the
//! supremum of Gaussian, Studentized, and uniform-on-sphere processes.
//!
//! A smooth map `l : X ⊂ R^d → R^n` (or, equivalently, a covariance kernel
//! `σ(x, x') = ⟨l(x), l(x')⟩`) induces a manifold `M = {l(x)/‖l(x)‖}` on the
//! unit sphere.  The probability that a Gaussian process with index set `M`
//! exceeds a level anywhere is governed, to high accuracy, by the volume of a
//! tubular neighborhood of `M`, which expands in geometric invariants of `M`:
//! its volume, boundary volume, and curvature integrals.
//!
//! The crate is organized bottom-up:
//!
//! * [`specfun`] — log-gamma, incomplete gamma/beta, chi-square / beta / F /
//!   normal tails, sphere areas and ball volumes.
//! * [`linalg`] — dense matrices, Householder QR, triangular solves,
//!   symmetric and pivoted Cholesky factorizations.
//! * [`quadrature`] — composite Simpson product rules over coordinate
//!   rectangles, their boundary faces, and corner strata, with support for
//!   periodic axes and excluded slabs.
//! * [`geometry`] — differential geometry of the normalized manifold from
//!   first/second derivative data: induced metric, second fundamental form,
//!   scalar curvature, boundary geodesic-curvature traces, wedge angles.
//! * [`manifold`] — the evaluation callback contract (vector or covariance
//!   form) shared by integration and simulation.
//! * [`tube`] — the tube constants `kap[0..4]` and the Euclidean/spherical
//!   tube-volume formulas.
//! * [`prob`] — tail probabilities and critical values for sup processes.
//! * [`models`] — three end-to-end applications: a nonlinear regression
//!   lack-of-fit test, simultaneous confidence bands for quadratic
//!   regression, and a Gaussian mixture score test.
//! * [`mc`] — Monte Carlo validation of tube approximations with
//!   reproducible per-replicate random streams.

// Guards written as `!(x > 0.0)` are deliberate: unlike `x <= 0.0`, they
// also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod manifold;
pub mod mc;
pub mod models;
pub mod prob;
pub mod quadrature;
pub mod specfun;
pub mod tube;

pub use error::{CoreError, Result};
pub use geometry::{
    boundary_frame, cov_side, frame_from_covariance, frame_from_vector, wedge_angle, BoundaryFrame,
    CovarianceJet, Frame, JetOrder, VectorJet,
};
pub use manifold::{
    frame_at, unit_vector, CovarianceManifoldFn, EvalMode, Manifold, VectorManifoldFn,
};
pub use mc::{simulate_sup_tail, McComparison, McOptions, McReport};
pub use models::Dataset;
pub use prob::{critval, tailp, ProcessKind, ProcessSpec, Side, TailProbability};
pub use quadrature::{
    integrate_corners, integrate_corners_many, integrate_faces, integrate_faces_many,
    integrate_rect, integrate_rect_many, simpson_intervals, simpson_rule, Corner, DomainRect, Face,
    QuadRule,
};
pub use specfun::{
    ball_volume, beta_tail, chisq_tail, f_tail, log_gamma, normal_tail, sphere_area, Probability,
};
pub use tube::{
    euclidean_tube_volume, spherical_tube_volume, tube_constants, Breakdown, TubeConstants,
    TubeOptions,
};
