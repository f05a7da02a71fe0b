// Index-heavy tensor arithmetic reads better with explicit loops.
#![allow(clippy::needless_range_loop)]

//! Construction and numerical verification of recursion tensors on tangent
//! bundles.
//!
//! Given a regular Lagrangian `L` on `TQ` and a type (1,1) tensor `J` on the
//! base `Q`, this crate builds the second closed two-form `omega_1`, the
//! recursion tensor `R` it determines against `omega_L`, the nonlinear
//! connection of the Euler-Lagrange field, and the full battery of derived
//! objects (Jacobi endomorphism, curvature, lifts, special conformal Killing
//! diagnostics, eigenstructure), then checks every identity relating them at
//! sampled chart points.

pub mod eigen_dn;
pub mod expr;
pub mod geometry;
pub mod lifts;
pub mod report;
pub mod rng;
pub mod sck;
pub mod smalllin;
pub mod sode;
pub mod suites;
pub mod symmat;
pub mod tensor_calc;

pub use expr::{parse, Expr, Point, Var};
pub use geometry::{load_scenario, Scenario};

/// Scale-aware closeness: `|a - b| <= tol * (1 + max(|a|, |b|))`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Scale-aware residual of `a` against `b`: `|a - b| / (1 + max(|a|,|b|))`.
pub fn rel_residual(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}
