//! Numerical laboratory for the curvature algebra of symmetric bilinear forms.
//!
//! The crate computes pointwise invariants of a form `beta: V x V -> W`
//! (partial scalar curvatures, normal scalar curvature, DDVV-type deficits),
//! evaluates index-stratified determinant integrals over the unit normal
//! sphere, estimates the universal constants of the associated inequalities
//! by scale-invariant minimization, and integrates the deficits over
//! discretized compact submanifolds.
//!
//! Run `cargo run --example <name>` for a tour; see `examples/` for the list.

mod dd;

pub mod check;
pub mod cli;
pub mod config;
pub mod curvature;
pub mod delta;
pub mod error;
pub mod form;
pub mod immersion;
pub mod optimize;
pub mod sphere;
pub mod strata;

pub use error::{Error, Result};
pub use form::BilinearForm;
