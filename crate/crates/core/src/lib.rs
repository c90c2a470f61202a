//! Error-bound analysis for convex functions on finite-dimensional spaces.
//!
//! The library answers three related questions for a convex function `f`
//! with solution set `S_f = {x : f(x) <= 0}`:
//!
//! 1. **How strong is the error bound?**  The global modulus is the infimum
//!    of `f(x) / d(x, S_f)` over infeasible points; the local modulus is the
//!    same infimum localized to a neighborhood of a boundary point.  Both are
//!    computed two ways — the direct ratio, and the primal route through the
//!    sphere-minimized directional derivative `phi(x) = inf_{||h||=1} f'(x; h)`
//!    — which agree in theory and are cross-checked here in practice.
//! 2. **Does the error bound survive small tilts?**  A tilt replaces `f` by
//!    `g = f + eps * <u, . - anchor>`.  Stability at a boundary point is
//!    equivalent to `phi(anchor) != 0`; when `phi` vanishes, a destabilizing
//!    tilt with an explicit witness is constructed.
//! 3. **What is the Hoffman constant of a linear inequality system?**  For
//!    `f(x) = max_t (<a_t, x> - b_t)` the boundary active sets are enumerated
//!    exactly, each contributes a certified sphere-minimum, and their smallest
//!    magnitude is a lower bound for the sampled Hoffman constant, including
//!    under row-wise perturbation sweeps.
//!
//! Modules build bottom-up: [`geometry`] owns vectors, norms, the minimum-norm
//! point of a hull, and polyhedral projection; [`convex`] owns the function
//! representations and directional derivatives; [`sphere`] minimizes
//! derivatives over unit spheres; [`moduli`], [`stability`], and [`hoffman`]
//! implement the analysis layers; [`oracle`] provides slow, independent
//! brute-force checks used by the test suite and the `oracle-check` command;
//! [`corpus`] ships the reference systems and a seeded generator.

#![forbid(unsafe_code)]

pub mod convex;
pub mod corpus;
pub mod error;
pub mod ext;
pub mod geometry;
pub mod hoffman;
pub mod moduli;
pub mod oracle;
pub mod sphere;
pub mod stability;

mod linalg;
mod lp;
mod patterns;
mod sample;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use geometry::{NormSpec, Polyhedron, Vector};
