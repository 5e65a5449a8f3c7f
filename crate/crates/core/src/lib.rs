//! Constructive machinery for strong-domination martingale inequalities.
//!
//! The crate is organised bottom-up:
//!
//! * [`rearrange`]: step functions on a uniform grid of `[0, 1]`, decreasing
//!   rearrangements, K-functional partial integrals, weak majorization and the
//!   `E[λ ∨ |f|]` functional.
//! * [`matrix`] and [`stochmat`]: dense square matrices, permutations, and the
//!   doubly stochastic toolbox (classification, Birkhoff decomposition,
//!   embedding, completion, signed decomposition, centering).
//! * [`transfer`]: operators `T` with `Tf = g` and row/column absolute sums at
//!   most one, built from a weak-majorization certificate.
//! * [`marttree`]: martingale difference sequences on a uniform tree, the
//!   domination checks, exact and Monte Carlo `L_p` norms, pair generators and
//!   the randomized-index pipeline.
//! * [`gridapprox`]: projection of rational-breakpoint step functions onto a
//!   common uniform grid while keeping zero means and majorization.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and runs sequentially otherwise. Results are
//! identical in both modes.

pub mod error;
pub mod gridapprox;
pub mod marttree;
pub mod matrix;
pub mod par;
pub mod rearrange;
pub mod rng;
pub mod stochmat;
pub mod transfer;

pub use error::{Error, Result};
pub use matrix::{Matrix, Permutation};
pub use rearrange::StepFunction;

/// Absolute tolerance applied to every `≤` comparison unless overridden.
pub const DEFAULT_TOL: f64 = 1e-9;
