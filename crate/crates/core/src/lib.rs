//! Lower and upper bounds on the norms of all solutions of uniformly
//! asymptotically stable linear systems `ẋ = A(t) x`.
//!
//! The central object is the weight matrix
//!
//! ```text
//! H(t) = ∫_t^∞ Φᵀ(τ, t) Φ(τ, t) dτ
//! ```
//!
//! which satisfies `Ḣ + AᵀH + HA = -I`. Its extreme eigenvalues give
//! envelopes for `‖x(t)‖` in both the Euclidean and the time-varying
//! `H(t)` norm, and a decay certificate `‖Φ(t, τ)‖ ≤ γ e^{-λ(t-τ)}`.
//!
//! Modules, bottom-up:
//!
//! - [`matrix`]: dense matrices, Jacobi eigensolver, `expm`, weighted norms
//! - [`expr`]: expressions in `t` for entries of `A(t)`
//! - [`ode`]: system descriptions, trajectories, transition matrices
//! - [`gramian`]: `H` for constant and time-varying `A`
//! - [`bounds`]: solution envelopes and certificates
//! - [`scenarios`]: built-in systems with closed-form references
//! - [`analysis`]: the end-to-end pipeline behind the `stabound` binary

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bounds;
pub mod error;
pub mod expr;
pub mod gramian;
pub mod matrix;
pub mod ode;
pub mod scenarios;

pub use error::{Error, Result};
pub use matrix::{Matrix, SymMatrix};
pub use ode::{OdeOptions, SystemSpec, TimeGrid, Trajectory};
