//! Numerical laboratory for the Fisher-KPP equation
//!
//! ```text
//!     u_t = u_xx + a(t) u (1 - u)
//! ```
//!
//! with a time-dependent, possibly random, growth rate `a(t)`.
//!
//! The crate is organised by stage of an experiment:
//!
//! * [`coeff`]: growth-rate paths (constant, periodic, the explicit
//!   oscillating example, squashed Ornstein-Uhlenbeck noise and its
//!   random equilibrium), windowed means and the bounded-primitive
//!   block decomposition.
//! * [`equilibria`]: closed-form spatially homogeneous solutions, the
//!   random equilibrium and the exponential stability bound.
//! * [`kppsolve`]: a monotone finite-difference solver in fixed or moving
//!   frames.
//! * [`fronts`]: level-crossing tracking, speed estimation, spreading
//!   interval probes and the subadditivity diagnostic.
//! * [`subsuper`]: explicit super- and subsolutions and their
//!   certification against computed solutions.

pub mod coeff;
pub mod equilibria;
mod error;
pub mod fmt;
pub mod fronts;
pub mod kppsolve;
pub mod subsuper;

pub use error::{Error, Result};
