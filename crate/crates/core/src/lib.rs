//! Convergence rate and noise amplification of noisy two-step momentum methods
//! on strongly convex quadratics.
//!
//! The crate covers gradient descent, heavy-ball and Nesterov-type methods
//! `x[t+2] = x[t+1] + beta (x[t+1] - x[t]) - alpha grad f(x[t+1] + gamma (x[t+1] - x[t])) + sigma_w w[t]`
//! together with their continuous-time counterparts, and provides independent
//! Lyapunov and Monte Carlo oracles for every closed form.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod amplification;
pub mod continuous;
pub mod error;
pub mod families;
pub mod geometry;
pub mod quadratic;
pub mod simulation;

pub use error::{Error, Result};
