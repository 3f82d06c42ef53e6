//! Critical points of the Ambrosio-Tortorelli energy
//!
//! `AT_eps(u, v) = int (eta + v^2) |grad u|^2 + eps |grad v|^2 + (1 - v)^2 / (4 eps)`
//!
//! with Dirichlet data `u = g`, `v = 1`, discretized by P1 elements on
//! uniform grids. The crate computes critical points by alternating
//! minimization, checks them a posteriori, evaluates outer and inner
//! variations, and follows the affine and jump branches as `eps -> 0`.

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod altmin;
pub mod cli;
pub mod continuation;
pub mod criticality;
pub mod elliptic;
pub mod energy;
pub mod error;
pub mod io;
pub mod measures;
pub mod mesh;
pub mod variations;

pub use error::{Error, Result};
