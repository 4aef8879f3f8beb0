//! Poisson structures on `M × g*` induced by Lie group actions.
//!
//! The crate is `no_std` (with `alloc`). Every smooth map is written once
//! against [`scalar::Scalar`] and differentiated by evaluating it on dual
//! numbers, so brackets, Jacobians and Jacobi residuals are exact up to
//! rounding.

#![no_std]

extern crate alloc;

pub mod action;
pub mod algebroid;
pub mod expr;
pub mod frame;
pub mod hamilton;
pub mod lie;
pub mod linalg;
pub mod loopext;
pub mod poisson;
pub mod sample;
pub mod scalar;
pub mod smooth;
pub mod stargroup;

pub use action::{Action, ActionError, GroupAction, Parity};
pub use lie::{LieAlgebra, LieError};
pub use scalar::{Dual, Jet, Scalar};
pub use smooth::SmoothMap;
