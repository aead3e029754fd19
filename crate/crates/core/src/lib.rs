//! Bit-accurate model of an exact LMMSE preprocessing engine for massive
//! MU-MIMO: regularized Gram matrix, block-LDL factorization with 2×2
//! blocks, and an inverse obtained by backward substitution that never forms
//! the inverse of the triangular factor.
//!
//! * [`fxp`] fixed-point scalars, complex values, Newton-Raphson reciprocal
//! * [`prep`] the preprocessing algorithms in double precision and fixed point
//! * [`archsim`] cycle-accurate model of the systolic array and BLDL engine
//! * [`linksim`] Monte-Carlo uncoded BER harness
//! * [`io`] matrix files, key=value configs and report formats

pub mod archsim;
pub mod dense;
mod error;
pub mod fxp;
pub mod io;
pub mod linksim;
pub mod prep;

pub use error::{Error, Result};
