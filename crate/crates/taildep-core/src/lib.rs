//! Tail dependence coefficients `chi` and `eta` for bivariate random scale
//! constructions `X = R (W1, W2)`: tail classes, norm geometry, symbolic
//! coefficients, quadrature and seeded simulation.

#![no_std]
// `!(a > b)` checks are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod depcalc;
pub mod distmodel;
pub mod error;
pub mod normgeom;
pub mod quad;
pub mod quadeval;
pub mod simest;
pub mod special;
pub mod tailclass;

pub use error::{Error, Result};
