//! Numerics for a momentum-selective point defect ("dynamical daemon") in a
//! one-dimensional box and for its dielectric-cavity emulation.
//!
//! The crate is `no_std` with `alloc`. Enable `std` to get
//! `std::error::Error` on [`Error`] through the `core` re-export.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classical;
pub mod dielectric;
pub mod em;
mod error;
pub mod greens;
pub mod lattice;
pub mod observables;
pub mod quad;
pub mod si;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Heaviside step with the half-maximum convention at the origin.
pub fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}
