//! Lattice discretizations of fractional Sobolev energies, relative
//! capacities, principal frequencies and capacitary inradii.
//!
//! Works without `std` (an allocator is required); enable the `std` feature
//! for hardware floating point routines.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops read better than zipped iterators in the numerical kernels.
#![allow(clippy::needless_range_loop)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constants;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod params;
pub mod quad;
pub mod solvers;

pub use error::{Error, Result};

mod prelude {
    pub use alloc::vec::Vec;
    pub use alloc::{format, vec};

    // Float supplies the math methods when std is absent.
    pub use num_traits::Float;

    pub use crate::error::{Error, Result};
}
pub use params::FracParams;
