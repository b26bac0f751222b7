//! Variational solvers: relative capacity, principal frequencies, the torsion
//! function and Cheeger constants, for the nonlocal energy and for its local
//! nearest-neighbour counterpart.
//!
//! Every solver is sequential and deterministic.  A run that stops at its
//! iteration cap returns `converged = false` with the residual it reached
//! rather than an error, so callers can report it.

mod capacity;
mod cheeger;
pub(crate) mod descent;
mod frequency;
pub(crate) mod levelset;
pub(crate) mod system;
mod torsion;

pub use capacity::{capacity, capacity_with_kernel, local_capacity};
pub use cheeger::cheeger;
pub use frequency::{frequency, frequency_from, frequency_with_kernel, local_frequency};
pub use torsion::{torsion, torsion_domain};

use crate::lattice::{LatticeFunction, NearField};

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub value: f64,
    pub minimizer: LatticeFunction,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative tolerance for objective decrease, Newton decrement and
    /// eigen-residuals.
    pub tol: f64,
    /// Cap for iterative descent.
    pub max_iter: usize,
    pub newton_max_iter: usize,
    /// Largest free-variable count handled with dense factorisations.
    pub dense_limit: usize,
    pub near_band: usize,
    pub near_field: NearField,
    /// Smoothing widths for `|t|`, applied in order.
    pub smoothing: [f64; 3],
    /// Descent iterations per smoothing width.
    pub smoothing_iter: usize,
    /// Cap on single-cell flips when polishing sets.
    pub flip_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 2000,
            newton_max_iter: 80,
            dense_limit: 3000,
            near_band: 2,
            near_field: NearField::Auto,
            smoothing: [1e-2, 1e-3, 1e-4],
            smoothing_iter: 20,
            flip_limit: 100_000,
        }
    }
}
