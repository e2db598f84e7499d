//! Multi-configuration time-dependent Hartree-Fock on a one-dimensional grid.
//!
//! A state is a coefficient vector `C` over the `N`-subsets of `K` orbitals
//! together with `K` orthonormal orbitals sampled on the grid. The crate
//! covers the second-quantized algebra on configurations, reduced density
//! matrices, mean-field operators, time integration in arbitrary gauges,
//! stationary states, and a full configuration-interaction oracle on the grid.

// `!(x > 0.0)` style checks reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod ansatz;
pub mod cli;
pub mod density;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod meanfield;
pub mod oracle;
pub mod propagation;
pub mod random;
pub mod scenario;
pub mod stationary;
pub mod verify;

pub use error::{Error, Result};
