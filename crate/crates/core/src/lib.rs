//! Numerical spectral analysis of non-selfadjoint quadratic and
//! doubly-characteristic semiclassical operators.
//!
//! The crate computes Hamilton maps and singular spaces of complex
//! quadratic forms, the subelliptic index `k0`, the exact spectral lattice
//! of elliptic-on-S quadratic operators together with leading-order
//! eigenvalue predictions for perturbed multi-well model problems, and
//! probes resolvent estimates numerically through a Hermite-Galerkin
//! oracle. A Wick-calculus module exercises the wave-packet transform and
//! the Wick/Weyl conversion identities on a grid.

pub mod error;
pub mod hermite;
pub mod lattice;
pub mod linalg;
pub mod models;
pub mod parse;
pub mod poly;
pub mod probe;
pub mod singular;
pub mod symplectic;
pub mod wick;

pub use error::{Error, Result};
pub use symplectic::{
    hamilton_map, polarized_eval, symplectic_product, verify_hamilton_identities, HamiltonMap,
    PhasePoint, QuadraticSymbol, SymplecticForm,
};
