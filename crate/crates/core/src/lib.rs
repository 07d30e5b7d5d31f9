//! Ground states of generalized spin-boson Hamiltonians on truncated Fock
//! spaces, together with numerical checks of the pull-through formula and the
//! boson-number moment identities that follow from it.

pub mod error;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod modes;
pub mod regularity;
pub mod spectral;

pub use error::{GsbError, Result};

#[cfg(test)]
mod testing;
