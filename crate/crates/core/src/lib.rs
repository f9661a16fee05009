//! Real-space quantum simulation on a periodic Fourier grid: spectral
//! transforms, split-operator propagation, Coulomb-type potentials and a
//! gradient optimizer that escapes saddles with simulated wave packets.

pub mod error;
pub mod lattice;
pub mod optimizer;
pub mod potentials;
pub mod propagate;
pub mod spectral;

pub use error::{Error, Result};
