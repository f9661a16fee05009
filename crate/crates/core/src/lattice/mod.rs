//! Grids, node layout, wave-function storage and snapshots.

mod grid;
pub mod snapshot;
mod wavefunction;

pub use grid::{GridSpec, NodeIter, DEFAULT_MEMORY_CAP};
pub use snapshot::SnapshotHeader;
pub use wavefunction::{Representation, WaveFunction};
