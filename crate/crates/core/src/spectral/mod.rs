//! Shifted Fourier transform, kinetic diagonal and truncation bounds.

mod bounds;
mod kinetic;
mod qsft;

pub use bounds::{fourier_decay_bound, select_truncation, spectral_error_bound, TruncationReport};
pub use kinetic::KineticDiagonal;
pub use qsft::{qsft, Direction, Qsft, ShiftedDft};

/// Kinetic eigenvalues for `grid`.
pub fn kinetic_eigenvalues(grid: crate::lattice::GridSpec) -> KineticDiagonal {
    KineticDiagonal::new(grid)
}
