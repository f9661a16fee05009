//! Split-operator propagation: Suzuki product formulas, step planning,
//! equal-`L1` time slicing and a dense reference solver.

mod clock;
pub mod dense;
mod evolve;
mod plan;
mod split;

pub use clock::RescaledClock;
pub use dense::{dense_hamiltonian, dense_qsft_matrix, dense_reference_evolve, dense_reference_evolve_with};
pub use evolve::{
    evolve, evolve_rescaled, evolve_rescaled_with, evolve_with, potential_max_norm, DiagnosticRow,
    EvolveOptions, EvolveOutcome, Planner, SliceRule, DEFAULT_QUAD_POINTS,
};
pub use plan::{default_h_norm, plan_steps, StepPlan};
pub use split::{
    apply_kinetic_phase, apply_potential_phase, strang_step, suzuki_step, SplitOperator,
    SuzukiCoefficients, SuzukiOrder,
};

/// Tabulate the rescaled clock for `v` over `[0, T]` on `grid`.
pub fn build_rescaled_clock(
    v: &crate::potentials::PotentialSpec,
    t_total: f64,
    grid: &crate::lattice::GridSpec,
    quad_points: usize,
) -> crate::Result<RescaledClock> {
    RescaledClock::build(v, t_total, grid, quad_points)
}
