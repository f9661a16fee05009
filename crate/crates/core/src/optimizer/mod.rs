//! Perturbed gradient descent that escapes saddle points with perturbation
//! directions sampled from a simulated wave packet.

mod objective;
mod packet;
mod pgd;
mod sample;

pub use objective::{
    convex_bowl, double_well, finite_diff_gradient, finite_diff_hessian, min_hessian_eigenvalue,
    quadratic, rosenbrock_like, AxisFn, ObjectiveFn, ObjectiveSpec,
};
pub use packet::{gaussian_packet, position_moments, MIN_SPACINGS};
pub use pgd::{escape_time, pgd_qs, EscapeConfig, PerturbationScale, PgdOutcome, SimCall, TraceRow};
pub use sample::{
    mollifier, quantum_sim_sample, simulate_packet, SampleMode, Simulation, SimulationBox,
    SimulationConfig,
};
