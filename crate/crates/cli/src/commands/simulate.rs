use num_complex::Complex64;
use rsqs::lattice::snapshot::write_snapshot;
use rsqs::lattice::WaveFunction;
use rsqs::potentials::PotentialKind;
use rsqs::propagate::{
    dense_reference_evolve, evolve_rescaled_with, evolve_with, EvolveOptions, RescaledClock, SliceRule,
    DEFAULT_QUAD_POINTS,
};
use serde::{Deserialize, Serialize};

use super::Run;
use crate::artifacts::Artifacts;
use crate::config::{require, suzuki, CoefficientChoice, GridConfig, InitialConfig, PlannerConfig, PotentialConfig};
use crate::error::Result;

/// Largest grid checked against the dense oracle by default.
const ORACLE_CAP: usize = 4096;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub initial: InitialConfig,
    pub propagator: PropagatorConfig,
    /// Diagnostics row interval in steps; the final step is always recorded.
    #[serde(default = "default_every")]
    pub diagnostics_every: u64,
    /// Compare against the dense oracle; defaults to on for grids of at most
    /// 4096 nodes.
    pub oracle: Option<bool>,
    pub rng_seed: Option<u64>,
}

fn default_every() -> u64 {
    100
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorConfig {
    pub k: usize,
    pub t: f64,
    pub planner: PlannerConfig,
    #[serde(default)]
    pub coefficients: CoefficientChoice,
    pub h_norm: Option<f64>,
    /// Slice uniformly in the integrated max-norm instead of in time.
    pub rescaled: Option<RescaledConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaledConfig {
    #[serde(default = "default_quad")]
    pub quad_points: usize,
    /// Fixed slice count; otherwise taken from the planner.
    pub slices: Option<u64>,
}

fn default_quad() -> usize {
    DEFAULT_QUAD_POINTS
}

#[derive(Debug, Serialize)]
struct Summary {
    grid_n: usize,
    grid_dim: usize,
    point_count: usize,
    t: f64,
    k: usize,
    eps: Option<f64>,
    steps: u64,
    kicks: u64,
    planned_exponentials: Option<u64>,
    h_bound: Option<f64>,
    richardson_estimate: Option<f64>,
    f_max1: Option<f64>,
    initial_norm: f64,
    final_norm: f64,
    norm_drift: f64,
    oracle_error: Option<f64>,
    /// Error against the analytic plane-wave solution, when it applies.
    phase_error: Option<f64>,
    /// Tolerance the phase error is checked against.
    phase_tolerance: Option<f64>,
    rng_seed: u64,
}

#[derive(Debug, Serialize)]
struct DiagRow {
    step: u64,
    time: f64,
    norm: f64,
    energy: f64,
}

const PHASE_TOLERANCE: f64 = 1e-10;

pub fn run(cfg: SimulateConfig, seed: u64) -> Result<Run> {
    let grid = cfg.grid.build()?;
    let v = cfg.potential.build_for(&grid)?;
    let psi0 = cfg.initial.build(grid)?;
    let p = &cfg.propagator;
    let order = suzuki(p.k, p.coefficients)?;
    let planner = p.planner.build()?;
    require(p.t.is_finite(), || "propagator t must be finite".into())?;
    require(cfg.diagnostics_every >= 1, || "diagnostics_every must be at least 1".into())?;
    if let Some(r) = &p.rescaled {
        require(r.quad_points >= 2, || "rescaled quad_points must be at least 2".into())?;
        require(p.t >= 0.0, || "rescaled evolution runs forward in time only".into())?;
        require(r.slices.is_some() || p.planner.eps().is_some(), || {
            "rescaled evolution needs `slices` or a planner with eps".into()
        })?;
    }
    let oracle = cfg.oracle.unwrap_or(grid.point_count() <= ORACLE_CAP);
    let plane_wave = match (&cfg.initial, &v.kind) {
        (InitialConfig::PlaneWave { .. }, PotentialKind::Zero) => Some(cfg.initial.plane_wave_frequencies(&grid)?),
        _ => None,
    };

    Ok(Box::new(move || {
        let p = &cfg.propagator;
        let mut opts = EvolveOptions::new(order, planner);
        opts.h_norm = p.h_norm;
        opts.diagnostics_every = Some(cfg.diagnostics_every);
        let (out, f_max1) = match &p.rescaled {
            None => (evolve_with(&psi0, &v, p.t, &opts)?, None),
            Some(r) => {
                let clock = RescaledClock::build(&v, p.t, &grid, r.quad_points)?;
                let rule = match (r.slices, p.planner.eps()) {
                    (Some(m), _) => SliceRule::Fixed(m),
                    (None, Some(eps)) => SliceRule::Adaptive { eps, initial: 1, max: 1 << 24 },
                    (None, None) => unreachable!("checked while reading the config"),
                };
                let f_max1 = clock.f_max1;
                (evolve_rescaled_with(&psi0, &v, &clock, &order, rule)?, Some(f_max1))
            }
        };
        let oracle_error = if oracle {
            Some(out.psi.relative_distance(&dense_reference_evolve(&psi0, &v, p.t)?))
        } else {
            None
        };
        let phase_error = plane_wave.as_ref().map(|q| {
            let omega: f64 = q.iter().map(|qa| 0.5 * qa * qa).sum();
            let exact = WaveFunction::from_fn(grid, |x| {
                Complex64::from_polar(1.0, x.iter().zip(q).map(|(xa, qa)| qa * xa).sum::<f64>() - omega * p.t)
            })
            .normalize_discrete()
            .expect("plane wave has nonzero norm");
            out.psi.relative_distance(&exact)
        });
        let (n0, n1) = (psi0.norm(), out.psi.norm());
        let summary = Summary {
            grid_n: grid.n(),
            grid_dim: grid.dim(),
            point_count: grid.point_count(),
            t: p.t,
            k: p.k,
            eps: p.planner.eps(),
            steps: out.steps,
            kicks: out.kicks,
            planned_exponentials: out.plan.map(|pl| pl.exponentials),
            h_bound: out.plan.map(|pl| pl.h_bound),
            richardson_estimate: out.richardson_estimate,
            f_max1,
            initial_norm: n0,
            final_norm: n1,
            norm_drift: (n1 - n0).abs() / n0,
            oracle_error,
            phase_error,
            phase_tolerance: phase_error.map(|_| PHASE_TOLERANCE),
            rng_seed: seed,
        };

        let mut art = Artifacts::default();
        let mut snap = Vec::new();
        write_snapshot(&out.psi, &mut snap)?;
        art.add("final.snap", snap);
        let rows: Vec<DiagRow> = out
            .diagnostics
            .iter()
            .map(|d| DiagRow { step: d.step, time: d.time, norm: d.norm, energy: d.energy })
            .collect();
        art.csv("diagnostics.csv", &rows)?;
        art.json("summary.json", &summary)?;
        if let (Some(err), Some(eps)) = (oracle_error, p.planner.eps()) {
            if err > eps {
                art.fail(format!("oracle error {err:e} exceeds eps {eps:e}"));
            }
        }
        if let Some(err) = phase_error {
            if err > PHASE_TOLERANCE {
                art.fail(format!("plane-wave phase error {err:e} exceeds {PHASE_TOLERANCE:e}"));
            }
        }
        Ok(art)
    }))
}
