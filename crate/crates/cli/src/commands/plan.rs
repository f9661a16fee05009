use rsqs::lattice::GridSpec;
use rsqs::propagate::{default_h_norm, plan_steps, potential_max_norm, RescaledClock, DEFAULT_QUAD_POINTS};
use rsqs::spectral::select_truncation;
use serde::{Deserialize, Serialize};

use super::Run;
use crate::artifacts::Artifacts;
use crate::config::{require, suzuki, CoefficientChoice, PotentialConfig};
use crate::error::{invalid, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub g_prime: f64,
    pub eps: f64,
    pub k: usize,
    pub t: f64,
    #[serde(default = "one")]
    pub d: usize,
    #[serde(default = "one")]
    pub eta: usize,
    /// Overrides the kinetic-plus-potential norm estimate.
    pub h_norm: Option<f64>,
    /// `max |f|` over the nodes when no potential is given.
    #[serde(default)]
    pub v_max: f64,
    /// Evaluated on the selected grid for `max |f|` and the integrated norm.
    pub potential: Option<PotentialConfig>,
    #[serde(default = "default_quad")]
    pub quad_points: usize,
    #[serde(default)]
    pub coefficients: CoefficientChoice,
    pub rng_seed: Option<u64>,
}

fn one() -> usize {
    1
}

fn default_quad() -> usize {
    DEFAULT_QUAD_POINTS
}

#[derive(Debug, Serialize)]
struct Report {
    g_prime: f64,
    eps: f64,
    k: usize,
    t: f64,
    omega: f64,
    n_closed_form: usize,
    n_selected: usize,
    point_count: usize,
    bound_abs: f64,
    bound_rel: f64,
    v_max: f64,
    h_norm: f64,
    exponentials: u64,
    steps: u64,
    tau: f64,
    exponentials_per_step: u64,
    /// Potential kicks with adjacent half kicks merged.
    potential_kicks: u64,
    kinetic_phases: u64,
    f_max1: Option<f64>,
    /// `f_max1 / (T max_t ||f(t)||max)`.
    l1_ratio: Option<f64>,
}

pub fn run(cfg: PlanConfig, _seed: u64) -> Result<Run> {
    let trunc = select_truncation(cfg.g_prime, cfg.eps).map_err(invalid)?;
    let order = suzuki(cfg.k, cfg.coefficients)?;
    require(cfg.t >= 0.0 && cfg.t.is_finite(), || "t must be finite and nonnegative".into())?;
    require(cfg.v_max >= 0.0, || "v_max must be nonnegative".into())?;
    require(cfg.quad_points >= 2, || "quad_points must be at least 2".into())?;
    if let Some(h) = cfg.h_norm {
        require(h > 0.0, || "h_norm must be positive".into())?;
    }
    let grid = GridSpec::new(cfg.eta, cfg.d, trunc.n_selected).map_err(invalid)?;
    let v = cfg.potential.as_ref().map(|p| p.build_for(&grid)).transpose()?;

    Ok(Box::new(move || {
        let (v_max, f_max1) = match &v {
            Some(v) => {
                let v_max = potential_max_norm(v, &grid, cfg.t)?;
                let f_max1 = if cfg.t > 0.0 {
                    Some(RescaledClock::build(v, cfg.t, &grid, cfg.quad_points)?.f_max1)
                } else {
                    Some(0.0)
                };
                (v_max, f_max1)
            }
            None => (cfg.v_max, None),
        };
        let h = cfg.h_norm.unwrap_or_else(|| default_h_norm(&grid, v_max));
        let plan = plan_steps(order, h, cfg.t, cfg.eps)?;
        let strang = order.strang_count();
        let report = Report {
            g_prime: cfg.g_prime,
            eps: cfg.eps,
            k: cfg.k,
            t: cfg.t,
            omega: trunc.omega,
            n_closed_form: trunc.n_closed_form,
            n_selected: trunc.n_selected,
            point_count: grid.point_count(),
            bound_abs: trunc.bound_abs(grid.dim()),
            bound_rel: trunc.bound_rel,
            v_max,
            h_norm: h,
            exponentials: plan.exponentials,
            steps: plan.r,
            tau: plan.tau,
            exponentials_per_step: order.exponentials_per_step(),
            potential_kicks: plan.r * (strang + 1),
            kinetic_phases: plan.r * strang,
            f_max1,
            l1_ratio: f_max1.filter(|_| cfg.t > 0.0 && v_max > 0.0).map(|f| f / (cfg.t * v_max)),
        };
        let mut art = Artifacts::default();
        art.json("plan.json", &report)?;
        Ok(art)
    }))
}
