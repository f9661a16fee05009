use rayon::prelude::*;
use rsqs::propagate::{
    dense_reference_evolve, dense_reference_evolve_with, evolve_with, suzuki_step, EvolveOptions, Planner,
};
use serde::{Deserialize, Serialize};

use super::{log_log_slope, Run};
use crate::artifacts::Artifacts;
use crate::config::{require, suzuki, CoefficientChoice, GridConfig, InitialConfig, PotentialConfig};
use crate::error::Result;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderConfig {
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub initial: InitialConfig,
    /// Final time of the global test.
    pub t: f64,
    #[serde(default)]
    pub mode: OrderMode,
    #[serde(default)]
    pub coefficients: CoefficientChoice,
    #[serde(default = "default_orders")]
    pub orders: Vec<OrderSweep>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Magnus sub-steps of the oracle for time-dependent potentials.
    pub magnus_steps: Option<usize>,
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderMode {
    /// Error after `T` with `r` steps; expected slope `2k` in `tau = T / r`.
    #[default]
    Global,
    /// Error of one step; expected slope `2k + 1`.
    Local,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderSweep {
    pub k: usize,
    /// Step counts (global mode) or step sizes (local mode); defaults depend
    /// on `k` and the mode.
    pub global_steps: Option<Vec<u64>>,
    pub local_taus: Option<Vec<f64>>,
}

fn default_orders() -> Vec<OrderSweep> {
    (1..=3).map(|k| OrderSweep { k, global_steps: None, local_taus: None }).collect()
}

fn default_tolerance() -> f64 {
    0.2
}

fn default_steps(k: usize) -> Vec<u64> {
    if k >= 3 {
        vec![96, 128, 160, 192]
    } else {
        vec![64, 128, 256, 512]
    }
}

fn default_taus(k: usize) -> Vec<f64> {
    match k {
        1 => vec![0.004, 0.002, 0.001],
        2 => vec![0.008, 0.004, 0.002, 0.001],
        _ => vec![0.008, 0.004, 0.002],
    }
}

#[derive(Debug, Serialize)]
struct Row {
    k: usize,
    tau: f64,
    error: f64,
    fitted_slope: f64,
    expected_slope: f64,
    tolerance: f64,
}

pub fn run(cfg: OrderConfig, _seed: u64) -> Result<Run> {
    let grid = cfg.grid.build()?;
    require(grid.point_count() <= 4096, || "order checks need at most 4096 grid points for the oracle".into())?;
    let v = cfg.potential.build_for(&grid)?;
    let psi0 = cfg.initial.build(grid)?;
    require(cfg.t > 0.0 && cfg.t.is_finite(), || "t must be positive".into())?;
    require(cfg.tolerance > 0.0, || "tolerance must be positive".into())?;
    require(!cfg.orders.is_empty(), || "orders must not be empty".into())?;
    let mut sweeps = Vec::new();
    for s in &cfg.orders {
        let order = suzuki(s.k, cfg.coefficients)?;
        let xs: Vec<f64> = match cfg.mode {
            OrderMode::Global => {
                let steps = s.global_steps.clone().unwrap_or_else(|| default_steps(s.k));
                require(steps.iter().all(|&r| r >= 1), || "global_steps must be positive".into())?;
                steps.iter().map(|&r| cfg.t / r as f64).collect()
            }
            OrderMode::Local => {
                let taus = s.local_taus.clone().unwrap_or_else(|| default_taus(s.k));
                require(taus.iter().all(|&t| t > 0.0), || "local_taus must be positive".into())?;
                taus
            }
        };
        require(xs.len() >= 2, || format!("k = {} needs at least two points for a slope", s.k))?;
        sweeps.push((order, xs));
    }

    Ok(Box::new(move || {
        let oracle = |t: f64| match cfg.magnus_steps {
            Some(m) => dense_reference_evolve_with(&psi0, &v, t, m),
            None => dense_reference_evolve(&psi0, &v, t),
        };
        let mode = cfg.mode;
        let exact_t = if mode == OrderMode::Global { Some(oracle(cfg.t)?) } else { None };
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (order, xs) in &sweeps {
            let errs = xs
                .par_iter()
                .map(|&tau| -> Result<f64> {
                    Ok(match &exact_t {
                        Some(exact) => {
                            let r = (cfg.t / tau).round() as u64;
                            let out = evolve_with(&psi0, &v, cfg.t, &EvolveOptions::new(*order, Planner::Fixed(r)))?;
                            out.psi.relative_distance(exact)
                        }
                        None => suzuki_step(&psi0, &v, 0.0, tau, order)?.relative_distance(&oracle(tau)?),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let slope = log_log_slope(xs, &errs);
            let k = order.k();
            let expected = match mode {
                OrderMode::Global => 2.0 * k as f64,
                OrderMode::Local => 2.0 * k as f64 + 1.0,
            };
            if !((slope - expected).abs() <= cfg.tolerance) {
                failures.push(format!("k = {k}: slope {slope:.3}, expected {expected} +- {}", cfg.tolerance));
            }
            for (tau, error) in xs.iter().zip(errs) {
                rows.push(Row { k, tau: *tau, error, fitted_slope: slope, expected_slope: expected, tolerance: cfg.tolerance });
            }
        }
        let mut art = Artifacts::default();
        art.csv("order.csv", &rows)?;
        if !failures.is_empty() {
            art.fail(failures.join("; "));
        }
        Ok(art)
    }))
}
