use rayon::prelude::*;
use rsqs::optimizer::{
    convex_bowl, double_well, pgd_qs, quadratic, rosenbrock_like, EscapeConfig, ObjectiveSpec, PerturbationScale,
    SampleMode, SimulationConfig,
};
use serde::{Deserialize, Serialize};

use super::Run;
use crate::artifacts::Artifacts;
use crate::config::require;
use crate::error::{invalid, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub objective: ObjectiveConfig,
    pub eps: f64,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default = "default_c_r")]
    pub c_r: f64,
    pub t_prime: Option<f64>,
    pub eta_step: Option<f64>,
    #[serde(default)]
    pub perturbation: Perturbation,
    #[serde(default)]
    pub simulation: SimulationBlock,
    /// Start point; the benchmark's own start when absent.
    pub x0: Option<Vec<f64>>,
    pub rng_seed: Option<u64>,
}

fn default_seeds() -> u64 {
    30
}

fn default_iters() -> usize {
    10_000
}

fn default_c_r() -> f64 {
    0.1
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    DoubleWell { dim: usize },
    Quadratic { lambdas: Vec<f64> },
    ConvexBowl { dim: usize },
    RosenbrockLike,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    #[default]
    SqrtEpsOverRho,
    SqrtRhoOverEps,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Auto,
    FullGrid,
    Separable,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationBlock {
    pub n: usize,
    pub mollify_fraction: f64,
    pub kick_scale: f64,
    pub min_steps: u64,
    pub max_steps: u64,
    pub fixed_steps: Option<u64>,
    pub k: usize,
    pub mode: Mode,
}

impl Default for SimulationBlock {
    fn default() -> Self {
        let d = SimulationConfig::default();
        Self {
            n: d.n,
            mollify_fraction: d.mollify_fraction,
            kick_scale: d.kick_scale,
            min_steps: d.min_steps,
            max_steps: d.max_steps,
            fixed_steps: d.fixed_steps,
            k: d.k,
            mode: Mode::Auto,
        }
    }
}

#[derive(Debug, Serialize)]
struct Outcome {
    seed: u64,
    certified: bool,
    hit_max_iters: bool,
    iters: usize,
    sim_calls: usize,
    f: f64,
    grad_norm: f64,
    eps: f64,
    min_eigenvalue: f64,
    curvature_floor: f64,
    x: String,
}

#[derive(Debug, Serialize)]
struct Trace {
    seed: u64,
    iter: usize,
    grad_norm: f64,
    f: f64,
    sim_calls: usize,
    t_prime: f64,
}

#[derive(Debug, Serialize)]
struct Call {
    seed: u64,
    iter: usize,
    t_prime: f64,
    steps: u64,
    xi: String,
    delta: String,
    f_plus: f64,
    f_minus: f64,
    chose_plus: bool,
}

#[derive(Debug, Serialize)]
struct Summary {
    objective: String,
    dim: usize,
    eps: f64,
    seeds: u64,
    base_seed: u64,
    successes: u64,
    success_rate: f64,
    required_rate: f64,
    total_sim_calls: usize,
}

fn join(v: &[f64]) -> String {
    v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn run(cfg: OptimizeConfig, base_seed: u64) -> Result<Run> {
    let obj = match &cfg.objective {
        ObjectiveConfig::DoubleWell { dim } => {
            require(*dim >= 1, || "double_well needs dim >= 1".into())?;
            double_well(*dim)
        }
        ObjectiveConfig::Quadratic { lambdas } => {
            require(!lambdas.is_empty() && lambdas.iter().any(|l| *l != 0.0), || {
                "quadratic needs at least one nonzero lambda".into()
            })?;
            quadratic(lambdas)
        }
        ObjectiveConfig::ConvexBowl { dim } => {
            require(*dim >= 1, || "convex_bowl needs dim >= 1".into())?;
            convex_bowl(*dim)
        }
        ObjectiveConfig::RosenbrockLike => rosenbrock_like(),
    };
    let obj: ObjectiveSpec = match &cfg.x0 {
        Some(x0) => obj.with_start(x0.clone()),
        None => obj,
    };
    obj.validate().map_err(invalid)?;
    require(cfg.eps > 0.0, || "eps must be positive".into())?;
    require(cfg.seeds >= 1, || "seeds must be at least 1".into())?;
    require(cfg.c_r > 0.0, || "c_r must be positive".into())?;
    let s = &cfg.simulation;
    require(s.n >= 6 && s.n % 2 == 0, || "simulation n must be even and at least 6".into())?;
    require(s.k >= 1 && s.min_steps >= 1 && s.max_steps >= s.min_steps, || {
        "simulation needs k >= 1 and 1 <= min_steps <= max_steps".into()
    })?;
    require((0.0..0.5).contains(&s.mollify_fraction) && s.kick_scale > 0.0, || {
        "simulation needs 0 <= mollify_fraction < 0.5 and kick_scale > 0".into()
    })?;
    let sim = SimulationConfig {
        n: s.n,
        mollify_fraction: s.mollify_fraction,
        kick_scale: s.kick_scale,
        min_steps: s.min_steps,
        max_steps: s.max_steps,
        fixed_steps: s.fixed_steps,
        k: s.k,
        mode: match s.mode {
            Mode::Auto => SampleMode::Auto,
            Mode::FullGrid => SampleMode::FullGrid,
            Mode::Separable => SampleMode::Separable,
        },
    };
    if matches!(s.mode, Mode::Separable) {
        require(obj.is_separable(), || "separable mode needs a separable objective".into())?;
    }
    let escape = |seed: u64| EscapeConfig {
        eps: cfg.eps,
        c_r: cfg.c_r,
        t_prime: cfg.t_prime,
        eta_step: cfg.eta_step,
        max_iters: cfg.max_iters,
        rng_seed: seed,
        perturbation: match cfg.perturbation {
            Perturbation::SqrtEpsOverRho => PerturbationScale::SqrtEpsOverRho,
            Perturbation::SqrtRhoOverEps => PerturbationScale::SqrtRhoOverEps,
        },
        sim,
    };
    let configs: Vec<EscapeConfig> = (0..cfg.seeds).map(|i| escape(base_seed.wrapping_add(i))).collect();

    Ok(Box::new(move || {
        let outs = configs
            .par_iter()
            .map(|c| pgd_qs(&obj, c).map(|o| (c.rng_seed, o)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let floor = -(obj.rho * cfg.eps).sqrt();
        let (mut outcomes, mut traces, mut calls) = (Vec::new(), Vec::new(), Vec::new());
        for (seed, o) in &outs {
            outcomes.push(Outcome {
                seed: *seed,
                certified: o.certified,
                hit_max_iters: o.hit_max_iters,
                iters: o.iters,
                sim_calls: o.calls.len(),
                f: o.f,
                grad_norm: o.grad_norm,
                eps: cfg.eps,
                min_eigenvalue: o.min_eigenvalue,
                curvature_floor: floor,
                x: join(&o.x),
            });
            traces.extend(o.trace.iter().map(|t| Trace {
                seed: *seed,
                iter: t.iter,
                grad_norm: t.grad_norm,
                f: t.f,
                sim_calls: t.sim_calls,
                t_prime: t.t_prime,
            }));
            calls.extend(o.calls.iter().map(|c| Call {
                seed: *seed,
                iter: c.iter,
                t_prime: c.t_prime,
                steps: c.steps,
                xi: join(&c.xi),
                delta: join(&c.delta),
                f_plus: c.candidates.0,
                f_minus: c.candidates.1,
                chose_plus: c.chose_plus,
            }));
        }
        let successes = outs.iter().filter(|(_, o)| o.certified).count() as u64;
        let summary = Summary {
            objective: obj.name.clone(),
            dim: obj.dim,
            eps: cfg.eps,
            seeds: cfg.seeds,
            base_seed,
            successes,
            success_rate: successes as f64 / cfg.seeds as f64,
            required_rate: 2.0 / 3.0,
            total_sim_calls: calls.len(),
        };
        let mut art = Artifacts::default();
        art.csv("outcomes.csv", &outcomes)?;
        art.csv("trace.csv", &traces)?;
        art.csv("calls.csv", &calls)?;
        art.json("summary.json", &summary)?;
        if 3 * successes < 2 * cfg.seeds {
            art.fail(format!("success rate {successes}/{} is below 2/3", cfg.seeds));
        }
        Ok(art)
    }))
}
