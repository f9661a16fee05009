use std::f64::consts::PI;

use rand::Rng;

use super::objective::ObjectiveSpec;
use super::packet::gaussian_packet;
use crate::error::{Error, Result};
use crate::lattice::{GridSpec, WaveFunction};
use crate::potentials::PotentialSpec;
use crate::propagate::{evolve_with, EvolveOptions, Planner, SuzukiOrder};

/// How the packet simulation is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Separable objectives run one simulation per axis, others the full grid.
    Auto,
    FullGrid,
    Separable,
}

/// Numerical settings for one packet simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    /// Fourier truncation per axis.
    pub n: usize,
    /// Fraction of each box axis, at both ends, over which the potential is
    /// tapered to zero.
    pub mollify_fraction: f64,
    /// Target `tau * max|V|` per step.
    pub kick_scale: f64,
    pub min_steps: u64,
    pub max_steps: u64,
    /// Overrides the step count rule.
    pub fixed_steps: Option<u64>,
    /// Suzuki `k`.
    pub k: usize,
    pub mode: SampleMode,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n: 64,
            mollify_fraction: 0.1,
            kick_scale: 0.25,
            min_steps: 64,
            max_steps: 400_000,
            fixed_steps: None,
            k: 1,
            mode: SampleMode::Auto,
        }
    }
}

/// Cosine taper: 0 at the box edge, 1 beyond `fraction` of the axis.
pub fn mollifier(u: f64, fraction: f64) -> f64 {
    let a = u.min(1.0 - u);
    if fraction <= 0.0 || a >= fraction {
        1.0
    } else {
        0.5 * (1.0 - (PI * a / fraction).cos())
    }
}

/// Box geometry: the unit grid coordinate `u` maps to the packet frame
/// `y = side (u - 1/2)` and to the objective's frame `x = x_t + r0 y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationBox {
    pub x_t: Vec<f64>,
    pub r0: f64,
    /// Box side in the packet frame.
    pub side: f64,
}

impl SimulationBox {
    /// Box of half-width `domain_radius` around `x_t`.
    pub fn new(x_t: Vec<f64>, r0: f64, domain_radius: f64) -> Self {
        Self { x_t, r0, side: 2.0 * domain_radius / r0 }
    }

    pub fn y_of(&self, u: f64) -> f64 {
        self.side * (u - 0.5)
    }
}

/// The objective with its value and gradient at `x_t` subtracted:
/// `f(x) - f(x_t) - <g, x - x_t>`, expressed per axis when separable.
struct Shifted {
    obj: ObjectiveSpec,
    x_t: Vec<f64>,
    grad: Vec<f64>,
    f_t: f64,
}

impl Shifted {
    fn value(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.grad.iter().zip(x.iter().zip(&self.x_t)).map(|(g, (a, b))| g * (a - b)).sum();
        self.obj.eval(x) - self.f_t - lin
    }

    fn axis_value(&self, i: usize, xi: f64) -> f64 {
        let t = &self.obj.axis_terms().expect("separable objective")[i];
        t(xi) - t(self.x_t[i]) - self.grad[i] * (xi - self.x_t[i])
    }
}

/// Output of one packet simulation.
#[derive(Debug, Clone)]
pub struct Simulation {
    /// One state for the full grid, or one per axis in separable mode.
    pub states: Vec<WaveFunction>,
    pub geometry: SimulationBox,
    /// Simulated time on the unit grid, `T' / side^2`.
    pub grid_time: f64,
    pub steps: u64,
}

fn step_count(cfg: &SimulationConfig, grid_time: f64, v_max: f64) -> u64 {
    if grid_time == 0.0 {
        return 0;
    }
    if let Some(s) = cfg.fixed_steps {
        return s;
    }
    let s = (grid_time * v_max / cfg.kick_scale).ceil() as u64;
    s.clamp(cfg.min_steps, cfg.max_steps)
}

fn run(grid: GridSpec, spec: PotentialSpec, grid_time: f64, r0_unit: f64, cfg: &SimulationConfig) -> Result<(WaveFunction, u64)> {
    let center = vec![0.5; grid.dim()];
    let psi0 = gaussian_packet(&grid, &center, r0_unit)?;
    let v_max = crate::potentials::node_max_norm(&spec, &grid, 0.0)?;
    let steps = step_count(cfg, grid_time, v_max);
    let opts = EvolveOptions::new(SuzukiOrder::new(cfg.k)?, Planner::Fixed(steps));
    Ok((evolve_with(&psi0, &spec, grid_time, &opts)?.psi, steps))
}

/// Evolve the Gaussian packet centered at `x_t` under the gradient-shifted,
/// `r0`-rescaled objective for time `t_prime`.
///
/// In the packet frame `y = (x - x_t) / r0` the equation is
/// `i dPhi/dt = -1/2 Lap_y Phi + f'(y) Phi` with
/// `f'(y) = [f(x_t + r0 y) - f(x_t) - r0 <grad f(x_t), y>] / r0^2`, and the
/// packet starts as `exp(-|y|^2 / 4)`. The box `|y_i| <= M / r0` is mapped
/// onto the unit grid, which turns the equation into the unit-mass one with
/// potential `side^2 f'` run for time `t_prime / side^2`.
pub fn simulate_packet(
    obj: &ObjectiveSpec,
    x_t: &[f64],
    r0: f64,
    t_prime: f64,
    cfg: &SimulationConfig,
) -> Result<Simulation> {
    if !(r0 > 0.0) {
        return Err(Error::NonPositiveArg("r0"));
    }
    if !(t_prime >= 0.0) {
        return Err(Error::NonPositiveArg("t_prime"));
    }
    let geometry = SimulationBox::new(x_t.to_vec(), r0, obj.domain_radius);
    let side = geometry.side;
    let grid_time = t_prime / (side * side);
    let r0_unit = 1.0 / side;
    let grad = super::objective::finite_diff_gradient(|x| obj.eval(x), x_t, None);
    let shifted = std::sync::Arc::new(Shifted {
        obj: obj.clone(),
        x_t: x_t.to_vec(),
        grad,
        f_t: obj.eval(x_t),
    });
    let frac = cfg.mollify_fraction;
    let separable = match cfg.mode {
        SampleMode::Auto => obj.is_separable(),
        SampleMode::Separable => {
            if !obj.is_separable() {
                return Err(Error::InvalidArgument("objective is not separable".into()));
            }
            true
        }
        SampleMode::FullGrid => false,
    };
    let scale = side * side / (r0 * r0);

    if separable {
        let grid = GridSpec::new(1, 1, cfg.n)?;
        let mut states = Vec::with_capacity(obj.dim);
        let mut steps = 0;
        for i in 0..obj.dim {
            let sh = shifted.clone();
            let g = geometry.clone();
            let spec = PotentialSpec::callable(
                move |u, _| {
                    let y = g.y_of(u[0]);
                    scale * mollifier(u[0], frac) * sh.axis_value(i, g.x_t[i] + g.r0 * y)
                },
                false,
            );
            let (psi, s) = run(grid, spec, grid_time, r0_unit, cfg)?;
            steps = steps.max(s);
            states.push(psi);
        }
        return Ok(Simulation { states, geometry, grid_time, steps });
    }

    let grid = GridSpec::new(1, obj.dim, cfg.n)?;
    let sh = shifted.clone();
    let g = geometry.clone();
    let spec = if obj.is_separable() {
        PotentialSpec::callable(
            move |u, _| {
                let total: f64 = (0..u.len())
                    .map(|i| mollifier(u[i], frac) * sh.axis_value(i, g.x_t[i] + g.r0 * g.y_of(u[i])))
                    .sum();
                scale * total
            },
            false,
        )
    } else {
        PotentialSpec::callable(
            move |u, _| {
                let w: f64 = u.iter().map(|&ui| mollifier(ui, frac)).product();
                if w == 0.0 {
                    return 0.0;
                }
                let x: Vec<f64> = (0..u.len()).map(|i| g.x_t[i] + g.r0 * g.y_of(u[i])).collect();
                scale * w * sh.value(&x)
            },
            false,
        )
    };
    let (psi, steps) = run(grid, spec, grid_time, r0_unit, cfg)?;
    Ok(Simulation { states: vec![psi], geometry, grid_time, steps })
}

fn draw_index(probabilities: &[f64], rng: &mut impl Rng) -> Result<usize> {
    let total: f64 = probabilities.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::SamplingDegenerate);
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if acc > target {
            return Ok(i);
        }
    }
    Ok(probabilities.len() - 1)
}

impl Simulation {
    /// One measurement of the packet position, returned as the displacement
    /// `xi = x - x_t` in the objective's frame.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<Vec<f64>> {
        let g = &self.geometry;
        let mut xi = Vec::new();
        for psi in &self.states {
            let grid = psi.grid();
            let idx = draw_index(&psi.probabilities(), rng)?;
            for k in grid.multi_index(idx) {
                xi.push(g.r0 * g.y_of(grid.node(k)));
            }
        }
        Ok(xi)
    }

    /// Marginal distribution of axis `axis` over its nodes.
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let (psi, local) = if self.states.len() == 1 {
            (&self.states[0], axis)
        } else {
            (&self.states[axis], 0)
        };
        let grid = psi.grid();
        let mut out = vec![0.0; grid.side()];
        for (flat, p) in psi.probabilities().into_iter().enumerate() {
            out[grid.multi_index(flat)[local]] += p;
        }
        out
    }

    /// Per-axis variance of the packet in the objective's frame.
    pub fn variances(&self) -> Vec<f64> {
        let g = &self.geometry;
        let dim = g.x_t.len();
        (0..dim)
            .map(|axis| {
                let marg = self.marginal(axis);
                let n1 = marg.len() as f64;
                let ys: Vec<f64> = (0..marg.len()).map(|l| g.r0 * g.y_of(l as f64 / n1)).collect();
                let mean: f64 = marg.iter().zip(&ys).map(|(p, y)| p * y).sum();
                marg.iter().zip(&ys).map(|(p, y)| p * (y - mean).powi(2)).sum()
            })
            .collect()
    }
}

/// Simulate and draw one displacement sample.
pub fn quantum_sim_sample(
    obj: &ObjectiveSpec,
    x_t: &[f64],
    r0: f64,
    t_prime: f64,
    cfg: &SimulationConfig,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    simulate_packet(obj, x_t, r0, t_prime, cfg)?.sample(rng)
}
