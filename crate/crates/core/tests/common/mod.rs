#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rsqs::lattice::{GridSpec, WaveFunction};
use rsqs::potentials::{CosineTerm, PotentialSpec};
use rsqs::propagate::{dense_reference_evolve, evolve_with, suzuki_step, EvolveOptions, Planner, SuzukiOrder};

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

/// Off-center Gaussian with a momentum kick, normalized on the grid.
pub fn moving_packet(grid: GridSpec, center: f64, width: f64, momentum: i32) -> WaveFunction {
    WaveFunction::from_fn(grid, |x| {
        let d = x[0] - center;
        let d = d - d.round();
        Complex64::from_polar((-d * d / (4.0 * width * width)).exp(), 2.0 * PI * momentum as f64 * x[0])
    })
    .normalize_discrete()
    .unwrap()
}

/// Smooth periodic well `a (1 - cos 2 pi (x - 1/2))`, harmonic near the center.
pub fn cosine_well(a: f64) -> PotentialSpec {
    PotentialSpec::cosine(vec![
        CosineTerm { amplitude: a, wavevector: vec![0], phase: 0.0 },
        CosineTerm { amplitude: a, wavevector: vec![1], phase: 0.0 },
    ])
}

/// The 1D instance used for order checks: `n = 16`, harmonic-type well.
pub struct OrderInstance {
    pub psi0: WaveFunction,
    pub v: PotentialSpec,
    pub t: f64,
    pub exact: WaveFunction,
}

pub fn order_instance() -> OrderInstance {
    let grid = GridSpec::new(1, 1, 16).unwrap();
    let psi0 = moving_packet(grid, 0.4, 0.09, 1);
    let v = cosine_well(20.0);
    let t = 0.5;
    let exact = dense_reference_evolve(&psi0, &v, t).unwrap();
    OrderInstance { psi0, v, t, exact }
}

pub fn global_error(inst: &OrderInstance, order: SuzukiOrder, r: u64) -> f64 {
    let opts = EvolveOptions::new(order, Planner::Fixed(r));
    let out = evolve_with(&inst.psi0, &inst.v, inst.t, &opts).unwrap();
    out.psi.relative_distance(&inst.exact)
}

/// Step counts per order, chosen inside the asymptotic range and above
/// rounding noise.
pub fn step_counts(k: usize) -> Vec<u64> {
    match k {
        1 => vec![64, 128, 256, 512],
        2 => vec![64, 128, 256, 512],
        _ => vec![96, 128, 160, 192],
    }
}

/// Single-step sizes for the local error, same criteria.
pub fn local_steps(k: usize) -> Vec<f64> {
    match k {
        1 => vec![0.004, 0.002, 0.001],
        2 => vec![0.008, 0.004, 0.002, 0.001],
        _ => vec![0.008, 0.004, 0.002],
    }
}

pub fn local_error(inst: &OrderInstance, order: SuzukiOrder, tau: f64) -> f64 {
    let exact = dense_reference_evolve(&inst.psi0, &inst.v, tau).unwrap();
    suzuki_step(&inst.psi0, &inst.v, 0.0, tau, &order).unwrap().relative_distance(&exact)
}

/// Free evolution of the normalized theta-type state
/// `sum_j c_j exp(2 pi i j x)`, `c_j ~ exp(-beta j^2)`.
pub struct ThetaState {
    pub beta: f64,
    coeffs: Vec<(i64, f64)>,
}

impl ThetaState {
    pub fn new(beta: f64) -> Self {
        let raw: Vec<(i64, f64)> = (-80i64..=80).map(|j| (j, (-beta * (j * j) as f64).exp())).collect();
        let z = raw.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
        Self { beta, coeffs: raw.into_iter().map(|(j, c)| (j, c / z)).collect() }
    }

    pub fn value(&self, x: f64, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|&(j, c)| {
                let w = 2.0 * PI * j as f64;
                Complex64::from_polar(c, w * x - 0.5 * w * w * t)
            })
            .sum()
    }

    pub fn on_grid(&self, grid: GridSpec, t: f64) -> WaveFunction {
        WaveFunction::from_fn(grid, |x| self.value(x[0], t))
    }

    /// Upper bound, valid at every time, on the `L1` norm over one period
    /// of the `p`-th derivative in the angular variable `theta = 2 pi x`.
    pub fn derivative_bound(&self, p: u32) -> f64 {
        2.0 * PI * self.coeffs.iter().map(|&(j, c)| (j.abs() as f64).powi(p as i32) * c).sum::<f64>()
    }

    /// Largest node-wise `l2` error of free evolution on grid `n` against
    /// the analytic solution over `samples` times in `(0, t_max]`. The grid
    /// dynamics come from the dense oracle.
    pub fn max_error(&self, n: usize, t_max: f64, samples: usize) -> f64 {
        let grid = GridSpec::new(1, 1, n).unwrap();
        let psi0 = self.on_grid(grid, 0.0);
        (1..=samples)
            .map(|i| {
                let t = t_max * i as f64 / samples as f64;
                let out = dense_reference_evolve(&psi0, &PotentialSpec::zero(), t).unwrap();
                out.distance(&self.on_grid(grid, t))
            })
            .fold(0.0, f64::max)
    }
}

/// Errors above this are clear of float64 rounding in the spectral checks.
pub const ROUNDING_FLOOR: f64 = 1e-12;

pub struct SpectralRow {
    pub n: usize,
    pub error: f64,
    pub g_prime: f64,
    /// `None` when the bound is vacuous for this `g'`.
    pub bound: Option<f64>,
}

pub fn spectral_rows(beta: f64, t_max: f64, ns: impl Iterator<Item = usize>) -> Vec<SpectralRow> {
    let theta = ThetaState::new(beta);
    ns.map(|n| {
        let g_prime = theta.derivative_bound((n / 2) as u32);
        SpectralRow {
            n,
            error: theta.max_error(n, t_max, 64),
            g_prime,
            bound: rsqs::spectral::spectral_error_bound(g_prime, n, 1).ok().map(|b| b.0),
        }
    })
    .collect()
}

/// Successive reduction factors while the finer error is clear of
/// rounding, and whether they strictly grow.
pub fn reduction_factors(rows: &[SpectralRow]) -> (Vec<f64>, bool) {
    let factors: Vec<f64> = rows
        .windows(2)
        .take_while(|w| w[1].error > 10.0 * ROUNDING_FLOOR)
        .map(|w| w[0].error / w[1].error)
        .collect();
    let growing = factors.windows(2).all(|f| f[1] > f[0]);
    (factors, growing)
}
