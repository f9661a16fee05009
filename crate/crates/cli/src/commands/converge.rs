use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rsqs::lattice::{GridSpec, WaveFunction};
use rsqs::propagate::apply_kinetic_phase;
use rsqs::spectral::spectral_error_bound;
use serde::{Deserialize, Serialize};

use super::Run;
use crate::artifacts::Artifacts;
use crate::config::require;
use crate::error::{invalid, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub state: StateConfig,
    /// Errors are the worst over `samples` evenly spaced times in `(0, t_max]`.
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// Derivative bound fed to the error bound; computed from the Fourier
    /// coefficients when absent.
    pub g_prime: Option<f64>,
    /// Absolute slack for float64 rounding when comparing against the bound.
    #[serde(default = "default_allowance")]
    pub rounding_allowance: f64,
    pub rng_seed: Option<u64>,
}

fn default_samples() -> usize {
    16
}

fn default_allowance() -> f64 {
    1e-13
}

/// Periodic one-dimensional state `sum_j c_j exp(2 pi i j x)`, normalized to
/// unit `L2` norm on `[0, 1)`.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    /// `c_j ~ exp(-beta j^2)` for `|j| <= modes`.
    Theta {
        beta: f64,
        #[serde(default = "default_modes")]
        modes: i64,
    },
    /// Explicit `[j, re, im]` triples.
    Fourier { coefficients: Vec<(i64, f64, f64)> },
    /// Indicator of `[1/4, 3/4)` truncated to `|j| <= modes`.
    Step {
        #[serde(default = "default_step_modes")]
        modes: i64,
    },
}

fn default_modes() -> i64 {
    80
}

fn default_step_modes() -> i64 {
    2000
}

impl StateConfig {
    fn coefficients(&self) -> Vec<(i64, Complex64)> {
        let raw: Vec<(i64, Complex64)> = match self {
            StateConfig::Theta { beta, modes } => {
                (-modes..=*modes).map(|j| (j, Complex64::new((-beta * (j * j) as f64).exp(), 0.0))).collect()
            }
            StateConfig::Fourier { coefficients } => {
                coefficients.iter().map(|&(j, re, im)| (j, Complex64::new(re, im))).collect()
            }
            StateConfig::Step { modes } => (-modes..=*modes)
                .map(|j| {
                    let c = if j == 0 {
                        Complex64::new(0.5, 0.0)
                    } else {
                        let jf = j as f64;
                        Complex64::from_polar((PI * jf / 2.0).sin() / (PI * jf), -PI * jf)
                    };
                    (j, c)
                })
                .collect(),
        };
        let z = raw.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
        raw.into_iter().map(|(j, c)| (j, c / z)).collect()
    }
}

struct Series(Vec<(i64, Complex64)>);

impl Series {
    fn value(&self, x: f64, t: f64) -> Complex64 {
        self.0
            .iter()
            .map(|&(j, c)| {
                let w = 2.0 * PI * j as f64;
                c * Complex64::from_polar(1.0, w * x - 0.5 * w * w * t)
            })
            .sum()
    }

    /// `2 pi sum |j|^p |c_j|`, a bound on the `L1` norm over one period of
    /// the `p`-th derivative in `theta = 2 pi x`, valid at every time.
    fn derivative_bound(&self, p: u32) -> f64 {
        2.0 * PI * self.0.iter().map(|&(j, c)| (j.unsigned_abs() as f64).powi(p as i32) * c.norm()).sum::<f64>()
    }

    fn on_grid(&self, grid: GridSpec, t: f64) -> WaveFunction {
        WaveFunction::from_fn(grid, |x| self.value(x[0], t))
    }
}

#[derive(Debug, Serialize)]
struct Row {
    n: usize,
    measured_error: f64,
    g_prime: f64,
    /// Absolute node-error bound; empty when the bound diverges.
    paper_bound: Option<f64>,
    checked_against: Option<f64>,
    within_bound: Option<bool>,
}

pub fn run(cfg: ConvergeConfig, _seed: u64) -> Result<Run> {
    require(cfg.t_max > 0.0 && cfg.t_max.is_finite(), || "t_max must be positive".into())?;
    require(cfg.samples >= 1, || "samples must be at least 1".into())?;
    require(cfg.n_min >= 6 && cfg.n_min % 2 == 0 && cfg.n_max % 2 == 0 && cfg.n_max >= cfg.n_min, || {
        "n_min and n_max must be even with 6 <= n_min <= n_max".into()
    })?;
    require(cfg.rounding_allowance >= 0.0, || "rounding_allowance must be nonnegative".into())?;
    if let Some(g) = cfg.g_prime {
        require(g >= 0.0 && g.is_finite(), || "g_prime must be finite and nonnegative".into())?;
    }
    match &cfg.state {
        StateConfig::Theta { beta, modes } => require(*beta > 0.0 && *modes >= 0, || "theta needs beta > 0".into())?,
        StateConfig::Fourier { coefficients } => require(
            coefficients.iter().any(|&(_, re, im)| re != 0.0 || im != 0.0),
            || "fourier state needs a nonzero coefficient".into(),
        )?,
        StateConfig::Step { modes } => require(*modes >= 1, || "step needs modes >= 1".into())?,
    }
    let ns: Vec<usize> = (cfg.n_min..=cfg.n_max).step_by(2).collect();
    let grids = ns.iter().map(|&n| GridSpec::new(1, 1, n).map_err(invalid)).collect::<Result<Vec<_>>>()?;
    let series = Series(cfg.state.coefficients());

    Ok(Box::new(move || {
        let rows = grids
            .par_iter()
            .map(|&grid| -> Result<Row> {
                let n = grid.n();
                let psi0 = series.on_grid(grid, 0.0);
                let mut err: f64 = 0.0;
                for i in 1..=cfg.samples {
                    let t = cfg.t_max * i as f64 / cfg.samples as f64;
                    let evolved = apply_kinetic_phase(&psi0, t)?;
                    err = err.max(evolved.distance(&series.on_grid(grid, t)));
                }
                let g_prime = cfg.g_prime.unwrap_or_else(|| series.derivative_bound((n / 2) as u32));
                let bound = spectral_error_bound(g_prime, n, 1).ok().map(|b| b.0);
                let checked = bound.map(|b| b + cfg.rounding_allowance);
                Ok(Row {
                    n,
                    measured_error: err,
                    g_prime,
                    paper_bound: bound,
                    checked_against: checked,
                    within_bound: checked.map(|c| err <= c),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut art = Artifacts::default();
        art.csv("converge.csv", &rows)?;
        let violations: Vec<usize> = rows.iter().filter(|r| r.within_bound == Some(false)).map(|r| r.n).collect();
        if !violations.is_empty() {
            art.fail(format!("bound violated at n = {violations:?}"));
        }
        Ok(art)
    }))
}
