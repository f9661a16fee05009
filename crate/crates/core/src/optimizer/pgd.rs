use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::objective::{finite_diff_gradient, min_hessian_eigenvalue, ObjectiveSpec};
use super::sample::{simulate_packet, SimulationConfig};
use crate::error::{Error, Result};

/// `T' = 8 / (rho eps)^(1/4) * ln((ell gap / (eps^2 sqrt(rho))) (d + 2 ln(3 gap / eps^1.5)))`.
pub fn escape_time(ell: f64, rho: f64, eps: f64, d: usize, gap: f64) -> Result<f64> {
    for (v, name) in [(ell, "ell"), (rho, "rho"), (eps, "eps"), (gap, "gap"), (d as f64, "d")] {
        if !(v > 0.0) {
            return Err(Error::NonPositiveArg(name));
        }
    }
    let inner = (ell * gap / (eps * eps * rho.sqrt()))
        * (d as f64 + 2.0 * (3.0 * gap / eps.powf(1.5)).ln());
    Ok(8.0 / (rho * eps).powf(0.25) * inner.ln())
}

/// Length of the perturbation `Delta_t`, as a multiple of `2/3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationScale {
    /// `sqrt(eps / rho)`, the length scale on which negative curvature
    /// `-sqrt(rho eps)` is visible.
    SqrtEpsOverRho,
    /// `sqrt(rho / eps)`; dimensionally an inverse length and far too long
    /// for small `eps`. Kept for comparison.
    SqrtRhoOverEps,
}

impl PerturbationScale {
    pub fn length(self, rho: f64, eps: f64) -> f64 {
        let s = match self {
            PerturbationScale::SqrtEpsOverRho => (eps / rho).sqrt(),
            PerturbationScale::SqrtRhoOverEps => (rho / eps).sqrt(),
        };
        2.0 / 3.0 * s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeConfig {
    pub eps: f64,
    /// `r0 = c_r * M`.
    pub c_r: f64,
    /// Simulation time per call; defaults to [`escape_time`].
    pub t_prime: Option<f64>,
    /// Gradient step; defaults to `1 / ell`.
    pub eta_step: Option<f64>,
    pub max_iters: usize,
    pub rng_seed: u64,
    pub perturbation: PerturbationScale,
    pub sim: SimulationConfig,
}

impl EscapeConfig {
    pub fn new(eps: f64, rng_seed: u64) -> Self {
        Self {
            eps,
            c_r: 0.1,
            t_prime: None,
            eta_step: None,
            max_iters: 10_000,
            rng_seed,
            perturbation: PerturbationScale::SqrtEpsOverRho,
            sim: SimulationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub grad_norm: f64,
    pub f: f64,
    pub sim_calls: usize,
    pub t_prime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimCall {
    pub iter: usize,
    pub t_prime: f64,
    pub steps: u64,
    pub xi: Vec<f64>,
    pub delta: Vec<f64>,
    /// `f(x + delta)` and `f(x - delta)`.
    pub candidates: (f64, f64),
    pub chose_plus: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgdOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub min_eigenvalue: f64,
    /// The returned point passed the local-minimum certificate.
    pub certified: bool,
    pub hit_max_iters: bool,
    pub iters: usize,
    pub trace: Vec<TraceRow>,
    pub calls: Vec<SimCall>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Perturbed gradient descent whose perturbation direction is sampled from a
/// wave packet evolved under the gradient-shifted objective.
pub fn pgd_qs(obj: &ObjectiveSpec, cfg: &EscapeConfig) -> Result<PgdOutcome> {
    obj.validate()?;
    if !(cfg.eps > 0.0) {
        return Err(Error::NonPositiveArg("eps"));
    }
    let t_prime = match cfg.t_prime {
        Some(t) => t,
        None => escape_time(obj.ell, obj.rho, cfg.eps, obj.dim, obj.f_star_gap)?,
    };
    let eta = cfg.eta_step.unwrap_or(1.0 / obj.ell);
    let r0 = cfg.c_r * obj.domain_radius;
    let curvature_floor = -(obj.rho * cfg.eps).sqrt();
    let delta_len = cfg.perturbation.length(obj.rho, cfg.eps);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let f = |x: &[f64]| obj.eval(x);

    let mut x = obj.x0.clone();
    let mut trace = Vec::new();
    let mut calls = Vec::new();
    let mut best = (f(&x), x.clone());

    for iter in 0..cfg.max_iters {
        let fx = f(&x);
        if !fx.is_finite() || x.iter().any(|v| !v.is_finite()) {
            break;
        }
        if fx < best.0 {
            best = (fx, x.clone());
        }
        let mut grad = finite_diff_gradient(f, &x, None);
        let gn = norm(&grad);
        trace.push(TraceRow { iter, grad_norm: gn, f: fx, sim_calls: calls.len(), t_prime });
        if gn <= cfg.eps {
            let lam = min_hessian_eigenvalue(obj, &x);
            if lam >= curvature_floor {
                return Ok(PgdOutcome {
                    f: fx,
                    grad_norm: gn,
                    min_eigenvalue: lam,
                    certified: true,
                    hit_max_iters: false,
                    iters: iter,
                    trace,
                    calls,
                    x,
                });
            }
            let sim = simulate_packet(obj, &x, r0, t_prime, &cfg.sim)?;
            let xi = sim.sample(&mut rng)?;
            let xn = norm(&xi);
            if xn == 0.0 {
                return Err(Error::SamplingDegenerate);
            }
            let delta: Vec<f64> = xi.iter().map(|v| v / xn * delta_len).collect();
            let plus: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + d).collect();
            let minus: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a - d).collect();
            let (fp, fm) = (f(&plus), f(&minus));
            let chose_plus = fp <= fm;
            x = if chose_plus { plus } else { minus };
            calls.push(SimCall {
                iter,
                t_prime,
                steps: sim.steps,
                xi,
                delta,
                candidates: (fp, fm),
                chose_plus,
            });
            grad = finite_diff_gradient(f, &x, None);
        }
        for (xi, g) in x.iter_mut().zip(&grad) {
            *xi -= eta * g;
        }
    }

    let (fx, x) = if f(&x).is_finite() && f(&x) <= best.0 { (f(&x), x) } else { best };
    let grad_norm = norm(&finite_diff_gradient(f, &x, None));
    let min_eigenvalue = min_hessian_eigenvalue(obj, &x);
    Ok(PgdOutcome {
        certified: grad_norm <= cfg.eps && min_eigenvalue >= curvature_floor,
        f: fx,
        grad_norm,
        min_eigenvalue,
        hit_max_iters: true,
        iters: cfg.max_iters,
        trace,
        calls,
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::objective::convex_bowl;

    #[test]
    fn escape_time_unit_case() {
        let t = escape_time(1.0, 1.0, 1.0, 1, 1.0).unwrap();
        assert!((t - 8.0 * (1.0 + 2.0 * 3f64.ln()).ln()).abs() < 1e-12);
        assert!(matches!(escape_time(0.0, 1.0, 1.0, 1, 1.0), Err(Error::NonPositiveArg("ell"))));
    }

    #[test]
    fn escape_time_grows_slowly_and_monotonically() {
        let base = 8.0 / (0.5f64 * 0.01).powf(0.25);
        for d in [1, 2, 4, 8, 16, 32] {
            let a = escape_time(2.0, 0.5, 0.01, d, 3.0).unwrap();
            let b = escape_time(2.0, 0.5, 0.01, 2 * d, 3.0).unwrap();
            assert!(b > a && b - a <= base * 2f64.ln() + 1e-12);
        }
        let mut last = 0.0;
        for eps in [0.5, 0.1, 0.05, 0.01, 0.001] {
            let t = escape_time(2.0, 0.5, eps, 4, 3.0).unwrap();
            assert!(t > last);
            last = t;
        }
    }

    #[test]
    fn convex_needs_no_simulation() {
        let obj = convex_bowl(3);
        let out = pgd_qs(&obj, &EscapeConfig::new(1e-3, 0)).unwrap();
        assert!(out.certified);
        assert!(out.calls.is_empty());
        assert!(norm(&out.x) <= 1e-3);
    }

    #[test]
    fn perturbation_lengths() {
        let s = PerturbationScale::SqrtEpsOverRho.length(48.0, 0.01);
        assert!((s - 2.0 / 3.0 * (0.01f64 / 48.0).sqrt()).abs() < 1e-15);
        let p = PerturbationScale::SqrtRhoOverEps.length(48.0, 0.01);
        assert!((p - 2.0 / 3.0 * 4800f64.sqrt()).abs() < 1e-12);
    }
}
