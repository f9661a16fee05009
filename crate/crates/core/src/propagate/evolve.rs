use num_complex::Complex64;

use super::clock::RescaledClock;
use super::plan::{default_h_norm, plan_steps, StepPlan};
use super::split::{SplitOperator, SuzukiOrder};
use crate::error::{Error, Result};
use crate::lattice::{GridSpec, Representation, WaveFunction};
use crate::potentials::{node_max_norm, PotentialSpec};

/// Time samples used to estimate `max_t ||f(t)||` for time-dependent potentials.
const NORM_SAMPLES: usize = 257;
/// Quadrature points used by [`evolve_rescaled`].
pub const DEFAULT_QUAD_POINTS: usize = 2049;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Planner {
    /// Step count from the exponential-count bound.
    Bound { eps: f64 },
    /// Double the step count until the Richardson estimate
    /// `||psi_r - psi_2r|| / ((2^(2k) - 1) ||psi_2r||)` drops below `eps`.
    Adaptive { eps: f64, initial_steps: u64, max_steps: u64 },
    Fixed(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub order: SuzukiOrder,
    pub planner: Planner,
    /// Overrides the default `1/2 D (pi n)^2 + max|f|` norm estimate.
    pub h_norm: Option<f64>,
    /// Record a diagnostics row every this many steps (and at the end).
    pub diagnostics_every: Option<u64>,
}

impl EvolveOptions {
    pub fn new(order: SuzukiOrder, planner: Planner) -> Self {
        Self { order, planner, h_norm: None, diagnostics_every: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub step: u64,
    pub time: f64,
    pub norm: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    pub psi: WaveFunction,
    pub steps: u64,
    pub kicks: u64,
    pub plan: Option<StepPlan>,
    pub richardson_estimate: Option<f64>,
    pub diagnostics: Vec<DiagnosticRow>,
}

fn require_position(psi: &WaveFunction) -> Result<()> {
    if psi.representation() != Representation::Position {
        return Err(Error::RepresentationMismatch);
    }
    Ok(())
}

/// `max_t max_l |f(chi_l, t)|` over `[0, T]`, sampled for time-dependent potentials.
pub fn potential_max_norm(v: &PotentialSpec, grid: &GridSpec, t_total: f64) -> Result<f64> {
    if !v.time_dependent || t_total == 0.0 {
        return node_max_norm(v, grid, 0.0);
    }
    let mut m: f64 = 0.0;
    for i in 0..NORM_SAMPLES {
        let t = t_total * i as f64 / (NORM_SAMPLES - 1) as f64;
        m = m.max(node_max_norm(v, grid, t)?);
    }
    Ok(m)
}

fn check_norm(psi: &[Complex64]) -> Result<()> {
    let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    if !n.is_finite() {
        return Err(Error::NonFiniteNorm(n));
    }
    Ok(())
}

/// `steps` uniform Suzuki steps of length `t_total / steps`.
fn run_uniform(
    op: &mut SplitOperator,
    psi: &mut [Complex64],
    t_total: f64,
    steps: u64,
    order: &SuzukiOrder,
    every: Option<u64>,
    rows: &mut Vec<DiagnosticRow>,
) -> Result<()> {
    if steps == 0 {
        return Ok(());
    }
    let tau = t_total / steps as f64;
    for s in 0..steps {
        let t = s as f64 * tau;
        op.suzuki(psi, t, tau, order, None)?;
        if let Some(e) = every {
            if (s + 1) % e == 0 || s + 1 == steps {
                let time = (s + 1) as f64 * tau;
                rows.push(DiagnosticRow {
                    step: s + 1,
                    time,
                    norm: psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt(),
                    energy: op.energy(psi, time)?,
                });
            }
        }
    }
    check_norm(psi)
}

/// Evolve `psi0` from `t = 0` to `t_total` (negative runs backward).
pub fn evolve_with(
    psi0: &WaveFunction,
    v: &PotentialSpec,
    t_total: f64,
    opts: &EvolveOptions,
) -> Result<EvolveOutcome> {
    require_position(psi0)?;
    let grid = *psi0.grid();
    let mut op = SplitOperator::new(grid, v)?;
    let mut rows = Vec::new();
    let order = opts.order;
    match opts.planner {
        Planner::Fixed(r) => {
            let mut psi = psi0.clone();
            run_uniform(&mut op, psi.amplitudes_mut(), t_total, r, &order, opts.diagnostics_every, &mut rows)?;
            Ok(EvolveOutcome {
                psi,
                steps: r,
                kicks: op.kicks(),
                plan: None,
                richardson_estimate: None,
                diagnostics: rows,
            })
        }
        Planner::Bound { eps } => {
            let h = match opts.h_norm {
                Some(h) => h,
                None => default_h_norm(&grid, potential_max_norm(v, &grid, t_total.abs())?),
            };
            let plan = plan_steps(order, h, t_total.abs(), eps)?;
            let mut psi = psi0.clone();
            run_uniform(&mut op, psi.amplitudes_mut(), t_total, plan.r, &order, opts.diagnostics_every, &mut rows)?;
            Ok(EvolveOutcome {
                psi,
                steps: plan.r,
                kicks: op.kicks(),
                plan: Some(plan),
                richardson_estimate: None,
                diagnostics: rows,
            })
        }
        Planner::Adaptive { eps, initial_steps, max_steps } => {
            let factor = (4f64.powi(order.k() as i32) - 1.0).recip();
            let mut r = initial_steps.max(1);
            let mut coarse = psi0.clone();
            run_uniform(&mut op, coarse.amplitudes_mut(), t_total, r, &order, None, &mut rows)?;
            loop {
                let mut fine = psi0.clone();
                run_uniform(&mut op, fine.amplitudes_mut(), t_total, 2 * r, &order, None, &mut rows)?;
                let est = coarse.distance(&fine) / fine.norm() * factor;
                if est < eps || 2 * r >= max_steps {
                    let mut psi = psi0.clone();
                    op.reset_counters();
                    run_uniform(&mut op, psi.amplitudes_mut(), t_total, 2 * r, &order, opts.diagnostics_every, &mut rows)?;
                    return Ok(EvolveOutcome {
                        psi,
                        steps: 2 * r,
                        kicks: op.kicks(),
                        plan: None,
                        richardson_estimate: Some(est),
                        diagnostics: rows,
                    });
                }
                coarse = fine;
                r *= 2;
            }
        }
    }
}

/// Evolve with the bound-planned step count for tolerance `eps` and order `2k`.
pub fn evolve(psi0: &WaveFunction, v: &PotentialSpec, t_total: f64, eps: f64, k: usize) -> Result<WaveFunction> {
    let opts = EvolveOptions::new(SuzukiOrder::new(k)?, Planner::Bound { eps });
    Ok(evolve_with(psi0, v, t_total, &opts)?.psi)
}

/// How many equal-`g` slices the rescaled clock is cut into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceRule {
    Fixed(u64),
    /// Each slice carries at most this much `int ||f||max dt`.
    NormBudget(f64),
    /// Double the slice count until the Richardson estimate is below `eps`.
    Adaptive { eps: f64, initial: u64, max: u64 },
}

/// Evolve over slices that are uniform in `s = g(t)`. Each slice `[t_a, t_b]`
/// is one Suzuki step of length `t_b - t_a` with the potential frozen at
/// `g^{-1}` of the slice's midpoint in `s`.
pub fn evolve_rescaled_with(
    psi0: &WaveFunction,
    v: &PotentialSpec,
    clock: &RescaledClock,
    order: &SuzukiOrder,
    slices: SliceRule,
) -> Result<EvolveOutcome> {
    require_position(psi0)?;
    if !clock.is_strictly_increasing() {
        return Err(Error::ClockNotMonotone);
    }
    let mut op = SplitOperator::new(*psi0.grid(), v)?;
    let run = |op: &mut SplitOperator, m: u64| -> Result<WaveFunction> {
        let mut psi = psi0.clone();
        let ds = clock.f_max1 / m as f64;
        let mut t_a = 0.0;
        for i in 0..m {
            let t_b = if i + 1 == m { clock.total_t } else { clock.g_inv((i + 1) as f64 * ds) };
            let t_mid = clock.g_inv((i as f64 + 0.5) * ds);
            op.suzuki(psi.amplitudes_mut(), t_a, t_b - t_a, order, Some(t_mid))?;
            t_a = t_b;
        }
        check_norm(psi.amplitudes())?;
        Ok(psi)
    };
    match slices {
        SliceRule::Fixed(_) | SliceRule::NormBudget(_) => {
            let m = match slices {
                SliceRule::Fixed(m) => m.max(1),
                SliceRule::NormBudget(c) => ((clock.f_max1 / c) * (1.0 - 1e-12)).ceil().max(1.0) as u64,
                SliceRule::Adaptive { .. } => unreachable!(),
            };
            let psi = run(&mut op, m)?;
            Ok(EvolveOutcome {
                psi,
                steps: m,
                kicks: op.kicks(),
                plan: None,
                richardson_estimate: None,
                diagnostics: Vec::new(),
            })
        }
        SliceRule::Adaptive { eps, initial, max } => {
            let factor = (4f64.powi(order.k() as i32) - 1.0).recip();
            let mut m = initial.max(1);
            let mut coarse = run(&mut op, m)?;
            loop {
                op.reset_counters();
                let fine = run(&mut op, 2 * m)?;
                let est = coarse.distance(&fine) / fine.norm() * factor;
                if est < eps || 2 * m >= max {
                    return Ok(EvolveOutcome {
                        psi: fine,
                        steps: 2 * m,
                        kicks: op.kicks(),
                        plan: None,
                        richardson_estimate: Some(est),
                        diagnostics: Vec::new(),
                    });
                }
                coarse = fine;
                m *= 2;
            }
        }
    }
}

/// Rescaled evolution with an adaptively chosen slice count.
pub fn evolve_rescaled(psi0: &WaveFunction, v: &PotentialSpec, t_total: f64, eps: f64, k: usize) -> Result<WaveFunction> {
    let clock = RescaledClock::build(v, t_total, psi0.grid(), DEFAULT_QUAD_POINTS)?;
    let order = SuzukiOrder::new(k)?;
    let rule = SliceRule::Adaptive { eps, initial: 1, max: 1 << 24 };
    Ok(evolve_rescaled_with(psi0, v, &clock, &order, rule)?.psi)
}
