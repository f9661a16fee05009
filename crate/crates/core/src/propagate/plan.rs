use std::f64::consts::PI;

use super::split::SuzukiOrder;
use crate::error::{Error, Result};
use crate::lattice::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    /// Number of Suzuki steps.
    pub r: u64,
    /// Step length `T / r` (zero when `r = 0`).
    pub tau: f64,
    /// Operator-norm estimate used for the budget.
    pub h_bound: f64,
    /// Budget of exponentials before division into steps.
    pub exponentials: u64,
    pub order: SuzukiOrder,
}

/// Relative slack applied before rounding up, so budgets that are integers
/// in exact arithmetic do not gain a step from rounding noise.
const CEIL_SLACK: f64 = 1e-12;

fn ceil_slack(x: f64) -> f64 {
    (x * (1.0 - CEIL_SLACK)).ceil()
}

/// `1/2 D (pi n)^2 + v_max`: kinetic spectral radius plus the potential's
/// max norm over the nodes.
pub fn default_h_norm(grid: &GridSpec, v_max: f64) -> f64 {
    0.5 * grid.dim() as f64 * (PI * grid.n() as f64).powi(2) + v_max
}

/// Exponential budget `N = ceil(4 * 5^(2k) (2 h T)^(1 + 1/2k) / (eps/2)^(1/2k))`
/// split into `r = ceil(N / (2 * 5^(k-1) + 1))` Suzuki steps.
pub fn plan_steps(order: SuzukiOrder, h_norm: f64, t_total: f64, eps: f64) -> Result<StepPlan> {
    if !(h_norm > 0.0) || !(eps > 0.0) || !(t_total >= 0.0) || !t_total.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "plan needs h > 0, T >= 0, eps > 0 (got h = {h_norm}, T = {t_total}, eps = {eps})"
        )));
    }
    if t_total == 0.0 {
        return Ok(StepPlan { r: 0, tau: 0.0, h_bound: h_norm, exponentials: 0, order });
    }
    let k = order.k() as f64;
    let inv = 1.0 / (2.0 * k);
    let n = 4.0 * 5f64.powf(2.0 * k) * (2.0 * h_norm * t_total).powf(1.0 + inv)
        / (eps / 2.0).powf(inv);
    if !n.is_finite() || n > u64::MAX as f64 {
        return Err(Error::InvalidArgument(format!("step budget overflows: {n:e}")));
    }
    let exponentials = ceil_slack(n) as u64;
    let per = order.exponentials_per_step();
    let r = exponentials.div_ceil(per).max(1);
    Ok(StepPlan { r, tau: t_total / r as f64, h_bound: h_norm, exponentials, order })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_example() {
        let o = SuzukiOrder::new(1).unwrap();
        let p = plan_steps(o, 1.0, 1.0, 0.01).unwrap();
        assert_eq!(p.exponentials, 4000);
        assert_eq!(p.r, 1334);
        assert!((p.tau - 1.0 / 1334.0).abs() < 1e-18);
    }

    #[test]
    fn monotone_in_eps() {
        for k in 1..=3 {
            let o = SuzukiOrder::new(k).unwrap();
            let mut last = u64::MAX;
            for eps in [1e-8, 1e-6, 1e-4, 1e-2, 0.5, 1.0] {
                let p = plan_steps(o, 5.0, 0.3, eps).unwrap();
                assert!(p.exponentials <= last);
                last = p.exponentials;
            }
        }
    }

    #[test]
    fn zero_time_is_empty() {
        let p = plan_steps(SuzukiOrder::new(2).unwrap(), 3.0, 0.0, 1e-3).unwrap();
        assert_eq!(p.r, 0);
        assert_eq!(p.exponentials, 0);
    }

    #[test]
    fn default_norm() {
        let g = GridSpec::new(1, 2, 6).unwrap();
        assert!((default_h_norm(&g, 2.0) - (36.0 * PI * PI + 2.0)).abs() < 1e-10);
    }
}
