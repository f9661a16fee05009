use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

/// Outcome of choosing a Fourier truncation for a target tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    /// `4 g' / (pi eps)`.
    pub omega: f64,
    /// `max(2 ceil(ln w / ln ln w), 6)`, or 6 when `w <= e^e`.
    pub n_closed_form: usize,
    /// Smallest even `n >= n_closed_form` with `(n/2)^(n/2) >= 4 g' (1 + eps/2) / (pi eps)`.
    pub n_selected: usize,
    /// Absolute node-error bound at `n_selected` for a one-dimensional grid.
    pub bound_abs: f64,
    /// Relative error of the normalized state; independent of dimension.
    pub bound_rel: f64,
    g_prime: f64,
}

impl TruncationReport {
    /// Absolute bound for a `dim`-dimensional grid at the selected `n`.
    pub fn bound_abs(&self, dim: usize) -> f64 {
        (2.0 / PI) * self.g_prime * (self.n_selected as f64 + 1.0).powf(dim as f64 / 2.0)
            / half_power(self.n_selected)
    }
}

/// `(n/2)^(n/2)`.
fn half_power(n: usize) -> f64 {
    let h = (n / 2) as f64;
    h.powf(h)
}

fn ln_half_power(n: usize) -> f64 {
    let h = (n / 2) as f64;
    h * h.ln()
}

pub fn select_truncation(g_prime: f64, eps: f64) -> Result<TruncationReport> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::InvalidTolerance(eps));
    }
    if !(g_prime > 0.0 && g_prime.is_finite()) {
        return Err(Error::InvalidArgument(format!("g' must be positive, got {g_prime}")));
    }
    let omega = 4.0 * g_prime / (PI * eps);
    let n_closed_form = if omega <= E.powf(E) {
        6
    } else {
        let r = omega.ln() / omega.ln().ln();
        (2 * r.ceil() as usize).max(6)
    };
    let target = (4.0 * g_prime * (1.0 + eps / 2.0) / (PI * eps)).ln();
    let mut n = n_closed_form;
    while ln_half_power(n) < target {
        n += 2;
    }
    let a = (2.0 / PI) * g_prime / half_power(n);
    Ok(TruncationReport {
        omega,
        n_closed_form,
        n_selected: n,
        bound_abs: a * (n as f64 + 1.0).sqrt(),
        bound_rel: a / (1.0 - a),
        g_prime,
    })
}

/// Node-wise interpolation error bound and the matching relative bound for
/// normalized states.
pub fn spectral_error_bound(g_prime: f64, n: usize, dim: usize) -> Result<(f64, f64)> {
    if n < 6 || n % 2 != 0 {
        return Err(Error::OddTruncation(n));
    }
    let norm = (n as f64 + 1.0).powf(dim as f64 / 2.0);
    let delta = (2.0 / PI) * g_prime * norm / half_power(n);
    if delta >= norm {
        return Err(Error::BoundDiverges { delta, norm });
    }
    Ok((delta, delta / (norm - delta)))
}

/// Decay of the `k`-th Fourier coefficient of a `2 pi`-periodic function with
/// integrable `p`-th derivative. `loose` drops the `1/(2 pi)` factor.
pub fn fourier_decay_bound(p: u32, deriv_l1: f64, k: u64, loose: bool) -> f64 {
    assert!(p >= 2 && k >= 1, "need p >= 2 and k >= 1");
    let base = deriv_l1 / (k as f64).powi(p as i32);
    if loose {
        base
    } else {
        base / (2.0 * PI)
    }
}
