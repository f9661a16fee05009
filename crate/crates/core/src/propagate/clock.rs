use crate::error::{Error, Result};
use crate::lattice::GridSpec;
use crate::potentials::{node_max_norm, PotentialSpec};

/// Cumulative integral `g(t) = int_0^t max_l |f(chi_l, s)| ds`, tabulated by
/// the composite trapezoid rule and interpolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledClock {
    pub total_t: f64,
    times: Vec<f64>,
    values: Vec<f64>,
    norms: Vec<f64>,
    /// `g(T)`, the time-integrated max norm.
    pub f_max1: f64,
}

impl RescaledClock {
    pub fn build(v: &PotentialSpec, t_total: f64, grid: &GridSpec, quad_points: usize) -> Result<Self> {
        Self::from_profile(t_total, quad_points, |t| node_max_norm(v, grid, t))
    }

    /// Tabulate from an arbitrary max-norm profile `t -> ||f(t)||`.
    pub fn from_profile(
        t_total: f64,
        quad_points: usize,
        mut norm_at: impl FnMut(f64) -> Result<f64>,
    ) -> Result<Self> {
        if quad_points < 2 || !(t_total > 0.0) || !t_total.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "clock needs T > 0 and at least 2 quadrature points (T = {t_total}, points = {quad_points})"
            )));
        }
        let h = t_total / (quad_points - 1) as f64;
        let mut times = Vec::with_capacity(quad_points);
        let mut norms = Vec::with_capacity(quad_points);
        for i in 0..quad_points {
            let t = if i + 1 == quad_points { t_total } else { i as f64 * h };
            let m = norm_at(t)?;
            if !m.is_finite() {
                return Err(Error::NonFiniteNorm(m));
            }
            times.push(t);
            norms.push(m);
        }
        let mut values = vec![0.0; quad_points];
        for i in 1..quad_points {
            values[i] = values[i - 1] + 0.5 * (norms[i - 1] + norms[i]) * (times[i] - times[i - 1]);
        }
        let f_max1 = values[quad_points - 1];
        Ok(Self { total_t: t_total, times, values, norms, f_max1 })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Largest sampled max norm, `max_t ||f(t)||`.
    pub fn peak_norm(&self) -> f64 {
        self.norms.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] > w[0])
    }

    /// `g(t)` for `t` in `[0, T]`.
    pub fn g(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.total_t);
        let i = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len() - 1);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (g0, g1) = (self.values[i - 1], self.values[i]);
        g0 + (g1 - g0) * (t - t0) / (t1 - t0)
    }

    /// `g^{-1}(s)` by bisection over the knots and linear interpolation.
    pub fn g_inv(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.f_max1);
        let i = self.values.partition_point(|&g| g < s).clamp(1, self.values.len() - 1);
        let (g0, g1) = (self.values[i - 1], self.values[i]);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        if g1 == g0 {
            return t0;
        }
        t0 + (t1 - t0) * (s - g0) / (g1 - g0)
    }
}
