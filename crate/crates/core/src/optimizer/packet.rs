use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, WaveFunction};

/// Smallest packet width, in grid spacings, accepted by [`gaussian_packet`].
pub const MIN_SPACINGS: f64 = 3.0;

/// Periodic minimum-image offset on the unit torus.
pub(crate) fn wrap(d: f64) -> f64 {
    d - d.round()
}

/// `exp(-|x - center|^2 / (4 r0^2))` at the nodes, normalized so that
/// `|psi|^2` has per-axis variance `r0^2`.
pub fn gaussian_packet(grid: &GridSpec, center: &[f64], r0: f64) -> Result<WaveFunction> {
    if center.len() != grid.dim() {
        return Err(Error::LengthMismatch { expected: grid.dim(), actual: center.len() });
    }
    if !(r0 > 0.0) {
        return Err(Error::NonPositiveArg("r0"));
    }
    if r0 < MIN_SPACINGS * grid.spacing() {
        return Err(Error::PacketUnresolved { r0, spacing: grid.spacing() });
    }
    let psi = WaveFunction::from_fn(*grid, |x| {
        let r2: f64 = x.iter().zip(center).map(|(a, c)| wrap(a - c).powi(2)).sum();
        Complex64::new((-r2 / (4.0 * r0 * r0)).exp(), 0.0)
    });
    psi.normalize_discrete()
}

/// Per-axis mean and variance of `|psi|^2`, with offsets measured from
/// `center` on the torus.
pub fn position_moments(psi: &WaveFunction, center: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let grid = psi.grid();
    let dim = grid.dim();
    let p = psi.probabilities();
    let mut mean = vec![0.0; dim];
    let mut second = vec![0.0; dim];
    for ((_, x), w) in grid.nodes().zip(&p) {
        for k in 0..dim {
            let d = wrap(x[k] - center[k]);
            mean[k] += w * d;
            second[k] += w * d * d;
        }
    }
    let var = mean.iter().zip(&second).map(|(m, s)| s - m * m).collect();
    let mean = mean.iter().zip(center).map(|(m, c)| m + c).collect();
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_and_mean() {
        let g = GridSpec::new(1, 2, 64).unwrap();
        let c = [0.5, 0.5];
        let psi = gaussian_packet(&g, &c, 0.06).unwrap();
        assert!((psi.norm_sqr() - g.point_count() as f64).abs() < 1e-9);
        let (mean, var) = position_moments(&psi, &c);
        for k in 0..2 {
            assert!((mean[k] - 0.5).abs() < 1e-10);
            assert!((var[k] - 0.0036).abs() < 0.02 * 0.0036);
        }
    }

    #[test]
    fn unresolved_packet() {
        let g = GridSpec::new(1, 1, 16).unwrap();
        assert!(matches!(gaussian_packet(&g, &[0.5], 0.01), Err(Error::PacketUnresolved { .. })));
    }
}
