use crate::error::{Error, Result};

/// `sum_{i<j} q_i q_j / sqrt(|r_i - r_j|^2 + delta^2)` with particle `i`
/// occupying `x[i*d .. (i+1)*d]`.
pub fn modified_coulomb_direct(x: &[f64], d: usize, charges: &[f64], delta: f64) -> f64 {
    debug_assert_eq!(x.len(), d * charges.len());
    let d2 = delta * delta;
    let mut total = 0.0;
    for i in 0..charges.len() {
        let ri = &x[i * d..(i + 1) * d];
        let mut row = 0.0;
        for j in (i + 1)..charges.len() {
            let rj = &x[j * d..(j + 1) * d];
            let r2: f64 = ri.iter().zip(rj).map(|(a, b)| (a - b) * (a - b)).sum();
            row += charges[j] / (r2 + d2).sqrt();
        }
        total += charges[i] * row;
    }
    total
}

/// Upper bound `eta (eta - 1) q^2 / (2 delta)` on the modified Coulomb sum.
pub fn coulomb_max_bound(eta: usize, q_max: f64, delta: f64) -> f64 {
    let eta = eta as f64;
    eta * (eta - 1.0) * q_max * q_max / (2.0 * delta)
}

/// Charges of the electron-nucleus system: `eta_e` electrons of charge -1
/// followed by `eta_n` nuclei of charge `z`.
pub fn molecular_charges(z: f64, eta_e: usize, eta_n: usize) -> Vec<f64> {
    let mut q = vec![-1.0; eta_e];
    q.extend(std::iter::repeat_n(z, eta_n));
    q
}

/// Electron-electron repulsion, electron-nucleus attraction and
/// nucleus-nucleus repulsion, all regularized by `delta`. Electrons come
/// first in `x`.
pub fn molecular_potential(x: &[f64], z: f64, eta_e: usize, eta_n: usize, delta: f64) -> Result<f64> {
    let eta = eta_e + eta_n;
    if eta == 0 || x.len() != 3 * eta {
        let d = if eta == 0 { 0 } else { x.len() / eta };
        return Err(Error::DimensionNot3(d));
    }
    Ok(modified_coulomb_direct(x, 3, &molecular_charges(z, eta_e, eta_n), delta))
}

/// `(time_scale, potential_scale)` turning nuclear mass `m` into unit mass:
/// `t -> t / m` and the potential multiplied by `m`.
pub fn molecular_mass_rescale(m: f64) -> (f64, f64) {
    (1.0 / m, m)
}

/// Electron gas with the uniform background dropped:
/// `1/2 sum_{i != j} e^2 / sqrt(|r_i - r_j|^2 + delta^2)`.
pub fn jellium_potential(x: &[f64], d: usize, e: f64, delta: f64) -> Result<f64> {
    if d != 3 {
        return Err(Error::DimensionNot3(d));
    }
    let eta = x.len() / 3;
    let d2 = delta * delta;
    let mut total = 0.0;
    for i in 0..eta {
        for j in 0..eta {
            if i == j {
                continue;
            }
            let r2: f64 = (0..3).map(|k| (x[3 * i + k] - x[3 * j + k]).powi(2)).sum();
            total += e * e / (r2 + d2).sqrt();
        }
    }
    Ok(0.5 * total)
}

/// `eta (eta + 1) e^2 / (2 delta)`.
pub fn jellium_bound(eta: usize, e: f64, delta: f64) -> f64 {
    let eta = eta as f64;
    eta * (eta + 1.0) * e * e / (2.0 * delta)
}

/// Largest difference between the bare and regularized kernels over all
/// pairs: `max_{i<j} 1/r_ij - 1/sqrt(r_ij^2 + delta^2)`.
pub fn regularization_gap(x: &[f64], d: usize, delta: f64) -> f64 {
    let eta = x.len() / d;
    let mut gap: f64 = 0.0;
    for i in 0..eta {
        for j in (i + 1)..eta {
            let r2: f64 = (0..d).map(|k| (x[d * i + k] - x[d * j + k]).powi(2)).sum();
            let g = 1.0 / r2.sqrt() - 1.0 / (r2 + delta * delta).sqrt();
            gap = gap.max(g);
        }
    }
    gap
}
