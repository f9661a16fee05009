use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, Representation, WaveFunction};
use crate::potentials::{sample_on_grid, PotentialSpec};
use crate::spectral::KineticDiagonal;

/// Largest state count accepted by the dense reference.
pub const DENSE_CAP: usize = 4096;

/// Default number of Magnus sub-steps for time-dependent potentials.
pub const DEFAULT_MAGNUS_STEPS: usize = 256;

fn check_size(grid: &GridSpec) -> Result<usize> {
    let n = grid.point_count();
    if n > DENSE_CAP {
        return Err(Error::TooLargeForDense { points: n, cap: DENSE_CAP });
    }
    Ok(n)
}

/// Dense shifted-DFT matrix built entry by entry from the defining sum,
/// mapping Fourier coefficients to node values.
pub fn dense_qsft_matrix(grid: &GridSpec) -> Result<DMatrix<Complex64>> {
    let size = check_size(grid)?;
    let m = grid.side();
    let shift = grid.n() as f64 / 2.0;
    let scale = (m as f64).sqrt().powi(grid.dim() as i32).recip();
    let mut out = DMatrix::zeros(size, size);
    let mut l_idx = vec![0; grid.dim()];
    let mut k_idx = vec![0; grid.dim()];
    for l in 0..size {
        grid.write_multi_index(l, &mut l_idx);
        for k in 0..size {
            grid.write_multi_index(k, &mut k_idx);
            let arg: f64 = l_idx
                .iter()
                .zip(&k_idx)
                .map(|(&lj, &kj)| 2.0 * PI * (kj as f64 - shift) * lj as f64 / m as f64)
                .sum();
            out[(l, k)] = Complex64::from_polar(scale, arg);
        }
    }
    Ok(out)
}

/// `F diag(lambda) F^dagger + diag(v)` in the node basis.
pub fn dense_hamiltonian(grid: &GridSpec, values: &[f64]) -> Result<DMatrix<Complex64>> {
    let f = dense_qsft_matrix(grid)?;
    let lambda = KineticDiagonal::new(*grid).eigenvalues();
    let mut scaled = f.clone();
    for (k, l) in lambda.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*l);
    }
    let mut h = scaled * f.adjoint();
    for (i, v) in values.iter().enumerate() {
        h[(i, i)] += Complex64::new(*v, 0.0);
    }
    Ok(h)
}

fn apply_exp(h: DMatrix<Complex64>, t: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let eig = h.symmetric_eigen();
    let mut c = eig.eigenvectors.adjoint() * psi;
    for (ci, lam) in c.iter_mut().zip(eig.eigenvalues.iter()) {
        *ci *= Complex64::from_polar(1.0, -lam * t);
    }
    eig.eigenvectors * c
}

/// Reference solution from `t = 0` to `t_total` by dense diagonalization;
/// time-dependent potentials use fourth-order Magnus sub-steps.
pub fn dense_reference_evolve(psi0: &WaveFunction, v: &PotentialSpec, t_total: f64) -> Result<WaveFunction> {
    dense_reference_evolve_with(psi0, v, t_total, DEFAULT_MAGNUS_STEPS)
}

pub fn dense_reference_evolve_with(
    psi0: &WaveFunction,
    v: &PotentialSpec,
    t_total: f64,
    magnus_steps: usize,
) -> Result<WaveFunction> {
    if psi0.representation() != Representation::Position {
        return Err(Error::RepresentationMismatch);
    }
    let grid = *psi0.grid();
    check_size(&grid)?;
    let mut psi = DVector::from_column_slice(psi0.amplitudes());
    if !v.time_dependent {
        let h = dense_hamiltonian(&grid, &sample_on_grid(v, &grid, 0.0)?)?;
        psi = apply_exp(h, t_total, &psi);
    } else {
        let steps = magnus_steps.max(1);
        let h = t_total / steps as f64;
        let kinetic = dense_hamiltonian(&grid, &vec![0.0; grid.point_count()])?;
        let c = 3f64.sqrt() / 6.0;
        let at = |t: f64| -> Result<DMatrix<Complex64>> {
            let mut m = kinetic.clone();
            for (i, x) in sample_on_grid(v, &grid, t)?.into_iter().enumerate() {
                m[(i, i)] += Complex64::new(x, 0.0);
            }
            Ok(m)
        };
        for s in 0..steps {
            let t0 = s as f64 * h;
            let h1 = at(t0 + (0.5 - c) * h)?;
            let h2 = at(t0 + (0.5 + c) * h)?;
            let comm = &h1 * &h2 - &h2 * &h1;
            let i_coef = Complex64::new(0.0, 3f64.sqrt() / 12.0 * h * h);
            let k = (h1 + h2) * Complex64::new(0.5 * h, 0.0) + comm * i_coef;
            psi = apply_exp(k, 1.0, &psi);
        }
    }
    WaveFunction::new(grid, psi.iter().copied().collect(), Representation::Position)
}
