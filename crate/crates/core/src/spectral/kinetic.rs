use std::f64::consts::PI;

use num_complex::Complex64;

use crate::lattice::GridSpec;

/// Eigenvalues of `-1/2 Laplacian` in the shifted Fourier basis:
/// `lambda_k = 1/2 sum_j (2 pi (k_j - n/2))^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticDiagonal {
    grid: GridSpec,
    axis: Vec<f64>,
}

impl KineticDiagonal {
    pub fn new(grid: GridSpec) -> Self {
        let half = (grid.n() / 2) as f64;
        let axis = (0..grid.side())
            .map(|k| {
                let w = 2.0 * PI * (k as f64 - half);
                0.5 * w * w
            })
            .collect();
        Self { grid, axis }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Per-axis contributions, indexed by `k_j`.
    pub fn axis_values(&self) -> &[f64] {
        &self.axis
    }

    pub fn eigenvalue(&self, multi_index: &[usize]) -> f64 {
        multi_index.iter().map(|&k| self.axis[k]).sum()
    }

    /// Full eigenvalue array in flat layout.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for _ in 0..self.grid.dim() {
            out = out.iter().flat_map(|&a| self.axis.iter().map(move |&b| a + b)).collect();
        }
        out
    }

    /// Largest eigenvalue, `1/2 D (pi n)^2`.
    pub fn max(&self) -> f64 {
        let n = self.grid.n() as f64;
        0.5 * self.grid.dim() as f64 * (PI * n).powi(2)
    }

    /// `exp(-i tau lambda_k)` for every frequency multi-index, built as a
    /// tensor product of per-axis tables.
    pub fn phases(&self, tau: f64) -> Vec<Complex64> {
        let table: Vec<Complex64> =
            self.axis.iter().map(|&l| Complex64::from_polar(1.0, -tau * l)).collect();
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..self.grid.dim() {
            out = out.iter().flat_map(|&a| table.iter().map(move |&b| a * b)).collect();
        }
        out
    }
}
