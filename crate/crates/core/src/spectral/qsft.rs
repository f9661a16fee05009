use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, Representation, WaveFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Fourier coefficients to node values.
    Forward,
    /// Node values to Fourier coefficients.
    Inverse,
}

/// One-axis shifted DFT of length `m = n + 1`:
/// `out_l = m^{-1/2} sum_k exp(2 pi i (k - s) l / m) in_k` with `s = (m-1)/2`,
/// computed as a diagonal phase times a plain FFT.
#[derive(Clone)]
pub struct ShiftedDft {
    len: usize,
    unshifted: Arc<dyn Fft<f64>>,
    adjoint: Arc<dyn Fft<f64>>,
    phase: Vec<Complex64>,
    scratch_len: usize,
}

impl std::fmt::Debug for ShiftedDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftedDft").field("len", &self.len).finish()
    }
}

impl ShiftedDft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let mut planner = FftPlanner::new();
        // exp(+2 pi i k l / m) is rustfft's inverse direction
        let unshifted = planner.plan_fft_inverse(len);
        let adjoint = planner.plan_fft_forward(len);
        let shift = (len as f64 - 1.0) / 2.0;
        let phase = (0..len)
            .map(|l| {
                let theta = -2.0 * std::f64::consts::PI * shift * l as f64 / len as f64;
                Complex64::from_polar(1.0, theta)
            })
            .collect();
        let scratch_len =
            unshifted.get_inplace_scratch_len().max(adjoint.get_inplace_scratch_len());
        Self { len, unshifted, adjoint, phase, scratch_len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized transform of every contiguous length-`m` chunk of `data`.
    /// Callers apply the `m^{-1/2}` factor.
    fn chunks_raw(&self, data: &mut [Complex64], dir: Direction, scratch: &mut Vec<Complex64>) {
        if scratch.len() < self.scratch_len {
            scratch.resize(self.scratch_len, Complex64::default());
        }
        match dir {
            Direction::Forward => {
                self.unshifted.process_with_scratch(data, &mut scratch[..self.scratch_len]);
                for chunk in data.chunks_exact_mut(self.len) {
                    for (v, p) in chunk.iter_mut().zip(&self.phase) {
                        *v *= p;
                    }
                }
            }
            Direction::Inverse => {
                for chunk in data.chunks_exact_mut(self.len) {
                    for (v, p) in chunk.iter_mut().zip(&self.phase) {
                        *v *= p.conj();
                    }
                }
                self.adjoint.process_with_scratch(data, &mut scratch[..self.scratch_len]);
            }
        }
    }

    /// Normalized, unitary transform of a single line.
    pub fn apply(&self, line: &mut [Complex64], dir: Direction) {
        assert_eq!(line.len(), self.len);
        let mut scratch = Vec::new();
        self.chunks_raw(line, dir, &mut scratch);
        let scale = 1.0 / (self.len as f64).sqrt();
        for v in line {
            *v *= scale;
        }
    }
}

/// Tensor-product shifted DFT over all axes of a grid.
#[derive(Debug, Clone)]
pub struct Qsft {
    grid: GridSpec,
    axis: ShiftedDft,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Qsft {
    pub fn new(grid: GridSpec) -> Self {
        Self { grid, axis: ShiftedDft::new(grid.side()), line: Vec::new(), scratch: Vec::new() }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Transform a raw amplitude buffer in place.
    pub fn apply_raw(&mut self, data: &mut [Complex64], dir: Direction) {
        let m = self.grid.side();
        let dim = self.grid.dim();
        assert_eq!(data.len(), self.grid.point_count());
        for axis in 0..dim {
            let stride = self.grid.stride(axis);
            if stride == 1 {
                self.axis.chunks_raw(data, dir, &mut self.scratch);
                continue;
            }
            // gather strided lines into a contiguous block, transform, scatter back
            let block = m * stride;
            self.line.resize(block, Complex64::default());
            for outer in data.chunks_exact_mut(block) {
                for inner in 0..stride {
                    for l in 0..m {
                        self.line[inner * m + l] = outer[l * stride + inner];
                    }
                }
                self.axis.chunks_raw(&mut self.line, dir, &mut self.scratch);
                for inner in 0..stride {
                    for l in 0..m {
                        outer[l * stride + inner] = self.line[inner * m + l];
                    }
                }
            }
        }
        let scale = 1.0 / (self.grid.point_count() as f64).sqrt();
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    pub fn apply(&mut self, psi: &mut WaveFunction, dir: Direction) -> Result<()> {
        if psi.grid() != &self.grid {
            return Err(Error::InvalidGrid("transform planned for a different grid".into()));
        }
        let (expect, next) = match dir {
            Direction::Forward => (Representation::Frequency, Representation::Position),
            Direction::Inverse => (Representation::Position, Representation::Frequency),
        };
        if psi.representation() != expect {
            return Err(Error::RepresentationMismatch);
        }
        self.apply_raw(psi.amplitudes_mut(), dir);
        psi.set_representation(next);
        Ok(())
    }
}

/// Convenience wrapper: plan, transform and return a new state.
pub fn qsft(psi: &WaveFunction, dir: Direction) -> Result<WaveFunction> {
    let mut out = psi.clone();
    Qsft::new(*psi.grid()).apply(&mut out, dir)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dense_column(len: usize, k: usize) -> Vec<Complex64> {
        let shift = (len as f64 - 1.0) / 2.0;
        (0..len)
            .map(|l| {
                Complex64::from_polar(
                    1.0 / (len as f64).sqrt(),
                    2.0 * PI * (k as f64 - shift) * l as f64 / len as f64,
                )
            })
            .collect()
    }

    #[test]
    fn unit_vector_n2() {
        let t = ShiftedDft::new(3);
        let mut v = vec![Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()];
        t.apply(&mut v, Direction::Forward);
        let s = 1.0 / 3f64.sqrt();
        let expected = [
            Complex64::new(s, 0.0),
            Complex64::from_polar(s, -2.0 * PI / 3.0),
            Complex64::from_polar(s, -4.0 * PI / 3.0),
        ];
        for (a, b) in v.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn columns_match_dense_matrix() {
        for len in 3..=17 {
            let t = ShiftedDft::new(len);
            for k in 0..len {
                let mut v = vec![Complex64::default(); len];
                v[k] = Complex64::new(1.0, 0.0);
                t.apply(&mut v, Direction::Forward);
                let col = dense_column(len, k);
                for (a, b) in v.iter().zip(&col) {
                    assert!((a - b).norm() < 1e-12, "len {len} k {k}");
                }
            }
        }
    }

    #[test]
    fn representation_checked() {
        let g = GridSpec::new(1, 1, 6).unwrap();
        let psi = WaveFunction::from_fn(g, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(qsft(&psi, Direction::Forward), Err(Error::RepresentationMismatch)));
        let c = qsft(&psi, Direction::Inverse).unwrap();
        assert_eq!(c.representation(), Representation::Frequency);
    }
}
