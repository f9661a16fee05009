use num_complex::Complex64;

use super::GridSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// Amplitudes at the interpolation nodes.
    Position,
    /// Shifted Fourier coefficients `c_k`.
    Frequency,
}

impl Representation {
    pub fn flag(self) -> u8 {
        match self {
            Representation::Position => 0,
            Representation::Frequency => 1,
        }
    }

    pub fn from_flag(flag: u8) -> Option<Self> {
        match flag {
            0 => Some(Representation::Position),
            1 => Some(Representation::Frequency),
            _ => None,
        }
    }
}

/// Complex amplitudes over the grid nodes.
///
/// The discrete normalization convention is `sum |psi_l|^2 = (n+1)^D`, the
/// node-sum analogue of a unit `L^2` norm on `[0,1]^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: GridSpec,
    amplitudes: Vec<Complex64>,
    representation: Representation,
}

impl WaveFunction {
    pub fn new(
        grid: GridSpec,
        amplitudes: Vec<Complex64>,
        representation: Representation,
    ) -> Result<Self> {
        if amplitudes.len() != grid.point_count() {
            return Err(Error::LengthMismatch {
                expected: grid.point_count(),
                actual: amplitudes.len(),
            });
        }
        Ok(Self { grid, amplitudes, representation })
    }

    pub fn zeros(grid: GridSpec, representation: Representation) -> Self {
        Self {
            grid,
            amplitudes: vec![Complex64::new(0.0, 0.0); grid.point_count()],
            representation,
        }
    }

    /// Sample `f` at every node (position representation).
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let amplitudes = grid.nodes().map(|(_, x)| f(&x)).collect();
        Self { grid, amplitudes, representation: Representation::Position }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub(crate) fn set_representation(&mut self, rep: Representation) {
        self.representation = rep;
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescale so that `||psi||^2 = (n+1)^D`.
    pub fn normalize_discrete(mut self) -> Result<Self> {
        self.normalize_in_place()?;
        Ok(self)
    }

    pub fn normalize_in_place(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroState);
        }
        let target = (self.grid.point_count() as f64).sqrt();
        let scale = target / norm;
        for a in &mut self.amplitudes {
            *a *= scale;
        }
        Ok(())
    }

    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `||self - other||`.
    pub fn distance(&self, other: &WaveFunction) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `||self - other|| / ||other||`.
    pub fn relative_distance(&self, other: &WaveFunction) -> f64 {
        self.distance(other) / other.norm()
    }

    /// Node probabilities `|psi_l|^2 / ||psi||^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.norm_sqr();
        self.amplitudes.iter().map(|a| a.norm_sqr() / total).collect()
    }
}
