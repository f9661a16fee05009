use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, Representation, WaveFunction};
use crate::potentials::{eval_potential, PotentialKind, PotentialSpec};
use crate::spectral::{Direction, KineticDiagonal, Qsft};

const CACHE_LIMIT: usize = 32;

/// Which root is used for the Suzuki recursion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuzukiCoefficients {
    /// `u_j = 1 / (4 - 4^(1/(2j-1)))`, the root of the order condition.
    Standard,
    /// `u_j = 1 / (1 - 4^(1/(2j-1)))`, kept as a negative control.
    Misprinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuzukiOrder {
    k: usize,
    coefficients: SuzukiCoefficients,
}

impl SuzukiOrder {
    pub fn new(k: usize) -> Result<Self> {
        Self::with_coefficients(k, SuzukiCoefficients::Standard)
    }

    pub fn with_coefficients(k: usize, coefficients: SuzukiCoefficients) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("Suzuki order k must be at least 1".into()));
        }
        Ok(Self { k, coefficients })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Formula order `2k`.
    pub fn order(&self) -> usize {
        2 * self.k
    }

    pub fn coefficients(&self) -> SuzukiCoefficients {
        self.coefficients
    }

    /// Recursion coefficient for level `j >= 2`.
    pub fn u(&self, j: usize) -> f64 {
        let root = 4f64.powf(1.0 / (2.0 * j as f64 - 1.0));
        match self.coefficients {
            SuzukiCoefficients::Standard => 1.0 / (4.0 - root),
            SuzukiCoefficients::Misprinted => 1.0 / (1.0 - root),
        }
    }

    /// `u_j` for `j = 2..=k`.
    pub fn u_coeffs(&self) -> Vec<f64> {
        (2..=self.k).map(|j| self.u(j)).collect()
    }

    /// Strang factors per step, `5^(k-1)`.
    pub fn strang_count(&self) -> u64 {
        5u64.pow(self.k as u32 - 1)
    }

    /// Exponentials per step once adjacent potential kicks are merged,
    /// `2 * 5^(k-1) + 1`.
    pub fn exponentials_per_step(&self) -> u64 {
        2 * self.strang_count() + 1
    }
}

/// Potential values at the nodes, cached when the spatial shape does not
/// depend on time.
#[derive(Debug, Clone)]
struct NodeField {
    spec: PotentialSpec,
    grid: GridSpec,
    shape: Option<Vec<f64>>,
    scratch: Vec<f64>,
}

impl NodeField {
    fn new(spec: &PotentialSpec, grid: GridSpec) -> Result<Self> {
        let shape_varies =
            spec.time_dependent && matches!(spec.kind, PotentialKind::Callable(_));
        let shape = if shape_varies || spec.is_zero() {
            None
        } else {
            let mut v = Vec::with_capacity(grid.point_count());
            for (_, x) in grid.nodes() {
                let f = spec.eval_static(&x, 0.0)?;
                if !f.is_finite() {
                    return Err(Error::NonFinite { t: 0.0 });
                }
                v.push(f);
            }
            Some(v)
        };
        Ok(Self { spec: spec.clone(), grid, shape, scratch: Vec::new() })
    }

    fn is_static(&self) -> bool {
        self.shape.is_some()
    }

    fn is_zero(&self) -> bool {
        self.spec.is_zero()
    }

    /// Values at time `t`, evaluating the callable when needed.
    fn values(&mut self, t: f64) -> Result<&[f64]> {
        if let Some(shape) = &self.shape {
            let s = self.spec.factor(t);
            if !s.is_finite() {
                return Err(Error::NonFinite { t });
            }
            self.scratch.clear();
            self.scratch.extend(shape.iter().map(|v| v * s));
        } else {
            self.scratch.clear();
            for (_, x) in self.grid.nodes() {
                self.scratch.push(eval_potential(&self.spec, &x, t)?);
            }
        }
        Ok(&self.scratch)
    }
}

/// Reusable split-operator propagator for one grid and potential.
#[derive(Debug, Clone)]
pub struct SplitOperator {
    grid: GridSpec,
    fourier: Qsft,
    kinetic: KineticDiagonal,
    field: NodeField,
    kinetic_cache: HashMap<u64, Vec<Complex64>>,
    kick_cache: HashMap<u64, Vec<Complex64>>,
    kicks: u64,
    kinetic_steps: u64,
}

impl SplitOperator {
    pub fn new(grid: GridSpec, spec: &PotentialSpec) -> Result<Self> {
        Ok(Self {
            grid,
            fourier: Qsft::new(grid),
            kinetic: KineticDiagonal::new(grid),
            field: NodeField::new(spec, grid)?,
            kinetic_cache: HashMap::new(),
            kick_cache: HashMap::new(),
            kicks: 0,
            kinetic_steps: 0,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kinetic_diagonal(&self) -> &KineticDiagonal {
        &self.kinetic
    }

    /// Potential kicks applied so far.
    pub fn kicks(&self) -> u64 {
        self.kicks
    }

    pub fn kinetic_steps(&self) -> u64 {
        self.kinetic_steps
    }

    pub fn reset_counters(&mut self) {
        self.kicks = 0;
        self.kinetic_steps = 0;
    }

    /// Potential values at the nodes at time `t`.
    pub fn potential_values(&mut self, t: f64) -> Result<Vec<f64>> {
        if self.field.is_zero() {
            return Ok(vec![0.0; self.grid.point_count()]);
        }
        Ok(self.field.values(t)?.to_vec())
    }

    /// `psi_l <- exp(-i tau f(chi_l, t)) psi_l`.
    pub fn kick(&mut self, psi: &mut [Complex64], t: f64, tau: f64) -> Result<()> {
        self.kicks += 1;
        if self.field.is_zero() || tau == 0.0 {
            return Ok(());
        }
        if self.field.is_static() {
            let scale = tau * self.field.spec.factor(t);
            if !scale.is_finite() {
                return Err(Error::NonFinite { t });
            }
            if self.kick_cache.len() > CACHE_LIMIT {
                self.kick_cache.clear();
            }
            let shape = self.field.shape.as_ref().unwrap();
            let phases = self.kick_cache.entry(scale.to_bits()).or_insert_with(|| {
                shape.iter().map(|v| Complex64::from_polar(1.0, -scale * v)).collect()
            });
            for (a, p) in psi.iter_mut().zip(phases.iter()) {
                *a *= p;
            }
        } else {
            let values = self.field.values(t)?;
            for (a, v) in psi.iter_mut().zip(values) {
                *a *= Complex64::from_polar(1.0, -tau * v);
            }
        }
        Ok(())
    }

    /// Exact free evolution for time `tau` on position amplitudes.
    pub fn drift(&mut self, psi: &mut [Complex64], tau: f64) {
        self.kinetic_steps += 1;
        if tau == 0.0 {
            return;
        }
        if self.kinetic_cache.len() > CACHE_LIMIT {
            self.kinetic_cache.clear();
        }
        let kinetic = &self.kinetic;
        let phases =
            self.kinetic_cache.entry(tau.to_bits()).or_insert_with(|| kinetic.phases(tau));
        self.fourier.apply_raw(psi, Direction::Inverse);
        for (a, p) in psi.iter_mut().zip(phases.iter()) {
            *a *= p;
        }
        self.fourier.apply_raw(psi, Direction::Forward);
    }

    /// Second-order step: half kick, full drift, half kick, with the potential
    /// read at `t + tau/2` (or at `frozen` when given).
    pub fn strang(
        &mut self,
        psi: &mut [Complex64],
        t: f64,
        tau: f64,
        frozen: Option<f64>,
    ) -> Result<()> {
        let tk = frozen.unwrap_or(t + 0.5 * tau);
        self.kick(psi, tk, 0.5 * tau)?;
        self.drift(psi, tau);
        self.kick(psi, tk, 0.5 * tau)
    }

    /// Order-`2k` Suzuki step from `t` to `t + tau`.
    pub fn suzuki(
        &mut self,
        psi: &mut [Complex64],
        t: f64,
        tau: f64,
        order: &SuzukiOrder,
        frozen: Option<f64>,
    ) -> Result<()> {
        self.suzuki_level(psi, t, tau, order.k(), order, frozen)
    }

    fn suzuki_level(
        &mut self,
        psi: &mut [Complex64],
        t: f64,
        tau: f64,
        level: usize,
        order: &SuzukiOrder,
        frozen: Option<f64>,
    ) -> Result<()> {
        if level == 1 {
            return self.strang(psi, t, tau, frozen);
        }
        let u = order.u(level);
        let a = u * tau;
        let b = (1.0 - 4.0 * u) * tau;
        let starts = [t, t + a, t + 2.0 * a, t + 2.0 * a + b, t + 3.0 * a + b];
        let lengths = [a, a, b, a, a];
        for (s, l) in starts.into_iter().zip(lengths) {
            self.suzuki_level(psi, s, l, level - 1, order, frozen)?;
        }
        Ok(())
    }

    /// `<psi|H(t)|psi> / <psi|psi>` for position amplitudes.
    pub fn energy(&mut self, psi: &[Complex64], t: f64) -> Result<f64> {
        let norm_sqr: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        let values = self.potential_values(t)?;
        let potential: f64 = psi.iter().zip(&values).map(|(a, v)| a.norm_sqr() * v).sum();
        let mut coeffs = psi.to_vec();
        self.fourier.apply_raw(&mut coeffs, Direction::Inverse);
        let kinetic: f64 = coeffs
            .iter()
            .zip(self.kinetic.eigenvalues())
            .map(|(c, l)| c.norm_sqr() * l)
            .sum();
        Ok((kinetic + potential) / norm_sqr)
    }
}

fn require_position(psi: &WaveFunction) -> Result<()> {
    if psi.representation() != Representation::Position {
        return Err(Error::RepresentationMismatch);
    }
    Ok(())
}

pub fn apply_potential_phase(
    psi: &WaveFunction,
    v: &PotentialSpec,
    t: f64,
    tau: f64,
) -> Result<WaveFunction> {
    require_position(psi)?;
    let mut out = psi.clone();
    SplitOperator::new(*psi.grid(), v)?.kick(out.amplitudes_mut(), t, tau)?;
    Ok(out)
}

pub fn apply_kinetic_phase(psi: &WaveFunction, tau: f64) -> Result<WaveFunction> {
    require_position(psi)?;
    let mut out = psi.clone();
    SplitOperator::new(*psi.grid(), &PotentialSpec::zero())?.drift(out.amplitudes_mut(), tau);
    Ok(out)
}

pub fn strang_step(psi: &WaveFunction, v: &PotentialSpec, t: f64, tau: f64) -> Result<WaveFunction> {
    require_position(psi)?;
    let mut out = psi.clone();
    SplitOperator::new(*psi.grid(), v)?.strang(out.amplitudes_mut(), t, tau, None)?;
    Ok(out)
}

pub fn suzuki_step(
    psi: &WaveFunction,
    v: &PotentialSpec,
    t: f64,
    tau: f64,
    order: &SuzukiOrder,
) -> Result<WaveFunction> {
    require_position(psi)?;
    let mut out = psi.clone();
    SplitOperator::new(*psi.grid(), v)?.suzuki(out.amplitudes_mut(), t, tau, order, None)?;
    Ok(out)
}
