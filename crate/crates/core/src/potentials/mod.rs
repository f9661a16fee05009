//! Potential evaluation, regularized Coulomb interactions and a
//! Barnes-Hut/multipole tree evaluator.

mod coulomb;
mod taylor;
mod tree;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub use coulomb::{
    coulomb_max_bound, jellium_bound, jellium_potential, modified_coulomb_direct,
    molecular_charges, molecular_mass_rescale, molecular_potential, regularization_gap,
};
pub use taylor::MultiIndexTable;
pub use tree::{default_order, BhTree, Cell, CellAudit, CenterRule, TreeStats, WorkCounter};

use crate::error::{Error, Result};
use crate::lattice::GridSpec;

pub type PotentialFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One term `amplitude * cos(2 pi k.x + phase)` of a trigonometric potential.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineTerm {
    pub amplitude: f64,
    pub wavevector: Vec<i32>,
    pub phase: f64,
}

#[derive(Clone)]
pub enum PotentialKind {
    Zero,
    Constant(f64),
    /// `omega_sq / 2 * |x - center|^2`; a one-element center is broadcast.
    Harmonic { omega_sq: f64, center: Vec<f64> },
    /// Smooth periodic potential as a finite cosine series.
    Cosine(Vec<CosineTerm>),
    Callable(PotentialFn),
    /// `sum_{i<j} q_i q_j / sqrt(|r_i - r_j|^2 + delta^2)`, particle
    /// dimension inferred from the coordinate length.
    ModifiedCoulomb { charges: Vec<f64>, delta: f64 },
    Molecular { z: f64, mass: f64, eta_e: usize, eta_n: usize, delta: f64 },
    Jellium { e: f64, eta: usize, delta: f64 },
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::Zero => write!(f, "Zero"),
            PotentialKind::Constant(c) => write!(f, "Constant({c})"),
            PotentialKind::Harmonic { omega_sq, center } => f
                .debug_struct("Harmonic")
                .field("omega_sq", omega_sq)
                .field("center", center)
                .finish(),
            PotentialKind::Cosine(terms) => f.debug_tuple("Cosine").field(terms).finish(),
            PotentialKind::Callable(_) => write!(f, "Callable(..)"),
            PotentialKind::ModifiedCoulomb { charges, delta } => f
                .debug_struct("ModifiedCoulomb")
                .field("charges", charges)
                .field("delta", delta)
                .finish(),
            PotentialKind::Molecular { z, mass, eta_e, eta_n, delta } => f
                .debug_struct("Molecular")
                .field("z", z)
                .field("mass", mass)
                .field("eta_e", eta_e)
                .field("eta_n", eta_n)
                .field("delta", delta)
                .finish(),
            PotentialKind::Jellium { e, eta, delta } => f
                .debug_struct("Jellium")
                .field("e", e)
                .field("eta", eta)
                .field("delta", delta)
                .finish(),
        }
    }
}

/// Time dependence applied as a scalar factor `s(t)` on a static shape.
#[derive(Clone)]
pub enum Modulation {
    /// `floor + peak * exp(-((t - center)/width)^2)`.
    Burst { floor: f64, peak: f64, center: f64, width: f64 },
    /// `1 + amplitude * sin(omega t)`.
    Sine { amplitude: f64, omega: f64 },
    Custom(ProfileFn),
}

impl fmt::Debug for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Burst { floor, peak, center, width } => f
                .debug_struct("Burst")
                .field("floor", floor)
                .field("peak", peak)
                .field("center", center)
                .field("width", width)
                .finish(),
            Modulation::Sine { amplitude, omega } => f
                .debug_struct("Sine")
                .field("amplitude", amplitude)
                .field("omega", omega)
                .finish(),
            Modulation::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Modulation {
    pub fn factor(&self, t: f64) -> f64 {
        match self {
            Modulation::Burst { floor, peak, center, width } => {
                let z = (t - center) / width;
                floor + peak * (-z * z).exp()
            }
            Modulation::Sine { amplitude, omega } => 1.0 + amplitude * (omega * t).sin(),
            Modulation::Custom(s) => s(t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub modulation: Option<Modulation>,
    /// Set for callables that depend on `t` and for modulated potentials.
    pub time_dependent: bool,
    /// User-declared Lipschitz constant in time.
    pub lipschitz: Option<f64>,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind) -> Self {
        Self { kind, modulation: None, time_dependent: false, lipschitz: None }
    }

    pub fn zero() -> Self {
        Self::new(PotentialKind::Zero)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(PotentialKind::Constant(c))
    }

    pub fn harmonic(omega_sq: f64, center: Vec<f64>) -> Self {
        Self::new(PotentialKind::Harmonic { omega_sq, center })
    }

    pub fn cosine(terms: Vec<CosineTerm>) -> Self {
        Self::new(PotentialKind::Cosine(terms))
    }

    pub fn callable(f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static, time_dependent: bool) -> Self {
        Self { time_dependent, ..Self::new(PotentialKind::Callable(Arc::new(f))) }
    }

    pub fn modified_coulomb(charges: Vec<f64>, delta: f64) -> Self {
        Self::new(PotentialKind::ModifiedCoulomb { charges, delta })
    }

    pub fn with_modulation(mut self, m: Modulation) -> Self {
        self.modulation = Some(m);
        self.time_dependent = true;
        self
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero)
    }

    /// Value of the static shape, before any modulation.
    pub fn eval_static(&self, x: &[f64], t: f64) -> Result<f64> {
        let v = match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant(c) => *c,
            PotentialKind::Harmonic { omega_sq, center } => {
                let r2: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, xi)| {
                        let c = if center.len() == 1 { center[0] } else { center[i] };
                        (xi - c).powi(2)
                    })
                    .sum();
                0.5 * omega_sq * r2
            }
            PotentialKind::Cosine(terms) => terms
                .iter()
                .map(|term| {
                    let dot: f64 =
                        term.wavevector.iter().zip(x).map(|(&k, xi)| k as f64 * xi).sum();
                    term.amplitude * (2.0 * PI * dot + term.phase).cos()
                })
                .sum(),
            PotentialKind::Callable(f) => f(x, t),
            PotentialKind::ModifiedCoulomb { charges, delta } => {
                if charges.is_empty() || x.len() % charges.len() != 0 {
                    return Err(Error::PotentialEvalFailure(format!(
                        "{} coordinates do not split over {} particles",
                        x.len(),
                        charges.len()
                    )));
                }
                modified_coulomb_direct(x, x.len() / charges.len(), charges, *delta)
            }
            PotentialKind::Molecular { z, eta_e, eta_n, delta, .. } => {
                molecular_potential(x, *z, *eta_e, *eta_n, *delta)?
            }
            PotentialKind::Jellium { e, eta, delta } => {
                if *eta == 0 || x.len() % eta != 0 {
                    return Err(Error::PotentialEvalFailure(format!(
                        "{} coordinates do not split over {eta} particles",
                        x.len()
                    )));
                }
                jellium_potential(x, x.len() / eta, *e, *delta)?
            }
        };
        Ok(v)
    }

    pub fn factor(&self, t: f64) -> f64 {
        self.modulation.as_ref().map_or(1.0, |m| m.factor(t))
    }
}

/// `f(x, t)`.
pub fn eval_potential(spec: &PotentialSpec, x: &[f64], t: f64) -> Result<f64> {
    let v = spec.eval_static(x, t)? * spec.factor(t);
    if !v.is_finite() {
        return Err(Error::NonFinite { t });
    }
    Ok(v)
}

/// Potential values at every grid node.
pub fn sample_on_grid(spec: &PotentialSpec, grid: &GridSpec, t: f64) -> Result<Vec<f64>> {
    grid.nodes().map(|(_, x)| eval_potential(spec, &x, t)).collect()
}

/// `max_l |f(chi_l, t)|`.
pub fn node_max_norm(spec: &PotentialSpec, grid: &GridSpec, t: f64) -> Result<f64> {
    Ok(sample_on_grid(spec, grid, t)?.iter().fold(0.0, |m, v| m.max(v.abs())))
}
