//! JSON run configurations. Every record rejects unknown keys, and the
//! conversions into model types run before any computation starts.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rsqs::lattice::snapshot::load;
use rsqs::lattice::{GridSpec, Representation, WaveFunction};
use rsqs::potentials::{CosineTerm, Modulation, PotentialKind, PotentialSpec};
use rsqs::propagate::{Planner, SuzukiCoefficients, SuzukiOrder};
use rsqs::spectral::select_truncation;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{invalid, CliError, Result};

pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "one")]
    pub eta: usize,
    pub d: usize,
    pub n: Option<usize>,
    /// Pick `n` from a derivative bound and tolerance instead.
    pub auto: Option<AutoTruncation>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoTruncation {
    pub g_prime: f64,
    pub eps: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec> {
        let n = match (self.n, &self.auto) {
            (Some(n), None) => n,
            (None, Some(a)) => select_truncation(a.g_prime, a.eps).map_err(invalid)?.n_selected,
            _ => return Err(CliError::Config("grid needs exactly one of `n` and `auto`".into())),
        };
        GridSpec::new(self.eta, self.d, n).map_err(invalid)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub shape: ShapeConfig,
    pub modulation: Option<ModulationConfig>,
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Zero,
    Constant { value: f64 },
    Harmonic { omega_sq: f64, center: Vec<f64> },
    Cosine { terms: Vec<TermConfig> },
    ModifiedCoulomb { charges: Vec<f64>, delta: f64 },
    Molecular { z: f64, mass: f64, eta_e: usize, eta_n: usize, delta: f64 },
    Jellium { e: f64, eta: usize, delta: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub amplitude: f64,
    pub wavevector: Vec<i32>,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulationConfig {
    Burst { floor: f64, peak: f64, center: f64, width: f64 },
    Sine { amplitude: f64, omega: f64 },
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec> {
        let finite = |x: f64, name: &str| require(x.is_finite(), || format!("potential field `{name}` must be finite"));
        let kind = match &self.shape {
            ShapeConfig::Zero => PotentialKind::Zero,
            ShapeConfig::Constant { value } => {
                finite(*value, "value")?;
                PotentialKind::Constant(*value)
            }
            ShapeConfig::Harmonic { omega_sq, center } => {
                finite(*omega_sq, "omega_sq")?;
                PotentialKind::Harmonic { omega_sq: *omega_sq, center: center.clone() }
            }
            ShapeConfig::Cosine { terms } => PotentialKind::Cosine(
                terms
                    .iter()
                    .map(|t| CosineTerm { amplitude: t.amplitude, wavevector: t.wavevector.clone(), phase: t.phase })
                    .collect(),
            ),
            ShapeConfig::ModifiedCoulomb { charges, delta } => {
                require(*delta > 0.0, || "modified_coulomb needs delta > 0".into())?;
                PotentialKind::ModifiedCoulomb { charges: charges.clone(), delta: *delta }
            }
            ShapeConfig::Molecular { z, mass, eta_e, eta_n, delta } => {
                require(*delta > 0.0 && *mass > 0.0, || "molecular needs delta > 0 and mass > 0".into())?;
                PotentialKind::Molecular { z: *z, mass: *mass, eta_e: *eta_e, eta_n: *eta_n, delta: *delta }
            }
            ShapeConfig::Jellium { e, eta, delta } => {
                require(*delta > 0.0, || "jellium needs delta > 0".into())?;
                PotentialKind::Jellium { e: *e, eta: *eta, delta: *delta }
            }
        };
        let mut v = PotentialSpec::new(kind);
        if let Some(m) = &self.modulation {
            v = v.with_modulation(match *m {
                ModulationConfig::Burst { floor, peak, center, width } => {
                    require(width > 0.0, || "burst width must be positive".into())?;
                    Modulation::Burst { floor, peak, center, width }
                }
                ModulationConfig::Sine { amplitude, omega } => Modulation::Sine { amplitude, omega },
            });
        }
        if let Some(l) = self.lipschitz {
            v = v.with_lipschitz(l);
        }
        Ok(v)
    }

    /// Check the shape against a grid by evaluating it at the first node.
    pub fn build_for(&self, grid: &GridSpec) -> Result<PotentialSpec> {
        let v = self.build()?;
        let x = grid.node_coords(&vec![0; grid.dim()]).map_err(invalid)?;
        v.eval_static(&x, 0.0).map_err(invalid)?;
        Ok(v)
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// Periodic Gaussian `exp(-|x - center|^2 / (4 width^2) + 2 pi i momentum.x)`.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        #[serde(default)]
        momentum: Vec<i32>,
    },
    /// Grid Fourier mode `m`, frequency `m - n/2` per axis.
    PlaneWave { mode: Vec<usize> },
    Snapshot { path: String },
}

impl InitialConfig {
    pub fn build(&self, grid: GridSpec) -> Result<WaveFunction> {
        let dim = grid.dim();
        let psi = match self {
            InitialConfig::Gaussian { center, width, momentum } => {
                require(center.len() == dim, || format!("gaussian center needs {dim} coordinates"))?;
                require(momentum.is_empty() || momentum.len() == dim, || {
                    format!("gaussian momentum needs 0 or {dim} entries")
                })?;
                require(*width > 0.0, || "gaussian width must be positive".into())?;
                WaveFunction::from_fn(grid, |x| {
                    let mut r2 = 0.0;
                    let mut phase = 0.0;
                    for (a, xa) in x.iter().enumerate() {
                        let dx = xa - center[a];
                        r2 += (dx - dx.round()).powi(2);
                        phase += 2.0 * PI * momentum.get(a).copied().unwrap_or(0) as f64 * xa;
                    }
                    Complex64::from_polar((-r2 / (4.0 * width * width)).exp(), phase)
                })
            }
            InitialConfig::PlaneWave { .. } => {
                let q = self.plane_wave_frequencies(&grid)?;
                WaveFunction::from_fn(grid, |x| {
                    Complex64::from_polar(1.0, x.iter().zip(&q).map(|(xa, qa)| qa * xa).sum())
                })
            }
            InitialConfig::Snapshot { path } => {
                let psi = load(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
                require(*psi.grid() == grid, || format!("{path}: snapshot grid does not match the configured grid"))?;
                require(psi.representation() == Representation::Position, || {
                    format!("{path}: snapshot must be in the position representation")
                })?;
                psi
            }
        };
        psi.normalize_discrete().map_err(invalid)
    }

    /// Angular frequencies `2 pi (m - n/2)` of a plane-wave start.
    pub fn plane_wave_frequencies(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        let InitialConfig::PlaneWave { mode } = self else {
            return Err(CliError::Config("not a plane wave".into()));
        };
        require(mode.len() == grid.dim(), || format!("plane_wave mode needs {} entries", grid.dim()))?;
        require(mode.iter().all(|&m| m <= grid.n()), || format!("plane_wave mode entries must be <= {}", grid.n()))?;
        Ok(mode.iter().map(|&m| 2.0 * PI * (m as f64 - grid.n() as f64 / 2.0)).collect())
    }
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientChoice {
    #[default]
    Standard,
    Misprinted,
}

pub fn suzuki(k: usize, choice: CoefficientChoice) -> Result<SuzukiOrder> {
    let c = match choice {
        CoefficientChoice::Standard => SuzukiCoefficients::Standard,
        CoefficientChoice::Misprinted => SuzukiCoefficients::Misprinted,
    };
    SuzukiOrder::with_coefficients(k, c).map_err(invalid)
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlannerConfig {
    Bound { eps: f64 },
    Fixed { steps: u64 },
    Adaptive { eps: f64, initial_steps: u64, max_steps: u64 },
}

impl PlannerConfig {
    pub fn build(&self) -> Result<Planner> {
        Ok(match *self {
            PlannerConfig::Bound { eps } => {
                require(eps > 0.0, || "planner eps must be positive".into())?;
                Planner::Bound { eps }
            }
            PlannerConfig::Fixed { steps } => Planner::Fixed(steps),
            PlannerConfig::Adaptive { eps, initial_steps, max_steps } => {
                require(eps > 0.0 && initial_steps >= 1 && max_steps >= initial_steps, || {
                    "adaptive planner needs eps > 0 and 1 <= initial_steps <= max_steps".into()
                })?;
                Planner::Adaptive { eps, initial_steps, max_steps }
            }
        })
    }

    pub fn eps(&self) -> Option<f64> {
        match *self {
            PlannerConfig::Bound { eps } | PlannerConfig::Adaptive { eps, .. } => Some(eps),
            PlannerConfig::Fixed { .. } => None,
        }
    }
}
