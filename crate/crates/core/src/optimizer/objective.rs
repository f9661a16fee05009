use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

pub type ObjectiveFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type AxisFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A smooth objective together with the regularity constants the
/// optimizer needs.
#[derive(Clone)]
pub struct ObjectiveSpec {
    pub name: String,
    f: ObjectiveFn,
    /// Per-axis terms when `f(x) = sum_i f_i(x_i)`.
    axes: Option<Vec<AxisFn>>,
    /// Gradient Lipschitz constant.
    pub ell: f64,
    /// Hessian Lipschitz constant.
    pub rho: f64,
    /// Estimate of `f(x0) - f*`.
    pub f_star_gap: f64,
    /// Radius `M` of the region of interest.
    pub domain_radius: f64,
    pub dim: usize,
    pub x0: Vec<f64>,
}

impl fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("name", &self.name)
            .field("separable", &self.axes.is_some())
            .field("ell", &self.ell)
            .field("rho", &self.rho)
            .field("f_star_gap", &self.f_star_gap)
            .field("domain_radius", &self.domain_radius)
            .field("dim", &self.dim)
            .field("x0", &self.x0)
            .finish()
    }
}

impl ObjectiveSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        dim: usize,
        ell: f64,
        rho: f64,
        f_star_gap: f64,
        domain_radius: f64,
        x0: Vec<f64>,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            axes: None,
            ell,
            rho,
            f_star_gap,
            domain_radius,
            dim,
            x0,
        }
    }

    /// Objective `sum_i terms[i](x_i)`.
    pub fn separable(
        name: impl Into<String>,
        terms: Vec<AxisFn>,
        ell: f64,
        rho: f64,
        f_star_gap: f64,
        domain_radius: f64,
        x0: Vec<f64>,
    ) -> Self {
        let dim = terms.len();
        let shared = terms.clone();
        let f = move |x: &[f64]| shared.iter().zip(x).map(|(t, xi)| t(*xi)).sum();
        Self {
            name: name.into(),
            f: Arc::new(f),
            axes: Some(terms),
            ell,
            rho,
            f_star_gap,
            domain_radius,
            dim,
            x0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn axis_terms(&self) -> Option<&[AxisFn]> {
        self.axes.as_deref()
    }

    pub fn is_separable(&self) -> bool {
        self.axes.is_some()
    }

    pub fn with_start(mut self, x0: Vec<f64>) -> Self {
        self.x0 = x0;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        use crate::error::Error;
        if !(self.ell > 0.0) {
            return Err(Error::NonPositiveArg("ell"));
        }
        if !(self.rho > 0.0) {
            return Err(Error::NonPositiveArg("rho"));
        }
        if !(self.domain_radius > 0.0) {
            return Err(Error::NonPositiveArg("domain_radius"));
        }
        if !(self.f_star_gap > 0.0) {
            return Err(Error::NonPositiveArg("f_star_gap"));
        }
        if self.x0.len() != self.dim || self.dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "start point has {} coordinates, objective has {}",
                self.x0.len(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// `f(x) = sum_{i<d} x_i^2 + (x_d^2 - 1)^2`: a strict saddle at the origin
/// and minima at `x_d = +-1`. Constants hold on the ball of radius 2.
pub fn double_well(dim: usize) -> ObjectiveSpec {
    assert!(dim >= 1);
    let mut terms: Vec<AxisFn> = (0..dim - 1).map(|_| Arc::new(|x: f64| x * x) as AxisFn).collect();
    terms.push(Arc::new(|x: f64| (x * x - 1.0).powi(2)));
    let mut x0 = vec![0.0; dim];
    x0[dim - 1] = 1e-6;
    ObjectiveSpec::separable(format!("double_well_{dim}"), terms, 44.0, 48.0, 1.0, 2.0, x0)
}

/// `f(x) = sum_i lambda_i x_i^2 / 2`.
pub fn quadratic(lambdas: &[f64]) -> ObjectiveSpec {
    let terms: Vec<AxisFn> = lambdas
        .iter()
        .map(|&l| Arc::new(move |x: f64| 0.5 * l * x * x) as AxisFn)
        .collect();
    let ell = lambdas.iter().fold(0.0, |m: f64, l| m.max(l.abs()));
    let dim = lambdas.len();
    ObjectiveSpec::separable("quadratic", terms, ell, 1.0, 1.0, 2.0, vec![0.0; dim])
}

/// `f(x) = |x|^2 / 2` started from all ones.
pub fn convex_bowl(dim: usize) -> ObjectiveSpec {
    quadratic(&vec![1.0; dim]).with_start(vec![1.0; dim])
}

/// Two-dimensional Rosenbrock-style valley `(1 - x)^2 / 10 + (y - x^2)^2`,
/// minimum at `(1, 1)`. Constants hold on the ball of radius 2.
pub fn rosenbrock_like() -> ObjectiveSpec {
    let f = |x: &[f64]| 0.1 * (1.0 - x[0]).powi(2) + (x[1] - x[0] * x[0]).powi(2);
    ObjectiveSpec::new("rosenbrock_like", f, 2, 60.0, 48.0, 1.0, 2.0, vec![-0.5, 0.5])
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`; `h` defaults to
/// `sqrt(machine eps) * max(1, |x|)`.
pub fn finite_diff_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: Option<f64>) -> Vec<f64> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = h.unwrap_or_else(|| f64::EPSILON.sqrt() * norm.max(1.0));
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let up = f(&y);
            y[i] = x[i] - h;
            let down = f(&y);
            y[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Finite-difference Hessian with step `eps^(1/4) * max(1, |x|)`.
pub fn finite_diff_hessian(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = f64::EPSILON.powf(0.25) * norm.max(1.0);
    let mut y = x.to_vec();
    let mut out = DMatrix::zeros(d, d);
    let f0 = f(x);
    for i in 0..d {
        y[i] = x[i] + h;
        let up = f(&y);
        y[i] = x[i] - h;
        let down = f(&y);
        y[i] = x[i];
        out[(i, i)] = (up - 2.0 * f0 + down) / (h * h);
        for j in (i + 1)..d {
            let mut corner = |si: f64, sj: f64| {
                y[i] = x[i] + si * h;
                y[j] = x[j] + sj * h;
                let v = f(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * h * h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Smallest eigenvalue of the finite-difference Hessian. Separable
/// objectives use the diagonal only.
pub fn min_hessian_eigenvalue(obj: &ObjectiveSpec, x: &[f64]) -> f64 {
    if let Some(terms) = obj.axis_terms() {
        let h = f64::EPSILON.powf(0.25);
        return terms
            .iter()
            .zip(x)
            .map(|(t, &xi)| {
                let s = h * xi.abs().max(1.0);
                (t(xi + s) - 2.0 * t(xi) + t(xi - s)) / (s * s)
            })
            .fold(f64::INFINITY, f64::min);
    }
    let hess = finite_diff_hessian(|y| obj.eval(y), x);
    SymmetricEigen::new(hess).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}
