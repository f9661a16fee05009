pub mod bench;
pub mod converge;
pub mod optimize;
pub mod order;
pub mod plan;
pub mod simulate;

use crate::artifacts::Artifacts;
use crate::error::Result;

/// A validated run, ready to execute.
pub type Run = Box<dyn FnOnce() -> Result<Artifacts>>;

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}
