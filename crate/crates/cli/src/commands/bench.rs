use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rsqs::potentials::{modified_coulomb_direct, regularization_gap, BhTree, CenterRule, WorkCounter};
use serde::{Deserialize, Serialize};

use super::Run;
use crate::artifacts::Artifacts;
use crate::config::require;
use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub d: usize,
    pub delta: f64,
    /// Synthetic particle counts; positions uniform in `[0,1]^d`.
    #[serde(default)]
    pub etas: Vec<usize>,
    /// CSV file with columns `x_1..x_d, q` and no header, benchmarked in
    /// addition to the synthetic sets.
    pub particles: Option<String>,
    #[serde(default = "default_charges")]
    pub charge_range: (f64, f64),
    /// Multipole order; defaults to the dimension rule.
    pub order: Option<usize>,
    /// Opening threshold on `side / distance`.
    pub theta: Option<f64>,
    /// Fixed relative-error target; defaults to the regularization gap over
    /// the direct value.
    pub target: Option<f64>,
    pub rng_seed: Option<u64>,
}

fn default_charges() -> (f64, f64) {
    (0.5, 1.5)
}

#[derive(Debug, Serialize)]
struct Row {
    eta: usize,
    source: String,
    direct_value: f64,
    bh_value: f64,
    rel_err: f64,
    target: f64,
    pair_terms: u64,
    multipole_terms: u64,
    interactions: u64,
}

#[derive(Debug, Serialize)]
struct TimingRow {
    eta: usize,
    source: String,
    t_direct: f64,
    t_bh: f64,
}

struct Set {
    source: String,
    x: Vec<f64>,
    q: Vec<f64>,
}

fn read_particles(path: &str, d: usize) -> Result<Set> {
    let bad = |msg: String| CliError::Config(format!("{path}: {msg}"));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let (mut x, mut q) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != d + 1 {
            return Err(bad(format!("row {} has {} fields, expected {}", line + 1, rec.len(), d + 1)));
        }
        let vals = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
        if vals[..d].iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(bad(format!("row {}: coordinates must lie in [0, 1]", line + 1)));
        }
        x.extend_from_slice(&vals[..d]);
        q.push(vals[d]);
    }
    if q.is_empty() {
        return Err(bad("no particles".into()));
    }
    Ok(Set { source: path.to_string(), x, q })
}

pub fn run(cfg: BenchConfig, seed: u64) -> Result<Run> {
    require(cfg.d >= 1, || "d must be at least 1".into())?;
    require(cfg.delta > 0.0, || "delta must be positive".into())?;
    require(cfg.etas.iter().all(|&e| e >= 2), || "every eta must be at least 2".into())?;
    require(!cfg.etas.is_empty() || cfg.particles.is_some(), || "give `etas` or `particles`".into())?;
    let (lo, hi) = cfg.charge_range;
    require(lo < hi, || "charge_range must be increasing".into())?;
    if let Some(t) = cfg.theta {
        require(t > 0.0, || "theta must be positive".into())?;
    }
    if let Some(t) = cfg.target {
        require(t >= 0.0, || "target must be nonnegative".into())?;
    }
    let mut sets = Vec::new();
    if let Some(path) = &cfg.particles {
        sets.push(read_particles(path, cfg.d)?);
    }
    for (i, &eta) in cfg.etas.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let x = (0..eta * cfg.d).map(|_| rng.random::<f64>()).collect();
        let q = (0..eta).map(|_| rng.random_range(lo..hi)).collect();
        sets.push(Set { source: "uniform".into(), x, q });
    }

    Ok(Box::new(move || {
        let results = sets
            .par_iter()
            .map(|s| -> Result<(Row, TimingRow)> {
                let eta = s.q.len();
                let start = Instant::now();
                let direct = modified_coulomb_direct(&s.x, cfg.d, &s.q, cfg.delta);
                let t_direct = start.elapsed().as_secs_f64();
                let start = Instant::now();
                let mut tree = match cfg.order {
                    Some(p) => BhTree::build_with(&s.x, &s.q, cfg.d, cfg.delta, p, CenterRule::Auto)?,
                    None => BhTree::build(&s.x, &s.q, cfg.d, cfg.delta)?,
                };
                if let Some(t) = cfg.theta {
                    tree.set_theta(t);
                }
                let mut work = WorkCounter::default();
                let bh = tree.total_potential(tree.order(), &mut work);
                let t_bh = start.elapsed().as_secs_f64();
                let rel_err = if direct == 0.0 { (bh - direct).abs() } else { (bh - direct).abs() / direct.abs() };
                let target = cfg.target.unwrap_or_else(|| {
                    let gap = regularization_gap(&s.x, cfg.d, cfg.delta);
                    if direct == 0.0 { gap } else { gap / direct.abs() }
                });
                Ok((
                    Row {
                        eta,
                        source: s.source.clone(),
                        direct_value: direct,
                        bh_value: bh,
                        rel_err,
                        target,
                        pair_terms: work.pair_terms,
                        multipole_terms: work.multipole_terms,
                        interactions: work.interactions(),
                    },
                    TimingRow { eta, source: s.source.clone(), t_direct, t_bh },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let (rows, timing): (Vec<Row>, Vec<TimingRow>) = results.into_iter().unzip();
        let mut art = Artifacts::default();
        art.csv("bench.csv", &rows)?;
        art.csv("bench_timing.csv", &timing)?;
        let missed: Vec<usize> = rows.iter().filter(|r| !(r.rel_err <= r.target)).map(|r| r.eta).collect();
        if !missed.is_empty() {
            art.fail(format!("accuracy target missed for eta = {missed:?}"));
        }
        Ok(art)
    }))
}
