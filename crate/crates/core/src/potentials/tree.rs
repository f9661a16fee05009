use super::coulomb::modified_coulomb_direct;
use super::taylor::MultiIndexTable;
use crate::error::{Error, Result};

const MAX_ORDER: usize = 8;

/// Multipole order `clamp(ceil(ln(d / delta^2)), 1, 8)`.
pub fn default_order(dim: usize, delta: f64) -> usize {
    let p = (dim as f64 / (delta * delta)).ln().ceil();
    if p.is_nan() {
        return 1;
    }
    (p.max(1.0) as usize).min(MAX_ORDER)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterRule {
    /// Charge-weighted center when all charges share a sign, else geometric.
    Auto,
    Geometric,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub lo: Vec<f64>,
    pub side: f64,
    pub depth: usize,
    pub children: Vec<usize>,
    /// Range into the tree's particle ordering.
    pub start: usize,
    pub end: usize,
    pub charge: f64,
    pub abs_charge: f64,
    /// Expansion center.
    pub center: Vec<f64>,
    /// Largest distance from `center` to a particle in the cell.
    pub radius: f64,
    moments: Vec<f64>,
}

impl Cell {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn geometric_center(&self) -> Vec<f64> {
        self.lo.iter().map(|l| l + 0.5 * self.side).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkCounter {
    pub pair_terms: u64,
    pub multipole_terms: u64,
    pub cells_visited: u64,
}

impl WorkCounter {
    /// Interactions evaluated: direct pairs plus far-field cells.
    pub fn interactions(&self) -> u64 {
        self.pair_terms + self.multipole_terms
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeStats {
    pub cells: usize,
    pub leaves: usize,
    pub height: usize,
}

/// One far-field cell met during a traversal, with its measured multipole
/// error and error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellAudit {
    pub cell: usize,
    pub order: usize,
    pub measured: f64,
    /// `Q / (r - r_s) (r_s / r)^(p+1)` about the actual expansion center.
    pub bound: f64,
    /// `Q / (D - l sqrt(d)/2) (l sqrt(d) / (2 D))^(p+1)` with `D` measured
    /// from the geometric center; meaningful for geometric expansions.
    pub geometric_bound: f64,
    /// Ratio `l sqrt(d) / (2 D)`.
    pub geometric_ratio: f64,
}

/// Barnes-Hut tree over charges in `[0,1]^d` for the regularized kernel
/// `q_i q_j / sqrt(r^2 + delta^2)`.
#[derive(Debug, Clone)]
pub struct BhTree {
    dim: usize,
    delta: f64,
    leaf_side: f64,
    order: usize,
    theta: f64,
    positions: Vec<f64>,
    charges: Vec<f64>,
    perm: Vec<usize>,
    leaf_of: Vec<usize>,
    cells: Vec<Cell>,
    table: MultiIndexTable,
}

impl BhTree {
    pub fn build(positions: &[f64], charges: &[f64], dim: usize, delta: f64) -> Result<Self> {
        Self::build_with(positions, charges, dim, delta, default_order(dim, delta), CenterRule::Auto)
    }

    pub fn build_with(
        positions: &[f64],
        charges: &[f64],
        dim: usize,
        delta: f64,
        order: usize,
        center_rule: CenterRule,
    ) -> Result<Self> {
        if dim == 0 || charges.is_empty() || positions.len() != dim * charges.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates for {} charges in dimension {dim}",
                positions.len(),
                charges.len()
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
        }
        if positions.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidArgument("positions must lie in the unit cube".into()));
        }
        let eta = charges.len();
        let mut tree = Self {
            dim,
            delta,
            leaf_side: delta * delta / dim as f64,
            order,
            theta: 1.0 / (2.0 * (dim as f64).sqrt()),
            positions: positions.to_vec(),
            charges: charges.to_vec(),
            perm: (0..eta).collect(),
            leaf_of: vec![0; eta],
            cells: Vec::new(),
            table: MultiIndexTable::new(dim, order),
        };
        tree.subdivide(vec![0.0; dim], 1.0, 0, 0, eta, center_rule);
        Ok(tree)
    }

    fn subdivide(
        &mut self,
        lo: Vec<f64>,
        side: f64,
        depth: usize,
        start: usize,
        end: usize,
        rule: CenterRule,
    ) -> usize {
        let id = self.cells.len();
        let cell = self.summarize(lo.clone(), side, depth, start, end, rule);
        self.cells.push(cell);
        if end - start <= 1 || side <= self.leaf_side {
            for &p in &self.perm[start..end] {
                self.leaf_of[p] = id;
            }
            return id;
        }
        // bucket particles by orthant, stable within each bucket
        let half = 0.5 * side;
        let d = self.dim;
        let orthant = |p: usize, pos: &[f64]| -> usize {
            (0..d).fold(0, |acc, k| acc | (((pos[p * d + k] >= lo[k] + half) as usize) << k))
        };
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); 1 << d];
        for &p in &self.perm[start..end] {
            buckets[orthant(p, &self.positions)].push(p);
        }
        let mut at = start;
        let mut ranges = Vec::new();
        for (o, bucket) in buckets.iter().enumerate() {
            if bucket.is_empty() {
                continue;
            }
            self.perm[at..at + bucket.len()].copy_from_slice(bucket);
            ranges.push((o, at, at + bucket.len()));
            at += bucket.len();
        }
        let mut children = Vec::with_capacity(ranges.len());
        for (o, s, e) in ranges {
            let child_lo: Vec<f64> =
                (0..d).map(|k| lo[k] + if o >> k & 1 == 1 { half } else { 0.0 }).collect();
            children.push(self.subdivide(child_lo, half, depth + 1, s, e, rule));
        }
        self.cells[id].children = children;
        id
    }

    fn summarize(
        &self,
        lo: Vec<f64>,
        side: f64,
        depth: usize,
        start: usize,
        end: usize,
        rule: CenterRule,
    ) -> Cell {
        let d = self.dim;
        let members = &self.perm[start..end];
        let charge: f64 = members.iter().map(|&p| self.charges[p]).sum();
        let abs_charge: f64 = members.iter().map(|&p| self.charges[p].abs()).sum();
        let same_sign = members.iter().all(|&p| self.charges[p] >= 0.0)
            || members.iter().all(|&p| self.charges[p] <= 0.0);
        let geometric: Vec<f64> = lo.iter().map(|l| l + 0.5 * side).collect();
        let center = if rule == CenterRule::Auto && same_sign && abs_charge > 0.0 {
            (0..d)
                .map(|k| {
                    members
                        .iter()
                        .map(|&p| self.charges[p].abs() * self.positions[p * d + k])
                        .sum::<f64>()
                        / abs_charge
                })
                .collect()
        } else {
            geometric
        };
        let mut moments = vec![0.0; self.table.len()];
        let mut buf = Vec::new();
        let mut s = vec![0.0; d];
        let mut radius: f64 = 0.0;
        for &p in members {
            for k in 0..d {
                s[k] = self.positions[p * d + k] - center[k];
            }
            radius = radius.max(s.iter().map(|v| v * v).sum::<f64>().sqrt());
            self.table.accumulate_powers(&s, self.charges[p], &mut moments, &mut buf);
        }
        Cell {
            lo,
            side,
            depth,
            children: Vec::new(),
            start,
            end,
            charge,
            abs_charge,
            center,
            radius,
            moments,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Leaf side threshold `delta^2 / d`.
    pub fn leaf_side(&self) -> f64 {
        self.leaf_side
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Replace the opening threshold (far when `side / distance < theta`).
    pub fn set_theta(&mut self, theta: f64) {
        self.theta = theta;
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn leaf_of(&self, particle: usize) -> usize {
        self.leaf_of[particle]
    }

    pub fn particles_in(&self, cell: usize) -> &[usize] {
        let c = &self.cells[cell];
        &self.perm[c.start..c.end]
    }

    /// The root itself is a leaf because `delta^2 / d >= 1`; evaluation then
    /// uses plain pair sums.
    pub fn is_degenerate(&self) -> bool {
        self.leaf_side >= 1.0
    }

    pub fn stats(&self) -> TreeStats {
        TreeStats {
            cells: self.cells.len(),
            leaves: self.cells.iter().filter(|c| c.is_leaf()).count(),
            height: self.cells.iter().map(|c| c.depth).max().unwrap_or(0),
        }
    }

    fn position(&self, p: usize) -> &[f64] {
        &self.positions[p * self.dim..(p + 1) * self.dim]
    }

    fn is_far(&self, cell: &Cell, x: &[f64]) -> bool {
        let dist_sq: f64 =
            (0..self.dim).map(|k| (x[k] - (cell.lo[k] + 0.5 * cell.side)).powi(2)).sum();
        // side / dist < theta, without a square root
        cell.side * cell.side < self.theta * self.theta * dist_sq
    }

    fn pair(&self, x: &[f64], p: usize) -> f64 {
        let r2: f64 = x.iter().zip(self.position(p)).map(|(a, b)| (a - b) * (a - b)).sum();
        self.charges[p] / (r2 + self.delta * self.delta).sqrt()
    }

    fn multipole(&self, cell: &Cell, x: &[f64], p: usize, coeffs: &mut Vec<f64>) -> f64 {
        let r: Vec<f64> = (0..self.dim).map(|k| x[k] - cell.center[k]).collect();
        self.table.kernel_coefficients(&r, self.delta * self.delta, p, coeffs);
        coeffs.iter().zip(&cell.moments).map(|(b, m)| b * m).sum()
    }

    /// Potential `sum_j q_j / sqrt(|x - r_j|^2 + delta^2)` felt by particle
    /// `target` (or by a free point when `target` is `None`), excluding self
    /// interaction, with order-`p` far-field expansions.
    pub fn field_at(
        &self,
        x: &[f64],
        target: Option<usize>,
        p: usize,
        work: &mut WorkCounter,
    ) -> f64 {
        let p = p.min(self.order);
        let own_leaf = target.map(|t| self.leaf_of[t]);
        let mut coeffs = Vec::new();
        let mut stack = vec![0usize];
        let mut total = 0.0;
        while let Some(id) = stack.pop() {
            let cell = &self.cells[id];
            work.cells_visited += 1;
            if cell.is_leaf() {
                let snap =
                    Some(id) == own_leaf && !self.is_degenerate() && cell.side <= self.leaf_side;
                for &j in &self.perm[cell.start..cell.end] {
                    if Some(j) == target {
                        continue;
                    }
                    work.pair_terms += 1;
                    total += if snap { self.charges[j] / self.delta } else { self.pair(x, j) };
                }
            } else if self.is_far(cell, x) {
                work.multipole_terms += 1;
                total += self.multipole(cell, x, p, &mut coeffs);
            } else {
                stack.extend(cell.children.iter().rev());
            }
        }
        total
    }

    /// Field felt by particle `i`.
    pub fn field_on(&self, i: usize, p: usize, work: &mut WorkCounter) -> f64 {
        let x = self.position(i).to_vec();
        self.field_at(&x, Some(i), p, work)
    }

    /// Total pair energy `sum_{i<j} q_i q_j / sqrt(r_ij^2 + delta^2)`.
    pub fn total_potential(&self, p: usize, work: &mut WorkCounter) -> f64 {
        if self.is_degenerate() {
            let eta = self.len() as u64;
            work.pair_terms += eta * eta.saturating_sub(1) / 2;
            return modified_coulomb_direct(&self.positions, self.dim, &self.charges, self.delta);
        }
        let sum: f64 = (0..self.len()).map(|i| self.charges[i] * self.field_on(i, p, work)).sum();
        0.5 * sum
    }

    /// Compare every far-field cell used for `target` against its exact
    /// contribution.
    pub fn audit_far_cells(&self, target: usize, p: usize) -> Vec<CellAudit> {
        let p = p.min(self.order);
        let x = self.position(target).to_vec();
        let root_d = (self.dim as f64).sqrt();
        let mut coeffs = Vec::new();
        let mut stack = vec![0usize];
        let mut out = Vec::new();
        while let Some(id) = stack.pop() {
            let cell = &self.cells[id];
            if cell.is_leaf() {
                continue;
            }
            if !self.is_far(cell, &x) {
                stack.extend(cell.children.iter().rev());
                continue;
            }
            let approx = self.multipole(cell, &x, p, &mut coeffs);
            let exact: f64 = self.perm[cell.start..cell.end].iter().map(|&j| self.pair(&x, j)).sum();
            let r = x.iter().zip(&cell.center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let bound = cell.abs_charge / (r - cell.radius)
                * (cell.radius / r).powi(p as i32 + 1);
            let geo_d = x
                .iter()
                .zip(cell.geometric_center())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let reach = cell.side * root_d / 2.0;
            let geometric_bound =
                cell.abs_charge / (geo_d - reach) * (reach / geo_d).powi(p as i32 + 1);
            out.push(CellAudit {
                cell: id,
                order: p,
                measured: (approx - exact).abs(),
                bound,
                geometric_bound,
                geometric_ratio: reach / geo_d,
            });
        }
        out
    }
}
