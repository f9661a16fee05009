use std::collections::HashMap;

const NONE: usize = usize::MAX;

/// All multi-indices `k` in `dim` variables with `|k| <= order`, sorted by
/// total degree, with lookups for `k - e_i` and `k - 2 e_i`.
#[derive(Debug, Clone)]
pub struct MultiIndexTable {
    dim: usize,
    order: usize,
    indices: Vec<Vec<u8>>,
    degree: Vec<usize>,
    minus_one: Vec<usize>,
    minus_two: Vec<usize>,
    /// First axis with a nonzero entry and the index of `k - e_axis`.
    parent: Vec<(usize, usize)>,
}

impl MultiIndexTable {
    pub fn new(dim: usize, order: usize) -> Self {
        let mut indices: Vec<Vec<u8>> = vec![vec![0; dim]];
        let mut frontier = vec![vec![0u8; dim]];
        for _ in 1..=order {
            let mut next = Vec::new();
            for k in &frontier {
                // extend only along axes at or after the last nonzero one so
                // each multi-index is generated once
                let last = k.iter().rposition(|&v| v > 0).unwrap_or(0);
                for axis in last..dim {
                    let mut c = k.clone();
                    c[axis] += 1;
                    next.push(c);
                }
            }
            indices.extend(next.iter().cloned());
            frontier = next;
        }
        let lookup: HashMap<Vec<u8>, usize> =
            indices.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let n = indices.len();
        let mut minus_one = vec![NONE; n * dim];
        let mut minus_two = vec![NONE; n * dim];
        let mut parent = vec![(0, 0); n];
        let mut degree = vec![0; n];
        for (idx, k) in indices.iter().enumerate() {
            degree[idx] = k.iter().map(|&v| v as usize).sum();
            for axis in 0..dim {
                if k[axis] >= 1 {
                    let mut c = k.clone();
                    c[axis] -= 1;
                    minus_one[idx * dim + axis] = lookup[&c];
                    if k[axis] >= 2 {
                        c[axis] -= 1;
                        minus_two[idx * dim + axis] = lookup[&c];
                    }
                }
            }
            if let Some(axis) = k.iter().position(|&v| v > 0) {
                parent[idx] = (axis, minus_one[idx * dim + axis]);
            }
        }
        Self { dim, order, indices, degree, minus_one, minus_two, parent }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn index(&self, i: usize) -> &[u8] {
        &self.indices[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }

    /// Number of multi-indices with degree at most `p`.
    pub fn count_up_to(&self, p: usize) -> usize {
        self.degree.partition_point(|&g| g <= p)
    }

    /// Accumulate `weight * s^k` into `out` for every `k`.
    pub fn accumulate_powers(&self, s: &[f64], weight: f64, out: &mut [f64], buf: &mut Vec<f64>) {
        buf.resize(self.len(), 0.0);
        buf[0] = weight;
        out[0] += weight;
        for i in 1..self.len() {
            let (axis, from) = self.parent[i];
            buf[i] = buf[from] * s[axis];
            out[i] += buf[i];
        }
    }

    /// Taylor coefficients `b_k` of `s -> 1/sqrt(|r - s|^2 + delta^2)` at
    /// `s = 0`, for all `|k| <= p`.
    pub fn kernel_coefficients(&self, r: &[f64], delta_sq: f64, p: usize, out: &mut Vec<f64>) {
        let count = self.count_up_to(p);
        out.resize(count, 0.0);
        let rho = r.iter().map(|v| v * v).sum::<f64>() + delta_sq;
        out[0] = 1.0 / rho.sqrt();
        for i in 1..count {
            let deg = self.degree[i] as f64;
            let mut lin = 0.0;
            let mut quad = 0.0;
            for axis in 0..self.dim {
                let a = self.minus_one[i * self.dim + axis];
                if a != NONE {
                    lin += r[axis] * out[a];
                }
                let b = self.minus_two[i * self.dim + axis];
                if b != NONE {
                    quad += out[b];
                }
            }
            out[i] = ((2.0 * deg - 1.0) * lin - (deg - 1.0) * quad) / (deg * rho);
        }
    }
}
