use crate::error::{Error, Result};

/// Default cap on `(n+1)^D`.
pub const DEFAULT_MEMORY_CAP: usize = 1 << 27;

/// Periodic hypercubic grid on `[0,1]^D` with `n+1` uniform nodes per axis.
///
/// The flattened coordinate vector is particle-major: coordinate `k` of
/// particle `j` sits at position `j*d_space + k`. Amplitude arrays are
/// row-major with the last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    eta: usize,
    d_space: usize,
    n: usize,
    dim_total: usize,
    point_count: usize,
}

impl GridSpec {
    pub fn new(eta: usize, d_space: usize, n: usize) -> Result<Self> {
        Self::with_cap(eta, d_space, n, DEFAULT_MEMORY_CAP)
    }

    pub fn with_cap(eta: usize, d_space: usize, n: usize, cap: usize) -> Result<Self> {
        if eta == 0 || d_space == 0 {
            return Err(Error::InvalidGrid(format!(
                "eta = {eta} and d_space = {d_space} must both be at least 1"
            )));
        }
        if n % 2 != 0 {
            return Err(Error::OddTruncation(n));
        }
        if n < 6 {
            return Err(Error::TruncationTooSmall(n));
        }
        let dim_total = eta
            .checked_mul(d_space)
            .ok_or_else(|| Error::InvalidGrid("dimension overflow".into()))?;
        let side = (n + 1) as u128;
        let mut points: u128 = 1;
        for _ in 0..dim_total {
            points = points.saturating_mul(side);
            if points > cap as u128 {
                return Err(Error::MemoryCapExceeded { points, cap });
            }
        }
        Ok(Self { eta, d_space, n, dim_total, point_count: points as usize })
    }

    /// Single-particle grid in `dim` dimensions.
    pub fn single(dim: usize, n: usize) -> Result<Self> {
        Self::new(1, dim, n)
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn d_space(&self) -> usize {
        self.d_space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total coordinate count `D = eta * d_space`.
    pub fn dim(&self) -> usize {
        self.dim_total
    }

    /// Nodes per axis, `n + 1`.
    pub fn side(&self) -> usize {
        self.n + 1
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.side() as f64
    }

    /// Node coordinate `l/(n+1)` along one axis.
    pub fn node(&self, l: usize) -> f64 {
        l as f64 / self.side() as f64
    }

    pub fn node_coords(&self, multi_index: &[usize]) -> Result<Vec<f64>> {
        if multi_index.len() != self.dim_total {
            return Err(Error::InvalidGrid(format!(
                "multi-index has {} components, grid has {}",
                multi_index.len(),
                self.dim_total
            )));
        }
        multi_index
            .iter()
            .enumerate()
            .map(|(axis, &l)| {
                if l > self.n {
                    Err(Error::IndexOutOfRange { axis, index: l, max: self.n })
                } else {
                    Ok(self.node(l))
                }
            })
            .collect()
    }

    /// Flat offset of a multi-index (last axis fastest).
    pub fn flat_index(&self, multi_index: &[usize]) -> Result<usize> {
        if multi_index.len() != self.dim_total {
            return Err(Error::InvalidGrid("multi-index rank mismatch".into()));
        }
        let side = self.side();
        let mut flat = 0;
        for (axis, &l) in multi_index.iter().enumerate() {
            if l > self.n {
                return Err(Error::IndexOutOfRange { axis, index: l, max: self.n });
            }
            flat = flat * side + l;
        }
        Ok(flat)
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim_total];
        self.write_multi_index(flat, &mut out);
        out
    }

    pub fn write_multi_index(&self, mut flat: usize, out: &mut [usize]) {
        let side = self.side();
        for slot in out.iter_mut().rev() {
            *slot = flat % side;
            flat /= side;
        }
    }

    /// Iterate over all nodes as `(flat_index, coordinates)`.
    pub fn nodes(&self) -> NodeIter<'_> {
        NodeIter { grid: self, next: 0, index: vec![0; self.dim_total] }
    }

    /// Stride of `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.side().pow((self.dim_total - 1 - axis) as u32)
    }
}

pub struct NodeIter<'a> {
    grid: &'a GridSpec,
    next: usize,
    index: Vec<usize>,
}

impl Iterator for NodeIter<'_> {
    type Item = (usize, Vec<f64>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.grid.point_count {
            return None;
        }
        let flat = self.next;
        let coords = self.index.iter().map(|&l| self.grid.node(l)).collect();
        // odometer increment
        for slot in self.index.iter_mut().rev() {
            *slot += 1;
            if *slot <= self.grid.n {
                break;
            }
            *slot = 0;
        }
        self.next += 1;
        Some((flat, coords))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.grid.point_count - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for NodeIter<'_> {}
