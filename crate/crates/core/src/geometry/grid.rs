use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform Cartesian grid: `node(i) = origin + i h` componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    origin: Vec<f64>,
    h: f64,
    counts: Vec<usize>,
}

impl Grid {
    pub fn new(origin: Vec<f64>, h: f64, counts: Vec<usize>) -> Result<Self> {
        if origin.len() != counts.len() || !(1..=3).contains(&origin.len()) {
            return Err(Error::GridMismatch(format!(
                "origin has {} components, counts has {}",
                origin.len(),
                counts.len()
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacing must be > 0 (got {h})")));
        }
        if counts.iter().any(|&c| c < 2) {
            return Err(Error::InvalidParameter("a grid needs at least 2 nodes per axis".into()));
        }
        Ok(Self { origin, h, counts })
    }

    /// Smallest grid containing the box `[lo - h, hi + h]` whose nodes
    /// include `anchor + k h`.
    pub fn covering(lo: &[f64], hi: &[f64], h: f64, anchor: &[f64]) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacing must be > 0 (got {h})")));
        }
        let dim = lo.len();
        let mut origin = vec![0.0; dim];
        let mut counts = vec![0; dim];
        for k in 0..dim {
            let below = ((anchor[k] - lo[k]) / h + 1e-9).ceil() as i64 + 1;
            let above = ((hi[k] - anchor[k]) / h + 1e-9).ceil() as i64 + 1;
            origin[k] = anchor[k] - below as f64 * h;
            counts[k] = (below + above + 1) as usize;
        }
        Self::new(origin, h, counts)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell volume `h^N`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// Multi-index of a flat index; axis 0 varies fastest.
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut m = [0; 3];
        let mut r = flat;
        for (k, &c) in self.counts.iter().enumerate() {
            m[k] = r % c;
            r /= c;
        }
        m
    }

    pub fn flat_index(&self, m: &[usize]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for (k, &c) in self.counts.iter().enumerate() {
            flat += m[k] * stride;
            stride *= c;
        }
        flat
    }

    /// Flat index of the node at signed multi-index `m`, if it is on the grid.
    pub fn checked_index(&self, m: &[i64]) -> Option<usize> {
        let mut flat = 0;
        let mut stride = 1;
        for (k, &c) in self.counts.iter().enumerate() {
            if m[k] < 0 || m[k] >= c as i64 {
                return None;
            }
            flat += m[k] as usize * stride;
            stride *= c;
        }
        Some(flat)
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let m = self.multi_index(flat);
        (0..self.dim()).map(|k| self.origin[k] + m[k] as f64 * self.h).collect()
    }

    /// Continuous index coordinates `(x - origin) / h`.
    pub fn fractional_index(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|k| (x[k] - self.origin[k]) / self.h).collect()
    }

    /// The node at `x` when `x` sits on a node within `rel_tol * h`.
    pub fn node_at(&self, x: &[f64], rel_tol: f64) -> Option<usize> {
        let f = self.fractional_index(x);
        let mut m = [0i64; 3];
        for k in 0..self.dim() {
            let r = f[k].round();
            if (f[k] - r).abs() > rel_tol {
                return None;
            }
            m[k] = r as i64;
        }
        self.checked_index(&m[..self.dim()])
    }

    /// Integer offset between two nodes.
    pub fn offset(&self, from: usize, to: usize) -> [i64; 3] {
        let a = self.multi_index(from);
        let b = self.multi_index(to);
        [b[0] as i64 - a[0] as i64, b[1] as i64 - a[1] as i64, b[2] as i64 - a[2] as i64]
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.counts == other.counts
            && (self.h - other.h).abs() <= 1e-14 * self.h
            && self.origin.iter().zip(&other.origin).all(|(a, b)| (a - b).abs() <= 1e-12 * self.h.max(1.0))
    }
}
