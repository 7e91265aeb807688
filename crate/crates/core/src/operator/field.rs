use crate::error::{Error, Result};
use crate::geometry::{Domain, Grid};

/// Anything that can be evaluated pointwise.
pub trait ScalarField {
    fn value_at(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> ScalarField for F {
    fn value_at(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

impl ScalarField for crate::closed_form::BallTorsion {
    fn value_at(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
}

impl ScalarField for crate::closed_form::HopfBarrier {
    fn value_at(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
}

impl ScalarField for crate::closed_form::CornerBarrier {
    fn value_at(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
}

/// Nodal values on a grid, zero off the grid.
///
/// With a support domain, nodes outside it hold exactly 0. Fields without
/// one (antisymmetric differences, barriers) are supported wherever their
/// values are nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    support: Option<Domain>,
}

impl Field {
    /// Values at nodes outside `support` are replaced by 0.
    pub fn new(grid: Grid, support: Option<Domain>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        if let Some(d) = &support {
            if d.dim() != grid.dim() {
                return Err(Error::DimensionMismatch { expected: grid.dim(), got: d.dim() });
            }
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value at node {i}")));
        }
        if let Some(d) = &support {
            for (i, v) in values.iter_mut().enumerate() {
                if *v != 0.0 && !d.contains(&grid.node(i)) {
                    *v = 0.0;
                }
            }
        }
        Ok(Self { grid, values, support })
    }

    pub fn zeros(grid: Grid, support: Option<Domain>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n], support }
    }

    /// Samples `f` at the nodes (inside `support` when given).
    pub fn sample(grid: Grid, support: Option<Domain>, f: &impl ScalarField) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.node(i);
                match &support {
                    Some(d) if !d.contains(&x) => 0.0,
                    _ => f.value_at(&x),
                }
            })
            .collect();
        Self::new(grid, support, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> Option<&Domain> {
        self.support.as_ref()
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Nodes with nonzero value.
    pub fn nonzero_nodes(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] != 0.0).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let values = self.values.iter().map(|v| c * v).collect();
        Self { grid: self.grid.clone(), values, support: self.support.clone() }
    }

    /// `a self + b other` on a common grid; the support is dropped unless
    /// both share it.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        let support = if self.support == other.support { self.support.clone() } else { None };
        Ok(Self { grid: self.grid.clone(), values, support })
    }

    /// Multilinear interpolation; 0 outside the grid.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let dim = self.grid.dim();
        if x.len() != dim {
            return 0.0;
        }
        let f = self.grid.fractional_index(x);
        let counts = self.grid.counts();
        let mut base = [0i64; 3];
        let mut frac = [0.0f64; 3];
        for k in 0..dim {
            if !(f[k] >= 0.0) || f[k] > (counts[k] - 1) as f64 {
                return 0.0;
            }
            let b = (f[k].floor() as i64).min(counts[k] as i64 - 2);
            base[k] = b;
            frac[k] = f[k] - b as f64;
        }
        let mut total = 0.0;
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut m = [0i64; 3];
            for k in 0..dim {
                let up = (corner >> k) & 1 == 1;
                m[k] = base[k] + up as i64;
                w *= if up { frac[k] } else { 1.0 - frac[k] };
            }
            if w != 0.0 {
                if let Some(i) = self.grid.checked_index(&m[..dim]) {
                    total += w * self.values[i];
                }
            }
        }
        total
    }
}

impl ScalarField for Field {
    fn value_at(&self, x: &[f64]) -> f64 {
        self.interpolate(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_is_enforced() {
        let g = Grid::new(vec![-1.0], 0.5, vec![5]).unwrap();
        let d = Domain::interval(-0.6, 0.6).unwrap();
        let f = Field::new(g.clone(), Some(d), vec![1.0; 5]).unwrap();
        assert_eq!(f.values(), &[0.0, 1.0, 1.0, 1.0, 0.0]);
        assert!(Field::new(g.clone(), None, vec![1.0; 4]).is_err());
        assert!(Field::new(g, None, vec![f64::NAN; 5]).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_bilinear() {
        let g = Grid::new(vec![-1.0, -1.0], 0.25, vec![9, 9]).unwrap();
        let lin = |x: &[f64]| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1];
        let f = Field::sample(g, None, &lin).unwrap();
        for x in [[0.1, 0.2], [-0.93, 0.77], [1.0, 1.0], [-1.0, 0.0]] {
            assert!((f.interpolate(&x) - lin(&x)).abs() < 1e-12);
        }
        assert_eq!(f.interpolate(&[1.01, 0.0]), 0.0);
    }

    #[test]
    fn combine_requires_same_grid() {
        let g1 = Grid::new(vec![0.0], 0.5, vec![4]).unwrap();
        let g2 = Grid::new(vec![0.1], 0.5, vec![4]).unwrap();
        let a = Field::new(g1.clone(), None, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Field::new(g2, None, vec![1.0; 4]).unwrap();
        assert!(a.combine(1.0, &b, 1.0).is_err());
        let c = a.combine(2.0, &a, -1.0).unwrap();
        assert_eq!(c.values(), a.values());
    }
}
