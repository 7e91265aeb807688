//! Lattice collocation of `(-Δ)^s` for functions vanishing outside a
//! bounded set.
//!
//! At a node `x` of spacing `h` the operator is
//!
//! ```text
//! c_{N,s} h^{-2s} [ E u(x) - sum_{k != 0} |k|^{-N-2s} u(x + kh) ]
//!   + c_{N,s} h^{-2s} Z/(2N) sum_d (u(x + h e_d) + u(x - h e_d) - 2 u(x))
//! ```
//!
//! where `E = sum_{k != 0} |k|^{-N-2s}` collects the whole lattice (the tail
//! of a compactly supported `u` is therefore exact) and the second line is a
//! near-field Taylor correction making the scheme exact on quadratics; see
//! [`lattice`] for `E` and `Z`. Off-diagonal couplings are negative and rows
//! sum to zero on the full lattice, so the stiffness matrix is a symmetric
//! M-matrix.

mod field;
pub mod lattice;

pub use field::{Field, ScalarField};
pub use lattice::{lattice_constants, LatticeConstants};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{c_ns, FracParams};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Grid};

/// Default cap on the number of unknowns of a dense assembly.
pub const DEFAULT_NODE_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NearField {
    /// Skip the singular cell and add the quadratic Taylor correction.
    #[default]
    Taylor,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureScheme {
    /// Half-width of the summation window around the evaluation point.
    /// `None` picks the smallest window containing the support.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default)]
    pub near: NearField,
}

impl QuadratureScheme {
    pub fn with_rho(rho: f64) -> Self {
        Self { rho: Some(rho), near: NearField::Taylor }
    }
}

/// A pointwise value and whether it was taken closer than `2h` to the
/// boundary of the support, where the profile is only `C^s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub flagged: bool,
}

/// The smallest grid of spacing `h` covering `support` with a one-node
/// margin and a node at the center of its bounding box.
pub fn grid_for(support: &Domain, h: f64) -> Result<Grid> {
    let (lo, hi) = support.bounding_box();
    Grid::covering(&lo, &hi, h, &support.center())
}

/// Collocation weights for one `(N, s, h)`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    params: FracParams,
    h: f64,
    scale: f64,
    lattice: LatticeConstants,
}

impl DiscreteOperator {
    pub fn new(params: FracParams, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacing must be > 0 (got {h})")));
        }
        Ok(Self { params, h, scale: c_ns(params) * h.powf(-2.0 * params.s()), lattice: lattice_constants(params) })
    }

    pub fn params(&self) -> FracParams {
        self.params
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Diagonal entry: `c h^{-2s} (E - Z)`.
    pub fn self_weight(&self) -> f64 {
        self.scale * (self.lattice.self_sum - self.lattice.laplace_defect)
    }

    /// Magnitude of the (negative) coupling between nodes `offset` apart.
    pub fn coupling(&self, offset: &[i64]) -> f64 {
        let r2: i64 = offset.iter().map(|k| k * k).sum();
        if r2 == 0 {
            return 0.0;
        }
        let n = self.params.dim() as f64;
        let mut w = (r2 as f64).powf(-0.5 * self.params.kernel_exponent());
        if r2 == 1 {
            w -= self.lattice.laplace_defect / (2.0 * n);
        }
        self.scale * w
    }

    fn table(&self, grid: &Grid) -> CouplingTable {
        CouplingTable::new(self, grid)
    }

    /// `(A u)` at the given nodes of the field's grid.
    pub fn apply(&self, u: &Field, nodes: &[usize]) -> Vec<f64> {
        let grid = u.grid();
        let table = self.table(grid);
        let nz: Vec<([usize; 3], f64)> =
            u.nonzero_nodes().into_iter().map(|j| (grid.multi_index(j), u.value(j))).collect();
        let diag = self.self_weight();
        nodes
            .par_iter()
            .map(|&i| {
                let mi = grid.multi_index(i);
                let mut acc = 0.0;
                for (mj, vj) in &nz {
                    acc += table.get(&mi, mj) * vj;
                }
                // the loop also picked up i itself with coupling 0
                diag * u.value(i) - acc
            })
            .collect()
    }

    /// `(A u)` at every node.
    pub fn apply_all(&self, u: &Field) -> Field {
        let nodes: Vec<usize> = (0..u.grid().len()).collect();
        let values = self.apply(u, &nodes);
        Field::new(u.grid().clone(), None, values).expect("finite output")
    }
}

/// Couplings indexed by absolute node offset.
struct CouplingTable {
    dim: usize,
    counts: [usize; 3],
    values: Vec<f64>,
}

impl CouplingTable {
    fn new(op: &DiscreteOperator, grid: &Grid) -> Self {
        let dim = grid.dim();
        let mut counts = [1usize; 3];
        counts[..dim].copy_from_slice(grid.counts());
        let len = counts.iter().product();
        let values = (0..len)
            .map(|flat| {
                let k = [
                    (flat % counts[0]) as i64,
                    ((flat / counts[0]) % counts[1]) as i64,
                    (flat / (counts[0] * counts[1])) as i64,
                ];
                op.coupling(&k[..dim])
            })
            .collect();
        Self { dim, counts, values }
    }

    #[inline]
    fn get(&self, a: &[usize; 3], b: &[usize; 3]) -> f64 {
        let d0 = a[0].abs_diff(b[0]);
        let d1 = if self.dim > 1 { a[1].abs_diff(b[1]) } else { 0 };
        let d2 = if self.dim > 2 { a[2].abs_diff(b[2]) } else { 0 };
        self.values[d0 + self.counts[0] * (d1 + self.counts[1] * d2)]
    }
}

fn check_dims(p: FracParams, got: usize) -> Result<()> {
    if p.dim() != got {
        return Err(Error::DimensionMismatch { expected: p.dim(), got });
    }
    Ok(())
}

/// `(-Δ)^s u` at a node of the field's grid.
///
/// With `q.rho` set, every nonzero value must lie within `rho` (max-norm)
/// of `x`.
pub fn frac_laplacian_at(u: &Field, x: &[f64], p: FracParams, q: &QuadratureScheme) -> Result<Evaluation> {
    let grid = u.grid();
    check_dims(p, x.len())?;
    check_dims(p, grid.dim())?;
    let node =
        grid.node_at(x, 1e-6).ok_or_else(|| Error::InvalidParameter("evaluation point is not a grid node".into()))?;
    if let Some(rho) = q.rho {
        let reach = (rho / grid.h() + 1e-9).floor() as i64;
        let far = u.nonzero_nodes().into_iter().any(|j| {
            let o = grid.offset(node, j);
            o.iter().any(|k| k.abs() > reach)
        });
        if far {
            return Err(Error::InvalidParameter(format!("support extends beyond rho = {rho}")));
        }
    }
    let op = DiscreteOperator::new(p, grid.h())?;
    let value = op.apply(u, &[node])[0];
    let flagged = match u.support() {
        Some(d) => d.signed_distance(x) < 2.0 * grid.h(),
        None => false,
    };
    Ok(Evaluation { value, flagged })
}

/// `(-Δ)^s f` at an arbitrary point `x`, summing `f` over the lattice
/// `x + h Z^N`. `f` must vanish outside `support`.
pub fn frac_laplacian_of_fn(
    f: &(impl ScalarField + Sync),
    support: &Domain,
    x: &[f64],
    h: f64,
    p: FracParams,
    q: &QuadratureScheme,
) -> Result<Evaluation> {
    check_dims(p, x.len())?;
    check_dims(p, support.dim())?;
    let (lo, hi) = support.bounding_box();
    let needed = (0..x.len()).fold(0.0f64, |m, k| m.max((x[k] - lo[k]).abs()).max((hi[k] - x[k]).abs()));
    let rho = match q.rho {
        Some(r) if r < needed => {
            return Err(Error::InvalidParameter(format!("rho = {r} does not reach the support (needs {needed})")))
        }
        Some(r) => r,
        None => needed,
    };
    let op = DiscreteOperator::new(p, h)?;
    let reach = (rho / h).ceil() as i64 + 1;
    let dim = x.len();
    let width = (2 * reach + 1) as usize;
    let total = width.pow(dim as u32);
    let partial: f64 = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut k = [0i64; 3];
            let mut rest = flat;
            for kk in k.iter_mut().take(dim) {
                *kk = (rest % width) as i64 - reach;
                rest /= width;
            }
            let w = op.coupling(&k[..dim]);
            if w == 0.0 {
                return 0.0;
            }
            let y: Vec<f64> = (0..dim).map(|d| x[d] + k[d] as f64 * h).collect();
            if !support.contains(&y) {
                return 0.0;
            }
            w * f.value_at(&y)
        })
        .sum();
    let value = op.self_weight() * f.value_at(x) - partial;
    Ok(Evaluation { value, flagged: support.signed_distance(x) < 2.0 * h })
}

/// `E(u, v) = h^N sum_i v_i (A u)_i`, the discrete counterpart of
/// `(c/2) ∬ (u(x)-u(y))(v(x)-v(y)) |x-y|^{-N-2s}`.
pub fn bilinear_form(u: &Field, v: &Field, p: FracParams) -> Result<f64> {
    if !u.grid().same_as(v.grid()) {
        return Err(Error::GridMismatch("bilinear form of fields on different grids".into()));
    }
    check_dims(p, u.grid().dim())?;
    let op = DiscreteOperator::new(p, u.grid().h())?;
    let nodes = v.nonzero_nodes();
    let au = op.apply(u, &nodes);
    let sum: f64 = nodes.iter().zip(&au).map(|(&i, a)| v.value(i) * a).sum();
    Ok(sum * u.grid().cell_volume())
}

/// Dense collocation matrix over the grid nodes strictly inside a domain.
#[derive(Debug, Clone)]
pub struct Stiffness {
    grid: Grid,
    support: Domain,
    nodes: Vec<usize>,
    matrix: DMatrix<f64>,
}

impl Stiffness {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn support(&self) -> &Domain {
        &self.support
    }

    /// Grid indices of the unknowns, in matrix order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Field from values at the unknowns.
    pub fn to_field(&self, values: &DVector<f64>) -> Field {
        let mut all = vec![0.0; self.grid.len()];
        for (k, &i) in self.nodes.iter().enumerate() {
            all[i] = values[k];
        }
        Field::new(self.grid.clone(), Some(self.support.clone()), all).expect("finite values")
    }

    /// Values of `u` at the unknowns.
    pub fn restrict(&self, u: &Field) -> DVector<f64> {
        DVector::from_iterator(self.nodes.len(), self.nodes.iter().map(|&i| u.value(i)))
    }
}

/// Grid nodes at positive signed distance from the boundary of `support`.
pub fn interior_nodes(grid: &Grid, support: &Domain) -> Vec<usize> {
    (0..grid.len()).filter(|&i| support.signed_distance(&grid.node(i)) > 0.0).collect()
}

pub fn assemble_stiffness(grid: &Grid, support: &Domain, p: FracParams, q: &QuadratureScheme) -> Result<Stiffness> {
    assemble_stiffness_capped(grid, support, p, q, DEFAULT_NODE_CAP)
}

pub fn assemble_stiffness_capped(
    grid: &Grid,
    support: &Domain,
    p: FracParams,
    _q: &QuadratureScheme,
    cap: usize,
) -> Result<Stiffness> {
    check_dims(p, grid.dim())?;
    check_dims(p, support.dim())?;
    let nodes = interior_nodes(grid, support);
    if nodes.len() > cap {
        return Err(Error::TooLarge { count: nodes.len(), cap });
    }
    if nodes.is_empty() {
        return Err(Error::InvalidGeometry("no grid node lies inside the domain".into()));
    }
    let op = DiscreteOperator::new(p, grid.h())?;
    let table = op.table(grid);
    let multi: Vec<[usize; 3]> = nodes.iter().map(|&i| grid.multi_index(i)).collect();
    let n = nodes.len();
    let diag = op.self_weight();
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    matrix.as_mut_slice().par_chunks_mut(n).enumerate().for_each(|(j, col)| {
        for (i, entry) in col.iter_mut().enumerate() {
            *entry = if i == j { diag } else { -table.get(&multi[i], &multi[j]) };
        }
    });
    Ok(Stiffness { grid: grid.clone(), support: support.clone(), nodes, matrix })
}

#[cfg(test)]
mod tests;
