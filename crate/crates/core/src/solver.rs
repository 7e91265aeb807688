//! Dirichlet problems `(-Δ)^s u = g` in a domain with `u = 0` outside, the
//! semilinear version `(-Δ)^s u = f(u)` and the first eigenvalue.

use nalgebra::{Cholesky, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::constants::FracParams;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::operator::{
    assemble_stiffness_capped, grid_for, Field, QuadratureScheme, ScalarField, Stiffness, DEFAULT_NODE_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinear {
    Off,
    FixedPoint { damping: f64, max_iterations: usize },
}

impl Default for Nonlinear {
    fn default() -> Self {
        Nonlinear::FixedPoint { damping: 0.5, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub h: f64,
    #[serde(default)]
    pub quad: QuadratureScheme,
    /// Stopping tolerance of the iterative parts (fixed point, eigenvalue).
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub nonlinear: Nonlinear,
    #[serde(default = "default_cap")]
    pub node_cap: usize,
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_cap() -> usize {
    DEFAULT_NODE_CAP
}

impl SolveConfig {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            quad: QuadratureScheme::default(),
            tolerance: default_tolerance(),
            nonlinear: Nonlinear::default(),
            node_cap: default_cap(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!("h must be > 0 (got {})", self.h)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be > 0 (got {})", self.tolerance)));
        }
        if let Nonlinear::FixedPoint { damping, max_iterations } = self.nonlinear {
            if !(damping > 0.0 && damping <= 1.0) {
                return Err(Error::InvalidParameter(format!("damping must lie in (0, 1] (got {damping})")));
            }
            if max_iterations == 0 {
                return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Assembled and factorized operator on one domain.
pub struct DirichletProblem {
    params: FracParams,
    stiffness: Stiffness,
    factor: Cholesky<f64, Dyn>,
}

/// A computed field and the max-norm of `A u - g` at the unknowns.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: Field,
    pub residual: f64,
}

impl DirichletProblem {
    pub fn new(d: &Domain, p: FracParams, cfg: &SolveConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = grid_for(d, cfg.h)?;
        let stiffness = assemble_stiffness_capped(&grid, d, p, &cfg.quad, cfg.node_cap)?;
        let factor = Cholesky::new(stiffness.matrix().clone())
            .ok_or_else(|| Error::LinearAlgebra("stiffness matrix is not positive definite".into()))?;
        Ok(Self { params: p, stiffness, factor })
    }

    pub fn params(&self) -> FracParams {
        self.params
    }

    pub fn stiffness(&self) -> &Stiffness {
        &self.stiffness
    }

    /// Values of `g` at the unknowns.
    pub fn sample(&self, g: &impl ScalarField) -> DVector<f64> {
        let grid = self.stiffness.grid();
        DVector::from_iterator(self.stiffness.len(), self.stiffness.nodes().iter().map(|&i| g.value_at(&grid.node(i))))
    }

    pub fn solve_vector(&self, rhs: &DVector<f64>) -> (DVector<f64>, f64) {
        let u = self.factor.solve(rhs);
        let r = self.stiffness.matrix() * &u - rhs;
        (u, r.amax())
    }

    pub fn solve(&self, g: &impl ScalarField) -> Result<Solution> {
        let rhs = self.sample(g);
        if let Some(k) = rhs.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("right-hand side is not finite at unknown {k}")));
        }
        let (u, residual) = self.solve_vector(&rhs);
        Ok(Solution { field: self.stiffness.to_field(&u), residual })
    }
}

pub fn solve_dirichlet(d: &Domain, g: &impl ScalarField, p: FracParams, cfg: &SolveConfig) -> Result<Solution> {
    DirichletProblem::new(d, p, cfg)?.solve(g)
}

#[derive(Debug, Clone)]
pub struct SemilinearSolution {
    pub field: Field,
    /// Max-norm of `A u - f(u)` at the unknowns.
    pub residual: f64,
    pub iterations: usize,
    /// Successive max-differences, one per iteration.
    pub history: Vec<f64>,
}

/// Damped Picard iteration `u <- (1 - θ) u + θ A^{-1} f(u)` from `u = 0`.
/// The first step is taken undamped, so a constant `f` is reproduced by the
/// first iterate and confirmed by the second.
pub fn solve_semilinear(
    d: &Domain,
    f: impl Fn(f64) -> f64,
    p: FracParams,
    cfg: &SolveConfig,
) -> Result<SemilinearSolution> {
    let problem = DirichletProblem::new(d, p, cfg)?;
    solve_semilinear_with(&problem, f, cfg)
}

pub fn solve_semilinear_with(
    problem: &DirichletProblem,
    f: impl Fn(f64) -> f64,
    cfg: &SolveConfig,
) -> Result<SemilinearSolution> {
    cfg.validate()?;
    let (damping, max_iterations) = match cfg.nonlinear {
        Nonlinear::Off => return Err(Error::InvalidParameter("semilinear solve needs the fixed-point mode".into())),
        Nonlinear::FixedPoint { damping, max_iterations } => (damping, max_iterations),
    };
    let n = problem.stiffness().len();
    let mut u = DVector::<f64>::zeros(n);
    let mut history = Vec::new();
    for it in 1..=max_iterations {
        let rhs = u.map(&f);
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(no_convergence(problem, it, f64::INFINITY, history, &u));
        }
        let (target, _) = problem.solve_vector(&rhs);
        let theta = if it == 1 { 1.0 } else { damping };
        let next = &u * (1.0 - theta) + &target * theta;
        let diff = (&next - &u).amax();
        history.push(diff);
        u = next;
        if diff <= cfg.tolerance * (1.0 + u.amax()) {
            let residual = (problem.stiffness().matrix() * &u - u.map(&f)).amax();
            return Ok(SemilinearSolution {
                field: problem.stiffness().to_field(&u),
                residual,
                iterations: it,
                history,
            });
        }
    }
    let last = *history.last().unwrap_or(&f64::INFINITY);
    Err(no_convergence(problem, max_iterations, last, history, &u))
}

fn no_convergence(
    problem: &DirichletProblem,
    iterations: usize,
    residual: f64,
    history: Vec<f64>,
    u: &DVector<f64>,
) -> Error {
    Error::NoConvergence {
        iterations,
        residual,
        history,
        last_iterate: problem.stiffness().to_field(u).values().to_vec(),
    }
}

#[derive(Debug, Clone)]
pub struct EigenEstimate {
    pub value: f64,
    /// `|A phi - lambda phi| / (lambda |phi|)` in the max norm.
    pub residual: f64,
    pub iterations: usize,
    /// Positive eigenvector normalized to unit max.
    pub eigenfunction: Field,
}

const EIGEN_MAX_ITERATIONS: usize = 2000;

/// Smallest eigenvalue of `A phi = lambda phi` (lumped mass) by inverse
/// power iteration.
pub fn estimate_lambda1(d: &Domain, p: FracParams, cfg: &SolveConfig) -> Result<EigenEstimate> {
    let problem = DirichletProblem::new(d, p, cfg)?;
    estimate_lambda1_with(&problem, 1e-8)
}

pub fn estimate_lambda1_with(problem: &DirichletProblem, tolerance: f64) -> Result<EigenEstimate> {
    let a = problem.stiffness().matrix();
    let n = problem.stiffness().len();
    let mut phi = DVector::<f64>::from_element(n, 1.0);
    let mut history = Vec::new();
    for it in 1..=EIGEN_MAX_ITERATIONS {
        let (next, _) = problem.solve_vector(&phi);
        phi = &next / next.amax();
        let aphi = a * &phi;
        let lambda = phi.dot(&aphi) / phi.dot(&phi);
        let residual = (&aphi - &phi * lambda).amax() / (lambda * phi.amax());
        history.push(residual);
        if residual <= tolerance {
            return Ok(EigenEstimate {
                value: lambda,
                residual,
                iterations: it,
                eigenfunction: problem.stiffness().to_field(&phi),
            });
        }
    }
    let last = *history.last().unwrap();
    Err(Error::NoConvergence { iterations: EIGEN_MAX_ITERATIONS, residual: last, history, last_iterate: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::BallTorsion;
    use crate::constants::lambda1_lower_bound;
    use crate::operator::bilinear_form;

    fn p(n: usize, s: f64) -> FracParams {
        FracParams::new(n, s).unwrap()
    }

    fn one(_: &[f64]) -> f64 {
        1.0
    }

    #[test]
    fn torsion_in_unit_interval() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let sol = solve_dirichlet(&d, &one, p(1, 0.5), &SolveConfig::new(1.0 / 256.0)).unwrap();
        assert!(sol.residual < 1e-9);
        let bt = BallTorsion::new(p(1, 0.5), vec![0.0], 1.0).unwrap();
        let g = sol.field.grid();
        let mut worst: f64 = 0.0;
        for i in 0..g.len() {
            let x = g.node(i);
            if d.signed_distance(&x) >= 0.2 {
                worst = worst.max((sol.field.value(i) / bt.eval(&x) - 1.0).abs());
            }
        }
        assert!(worst < 0.05, "{worst}");
    }

    #[test]
    fn zero_data_zero_solution() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let sol = solve_dirichlet(&d, &|_: &[f64]| 0.0, p(1, 0.3), &SolveConfig::new(1.0 / 32.0)).unwrap();
        assert_eq!(sol.field.max_abs(), 0.0);
    }

    #[test]
    fn linearity_comparison_positivity() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let prob = DirichletProblem::new(&d, p(1, 0.4), &SolveConfig::new(1.0 / 64.0)).unwrap();
        let g1 = |x: &[f64]| 1.0 + x[0];
        let g2 = |x: &[f64]| (3.0 * x[0]).sin();
        let sum = |x: &[f64]| g1(x) + g2(x);
        let a = prob.solve(&g1).unwrap().field;
        let b = prob.solve(&g2).unwrap().field;
        let c = prob.solve(&sum).unwrap().field;
        let ab = a.combine(1.0, &b, 1.0).unwrap();
        for (x, y) in ab.values().iter().zip(c.values()) {
            assert!((x - y).abs() < 1e-10);
        }
        // g1 >= g1 - 0.5 (1 + x^2) pointwise
        let lower = prob.solve(&|x: &[f64]| g1(x) - 0.5 * (1.0 + x[0] * x[0])).unwrap().field;
        for (x, y) in a.values().iter().zip(lower.values()) {
            assert!(x >= &(y - 1e-12));
        }
        // nonnegative nontrivial data: positive at every unknown
        let bump = prob.solve(&|x: &[f64]| if x[0] > 0.5 { 1.0 } else { 0.0 }).unwrap().field;
        for &i in prob.stiffness().nodes() {
            assert!(bump.value(i) > 0.0);
        }
    }

    #[test]
    fn semilinear_constant_matches_linear() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let cfg = SolveConfig::new(1.0 / 64.0);
        let lin = solve_dirichlet(&d, &one, p(1, 0.5), &cfg).unwrap();
        let semi = solve_semilinear(&d, |_| 1.0, p(1, 0.5), &cfg).unwrap();
        assert_eq!(semi.field.values(), lin.field.values());
        assert_eq!(semi.history.len(), semi.iterations);
    }

    #[test]
    fn semilinear_monotone_rhs() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let cfg = SolveConfig::new(1.0 / 64.0);
        let semi = solve_semilinear(&d, |u| 1.0 + 0.1 * u, p(1, 0.5), &cfg).unwrap();
        let lin = solve_dirichlet(&d, &one, p(1, 0.5), &cfg).unwrap();
        assert!(semi.residual < 1e-8);
        for (a, b) in semi.field.values().iter().zip(lin.field.values()) {
            assert!(a >= b);
        }
        let zero = solve_semilinear(&Domain::interval(-0.2, 0.2).unwrap(), |u| -u, p(1, 0.5), &cfg).unwrap();
        assert_eq!(zero.field.max_abs(), 0.0);
    }

    #[test]
    fn semilinear_divergence_is_reported() {
        // f(u) = 10 + 50 u exceeds the first eigenvalue: no fixed point
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let mut cfg = SolveConfig::new(1.0 / 16.0);
        cfg.nonlinear = Nonlinear::FixedPoint { damping: 0.5, max_iterations: 30 };
        match solve_semilinear(&d, |u| 10.0 + 50.0 * u, p(1, 0.5), &cfg) {
            Err(Error::NoConvergence { iterations, history, last_iterate, .. }) => {
                assert_eq!(iterations, 30);
                assert_eq!(history.len(), 30);
                assert!(!last_iterate.is_empty());
            }
            other => panic!("expected failure, got {other:?}"),
        }
        cfg.nonlinear = Nonlinear::Off;
        assert!(solve_semilinear(&d, |u| u, p(1, 0.5), &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolveConfig::new(0.0);
        assert!(cfg.validate().is_err());
        cfg.h = 0.1;
        cfg.nonlinear = Nonlinear::FixedPoint { damping: 1.5, max_iterations: 3 };
        assert!(cfg.validate().is_err());
        cfg.nonlinear = Nonlinear::FixedPoint { damping: 1.0, max_iterations: 0 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn eigenvalue_interval() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let e = estimate_lambda1(&d, p(1, 0.5), &SolveConfig::new(1.0 / 64.0)).unwrap();
        assert!(e.residual <= 1e-8);
        assert!(e.value >= lambda1_lower_bound(p(1, 0.5), 2.0).unwrap());
        let big =
            estimate_lambda1(&Domain::interval(-2.0, 2.0).unwrap(), p(1, 0.5), &SolveConfig::new(1.0 / 64.0)).unwrap();
        assert!(e.value > big.value);
        let phi = &e.eigenfunction;
        let rq = bilinear_form(phi, phi, p(1, 0.5)).unwrap()
            / (phi.values().iter().map(|v| v * v).sum::<f64>() * phi.grid().cell_volume());
        assert!((rq / e.value - 1.0).abs() < 0.03);
        // known value for s = 1/2 on (-1, 1): 1.1577738...
        assert!((e.value - 1.1577738).abs() < 0.02, "{}", e.value);
    }
}
