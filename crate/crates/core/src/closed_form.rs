//! Exact profiles: the ball torsion function and the two barriers used in
//! the maximum-principle arguments.

use crate::constants::{gamma_ns, FracParams};
use crate::error::{Error, Result};
use crate::geometry::{norm, sub, Domain, HalfSpace, Shape};

/// `gamma_{N,s} (R^2 - |x - x0|^2)_+^s`, the solution of `(-Δ)^s u = 1` in
/// `B_R(x0)` vanishing outside.
#[derive(Debug, Clone, PartialEq)]
pub struct BallTorsion {
    params: FracParams,
    center: Vec<f64>,
    radius: f64,
}

impl BallTorsion {
    pub fn new(params: FracParams, center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.len() != params.dim() {
            return Err(Error::DimensionMismatch { expected: params.dim(), got: center.len() });
        }
        if !(radius > 0.0) || !radius.is_finite() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry(format!("bad ball: radius {radius}")));
        }
        Ok(Self { params, center, radius })
    }

    pub fn params(&self) -> FracParams {
        self.params
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn domain(&self) -> Domain {
        Domain::ball(self.center.clone(), self.radius).expect("validated ball")
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = sub(x, &self.center);
        let q = self.radius * self.radius - d.iter().map(|v| v * v).sum::<f64>();
        if q <= 0.0 {
            0.0
        } else {
            gamma_ns(self.params) * q.powf(self.params.s())
        }
    }

    /// `-gamma_{N,s} (2R)^s`, the fractional normal derivative on the sphere.
    pub fn frac_normal_derivative(&self) -> f64 {
        -gamma_ns(self.params) * (2.0 * self.radius).powf(self.params.s())
    }
}

pub fn eval_ball_torsion(bt: &BallTorsion, x: &[f64]) -> f64 {
    bt.eval(x)
}

pub fn ball_torsion_frac_normal_derivative(bt: &BallTorsion) -> f64 {
    bt.frac_normal_derivative()
}

/// `w = psi_{B1} + alpha 1_K - psi_{B1} o Q - alpha 1_K o Q`, antisymmetric
/// with respect to the hyperplane of `hs`.
#[derive(Debug, Clone)]
pub struct HopfBarrier {
    torsion: BallTorsion,
    k: Domain,
    hs: HalfSpace,
    alpha: f64,
}

impl HopfBarrier {
    /// `K` must be a ball or a box, inside `H` at positive distance from the
    /// hyperplane and from `B1`.
    pub fn new(params: FracParams, b1: Domain, k: Domain, hs: HalfSpace, alpha: f64) -> Result<Self> {
        let dim = params.dim();
        for d in [b1.dim(), k.dim(), hs.dim()] {
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: d });
            }
        }
        let torsion = match b1.shape() {
            Shape::Ball { center, radius } => BallTorsion::new(params, center.clone(), *radius)?,
            _ => return Err(Error::InvalidGeometry("B1 must be a ball".into())),
        };
        if !matches!(k.shape(), Shape::Ball { .. } | Shape::Cuboid { .. } | Shape::Interval { .. }) {
            return Err(Error::InvalidGeometry("K must be a ball or a box".into()));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive (got {alpha})")));
        }
        if hs.offset(torsion.center()) <= torsion.radius() {
            return Err(Error::InvalidGeometry("B1 must stay at positive distance from the hyperplane".into()));
        }
        let minus_e: Vec<f64> = hs.direction().iter().map(|v| -v).collect();
        let k_gap = -k.support_value(&minus_e) - hs.lambda();
        if k_gap <= 0.0 {
            return Err(Error::InvalidGeometry("K must stay at positive distance from the hyperplane".into()));
        }
        if k.distance_to(&b1) <= 0.0 {
            return Err(Error::InvalidGeometry("K must stay at positive distance from B1".into()));
        }
        Ok(Self { torsion, k, hs, alpha })
    }

    pub fn params(&self) -> FracParams {
        self.torsion.params()
    }

    pub fn torsion(&self) -> &BallTorsion {
        &self.torsion
    }

    pub fn b1(&self) -> Domain {
        self.torsion.domain()
    }

    pub fn k(&self) -> &Domain {
        &self.k
    }

    pub fn halfspace(&self) -> &HalfSpace {
        &self.hs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.params(), self.b1(), self.k.clone(), self.hs.clone(), alpha)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let xr = self.hs.reflect(x);
        let ind = |y: &[f64]| if self.k.contains(y) { self.alpha } else { 0.0 };
        self.torsion.eval(x) + ind(x) - self.torsion.eval(&xr) - ind(&xr)
    }
}

pub fn eval_hopf_barrier(hb: &HopfBarrier, x: &[f64]) -> f64 {
    hb.eval(x)
}

/// `h(x) = -x1 [phi_R(x) + alpha (d1(x) + d2(x))]` with
/// `phi_R = (R^2 - |x - R e2|^2)_+^s` and truncated distances to the balls
/// `B_R(4R(e2 - e1))`, `B_R(4R(e2 + e1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerBarrier {
    params: FracParams,
    radius: f64,
    alpha: f64,
}

impl CornerBarrier {
    pub fn new(params: FracParams, radius: f64, alpha: f64) -> Result<Self> {
        if params.dim() < 2 {
            return Err(Error::InvalidParameter("the corner barrier needs N >= 2".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidGeometry(format!("bad radius {radius}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive (got {alpha})")));
        }
        Ok(Self { params, radius, alpha })
    }

    pub fn params(&self) -> FracParams {
        self.params
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The point `4R(e2 + sign e1)`.
    pub fn side_center(&self, sign: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.params.dim()];
        c[0] = 4.0 * self.radius * sign;
        c[1] = 4.0 * self.radius;
        c
    }

    /// `(R^2 - |x - R e2|^2)_+^s`.
    pub fn phi(&self, x: &[f64]) -> f64 {
        let r = self.radius;
        let q = r * r - x.iter().enumerate().map(|(i, &v)| if i == 1 { (v - r) * (v - r) } else { v * v }).sum::<f64>();
        if q <= 0.0 {
            0.0
        } else {
            q.powf(self.params.s())
        }
    }

    /// `d1 + d2`.
    pub fn side_distances(&self, x: &[f64]) -> f64 {
        [-1.0, 1.0].iter().map(|&sg| (self.radius - norm(&sub(x, &self.side_center(sg)))).max(0.0)).sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        -x[0] * (self.phi(x) + self.alpha * self.side_distances(x))
    }
}

pub fn eval_corner_barrier(cb: &CornerBarrier, x: &[f64]) -> f64 {
    cb.eval(x)
}
