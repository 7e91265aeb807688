use serde::{Deserialize, Serialize};

use super::{dot, norm, BoundarySample, Domain};
use crate::error::{Error, Result};

/// `H = {x : x . e > lambda}` with boundary hyperplane `T = {x . e = lambda}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    e: Vec<f64>,
    lambda: f64,
}

impl HalfSpace {
    /// `e` must have unit length to 1e-12.
    pub fn new(e: Vec<f64>, lambda: f64) -> Result<Self> {
        if e.is_empty() || e.len() > 3 {
            return Err(Error::InvalidGeometry(format!("direction of length {}", e.len())));
        }
        let n = norm(&e);
        if !((n - 1.0).abs() <= 1e-12) || !lambda.is_finite() {
            return Err(Error::InvalidGeometry(format!("half-space direction must be a unit vector (|e| = {n})")));
        }
        Ok(Self { e, lambda })
    }

    /// Normalizes `direction` first.
    pub fn from_direction(direction: &[f64], lambda: f64) -> Result<Self> {
        let n = norm(direction);
        if !(n > 0.0) {
            return Err(Error::InvalidGeometry("zero direction".into()));
        }
        Self::new(direction.iter().map(|v| v / n).collect(), lambda)
    }

    pub fn direction(&self) -> &[f64] {
        &self.e
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.e.len()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { e: self.e.clone(), lambda }
    }

    /// `x . e - lambda`; positive inside `H`.
    pub fn offset(&self, x: &[f64]) -> f64 {
        dot(x, &self.e) - self.lambda
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.offset(x) > 0.0
    }

    /// `x - 2 (x.e) e + 2 lambda e`.
    pub fn reflect(&self, x: &[f64]) -> Vec<f64> {
        let t = 2.0 * self.offset(x);
        x.iter().zip(&self.e).map(|(x, e)| x - t * e).collect()
    }

    /// The complementary open half-space `{x . e < lambda}`.
    pub fn complement(&self) -> HalfSpace {
        HalfSpace { e: self.e.iter().map(|v| -v).collect(), lambda: -self.lambda }
    }
}

/// Reflection of `x` across the boundary of `hs`.
pub fn reflect(hs: &HalfSpace, x: &[f64]) -> Vec<f64> {
    hs.reflect(x)
}

/// `Q(d ∩ restricted)`: the part of a domain inside a half-space, reflected
/// across the boundary of `reflection`.
#[derive(Debug, Clone)]
pub struct ReflectedCap {
    domain: Domain,
    reflection: HalfSpace,
    restricted: HalfSpace,
}

/// Outcome of testing whether a reflected cap lies in the original domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inclusion {
    /// `min delta_Omega` over the reflected cap boundary samples.
    pub margin: f64,
    pub inside: bool,
    /// Some reflected sample lies on the boundary within tolerance.
    pub touching: bool,
}

pub fn reflect_domain(hs: &HalfSpace, d: &Domain, restricted_to: &HalfSpace) -> ReflectedCap {
    ReflectedCap { domain: d.clone(), reflection: hs.clone(), restricted: restricted_to.clone() }
}

impl ReflectedCap {
    pub fn contains(&self, x: &[f64]) -> bool {
        let y = self.reflection.reflect(x);
        self.restricted.contains(&y) && self.domain.contains(&y)
    }

    /// Reflected images of boundary samples of the domain lying in the
    /// closed restricting half-space.
    pub fn boundary_samples(&self, count: usize) -> Vec<BoundarySample> {
        self.domain
            .boundary_samples(count)
            .into_iter()
            .filter(|s| self.restricted.offset(&s.point) >= 0.0)
            .map(|s| {
                let p = self.reflection.reflect(&s.point);
                // normals reflect as vectors
                let t = 2.0 * dot(&s.normal, self.reflection.direction());
                let n = s.normal.iter().zip(self.reflection.direction()).map(|(n, e)| n - t * e).collect();
                BoundarySample { point: p, normal: n }
            })
            .collect()
    }

    /// Inclusion test against the unreflected domain via signed distance of
    /// the reflected boundary samples.
    pub fn inclusion(&self, count: usize, tol: f64) -> Inclusion {
        let margin = self
            .boundary_samples(count)
            .iter()
            .map(|s| self.domain.signed_distance(&s.point))
            .fold(f64::INFINITY, f64::min);
        let margin = if margin.is_finite() { margin } else { f64::INFINITY };
        Inclusion { margin, inside: margin >= -tol, touching: margin.abs() <= tol }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reflection_examples() {
        let h0 = HalfSpace::new(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(h0.reflect(&[3.0, 5.0]), vec![-3.0, 5.0]);
        let h1 = HalfSpace::new(vec![1.0, 0.0], 1.0).unwrap();
        assert_eq!(reflect(&h1, &[3.0, 5.0]), vec![-1.0, 5.0]);
        assert_eq!(h1.reflect(&[1.0, -2.0]), vec![1.0, -2.0]);
        assert!(HalfSpace::new(vec![1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn reflected_caps() {
        let ball = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        let hs = HalfSpace::new(vec![1.0, 0.0], 0.5).unwrap();
        let cap = reflect_domain(&hs, &ball, &hs);
        assert!(cap.inclusion(2048, 1e-12).inside);
        assert!(cap.contains(&[0.1, 0.0]));
        assert!(!cap.contains(&[0.6, 0.0]));

        let hs = HalfSpace::new(vec![1.0, 0.0], -0.2).unwrap();
        let cap = reflect_domain(&hs, &ball, &hs);
        let inc = cap.inclusion(2048, 1e-12);
        assert!(!inc.inside);
        assert!(inc.margin < 0.0);

        let hs = HalfSpace::new(vec![1.0, 0.0], 0.0).unwrap();
        let cap = reflect_domain(&hs, &ball, &hs);
        let inc = cap.inclusion(2048, 1e-12);
        assert!(inc.inside && inc.touching);

        let interval = Domain::interval(-1.0, 1.0).unwrap();
        let hs = HalfSpace::new(vec![1.0], 0.0).unwrap();
        let cap = reflect_domain(&hs, &interval, &hs);
        let inc = cap.inclusion(2, 1e-12);
        assert!(inc.inside && inc.touching);
        assert!(cap.contains(&[-0.5]) && !cap.contains(&[0.5]));
    }

    proptest! {
        #[test]
        fn reflection_is_an_isometric_involution(
            theta in 0.0..std::f64::consts::TAU,
            lambda in -3.0..3.0f64,
            x in prop::array::uniform2(-5.0..5.0f64),
            y in prop::array::uniform2(-5.0..5.0f64),
        ) {
            let hs = HalfSpace::from_direction(&[theta.cos(), theta.sin()], lambda).unwrap();
            let xx = hs.reflect(&hs.reflect(&x));
            prop_assert!((xx[0] - x[0]).abs() < 1e-12 && (xx[1] - x[1]).abs() < 1e-12);
            let rx = hs.reflect(&x);
            let ry = hs.reflect(&y);
            let d0 = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
            let d1 = ((rx[0] - ry[0]).powi(2) + (rx[1] - ry[1]).powi(2)).sqrt();
            prop_assert!((d0 - d1).abs() < 1e-12);
        }

        #[test]
        fn ball_center_plane_maps_cap_onto_complementary_cap(
            theta in 0.0..std::f64::consts::TAU,
            cx in -1.0..1.0f64,
            cy in -1.0..1.0f64,
        ) {
            let e = [theta.cos(), theta.sin()];
            let ball = Domain::ball(vec![cx, cy], 0.7).unwrap();
            let hs = HalfSpace::from_direction(&e, cx * e[0] + cy * e[1]).unwrap();
            let cap = reflect_domain(&hs, &ball, &hs);
            let inc = cap.inclusion(512, 1e-12);
            prop_assert!(inc.inside && inc.touching);
        }
    }
}
