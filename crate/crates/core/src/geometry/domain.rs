use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::ellipsoid;
use super::{dot, norm, sub};
use crate::error::{Error, Result};
use crate::quadrature::integrate_cube;

/// The analytic primitives a [`Domain`] can be built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Axis-aligned ellipse (2D) or ellipsoid (3D).
    Ellipsoid {
        center: Vec<f64>,
        semi_axes: Vec<f64>,
    },
    Interval {
        a: f64,
        b: f64,
    },
    /// Axis-aligned box.
    Cuboid {
        min: Vec<f64>,
        max: Vec<f64>,
    },
    /// Members at positive pairwise distance.
    Union {
        members: Vec<Domain>,
    },
}

/// A bounded open set described analytically.
///
/// Signed distance is positive inside, negative outside and exact for every
/// primitive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Shape", into = "Shape")]
pub struct Domain {
    shape: Shape,
    dim: usize,
}

/// A boundary point with its outward unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
}

impl TryFrom<Shape> for Domain {
    type Error = Error;
    fn try_from(shape: Shape) -> Result<Self> {
        Domain::new(shape)
    }
}

impl From<Domain> for Shape {
    fn from(d: Domain) -> Shape {
        d.shape
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidGeometry(format!("dimension {dim} not in 1..=3")))
    }
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidGeometry(format!("{what} has non-finite entries")))
    }
}

impl Domain {
    pub fn new(shape: Shape) -> Result<Self> {
        let dim = match &shape {
            Shape::Ball { center, radius } => {
                check_dim(center.len())?;
                check_finite(center, "ball center")?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidGeometry(format!("radius must be > 0 (got {radius})")));
                }
                center.len()
            }
            Shape::Ellipsoid { center, semi_axes } => {
                if center.len() != semi_axes.len() {
                    return Err(Error::DimensionMismatch { expected: center.len(), got: semi_axes.len() });
                }
                if !(2..=3).contains(&center.len()) {
                    return Err(Error::InvalidGeometry(
                        "ellipsoids are 2- or 3-dimensional; use an interval in 1D".into(),
                    ));
                }
                check_finite(center, "ellipsoid center")?;
                if !semi_axes.iter().all(|a| *a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidGeometry("semi-axes must be > 0".into()));
                }
                center.len()
            }
            Shape::Interval { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidGeometry(format!("interval needs a < b (got {a}, {b})")));
                }
                1
            }
            Shape::Cuboid { min, max } => {
                if min.len() != max.len() {
                    return Err(Error::DimensionMismatch { expected: min.len(), got: max.len() });
                }
                check_dim(min.len())?;
                check_finite(min, "box corner")?;
                check_finite(max, "box corner")?;
                if min.iter().zip(max).any(|(a, b)| !(a < b)) {
                    return Err(Error::InvalidGeometry("box needs min < max on every axis".into()));
                }
                min.len()
            }
            Shape::Union { members } => {
                if members.is_empty() {
                    return Err(Error::InvalidGeometry("empty union".into()));
                }
                let dim = members[0].dim;
                for m in members {
                    if m.dim != dim {
                        return Err(Error::DimensionMismatch { expected: dim, got: m.dim });
                    }
                    if matches!(m.shape, Shape::Union { .. }) {
                        return Err(Error::InvalidGeometry("nested unions are not supported".into()));
                    }
                }
                for i in 0..members.len() {
                    for j in i + 1..members.len() {
                        let gap = members[i].distance_to(&members[j]);
                        if !(gap > 0.0) {
                            return Err(Error::InvalidGeometry(format!(
                                "union members {i} and {j} are not at positive distance (gap {gap:.3e})"
                            )));
                        }
                    }
                }
                dim
            }
        };
        Ok(Self { shape, dim })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::new(Shape::Ball { center, radius })
    }

    pub fn ellipsoid(center: Vec<f64>, semi_axes: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Ellipsoid { center, semi_axes })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Interval { a, b })
    }

    pub fn cuboid(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Cuboid { min, max })
    }

    pub fn union(members: Vec<Domain>) -> Result<Self> {
        Self::new(Shape::Union { members })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The connected pieces: the members of a union, or the domain itself.
    pub fn members(&self) -> Vec<&Domain> {
        match &self.shape {
            Shape::Union { members } => members.iter().collect(),
            _ => vec![self],
        }
    }

    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::Ball { center, radius } => radius - norm(&sub(x, center)),
            Shape::Ellipsoid { center, semi_axes } => {
                let y = sub(x, center);
                let q: f64 = y.iter().zip(semi_axes).map(|(y, a)| (y / a) * (y / a)).sum();
                let (_, d) = ellipsoid::closest_point(semi_axes, &y);
                if q < 1.0 {
                    d
                } else {
                    -d
                }
            }
            Shape::Interval { a, b } => (x[0] - a).min(b - x[0]),
            Shape::Cuboid { min, max } => {
                let mut inside = f64::INFINITY;
                let mut outside = 0.0;
                for k in 0..self.dim {
                    let lo = x[k] - min[k];
                    let hi = max[k] - x[k];
                    inside = inside.min(lo.min(hi));
                    let excess = (-lo).max(-hi).max(0.0);
                    outside += excess * excess;
                }
                if inside > 0.0 {
                    inside
                } else if outside > 0.0 {
                    -outside.sqrt()
                } else {
                    inside
                }
            }
            Shape::Union { members } => members.iter().map(|m| m.signed_distance(x)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) > 0.0
    }

    /// Index of the union member nearest to `x` (0 for primitives).
    pub fn nearest_member(&self, x: &[f64]) -> usize {
        match &self.shape {
            Shape::Union { members } => {
                let mut best = 0;
                let mut best_d = f64::NEG_INFINITY;
                for (i, m) in members.iter().enumerate() {
                    let d = m.signed_distance(x);
                    if d > best_d {
                        best_d = d;
                        best = i;
                    }
                }
                best
            }
            _ => 0,
        }
    }

    /// Closest boundary point of `x`.
    pub fn closest_boundary_point(&self, x: &[f64]) -> Vec<f64> {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let y = sub(x, center);
                let r = norm(&y);
                if r == 0.0 {
                    let mut p = center.clone();
                    p[0] += radius;
                    p
                } else {
                    center.iter().zip(&y).map(|(c, y)| c + radius * y / r).collect()
                }
            }
            Shape::Ellipsoid { center, semi_axes } => {
                let y = sub(x, center);
                let (p, _) = ellipsoid::closest_point(semi_axes, &y);
                p.iter().zip(center).map(|(p, c)| p + c).collect()
            }
            Shape::Interval { a, b } => {
                if (x[0] - a).abs() <= (b - x[0]).abs() {
                    vec![*a]
                } else {
                    vec![*b]
                }
            }
            Shape::Cuboid { min, max } => {
                let inside = (0..self.dim).all(|k| x[k] > min[k] && x[k] < max[k]);
                let mut p: Vec<f64> = (0..self.dim).map(|k| x[k].clamp(min[k], max[k])).collect();
                if inside {
                    let (k, to_max) = self.nearest_face(x);
                    p[k] = if to_max { max[k] } else { min[k] };
                }
                p
            }
            Shape::Union { members } => members[self.nearest_member(x)].closest_boundary_point(x),
        }
    }

    fn nearest_face(&self, x: &[f64]) -> (usize, bool) {
        let Shape::Cuboid { min, max } = &self.shape else { unreachable!() };
        let mut best = (0, true);
        let mut best_d = f64::INFINITY;
        for k in 0..self.dim {
            let lo = (x[k] - min[k]).abs();
            let hi = (max[k] - x[k]).abs();
            if hi < best_d {
                best_d = hi;
                best = (k, true);
            }
            if lo < best_d {
                best_d = lo;
                best = (k, false);
            }
        }
        best
    }

    /// Outward unit normal at the boundary point closest to `x`.
    pub fn outward_normal(&self, x: &[f64]) -> Vec<f64> {
        match &self.shape {
            Shape::Ball { center, .. } => {
                let p = self.closest_boundary_point(x);
                let y = sub(&p, center);
                let r = norm(&y);
                y.iter().map(|v| v / r).collect()
            }
            Shape::Ellipsoid { center, semi_axes } => {
                let p = self.closest_boundary_point(x);
                let g: Vec<f64> = p.iter().zip(center).zip(semi_axes).map(|((p, c), a)| (p - c) / (a * a)).collect();
                let n = norm(&g);
                g.iter().map(|v| v / n).collect()
            }
            Shape::Interval { a, b } => {
                if (x[0] - a).abs() <= (b - x[0]).abs() {
                    vec![-1.0]
                } else {
                    vec![1.0]
                }
            }
            Shape::Cuboid { min, max } => {
                let mut outside = vec![0.0; self.dim];
                let mut any = false;
                for k in 0..self.dim {
                    if x[k] > max[k] {
                        outside[k] = x[k] - max[k];
                        any = true;
                    } else if x[k] < min[k] {
                        outside[k] = x[k] - min[k];
                        any = true;
                    }
                }
                if any {
                    let n = norm(&outside);
                    return outside.iter().map(|v| v / n).collect();
                }
                let (k, to_max) = self.nearest_face(x);
                let mut n = vec![0.0; self.dim];
                n[k] = if to_max { 1.0 } else { -1.0 };
                n
            }
            Shape::Union { members } => members[self.nearest_member(x)].outward_normal(x),
        }
    }

    /// `max_{x in closure} x . e`.
    pub fn support_value(&self, e: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => dot(center, e) + radius * norm(e),
            Shape::Ellipsoid { center, semi_axes } => {
                dot(center, e) + semi_axes.iter().zip(e).map(|(a, e)| (a * e) * (a * e)).sum::<f64>().sqrt()
            }
            Shape::Interval { a, b } => (a * e[0]).max(b * e[0]),
            Shape::Cuboid { min, max } => (0..self.dim).map(|k| (min[k] * e[k]).max(max[k] * e[k])).sum(),
            Shape::Union { members } => members.iter().map(|m| m.support_value(e)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![0.0; self.dim];
        let mut hi = vec![0.0; self.dim];
        for k in 0..self.dim {
            let mut e = vec![0.0; self.dim];
            e[k] = 1.0;
            hi[k] = self.support_value(&e);
            e[k] = -1.0;
            lo[k] = -self.support_value(&e);
        }
        (lo, hi)
    }

    pub fn diameter_bound(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        norm(&sub(&hi, &lo))
    }

    /// A natural length for the primitive: radius, smallest semi-axis, half
    /// length, or half the smallest box side. For unions, the smallest over
    /// the members.
    pub fn length_scale(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => *radius,
            Shape::Ellipsoid { semi_axes, .. } => semi_axes.iter().cloned().fold(f64::INFINITY, f64::min),
            Shape::Interval { a, b } => 0.5 * (b - a),
            Shape::Cuboid { min, max } => min.iter().zip(max).map(|(a, b)| 0.5 * (b - a)).fold(f64::INFINITY, f64::min),
            Shape::Union { members } => members.iter().map(|m| m.length_scale()).fold(f64::INFINITY, f64::min),
        }
    }

    /// Center of the bounding box (the ball center for balls).
    pub fn center(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Ball { center, .. } | Shape::Ellipsoid { center, .. } => center.clone(),
            _ => {
                let (lo, hi) = self.bounding_box();
                lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
            }
        }
    }

    /// Lebesgue measure.
    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => crate::constants::unit_ball_volume(self.dim) * radius.powi(self.dim as i32),
            Shape::Ellipsoid { semi_axes, .. } => {
                crate::constants::unit_ball_volume(self.dim) * semi_axes.iter().product::<f64>()
            }
            Shape::Interval { a, b } => b - a,
            Shape::Cuboid { min, max } => min.iter().zip(max).map(|(a, b)| b - a).product(),
            Shape::Union { members } => members.iter().map(|m| m.volume()).sum(),
        }
    }

    /// Measure of the boundary (number of points in 1D).
    pub fn boundary_measure(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } => {
                crate::constants::unit_sphere_area(self.dim) * radius.powi(self.dim as i32 - 1)
            }
            Shape::Ellipsoid { semi_axes, .. } => ellipsoid_surface(semi_axes),
            Shape::Interval { .. } => 2.0,
            Shape::Cuboid { min, max } => {
                let sides: Vec<f64> = min.iter().zip(max).map(|(a, b)| b - a).collect();
                match self.dim {
                    1 => 2.0,
                    2 => 2.0 * (sides[0] + sides[1]),
                    _ => 2.0 * (sides[0] * sides[1] + sides[1] * sides[2] + sides[0] * sides[2]),
                }
            }
            Shape::Union { members } => members.iter().map(|m| m.boundary_measure()).sum(),
        }
    }

    /// Distance between two domains, exact for ball pairs and intervals,
    /// sampled (4096 boundary points each way) otherwise. Non-positive when
    /// the closures meet.
    pub fn distance_to(&self, other: &Domain) -> f64 {
        match (&self.shape, &other.shape) {
            (Shape::Ball { center: c1, radius: r1 }, Shape::Ball { center: c2, radius: r2 }) => {
                norm(&sub(c1, c2)) - r1 - r2
            }
            (Shape::Interval { a: a1, b: b1 }, Shape::Interval { a: a2, b: b2 }) => (a2 - b1).max(a1 - b2),
            _ => {
                let a = self
                    .boundary_samples(4096)
                    .iter()
                    .map(|s| -other.signed_distance(&s.point))
                    .fold(f64::INFINITY, f64::min);
                let b = other
                    .boundary_samples(4096)
                    .iter()
                    .map(|s| -self.signed_distance(&s.point))
                    .fold(f64::INFINITY, f64::min);
                a.min(b)
            }
        }
    }

    /// Quasi-uniform boundary points with exact outward normals. In 1D every
    /// endpoint is returned regardless of `count`; unions split `count` in
    /// proportion to the members' boundary measure.
    pub fn boundary_samples(&self, count: usize) -> Vec<BoundarySample> {
        let count = count.max(1);
        match &self.shape {
            Shape::Interval { a, b } => vec![
                BoundarySample { point: vec![*a], normal: vec![-1.0] },
                BoundarySample { point: vec![*b], normal: vec![1.0] },
            ],
            Shape::Ball { center, radius } => match self.dim {
                1 => vec![
                    BoundarySample { point: vec![center[0] - radius], normal: vec![-1.0] },
                    BoundarySample { point: vec![center[0] + radius], normal: vec![1.0] },
                ],
                2 => (0..count)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / count as f64;
                        let n = vec![t.cos(), t.sin()];
                        BoundarySample { point: vec![center[0] + radius * n[0], center[1] + radius * n[1]], normal: n }
                    })
                    .collect(),
                _ => fibonacci_sphere(count)
                    .into_iter()
                    .map(|n| BoundarySample { point: (0..3).map(|k| center[k] + radius * n[k]).collect(), normal: n })
                    .collect(),
            },
            Shape::Ellipsoid { center, semi_axes } => {
                let unit: Vec<Vec<f64>> = if self.dim == 2 {
                    ellipse_arclength_angles(semi_axes[0], semi_axes[1], count)
                        .into_iter()
                        .map(|t| vec![t.cos(), t.sin()])
                        .collect()
                } else {
                    fibonacci_sphere(count)
                };
                unit.into_iter()
                    .map(|u| {
                        let point: Vec<f64> = (0..self.dim).map(|k| center[k] + semi_axes[k] * u[k]).collect();
                        let g: Vec<f64> = (0..self.dim).map(|k| u[k] / semi_axes[k]).collect();
                        let gn = norm(&g);
                        BoundarySample { point, normal: g.iter().map(|v| v / gn).collect() }
                    })
                    .collect()
            }
            Shape::Cuboid { min, max } => cuboid_samples(min, max, count),
            Shape::Union { members } => {
                let total = self.boundary_measure();
                let mut out = Vec::new();
                for m in members {
                    let share = ((count as f64) * m.boundary_measure() / total).round() as usize;
                    out.extend(m.boundary_samples(share.max(1)));
                }
                out
            }
        }
    }

    /// Copy translated by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Domain {
        let shift = |v: &Vec<f64>| -> Vec<f64> { v.iter().zip(offset).map(|(a, b)| a + b).collect() };
        let shape = match &self.shape {
            Shape::Ball { center, radius } => Shape::Ball { center: shift(center), radius: *radius },
            Shape::Ellipsoid { center, semi_axes } => {
                Shape::Ellipsoid { center: shift(center), semi_axes: semi_axes.clone() }
            }
            Shape::Interval { a, b } => Shape::Interval { a: a + offset[0], b: b + offset[0] },
            Shape::Cuboid { min, max } => Shape::Cuboid { min: shift(min), max: shift(max) },
            Shape::Union { members } => {
                Shape::Union { members: members.iter().map(|m| m.translated(offset)).collect() }
            }
        };
        Domain { shape, dim: self.dim }
    }
}

fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Parameter angles giving arclength-uniform points on the ellipse with
/// semi-axes `a`, `b`, starting at `(a, 0)`.
fn ellipse_arclength_angles(a: f64, b: f64, count: usize) -> Vec<f64> {
    let m = (64 * count).max(8192);
    let speed = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
    let mut cumulative = vec![0.0; m + 1];
    let dt = 2.0 * PI / m as f64;
    for i in 0..m {
        // Simpson on each sub-interval
        let t0 = i as f64 * dt;
        let ds = dt / 6.0 * (speed(t0) + 4.0 * speed(t0 + 0.5 * dt) + speed(t0 + dt));
        cumulative[i + 1] = cumulative[i] + ds;
    }
    let total = cumulative[m];
    let mut out = Vec::with_capacity(count);
    let mut j = 0;
    for k in 0..count {
        let target = total * k as f64 / count as f64;
        while j < m && cumulative[j + 1] < target {
            j += 1;
        }
        let seg = cumulative[j + 1] - cumulative[j];
        let frac = if seg > 0.0 { (target - cumulative[j]) / seg } else { 0.0 };
        out.push((j as f64 + frac) * dt);
    }
    out
}

fn ellipsoid_surface(semi: &[f64]) -> f64 {
    if semi.len() == 2 {
        let (a, b) = (semi[0], semi[1]);
        return integrate_cube(1, 64, |u| {
            let t = PI * (u[0] + 1.0);
            (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt()
        }) * PI;
    }
    let (a, b, c) = (semi[0], semi[1], semi[2]);
    // x = (a sin th cos ph, b sin th sin ph, c cos th)
    integrate_cube(2, 64, |u| {
        let th = 0.5 * PI * (u[0] + 1.0);
        let ph = PI * (u[1] + 1.0);
        let (st, ct) = th.sin_cos();
        let (sp, cp) = ph.sin_cos();
        let n = [b * c * st * st * cp, a * c * st * st * sp, a * b * st * ct];
        norm(&n)
    }) * 0.5
        * PI
        * PI
}

fn cuboid_samples(min: &[f64], max: &[f64], count: usize) -> Vec<BoundarySample> {
    let dim = min.len();
    if dim == 1 {
        return vec![
            BoundarySample { point: vec![min[0]], normal: vec![-1.0] },
            BoundarySample { point: vec![max[0]], normal: vec![1.0] },
        ];
    }
    let side: Vec<f64> = min.iter().zip(max).map(|(a, b)| b - a).collect();
    let mut faces = Vec::new();
    for k in 0..dim {
        let area: f64 = (0..dim).filter(|&j| j != k).map(|j| side[j]).product();
        faces.push((k, true, area));
        faces.push((k, false, area));
    }
    let total: f64 = faces.iter().map(|f| f.2).sum();
    let mut out = Vec::new();
    for (k, upper, area) in faces {
        let share = ((count as f64) * area / total).round().max(1.0) as usize;
        let others: Vec<usize> = (0..dim).filter(|&j| j != k).collect();
        let mut normal = vec![0.0; dim];
        normal[k] = if upper { 1.0 } else { -1.0 };
        let fixed = if upper { max[k] } else { min[k] };
        if others.len() == 1 {
            let j = others[0];
            for i in 0..share {
                let mut p = vec![0.0; dim];
                p[k] = fixed;
                p[j] = min[j] + side[j] * (i as f64 + 0.5) / share as f64;
                out.push(BoundarySample { point: p, normal: normal.clone() });
            }
        } else {
            let (j1, j2) = (others[0], others[1]);
            let aspect = side[j1] / side[j2];
            let n1 = ((share as f64 * aspect).sqrt().round() as usize).max(1);
            let n2 = (share / n1).max(1);
            for a in 0..n1 {
                for b in 0..n2 {
                    let mut p = vec![0.0; dim];
                    p[k] = fixed;
                    p[j1] = min[j1] + side[j1] * (a as f64 + 0.5) / n1 as f64;
                    p[j2] = min[j2] + side[j2] * (b as f64 + 0.5) / n2 as f64;
                    out.push(BoundarySample { point: p, normal: normal.clone() });
                }
            }
        }
    }
    out
}
