//! Domains, half-spaces, reflections and grids.

mod domain;
mod ellipsoid;
mod grid;
mod halfspace;

pub use domain::{BoundarySample, Domain, Shape};
pub use grid::Grid;
pub use halfspace::{reflect, reflect_domain, HalfSpace, Inclusion, ReflectedCap};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a - b).collect()
}

/// Free-function form of [`Domain::signed_distance`].
pub fn signed_distance(d: &Domain, x: &[f64]) -> f64 {
    d.signed_distance(x)
}

/// Free-function form of [`Domain::boundary_samples`].
pub fn boundary_samples(d: &Domain, count: usize) -> Vec<BoundarySample> {
    d.boundary_samples(count)
}
