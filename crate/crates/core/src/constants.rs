//! Closed-form constants attached to the pair (dimension, fractional order).

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Dimension `N` in 1..=3 and fractional order `s` in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    dim: usize,
    s: f64,
}

impl FracParams {
    pub fn new(dim: usize, s: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dimension must be 1, 2 or 3 (got {dim})")));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("fractional order must lie strictly inside (0, 1) (got {s})")));
        }
        Ok(Self { dim, s })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Kernel exponent `N + 2s`.
    pub fn kernel_exponent(&self) -> f64 {
        self.dim as f64 + 2.0 * self.s
    }
}

/// Normalization constant of the singular integral, chosen so that the
/// operator has Fourier symbol `|xi|^{2s}`.
pub fn c_ns(p: FracParams) -> f64 {
    let n = p.dim as f64;
    let s = p.s;
    s * (1.0 - s) * 4f64.powf(s) * PI.powf(-n / 2.0) * gamma(n / 2.0 + s) / gamma(2.0 - s)
}

/// Coefficient of the ball torsion function `gamma (R^2 - |x - x0|^2)_+^s`.
pub fn gamma_ns(p: FracParams) -> f64 {
    let n = p.dim as f64;
    let s = p.s;
    4f64.powf(-s) * gamma(n / 2.0) / (gamma(n / 2.0 + s) * gamma(1.0 + s))
}

/// Volume of the unit ball in `dim` dimensions.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let n = dim as f64;
    PI.powf(n / 2.0) / gamma(n / 2.0 + 1.0)
}

/// Surface measure of the unit sphere `S^{dim-1}` (2 for `dim = 1`).
pub fn unit_sphere_area(dim: usize) -> f64 {
    dim as f64 * unit_ball_volume(dim)
}

/// Faber-Krahn type constant `C_{N,s} = N/(2s) |B_1|^{1+2s/N} c_{N,s}`.
pub fn lambda1_bound_constant(p: FracParams) -> f64 {
    let n = p.dim as f64;
    let s = p.s;
    n / (2.0 * s) * unit_ball_volume(p.dim).powf(1.0 + 2.0 * s / n) * c_ns(p)
}

/// Lower bound `C_{N,s} |Omega|^{-2s/N}` on the first Dirichlet eigenvalue.
pub fn lambda1_lower_bound(p: FracParams, volume: f64) -> Result<f64> {
    if !(volume > 0.0) || !volume.is_finite() {
        return Err(Error::InvalidParameter(format!("domain volume must be positive and finite (got {volume})")));
    }
    Ok(lambda1_bound_constant(p) * volume.powf(-2.0 * p.s / p.dim as f64))
}

/// All constants for one parameter pair, in the shape the CLI prints.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub n: usize,
    pub s: f64,
    pub c_ns: f64,
    pub gamma_ns: f64,
    pub unit_ball_volume: f64,
    pub lambda1_bound_constant: f64,
}

impl ConstantsReport {
    pub fn new(p: FracParams) -> Self {
        Self {
            n: p.dim,
            s: p.s,
            c_ns: c_ns(p),
            gamma_ns: gamma_ns(p),
            unit_ball_volume: unit_ball_volume(p.dim),
            lambda1_bound_constant: lambda1_bound_constant(p),
        }
    }
}
