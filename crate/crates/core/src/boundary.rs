//! The fractional normal derivative `(∂_η)_s u(x0) = -lim u(x0 - t η)/t^s`
//! and the quotient `u / δ^s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::FracParams;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::operator::{Field, ScalarField};

/// Ladder `t_k = 2^{-k/2} base R`, `k < levels`, floored at `floor h` and
/// deduplicated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ladder {
    pub base: f64,
    pub levels: usize,
    pub floor: f64,
    /// Relative RMS fit residual above which a sample is flagged.
    pub flag_threshold: f64,
}

impl Default for Ladder {
    fn default() -> Self {
        Self { base: 0.6, levels: 5, floor: 2.0, flag_threshold: 0.01 }
    }
}

impl Ladder {
    pub fn steps(&self, radius: f64, h: f64) -> Vec<f64> {
        let mut ts: Vec<f64> = Vec::new();
        for k in 0..self.levels {
            let t = (self.base * radius * 0.5f64.powf(0.5 * k as f64)).max(self.floor * h);
            if ts.last().is_none_or(|&prev| prev - t > 1e-12 * prev) {
                ts.push(t);
            }
        }
        ts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryDerivSample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    /// Strictly decreasing.
    pub ts: Vec<f64>,
    /// `u(x0 - t_k η) / t_k^s`.
    pub quotients: Vec<f64>,
    /// `lim u(x0 - tη)/t^s`.
    pub limit: f64,
    /// `(∂_η)_s u(x0) = -limit`.
    pub derivative: f64,
    /// RMS residual of the fit relative to the largest fitted value.
    pub fit_residual: f64,
    pub flagged: bool,
}

/// Least-squares `y ≈ a + b t`; returns `(a, b, rms residual)`.
pub(crate) fn affine_fit(ts: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let stt: f64 = ts.iter().map(|t| (t - mt) * (t - mt)).sum();
    let sty: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let b = if stt > 0.0 { sty / stt } else { 0.0 };
    let a = my - b * mt;
    let rss: f64 = ts.iter().zip(ys).map(|(t, y)| (y - a - b * t).powi(2)).sum();
    (a, b, (rss / n).sqrt())
}

/// Least-squares `y ≈ c0 + c1 t + c2 t^2` (needs 3 distinct `t`); returns
/// the coefficients and the RMS residual.
pub(crate) fn quadratic_fit(ts: &[f64], ys: &[f64]) -> ([f64; 3], f64) {
    // centered and scaled abscissae keep the normal equations well conditioned
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let sc = ts.iter().fold(0.0f64, |m, t| m.max((t - mt).abs())).max(1e-300);
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut r = nalgebra::Vector3::<f64>::zeros();
    for (t, y) in ts.iter().zip(ys) {
        let z = (t - mt) / sc;
        let b = nalgebra::Vector3::new(1.0, z, z * z);
        m += b * b.transpose();
        r += b * *y;
    }
    let c = m.lu().solve(&r).unwrap_or_else(nalgebra::Vector3::zeros);
    // back to powers of t
    let (d0, d1, d2) = (c[0], c[1] / sc, c[2] / (sc * sc));
    let coef = [d0 - d1 * mt + d2 * mt * mt, d1 - 2.0 * d2 * mt, d2];
    let rss: f64 = ts.iter().zip(ys).map(|(t, y)| (y - coef[0] - coef[1] * t - coef[2] * t * t).powi(2)).sum();
    (coef, (rss / n).sqrt())
}

fn check_boundary_point(d: &Domain, x0: &[f64]) -> Result<()> {
    if x0.len() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), got: x0.len() });
    }
    let sd = d.signed_distance(x0);
    if sd.abs() > 1e-8 * d.diameter_bound().max(1.0) {
        return Err(Error::InvalidParameter(format!("point is not on the boundary (signed distance {sd:.3e})")));
    }
    Ok(())
}

fn signed_power(v: f64, e: f64) -> f64 {
    v.signum() * v.abs().powf(e)
}

/// Estimate at a boundary point of a grid field with the default ladder,
/// scaled by the local length of the domain and floored at `2h`.
pub fn frac_normal_derivative(u: &Field, d: &Domain, x0: &[f64], p: FracParams) -> Result<BoundaryDerivSample> {
    let w = power_field(u, p);
    let s = p.s();
    normal_sample(
        &|x: &[f64]| signed_power(w.interpolate(x), s),
        &|x: &[f64]| w.interpolate(x),
        d,
        x0,
        p,
        u.grid().h(),
        &Ladder::default(),
    )
}

/// Same for any pointwise profile; `h` is the resolution the ladder must
/// respect.
pub fn frac_normal_derivative_with(
    u: &impl ScalarField,
    d: &Domain,
    x0: &[f64],
    p: FracParams,
    h: f64,
    ladder: &Ladder,
) -> Result<BoundaryDerivSample> {
    let inv = 1.0 / p.s();
    normal_sample(&|x: &[f64]| u.value_at(x), &|x: &[f64]| signed_power(u.value_at(x), inv), d, x0, p, h, ladder)
}

/// `sign(u) |u|^{1/s}` at the nodes.
fn power_field(u: &Field, p: FracParams) -> Field {
    let inv = 1.0 / p.s();
    let values = u.values().iter().map(|&v| signed_power(v, inv)).collect();
    Field::new(u.grid().clone(), None, values).expect("finite values")
}

/// Since `u = δ^s ψ` with `ψ` Hölder up to the boundary, `w = |u|^{1/s}` is
/// close to linear in the distance: `w(x0 - tη) ≈ c0 + c1 t + c2 t^2`. The
/// limit of `u/t^s` is `c1^s`. The free intercept absorbs the sub-grid
/// offset of the discrete boundary, and `w` (unlike `u`) is well resolved
/// by multilinear interpolation.
fn normal_sample(
    value: &(impl Fn(&[f64]) -> f64 + ?Sized),
    power: &(impl Fn(&[f64]) -> f64 + ?Sized),
    d: &Domain,
    x0: &[f64],
    p: FracParams,
    h: f64,
    ladder: &Ladder,
) -> Result<BoundaryDerivSample> {
    check_boundary_point(d, x0)?;
    let member = d.members()[d.nearest_member(x0)];
    let normal = d.outward_normal(x0);
    let ts = ladder.steps(member.length_scale(), h);
    if ts.len() < 3 {
        return Err(Error::InsufficientData(format!("only {} usable ladder steps above {}h", ts.len(), ladder.floor)));
    }
    let s = p.s();
    let points: Vec<Vec<f64>> = ts.iter().map(|&t| x0.iter().zip(&normal).map(|(x, n)| x - t * n).collect()).collect();
    let quotients: Vec<f64> = points.iter().zip(&ts).map(|(x, t)| value(x) / t.powf(s)).collect();
    let ws: Vec<f64> = points.iter().map(|x| power(x)).collect();
    let (c, rms) = quadratic_fit(&ts, &ws);
    let scale = ws.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let fit_residual = if scale > 0.0 { rms / scale } else { 0.0 };
    let limit = signed_power(c[1], s);
    Ok(BoundaryDerivSample {
        point: x0.to_vec(),
        normal,
        ts,
        quotients,
        limit,
        derivative: -limit,
        fit_residual,
        flagged: fit_residual > ladder.flag_threshold,
    })
}

/// `u / δ^s` at nodes with `δ >= h`; nodes of the collar `0 < δ < h` take the
/// value of the nearest node with `δ >= h`; zero outside.
pub fn delta_s_quotient(u: &Field, d: &Domain, p: FracParams) -> Field {
    let grid = u.grid();
    let h = grid.h();
    let s = p.s();
    let dim = grid.dim();
    let deltas: Vec<f64> = (0..grid.len()).map(|i| d.signed_distance(&grid.node(i))).collect();
    let mut values: Vec<f64> =
        (0..grid.len()).map(|i| if deltas[i] >= h { u.value(i) / deltas[i].powf(s) } else { 0.0 }).collect();
    let collar: Vec<usize> = (0..grid.len()).filter(|&i| deltas[i] > 0.0 && deltas[i] < h).collect();
    let filled: Vec<(usize, f64)> = collar
        .par_iter()
        .filter_map(|&i| {
            let m = grid.multi_index(i);
            for r in 1..=4i64 {
                let mut best: Option<(i64, usize)> = None;
                let width = (2 * r + 1) as usize;
                for flat in 0..width.pow(dim as u32) {
                    let mut off = [0i64; 3];
                    let mut rest = flat;
                    for o in off.iter_mut().take(dim) {
                        *o = (rest % width) as i64 - r;
                        rest /= width;
                    }
                    let idx: Vec<i64> = (0..dim).map(|k| m[k] as i64 + off[k]).collect();
                    if let Some(j) = grid.checked_index(&idx) {
                        if deltas[j] >= h {
                            let d2: i64 = off.iter().map(|o| o * o).sum();
                            if best.is_none_or(|(bd, _)| d2 < bd) {
                                best = Some((d2, j));
                            }
                        }
                    }
                }
                if let Some((_, j)) = best {
                    return Some((i, u.value(j) / deltas[j].powf(s)));
                }
            }
            None
        })
        .collect();
    for (i, v) in filled {
        values[i] = v;
    }
    Field::new(grid.clone(), Some(d.clone()), values).expect("finite quotient")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstancyVerdict {
    Constant,
    NotConstant,
    Inconclusive,
    /// The field vanishes: the overdetermined condition holds vacuously.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverdeterminedReport {
    pub samples: Vec<BoundaryDerivSample>,
    pub mean: f64,
    pub max_deviation: f64,
    /// `(max - min) / |mean|`.
    pub relative_spread: f64,
    pub flagged: usize,
    pub tolerance: f64,
    pub verdict: ConstancyVerdict,
}

pub const DEFAULT_CONSTANCY_TOLERANCE: f64 = 0.05;

pub fn overdetermined_report(u: &Field, d: &Domain, p: FracParams, n_samples: usize) -> Result<OverdeterminedReport> {
    overdetermined_report_with(u, d, p, n_samples, DEFAULT_CONSTANCY_TOLERANCE, &Ladder::default())
}

pub fn overdetermined_report_with(
    u: &Field,
    d: &Domain,
    p: FracParams,
    n_samples: usize,
    tolerance: f64,
    ladder: &Ladder,
) -> Result<OverdeterminedReport> {
    let points = d.boundary_samples(n_samples);
    let w = power_field(u, p);
    let s = p.s();
    let value = |x: &[f64]| signed_power(w.interpolate(x), s);
    let power = |x: &[f64]| w.interpolate(x);
    let samples: Vec<BoundaryDerivSample> = points
        .par_iter()
        .map(|b| normal_sample(&value, &power, d, &b.point, p, u.grid().h(), ladder))
        .collect::<Result<_>>()?;
    Ok(summarize(samples, tolerance))
}

pub(crate) fn summarize(samples: Vec<BoundaryDerivSample>, tolerance: f64) -> OverdeterminedReport {
    let values: Vec<f64> = samples.iter().map(|s| s.derivative).collect();
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let max_deviation = values.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let flagged = samples.iter().filter(|s| s.flagged).count();
    let trivial = values.iter().all(|v| *v == 0.0);
    let relative_spread = if trivial { 0.0 } else { (hi - lo) / mean.abs() };
    let verdict = if trivial {
        ConstancyVerdict::Trivial
    } else if flagged as f64 > 0.2 * samples.len() as f64 {
        ConstancyVerdict::Inconclusive
    } else if relative_spread <= tolerance {
        ConstancyVerdict::Constant
    } else {
        ConstancyVerdict::NotConstant
    };
    OverdeterminedReport { samples, mean, max_deviation, relative_spread, flagged, tolerance, verdict }
}
