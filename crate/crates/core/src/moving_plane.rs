//! Moving planes: critical positions, antisymmetric differences, symmetry
//! verdicts, the monotonicity sweep, and a radial-symmetry test by
//! halfspace comparison.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{dot, reflect_domain, Domain, Grid, HalfSpace};
use crate::operator::Field;

/// Boundary samples used for the geometric tests.
pub const DEFAULT_GEOMETRY_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Situation {
    /// A reflected boundary point touches the boundary away from the plane.
    InternalTouch,
    /// The plane meets the boundary orthogonally.
    OrthogonalContact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPlane {
    pub direction: Vec<f64>,
    pub lambda0: f64,
    pub situation: Situation,
    /// The contact point `P0` of the reported situation.
    pub contact_point: Vec<f64>,
    /// Both situations were detected (reported as orthogonal contact).
    pub both: bool,
    /// `(lambda, inclusion margin)` along the coarse scan.
    pub margin_history: Vec<(f64, f64)>,
}

impl CriticalPlane {
    pub fn halfspace(&self) -> HalfSpace {
        HalfSpace::new(self.direction.clone(), self.lambda0).expect("unit direction")
    }
}

/// Same as `reflect_domain(hs, d, hs).inclusion(..).margin`, reusing one
/// set of boundary points across the scan.
fn inclusion_margin(d: &Domain, boundary: &[Vec<f64>], e: &[f64], lambda: f64) -> f64 {
    let hs = HalfSpace::new(e.to_vec(), lambda).expect("unit direction");
    let m = boundary
        .iter()
        .filter(|x| hs.offset(x) >= 0.0)
        .map(|x| d.signed_distance(&hs.reflect(x)))
        .fold(f64::INFINITY, f64::min);
    if m.is_finite() {
        m
    } else {
        f64::INFINITY
    }
}

/// The first `lambda` (moving down from `max x.e`) at which the reflected
/// cap stops lying inside the domain.
pub fn find_critical_plane(d: &Domain, e: &[f64]) -> Result<CriticalPlane> {
    find_critical_plane_with(d, e, DEFAULT_GEOMETRY_SAMPLES)
}

pub fn find_critical_plane_with(d: &Domain, e: &[f64], samples: usize) -> Result<CriticalPlane> {
    let hs = HalfSpace::from_direction(e, 0.0)?;
    if hs.dim() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), got: hs.dim() });
    }
    let e = hs.direction().to_vec();
    let diam = d.diameter_bound();
    let tol = 1e-9 * diam;
    let top = d.support_value(&e);
    let minus: Vec<f64> = e.iter().map(|v| -v).collect();
    let bottom = -d.support_value(&minus);
    let step = (top - bottom) / 256.0;
    let boundary: Vec<Vec<f64>> = d.boundary_samples(samples).into_iter().map(|b| b.point).collect();

    let mut history = Vec::new();
    let mut inside = top;
    let mut outside = None;
    let mut lambda = top - step;
    while lambda >= bottom - step {
        let m = inclusion_margin(d, &boundary, &e, lambda);
        history.push((lambda, m));
        if m < -tol {
            outside = Some(lambda);
            break;
        }
        inside = lambda;
        lambda -= step;
    }
    let mut lo = outside.unwrap_or(bottom);
    let mut hi = inside;
    while hi - lo > 1e-6 * diam {
        let mid = 0.5 * (lo + hi);
        if inclusion_margin(d, &boundary, &e, mid) < -tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda0 = hi;
    let (situation, contact_point, both) = classify(d, &e, lambda0, samples);
    Ok(CriticalPlane { direction: e, lambda0, situation, contact_point, both, margin_history: history })
}

fn classify(d: &Domain, e: &[f64], lambda0: f64, samples: usize) -> (Situation, Vec<f64>, bool) {
    let diam = d.diameter_bound();
    let boundary = d.boundary_samples(samples);
    let spacing = if d.dim() == 1 {
        0.0
    } else {
        (d.boundary_measure() / boundary.len() as f64).powf(1.0 / (d.dim() - 1) as f64)
    };
    let scale = d.length_scale();

    // orthogonal contact: a boundary point on the plane with normal . e ~ 0
    let mut orth: Option<(f64, Vec<f64>)> = None;
    if d.dim() > 1 {
        for b in &boundary {
            if (dot(&b.point, e) - lambda0).abs() <= spacing + 1e-6 * diam {
                let c = dot(&b.normal, e).abs();
                if c <= 2.0 * spacing / scale + 1e-6 && orth.as_ref().is_none_or(|(best, _)| c < *best) {
                    orth = Some((c, b.point.clone()));
                }
            }
        }
    }

    // internal touch: a reflected cap sample on the boundary, off the plane
    let hs = HalfSpace::new(e.to_vec(), lambda0).expect("unit direction");
    // the bisection leaves lambda0 within 1e-6 diam of the critical value
    let touch_tol = 1e-5 * diam;
    let far = (10.0 * spacing).max(0.1 * scale);
    let mut touch: Option<(f64, Vec<f64>)> = None;
    for s in reflect_domain(&hs, d, &hs).boundary_samples(samples) {
        if hs.offset(&s.point).abs() <= far {
            continue;
        }
        let m = d.signed_distance(&s.point).abs();
        if m <= touch_tol && touch.as_ref().is_none_or(|(best, _)| m < *best) {
            touch = Some((m, s.point.clone()));
        }
    }

    match (orth, touch) {
        (Some((_, p)), t) => (Situation::OrthogonalContact, p, t.is_some()),
        (None, Some((_, p))) => (Situation::InternalTouch, p, false),
        // the bisection guarantees one of the two up to sampling; fall back
        // to the boundary point nearest to the plane
        (None, None) => {
            let p = boundary
                .iter()
                .min_by(|a, b| {
                    let da = (dot(&a.point, e) - lambda0).abs();
                    let db = (dot(&b.point, e) - lambda0).abs();
                    da.total_cmp(&db)
                })
                .map(|b| b.point.clone())
                .unwrap_or_default();
            (Situation::OrthogonalContact, p, false)
        }
    }
}

/// Planes `x.e = lambda` whose reflection maps the grid onto itself:
/// `lambda in base + step Z`. Only axis and diagonal directions qualify.
pub fn aligned_lattice(grid: &Grid, e: &[f64]) -> Option<(f64, f64)> {
    let h = grid.h();
    let o = grid.origin();
    let nz: Vec<usize> = (0..e.len()).filter(|&k| e[k].abs() > 1e-12).collect();
    match nz.as_slice() {
        [k] if (e[*k].abs() - 1.0).abs() < 1e-12 => Some((e[*k].signum() * o[*k], 0.5 * h)),
        [i, j]
            if (e[*i].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12
                && (e[*j].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12 =>
        {
            let r2 = std::f64::consts::SQRT_2;
            Some(((e[*i].signum() * o[*i] + e[*j].signum() * o[*j]) / r2, h / r2))
        }
        _ => None,
    }
}

fn is_aligned(grid: &Grid, hs: &HalfSpace) -> bool {
    match aligned_lattice(grid, hs.direction()) {
        Some((base, step)) => {
            let k = (hs.lambda() - base) / step;
            (k - k.round()).abs() <= 1e-9
        }
        None => false,
    }
}

/// Smallest aligned `lambda' >= lambda`, if the direction has a lattice.
pub fn snap_up(grid: &Grid, e: &[f64], lambda: f64) -> Option<f64> {
    aligned_lattice(grid, e).map(|(base, step)| base + step * ((lambda - base) / step - 1e-9).ceil())
}

/// `v(x) = u(x) - u(Qx)` at every node: exact node lookups when the plane
/// maps the grid onto itself, multilinear interpolation otherwise.
pub fn antisymmetric_difference(u: &Field, hs: &HalfSpace) -> Field {
    difference(u, hs).0
}

/// The difference field and a per-node bound on its interpolation error
/// (all zero on aligned grids).
fn difference(u: &Field, hs: &HalfSpace) -> (Field, Vec<f64>) {
    let grid = u.grid();
    let aligned = is_aligned(grid, hs);
    let n = grid.len();
    let pairs: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let y = hs.reflect(&x);
            if aligned {
                let uy = grid.node_at(&y, 1e-6).map(|j| u.value(j)).unwrap_or(0.0);
                (u.value(i) - uy, 0.0)
            } else {
                (u.value(i) - u.interpolate(&y), interpolation_bound(u, &y))
            }
        })
        .collect();
    let (values, bounds): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    (Field::new(grid.clone(), None, values).expect("finite"), bounds)
}

/// Twice the standard multilinear error bound `(h^2/8) sum_d |∂_dd u|`, with
/// second differences taken at the nodes of the cell containing `y`.
fn interpolation_bound(u: &Field, y: &[f64]) -> f64 {
    let grid = u.grid();
    let dim = grid.dim();
    let f = grid.fractional_index(y);
    let base: Vec<i64> = f.iter().map(|v| v.floor() as i64).collect();
    let mut worst: f64 = 0.0;
    for corner in 0..(1usize << dim) {
        let m: Vec<i64> = (0..dim).map(|k| base[k] + ((corner >> k) & 1) as i64).collect();
        let at = |m: &[i64]| grid.checked_index(m).map(|j| u.value(j)).unwrap_or(0.0);
        let c = at(&m);
        let mut sum = 0.0;
        for d in 0..dim {
            let mut p = m.clone();
            p[d] += 1;
            let mut q = m.clone();
            q[d] -= 1;
            sum += (at(&p) - 2.0 * c + at(&q)).abs();
        }
        worst = worst.max(sum);
    }
    2.0 * worst / 8.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryVerdict {
    Symmetric,
    Asymmetric,
    Inconclusive,
}

/// One plane of the monotonicity sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    /// `min (u - u o Q)` over nodes of the reflected cap.
    pub min_difference: f64,
    pub nodes: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionResult {
    pub plane: CriticalPlane,
    /// The plane maps the grid onto itself (no interpolation).
    pub aligned: bool,
    /// `min v` over nodes of the reflected cap.
    pub min_on_cap: f64,
    /// `min v` over nodes of the open half-space beyond the plane.
    pub min_on_halfspace: f64,
    pub max_abs: f64,
    pub tolerance: f64,
    pub verdict: SymmetryVerdict,
    pub sweep: Vec<SweepPoint>,
    pub sweep_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MovingPlaneReport {
    pub directions: Vec<DirectionResult>,
    pub verdict: SymmetryVerdict,
    pub detected_center: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingPlaneOptions {
    /// Max-norm residual of the solve that produced the field.
    pub solver_residual: f64,
    pub sweep_steps: usize,
    pub geometry_samples: usize,
}

impl Default for MovingPlaneOptions {
    fn default() -> Self {
        Self { solver_residual: 0.0, sweep_steps: 8, geometry_samples: DEFAULT_GEOMETRY_SAMPLES }
    }
}

/// Coordinate axes and (in N >= 2) the diagonals `(±e_i ± e_j)/√2`, both
/// orientations of each.
pub fn default_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for k in 0..dim {
        for sg in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[k] = sg;
            out.push(e);
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in (i + 1)..dim {
            for (a, b) in [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
                let mut e = vec![0.0; dim];
                e[i] = a * r;
                e[j] = b * r;
                out.push(e);
            }
        }
    }
    out
}

pub fn symmetry_tolerance(u: &Field, solver_residual: f64) -> f64 {
    (10.0 * solver_residual).max(1e-8 * u.max_abs()).max(f64::MIN_POSITIVE)
}

pub fn moving_plane_analyze(u: &Field, d: &Domain, directions: &[Vec<f64>]) -> Result<MovingPlaneReport> {
    moving_plane_analyze_with(u, d, directions, &MovingPlaneOptions::default())
}

pub fn moving_plane_analyze_with(
    u: &Field,
    d: &Domain,
    directions: &[Vec<f64>],
    opts: &MovingPlaneOptions,
) -> Result<MovingPlaneReport> {
    if u.grid().dim() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), got: u.grid().dim() });
    }
    if directions.is_empty() {
        return Err(Error::InvalidParameter("no directions given".into()));
    }
    let tol = symmetry_tolerance(u, opts.solver_residual);
    let results: Vec<DirectionResult> =
        directions.par_iter().map(|e| analyze_direction(u, d, e, tol, opts)).collect::<Result<_>>()?;
    let verdict = if results.iter().any(|r| r.verdict == SymmetryVerdict::Asymmetric) {
        SymmetryVerdict::Asymmetric
    } else if results.iter().all(|r| r.verdict == SymmetryVerdict::Symmetric) {
        SymmetryVerdict::Symmetric
    } else {
        SymmetryVerdict::Inconclusive
    };
    let detected_center = if verdict == SymmetryVerdict::Symmetric {
        plane_intersection(&results.iter().map(|r| &r.plane).collect::<Vec<_>>())
    } else {
        None
    };
    Ok(MovingPlaneReport { directions: results, verdict, detected_center })
}

/// Least-squares point of the planes `e_k . x = lambda_k`.
fn plane_intersection(planes: &[&CriticalPlane]) -> Option<Vec<f64>> {
    let dim = planes.first()?.direction.len();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let mut r = DVector::<f64>::zeros(dim);
    for p in planes {
        let e = DVector::from_column_slice(&p.direction);
        m += &e * e.transpose();
        r += &e * p.lambda0;
    }
    let x = m.lu().solve(&r)?;
    Some(x.iter().copied().collect())
}

fn analyze_direction(u: &Field, d: &Domain, e: &[f64], tol: f64, opts: &MovingPlaneOptions) -> Result<DirectionResult> {
    let plane = find_critical_plane_with(d, e, opts.geometry_samples)?;
    let hs = plane.halfspace();
    let grid = u.grid();
    let aligned = is_aligned(grid, &hs);
    let (v, bounds) = difference(u, &hs);
    let h = grid.h();

    let mut min_on_cap = f64::INFINITY;
    let mut min_on_halfspace = f64::INFINITY;
    let mut max_abs: f64 = 0.0;
    let mut asym = false;
    let mut considered = 0usize;
    for i in 0..grid.len() {
        let x = grid.node(i);
        if !aligned {
            // keep interpolation stencils on one side of the boundary
            let y = hs.reflect(&x);
            if d.signed_distance(&x).abs() < 2.0 * h || d.signed_distance(&y).abs() < 2.0 * h {
                continue;
            }
        }
        considered += 1;
        let vi = v.value(i);
        max_abs = max_abs.max(vi.abs());
        if vi.abs() > tol + bounds[i] {
            asym = true;
        }
        if hs.offset(&x) < 0.0 {
            min_on_halfspace = min_on_halfspace.min(vi);
            if d.contains(&hs.reflect(&x)) && hs.offset(&hs.reflect(&x)) > 0.0 {
                min_on_cap = min_on_cap.min(vi);
            }
        }
    }
    let verdict = if considered == 0 {
        SymmetryVerdict::Inconclusive
    } else if asym {
        SymmetryVerdict::Asymmetric
    } else {
        SymmetryVerdict::Symmetric
    };

    let top = d.support_value(&plane.direction);
    let sweep = sweep(u, d, &plane, top, tol, opts.sweep_steps);
    let sweep_passed = sweep.iter().all(|s| s.passed);
    Ok(DirectionResult {
        plane,
        aligned,
        min_on_cap: if min_on_cap.is_finite() { min_on_cap } else { 0.0 },
        min_on_halfspace: if min_on_halfspace.is_finite() { min_on_halfspace } else { 0.0 },
        max_abs,
        tolerance: tol,
        verdict,
        sweep,
        sweep_passed,
    })
}

/// `u - u o Q_lambda >= -tol` on the reflected cap for planes between the
/// critical one and the top, snapped to grid-aligned positions when the
/// direction allows it.
fn sweep(u: &Field, d: &Domain, plane: &CriticalPlane, top: f64, tol: f64, steps: usize) -> Vec<SweepPoint> {
    let grid = u.grid();
    let e = &plane.direction;
    let mut lambdas: Vec<f64> = (1..=steps)
        .map(|j| plane.lambda0 + (top - plane.lambda0) * j as f64 / (steps + 1) as f64)
        .map(|l| snap_up(grid, e, l).unwrap_or(l))
        .filter(|&l| l < top)
        .collect();
    lambdas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    lambdas
        .into_iter()
        .map(|lambda| {
            let hs = HalfSpace::new(e.clone(), lambda).expect("unit direction");
            let (v, bounds) = difference(u, &hs);
            let mut min_difference = f64::INFINITY;
            let mut nodes = 0;
            let mut passed = true;
            for i in 0..grid.len() {
                let x = grid.node(i);
                if hs.offset(&x) >= 0.0 {
                    continue;
                }
                let y = hs.reflect(&x);
                if !(d.contains(&y) && hs.offset(&y) > 0.0) {
                    continue;
                }
                nodes += 1;
                min_difference = min_difference.min(v.value(i));
                if v.value(i) < -(tol + bounds[i]) {
                    passed = false;
                }
            }
            SweepPoint {
                lambda,
                min_difference: if min_difference.is_finite() { min_difference } else { 0.0 },
                nodes,
                passed,
            }
        })
        .collect()
}

/// A halfspace on which `u - u o Q` takes both signs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfspaceWitness {
    pub direction: Vec<f64>,
    pub lambda: f64,
    pub max_difference: f64,
    pub max_at: Vec<f64>,
    pub min_difference: f64,
    pub min_at: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RadialVerdict {
    Radial { center: Vec<f64> },
    NotRadial { witness: Option<HalfspaceWitness> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialReport {
    pub verdict: RadialVerdict,
    pub halfspaces_tested: usize,
    pub tolerance: f64,
}

/// Sign of `u - u o Q` on `H = {x.e > lambda}`: `Some(true)` dominant
/// (`>= 0`), `Some(false)` subordinate (`<= 0`), `None` for both signs.
fn halfspace_sign(u: &Field, hs: &HalfSpace, tol: f64) -> (Option<bool>, HalfspaceWitness) {
    let grid = u.grid();
    let (v, bounds) = difference(u, hs);
    let mut w = HalfspaceWitness {
        direction: hs.direction().to_vec(),
        lambda: hs.lambda(),
        max_difference: 0.0,
        max_at: Vec::new(),
        min_difference: 0.0,
        min_at: Vec::new(),
    };
    let mut pos = false;
    let mut neg = false;
    for i in 0..grid.len() {
        let x = grid.node(i);
        if hs.offset(&x) <= 0.0 {
            continue;
        }
        let vi = v.value(i);
        if vi > tol + bounds[i] {
            pos = true;
        }
        if vi < -(tol + bounds[i]) {
            neg = true;
        }
        if vi > w.max_difference {
            w.max_difference = vi;
            w.max_at = x.clone();
        }
        if vi < w.min_difference {
            w.min_difference = vi;
            w.min_at = x;
        }
    }
    let sign = match (pos, neg) {
        (true, true) => None,
        (false, true) => Some(false),
        _ => Some(true),
    };
    (sign, w)
}

pub fn radial_monotone_test(u: &Field, directions: &[Vec<f64>], offsets: &[f64]) -> Result<RadialReport> {
    radial_monotone_test_with(u, directions, offsets, 1e-8 * u.max_abs())
}

/// Every tested halfspace must be dominant or subordinate; then the center
/// is located per axis as the transition between dominant and subordinate
/// positions and `u` is checked to decrease with the distance to it.
pub fn radial_monotone_test_with(
    u: &Field,
    directions: &[Vec<f64>],
    offsets: &[f64],
    tol: f64,
) -> Result<RadialReport> {
    let grid = u.grid();
    let dim = grid.dim();
    let tol = tol.max(f64::MIN_POSITIVE);
    let mut tested = 0usize;
    for e in directions {
        let hs0 = HalfSpace::from_direction(e, 0.0)?;
        if hs0.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: hs0.dim() });
        }
        let mut lambdas: Vec<f64> = offsets
            .iter()
            .map(|&l| match aligned_lattice(grid, hs0.direction()) {
                Some((base, step)) => base + step * ((l - base) / step).round(),
                None => l,
            })
            .collect();
        lambdas.sort_by(f64::total_cmp);
        lambdas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        for l in lambdas {
            tested += 1;
            let (sign, witness) = halfspace_sign(u, &hs0.with_lambda(l), tol);
            if sign.is_none() {
                return Ok(RadialReport {
                    verdict: RadialVerdict::NotRadial { witness: Some(witness) },
                    halfspaces_tested: tested,
                    tolerance: tol,
                });
            }
        }
    }

    let nonzero = u.nonzero_nodes();
    if nonzero.is_empty() {
        return Ok(RadialReport {
            verdict: RadialVerdict::NotRadial { witness: None },
            halfspaces_tested: tested,
            tolerance: tol,
        });
    }
    let h = grid.h();
    let mut center = vec![0.0; dim];
    for (k, ck) in center.iter_mut().enumerate() {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        let coords: Vec<f64> = nonzero.iter().map(|&i| grid.node(i)[k]).collect();
        let lo = coords.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut last_dominant = f64::NEG_INFINITY;
        let mut first_subordinate = f64::INFINITY;
        let mut lambda = lo;
        while lambda <= hi + 1e-9 * h {
            let hs = HalfSpace::new(e.clone(), lambda).expect("axis");
            tested += 1;
            let (v, bounds) = difference(u, &hs);
            let mut pos = false;
            let mut neg = false;
            for i in 0..grid.len() {
                if hs.offset(&grid.node(i)) <= 0.0 {
                    continue;
                }
                pos |= v.value(i) > tol + bounds[i];
                neg |= v.value(i) < -(tol + bounds[i]);
            }
            if pos && neg {
                return Ok(RadialReport {
                    verdict: RadialVerdict::NotRadial { witness: Some(halfspace_sign(u, &hs, tol).1) },
                    halfspaces_tested: tested,
                    tolerance: tol,
                });
            }
            if !neg {
                last_dominant = lambda;
            }
            if !pos && first_subordinate.is_infinite() {
                first_subordinate = lambda;
            }
            lambda += 0.5 * h;
        }
        if !last_dominant.is_finite() || !first_subordinate.is_finite() {
            return Ok(RadialReport {
                verdict: RadialVerdict::NotRadial { witness: None },
                halfspaces_tested: tested,
                tolerance: tol,
            });
        }
        *ck = 0.5 * (last_dominant + first_subordinate);
    }

    // decrease with the distance to the center, up to the center's
    // resolution of h/4 per axis
    let margin = 0.5 * h * (dim as f64).sqrt();
    let mut by_radius: Vec<(f64, f64)> = (0..grid.len())
        .map(|i| {
            let x = grid.node(i);
            let r = x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            (r, u.value(i))
        })
        .collect();
    by_radius.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut suffix_max = vec![f64::NEG_INFINITY; by_radius.len() + 1];
    for k in (0..by_radius.len()).rev() {
        suffix_max[k] = suffix_max[k + 1].max(by_radius[k].1);
    }
    for &(r, val) in &by_radius {
        let start = by_radius.partition_point(|p| p.0 < r + margin);
        if suffix_max[start] > val + tol {
            return Ok(RadialReport {
                verdict: RadialVerdict::NotRadial { witness: None },
                halfspaces_tested: tested,
                tolerance: tol,
            });
        }
    }
    Ok(RadialReport { verdict: RadialVerdict::Radial { center }, halfspaces_tested: tested, tolerance: tol })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Components {
    pub count: usize,
    /// Component of each grid node (`None` off the support); empty for
    /// analytic domains.
    pub labels: Vec<Option<usize>>,
}

/// Exact count for an analytic domain: members of a union are disjoint
/// and each primitive is connected.
pub fn domain_components(d: &Domain) -> Components {
    Components { count: d.members().len(), labels: Vec::new() }
}

/// Flood fill over nodes with `|u| > threshold`, face neighbours adjacent.
pub fn field_components(u: &Field, threshold: f64) -> Components {
    let grid = u.grid();
    let dim = grid.dim();
    let mut labels: Vec<Option<usize>> = vec![None; grid.len()];
    let mut count = 0;
    let active = |i: usize| u.value(i).abs() > threshold;
    for start in 0..grid.len() {
        if labels[start].is_some() || !active(start) {
            continue;
        }
        labels[start] = Some(count);
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let m = grid.multi_index(i);
            for k in 0..dim {
                for step in [-1i64, 1] {
                    let mut q: Vec<i64> = (0..dim).map(|j| m[j] as i64).collect();
                    q[k] += step;
                    if let Some(j) = grid.checked_index(&q) {
                        if labels[j].is_none() && active(j) {
                            labels[j] = Some(count);
                            stack.push(j);
                        }
                    }
                }
            }
        }
        count += 1;
    }
    Components { count, labels }
}

#[cfg(test)]
mod tests;
