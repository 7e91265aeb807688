//! Numerical certificates for the maximum principles for antisymmetric
//! functions, the Hopf lemma, the corner lemma and the decay lemma.
//!
//! Every check measures named quantities on grid nodes, compares them to
//! the stated inequality and reports margins. "Almost everywhere" becomes
//! "at every node outside the collar `delta < 2h`".

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::boundary::affine_fit;
use crate::closed_form::{BallTorsion, CornerBarrier, HopfBarrier};
use crate::constants::{c_ns, gamma_ns, lambda1_lower_bound, FracParams};
use crate::error::{Error, Result};
use crate::geometry::{dot, Domain, Grid, HalfSpace, Shape};
use crate::operator::{DiscreteOperator, Field, ScalarField};
use crate::solver::{estimate_lambda1, SolveConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Principle {
    WeakMp,
    StrongMp,
    Hopf,
    Corner,
    Decay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertStatus {
    Pass,
    Fail,
    NotApplicable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MPCertificate {
    pub principle: Principle,
    /// sha256 of the canonical encoding of all inputs.
    pub inputs_digest: String,
    pub measured: BTreeMap<String, f64>,
    /// `bound - measured` for each checked inequality (>= 0 when it holds).
    pub margins: BTreeMap<String, f64>,
    pub bound_satisfied: bool,
    pub status: CertStatus,
    pub notes: Vec<String>,
}

impl MPCertificate {
    fn new(principle: Principle, digest: String) -> Self {
        Self {
            principle,
            inputs_digest: digest,
            measured: BTreeMap::new(),
            margins: BTreeMap::new(),
            bound_satisfied: false,
            status: CertStatus::Inconclusive,
            notes: Vec::new(),
        }
    }

    fn measure(&mut self, name: &str, value: f64) {
        self.measured.insert(name.to_string(), value);
    }

    fn margin(&mut self, name: &str, value: f64) {
        self.margins.insert(name.to_string(), value);
    }

    fn not_applicable(mut self, why: impl Into<String>) -> Self {
        self.notes.push(why.into());
        self.status = CertStatus::NotApplicable;
        self.bound_satisfied = false;
        self
    }

    fn inconclusive(mut self, why: impl Into<String>) -> Self {
        self.notes.push(why.into());
        self.status = CertStatus::Inconclusive;
        self.bound_satisfied = false;
        self
    }

    fn decide(mut self, ok: bool) -> Self {
        self.bound_satisfied = ok;
        self.status = if ok { CertStatus::Pass } else { CertStatus::Fail };
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CertStatus::Pass
    }
}

/// Canonical byte encoding of certificate inputs.
#[derive(Default)]
struct InputDigest(Sha256);

impl InputDigest {
    fn tag(mut self, s: &str) -> Self {
        self.0.update((s.len() as u64).to_le_bytes());
        self.0.update(s.as_bytes());
        self
    }

    fn reals(mut self, xs: &[f64]) -> Self {
        self.0.update((xs.len() as u64).to_le_bytes());
        for x in xs {
            self.0.update(x.to_bits().to_le_bytes());
        }
        self
    }

    fn field(self, u: &Field) -> Self {
        let g = u.grid();
        let counts: Vec<f64> = g.counts().iter().map(|&c| c as f64).collect();
        self.reals(g.origin()).reals(&[g.h()]).reals(&counts).reals(u.values())
    }

    fn halfspace(self, hs: &HalfSpace) -> Self {
        self.reals(hs.direction()).reals(&[hs.lambda()])
    }

    fn domain(self, d: &Domain) -> Self {
        self.tag(&format!("{:?}", d.shape()))
    }

    fn params(self, p: FracParams) -> Self {
        self.reals(&[p.dim() as f64, p.s()])
    }

    fn finish(self) -> String {
        self.0.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A grid whose node set is invariant under the reflection of `hs`
/// (`hs` must be normal to a coordinate axis) and covers the box `[lo, hi]`
/// together with its mirror image.
pub fn symmetric_grid(hs: &HalfSpace, lo: &[f64], hi: &[f64], h: f64) -> Result<Grid> {
    let e = hs.direction();
    let axis = (0..e.len()).find(|&k| (e[k].abs() - 1.0).abs() < 1e-12);
    let Some(k) = axis else {
        return Err(Error::InvalidParameter("symmetric grids need an axis-normal plane".into()));
    };
    let plane = e[k] * hs.lambda();
    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    let (a, b) = (lo[k], hi[k]);
    lo[k] = a.min(2.0 * plane - b);
    hi[k] = b.max(2.0 * plane - a);
    let half = (plane - lo[k]).max(hi[k] - plane);
    lo[k] = plane - half;
    hi[k] = plane + half;
    let mut anchor = vec![0.0; e.len()];
    anchor[k] = plane;
    Grid::covering(&lo, &hi, h, &anchor)
}

/// Largest `|v(x) + v(Qx)|`; `None` when some node carrying a nonzero value
/// reflects off the node set.
fn antisymmetry_defect(v: &Field, hs: &HalfSpace) -> Option<f64> {
    let g = v.grid();
    let mut worst: f64 = 0.0;
    for i in 0..g.len() {
        let vi = v.value(i);
        let y = hs.reflect(&g.node(i));
        match g.node_at(&y, 1e-6) {
            Some(j) => worst = worst.max((vi + v.value(j)).abs()),
            None if vi != 0.0 => return None,
            None => {}
        }
    }
    Some(worst)
}

fn sign_tolerance(v: &Field) -> f64 {
    1e-10 * v.max_abs() + 1e-300
}

/// Inputs of the weak maximum principle on `omega ⊂ H`:
/// `(-Δ)^s v >= c v + g` in `omega` with `c <= c_inf`, `g >= -kappa`.
#[derive(Debug, Clone)]
pub struct WeakMpInput {
    pub v: Field,
    pub hs: HalfSpace,
    pub omega: Domain,
    pub c_inf: f64,
    pub kappa: f64,
    pub params: FracParams,
    /// Discrete `lambda_1(omega)`; estimated at the field's spacing when absent.
    pub lambda1: Option<f64>,
}

pub fn check_weak_mp(input: &WeakMpInput) -> Result<MPCertificate> {
    let WeakMpInput { v, hs, omega, c_inf, kappa, params: p, .. } = input;
    let (c_inf, kappa, p) = (*c_inf, *kappa, *p);
    let g = v.grid();
    if g.dim() != p.dim() || omega.dim() != p.dim() || hs.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: g.dim() });
    }
    let digest = InputDigest::default()
        .tag("weak-mp")
        .field(v)
        .halfspace(hs)
        .domain(omega)
        .reals(&[c_inf, kappa, input.lambda1.unwrap_or(f64::NAN)])
        .params(p)
        .finish();
    let mut cert = MPCertificate::new(Principle::WeakMp, digest);
    let h = g.h();

    let minus: Vec<f64> = hs.direction().iter().map(|x| -x).collect();
    let gap = -omega.support_value(&minus) - hs.lambda();
    cert.measure("omega_plane_gap", gap);
    if gap < -1e-12 {
        return Ok(cert.not_applicable("omega is not contained in H"));
    }
    let Some(defect) = antisymmetry_defect(v, hs) else {
        return Ok(cert.not_applicable("grid is not invariant under the reflection"));
    };
    cert.measure("antisymmetry_defect", defect);
    let tol = sign_tolerance(v);
    if defect > 1e-12 * v.max_abs() {
        return Ok(cert.not_applicable("v is not antisymmetric"));
    }
    let outside_min = (0..g.len())
        .filter(|&i| {
            let x = g.node(i);
            hs.offset(&x) > 0.0 && !omega.contains(&x)
        })
        .map(|i| v.value(i))
        .fold(f64::INFINITY, f64::min);
    let outside_min = if outside_min.is_finite() { outside_min } else { 0.0 };
    cert.measure("min_v_on_h_minus_omega", outside_min);
    if outside_min < -tol {
        return Ok(cert.not_applicable("v is negative on H outside omega"));
    }
    if !(c_inf >= 0.0) || !(kappa >= 0.0) {
        return Err(Error::InvalidParameter("c_inf and kappa must be nonnegative".into()));
    }

    let lambda1 = match input.lambda1 {
        Some(l) => l,
        None => estimate_lambda1(omega, p, &SolveConfig::new(h))?.value,
    };
    let volume = omega.volume();
    cert.measure("lambda1", lambda1);
    cert.measure("omega_volume", volume);
    let threshold = (lambda1 - c_inf) / volume.sqrt();
    cert.margin("kappa_admissible", threshold - kappa);
    if !(c_inf < lambda1) || !(kappa < threshold) {
        return Ok(cert.not_applicable("kappa or c_inf outside the admissible range"));
    }

    // discrete supersolution at nodes outside the collar
    let inside: Vec<usize> = (0..g.len()).filter(|&i| omega.signed_distance(&g.node(i)) > 0.0).collect();
    let deep: Vec<usize> = inside.iter().copied().filter(|&i| omega.signed_distance(&g.node(i)) >= 2.0 * h).collect();
    cert.measure("collar_nodes", (inside.len() - deep.len()) as f64);
    let op = DiscreteOperator::new(p, h)?;
    let av = op.apply(v, &deep);
    let scale = av.iter().fold(1.0f64, |m, a| m.max(a.abs()));
    let super_margin = deep.iter().zip(&av).map(|(&i, a)| a - c_inf * v.value(i) + kappa).fold(f64::INFINITY, f64::min);
    let super_margin = if super_margin.is_finite() { super_margin } else { 0.0 };
    cert.margin("supersolution", super_margin);
    if super_margin < -1e-9 * scale {
        return Ok(cert.not_applicable("v is not a discrete supersolution"));
    }

    let vol = g.cell_volume();
    let neg_norm = (vol * inside.iter().map(|&i| v.value(i).min(0.0).powi(2)).sum::<f64>()).sqrt();
    let bound = kappa * volume.sqrt() / (lambda1 - c_inf);
    cert.measure("neg_part_l2", neg_norm);
    cert.measure("bound", bound);
    cert.margin("bound", bound - neg_norm);
    if kappa == 0.0 {
        let min_v = inside.iter().map(|&i| v.value(i)).fold(0.0f64, f64::min);
        cert.measure("min_v_on_omega", min_v);
        cert.margin("nonnegative", min_v + tol);
        Ok(cert.decide(min_v >= -tol))
    } else {
        Ok(cert.decide(neg_norm <= bound + tol))
    }
}

/// Either `v ≡ 0` on `H` or `v > 0` at every node of `omega` outside the
/// collar.
pub fn check_strong_mp(v: &Field, hs: &HalfSpace, omega: &Domain, c_inf: f64, p: FracParams) -> Result<MPCertificate> {
    let weak = check_weak_mp(&WeakMpInput {
        v: v.clone(),
        hs: hs.clone(),
        omega: omega.clone(),
        c_inf,
        kappa: 0.0,
        params: p,
        lambda1: None,
    })?;
    let digest =
        InputDigest::default().tag("strong-mp").field(v).halfspace(hs).domain(omega).reals(&[c_inf]).params(p).finish();
    let mut cert = MPCertificate::new(Principle::StrongMp, digest);
    cert.measured = weak.measured.clone();
    if weak.status != CertStatus::Pass {
        return Ok(cert.not_applicable("the weak maximum principle does not certify v >= 0"));
    }
    let g = v.grid();
    let h = g.h();
    let tol = sign_tolerance(v);
    let on_h = (0..g.len()).filter(|&i| hs.offset(&g.node(i)) > 0.0).map(|i| v.value(i).abs()).fold(0.0f64, f64::max);
    cert.measure("max_abs_v_on_h", on_h);
    if on_h <= 1e-14 {
        cert.notes.push("v vanishes identically on H".into());
        cert.margin("zero_branch", 0.0);
        return Ok(cert.decide(true));
    }
    let deep: Vec<f64> =
        (0..g.len()).filter(|&i| omega.signed_distance(&g.node(i)) >= 2.0 * h).map(|i| v.value(i)).collect();
    if deep.is_empty() {
        return Ok(cert.inconclusive("no nodes outside the boundary collar"));
    }
    let min_deep = deep.iter().cloned().fold(f64::INFINITY, f64::min);
    cert.measure("min_v_interior", min_deep);
    cert.margin("positive_branch", min_deep - tol);
    Ok(cert.decide(min_deep > tol))
}

/// Hopf lemma on a ball `B1 ⊂⊂ H`: the largest `d` with
/// `v >= d delta_{B1}^s` at the nodes of `B1`, together with the barrier
/// construction `w = psi_{B1} + alpha 1_K - (reflections)`.
#[derive(Debug, Clone)]
pub struct HopfInput {
    pub v: Field,
    pub b1: Domain,
    pub k: Domain,
    pub hs: HalfSpace,
    /// Bound `c_0` on `|c|`.
    pub c_bound: f64,
    pub params: FracParams,
}

pub fn check_hopf(input: &HopfInput) -> Result<MPCertificate> {
    let HopfInput { v, b1, k, hs, c_bound, params: p } = input;
    let (c0, p) = (*c_bound, *p);
    let digest =
        InputDigest::default().tag("hopf").field(v).domain(b1).domain(k).halfspace(hs).reals(&[c0]).params(p).finish();
    let mut cert = MPCertificate::new(Principle::Hopf, digest);
    let g = v.grid();
    let h = g.h();

    let (center, radius) = match b1.shape() {
        Shape::Ball { center, radius } => (center.clone(), *radius),
        _ => return Ok(cert.not_applicable("B1 must be a ball")),
    };
    // geometry of B1 and K is validated by the barrier itself
    let probe = match HopfBarrier::new(p, b1.clone(), k.clone(), hs.clone(), 1.0) {
        Ok(b) => b,
        Err(e) => return Ok(cert.not_applicable(e.to_string())),
    };
    let lambda1_b1 = lambda1_lower_bound(p, b1.volume())?;
    cert.measure("lambda1_b1_lower_bound", lambda1_b1);
    cert.margin("c_bound", lambda1_b1 - c0);
    if !(c0 >= 0.0) || !(c0 < lambda1_b1) {
        return Ok(cert.not_applicable("c_bound must lie below lambda_1(B1)"));
    }
    let k_nodes: Vec<usize> = (0..g.len()).filter(|&i| k.contains(&g.node(i))).collect();
    if k_nodes.is_empty() {
        return Ok(cert.not_applicable("no grid nodes in K"));
    }
    let essinf_k = k_nodes.iter().map(|&i| v.value(i)).fold(f64::INFINITY, f64::min);
    cert.measure("essinf_k", essinf_k);
    if !(essinf_k > 0.0) {
        return Ok(cert.not_applicable("v is not positive on K"));
    }
    let tol = sign_tolerance(v);
    let min_on_h = (0..g.len()).filter(|&i| hs.offset(&g.node(i)) > 0.0).map(|i| v.value(i)).fold(0.0f64, f64::min);
    cert.measure("min_v_on_h", min_on_h);
    if min_on_h < -tol {
        return Ok(cert.not_applicable("v is negative somewhere in H"));
    }

    // measured constant
    let s = p.s();
    let mut d = f64::INFINITY;
    let mut collar = 0usize;
    for i in 0..g.len() {
        let delta = b1.signed_distance(&g.node(i));
        if delta <= 0.0 {
            continue;
        }
        if delta < 2.0 * h {
            collar += 1;
            continue;
        }
        d = d.min(v.value(i) / delta.powf(s));
    }
    if !d.is_finite() {
        return Ok(cert.inconclusive("no nodes of B1 outside the collar"));
    }
    cert.measure("collar_nodes", collar as f64);
    cert.measure("d", d);
    cert.margin("d_positive", d);

    // the barrier route
    let sup_psi = gamma_ns(p) * radius.powf(2.0 * s);
    let dist_b1 = hs.offset(&center) - radius;
    let kappa = 1.0 + sup_psi * dist_b1.powf(-p.kernel_exponent());
    let c1 = c_ns(p) * k.volume() * kernel_gap_inf(b1, k, hs, p);
    let alpha = (kappa + c0 * sup_psi) / c1;
    let eps = essinf_k / alpha;
    let d_route = eps * gamma_ns(p) * radius.powf(s);
    cert.measure("kappa_barrier", kappa);
    cert.measure("c1", c1);
    cert.measure("alpha", alpha);
    cert.measure("epsilon", eps);
    cert.measure("d_barrier_route", d_route);
    cert.margin("d_vs_barrier_route", d - d_route);

    let barrier = probe.with_alpha(alpha)?;
    let w = Field::sample(g.clone(), None, &|x: &[f64]| barrier.eval(x))?;
    let nodes: Vec<usize> = (0..g.len()).filter(|&i| b1.signed_distance(&g.node(i)) >= 2.0 * h).collect();
    let aw = DiscreteOperator::new(p, h)?.apply(&w, &nodes);
    let scale = aw.iter().fold(1.0f64, |m, a| m.max(a.abs()));
    let sub_margin = nodes.iter().zip(&aw).map(|(&i, a)| -c0 * w.value(i) - a).fold(f64::INFINITY, f64::min);
    cert.measure("barrier_nodes", nodes.len() as f64);
    cert.margin("barrier_subsolution", sub_margin);
    let barrier_ok = sub_margin >= -1e-9 * scale;
    if !barrier_ok {
        cert.notes.push("barrier inequality fails at some node of B1".into());
    }
    Ok(cert.decide(d > 0.0 && barrier_ok))
}

/// `inf_{x in B1, y in K} |x-y|^{-N-2s} - |x-Qy|^{-N-2s}` over boundary and
/// lattice samples of both sets.
fn kernel_gap_inf(b1: &Domain, k: &Domain, hs: &HalfSpace, p: FracParams) -> f64 {
    let a = p.kernel_exponent();
    let xs = set_samples(b1);
    let ys = set_samples(k);
    let mut inf = f64::INFINITY;
    for x in &xs {
        for y in &ys {
            let yr = hs.reflect(y);
            let d1: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let d2: f64 = x.iter().zip(&yr).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            inf = inf.min(d1.powf(-a) - d2.powf(-a));
        }
    }
    inf
}

fn set_samples(d: &Domain) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = d.boundary_samples(256).into_iter().map(|b| b.point).collect();
    let (lo, hi) = d.bounding_box();
    let n = 12;
    let grid =
        Grid::covering(&lo, &hi, (0..d.dim()).map(|k| hi[k] - lo[k]).fold(0.0, f64::max) / n as f64, &d.center())
            .expect("positive extent");
    out.extend((0..grid.len()).map(|i| grid.node(i)).filter(|x| d.contains(x)));
    out
}

/// Corner lemma at the origin: `0 ∈ ∂D`, inner normal `e2`, the plane
/// `{x1 = 0}` orthogonal to `∂D`, `w` odd in `x1`, `w >= 0` on `{x1 < 0}`.
#[derive(Debug, Clone)]
pub struct CornerInput {
    pub w: Field,
    pub domain: Domain,
    /// Radius of the interior ball `B_R(R e2) ⊂ D`.
    pub radius: f64,
    /// Bound on `|c|`.
    pub c_bound: f64,
    pub params: FracParams,
    /// Spacing of the grid used for the barrier inequality; `R/16` if absent.
    pub barrier_h: Option<f64>,
}

/// `t_k = h round(t0 2^{-k/2} / h)` down to `2h`, deduplicated.
fn node_ladder(t0: f64, h: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut k = 0;
    loop {
        let t = t0 * 2f64.powf(-0.5 * k as f64);
        let m = (t / h).round();
        if m < 2.0 {
            break;
        }
        let t = m * h;
        if out.last().is_none_or(|&l| (l - t).abs() > 0.5 * h) {
            out.push(t);
        }
        k += 1;
    }
    out
}

pub fn check_corner_lemma(input: &CornerInput) -> Result<MPCertificate> {
    let CornerInput { w, domain, radius, c_bound, params: p, barrier_h } = input;
    let (r, c0, p) = (*radius, *c_bound, *p);
    if p.dim() < 2 {
        return Err(Error::InvalidParameter("the corner lemma needs N >= 2".into()));
    }
    let digest = InputDigest::default()
        .tag("corner")
        .field(w)
        .domain(domain)
        .reals(&[r, c0, barrier_h.unwrap_or(f64::NAN)])
        .params(p)
        .finish();
    let mut cert = MPCertificate::new(Principle::Corner, digest);
    let g = w.grid();
    let h = g.h();
    let s = p.s();
    let dim = p.dim();
    let mut e1 = vec![0.0; dim];
    e1[0] = 1.0;
    let plane = HalfSpace::new(e1, 0.0)?;
    let at = |t: f64| {
        let mut x = vec![0.0; dim];
        x[0] = -t;
        x[1] = t;
        x
    };

    // hypotheses
    let Some(defect) = antisymmetry_defect(w, &plane) else {
        return Ok(cert.not_applicable("grid is not invariant under x1 -> -x1"));
    };
    cert.measure("antisymmetry_defect", defect);
    let tol = sign_tolerance(w);
    if defect > 1e-12 * w.max_abs() {
        return Ok(cert.not_applicable("w is not odd in x1"));
    }
    let left_min = (0..g.len()).filter(|&i| g.node(i)[0] < 0.0).map(|i| w.value(i)).fold(0.0f64, f64::min);
    cert.measure("min_w_left", left_min);
    if left_min < -tol {
        return Ok(cert.not_applicable("w is negative on {x1 < 0}"));
    }
    let ball = Domain::ball(
        {
            let mut c = vec![0.0; dim];
            c[1] = r;
            c
        },
        r,
    )?;
    let inclusion =
        ball.boundary_samples(512).iter().map(|b| domain.signed_distance(&b.point)).fold(f64::INFINITY, f64::min);
    cert.measure("interior_ball_margin", inclusion);
    if inclusion < -1e-9 * r {
        return Ok(cert.not_applicable("B_R(R e2) is not inside the domain"));
    }

    // growth along t (e2 - e1)
    let t0 = r / 8.0;
    cert.measure("t0", t0);
    if t0 < 8.0 * h {
        return Ok(cert.inconclusive("ladder too short: t0 < 8h"));
    }
    let ladder = node_ladder(t0, h);
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for &t in &ladder {
        match g.node_at(&at(t), 1e-6) {
            Some(i) => {
                ts.push(t);
                ws.push(w.value(i));
            }
            None => return Ok(cert.not_applicable("the ray t(e2 - e1) misses the grid nodes")),
        }
    }
    cert.measure("ladder_points", ts.len() as f64);
    if ts.len() < 5 {
        return Ok(cert.inconclusive("fewer than 5 ladder points"));
    }
    let c_env = ts.iter().zip(&ws).map(|(t, v)| v / t.powf(1.0 + s)).fold(f64::INFINITY, f64::min);
    cert.measure("growth_constant", c_env);
    cert.margin("growth_constant", c_env);
    let exponent = if ws.iter().all(|&v| v > 0.0) {
        let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let lw: Vec<f64> = ws.iter().map(|v| v.ln()).collect();
        affine_fit(&lt, &lw).1
    } else {
        f64::NAN
    };
    cert.measure("growth_exponent", exponent);
    cert.margin("growth_exponent", 1.0 + s + 0.1 - exponent);
    let growth_ok = c_env > 0.0 && exponent <= 1.0 + s + 0.1;

    // barrier route: alpha with (-Δ)^s h + c0 h <= 0 on K, then M with
    // w >= M h on the closure of B^1
    let hb = barrier_h.unwrap_or(r / 16.0);
    let route = corner_barrier_alpha(p, r, c0, hb)?;
    cert.measure("barrier_alpha", route.alpha);
    cert.margin("barrier_on_k", route.margin);
    if !route.alpha.is_finite() {
        cert.notes.push("no admissible alpha found for the corner barrier".into());
        return Ok(cert.decide(false));
    }
    let barrier = CornerBarrier::new(p, r, route.alpha)?;
    let b1_center = barrier.side_center(-1.0);
    let b1 = Domain::ball(b1_center, r)?;
    let mut m = f64::INFINITY;
    for i in 0..g.len() {
        let x = g.node(i);
        if b1.signed_distance(&x) >= 0.0 {
            let hx = barrier.eval(&x);
            if hx > 0.0 {
                m = m.min(w.value(i) / hx);
            }
        }
    }
    let barrier_ok = route.margin >= 0.0;
    if m.is_finite() {
        cert.measure("barrier_m", m);
        cert.margin("barrier_m", m);
        let dstar = (0..g.len())
            .filter(|&i| {
                let x = g.node(i);
                x[0] < 0.0 && domain.contains(&x)
            })
            .map(|i| w.value(i) - m * barrier.eval(&g.node(i)))
            .fold(f64::INFINITY, f64::min);
        // informational: the comparison needs w to be a supersolution
        if dstar.is_finite() {
            cert.measure("min_w_minus_mh_on_dstar", dstar);
        }
    } else {
        cert.notes.push("the grid does not reach B^1; M not measured".into());
    }
    if !barrier_ok {
        cert.notes.push("the corner barrier inequality fails on K".into());
    }
    Ok(cert.decide(growth_ok && barrier_ok))
}

#[derive(Debug, Clone, Copy)]
struct CornerRoute {
    alpha: f64,
    margin: f64,
}

/// Smallest `alpha` (times a safety factor 2) with
/// `A(-x1 phi) + alpha A(-x1 (d1 + d2)) + c0 h <= 0` at the nodes of
/// `K = B_R(R e2) ∩ {x1 < 0}`; the margin is the worst slack at that alpha.
fn corner_barrier_alpha(p: FracParams, r: f64, c0: f64, hb: f64) -> Result<CornerRoute> {
    let dim = p.dim();
    let probe = CornerBarrier::new(p, r, 1.0)?;
    let mut lo = vec![-r; dim];
    let mut hi = vec![r; dim];
    lo[0] = -5.0 * r;
    hi[0] = 5.0 * r;
    lo[1] = 0.0;
    hi[1] = 5.0 * r;
    let anchor = vec![0.0; dim];
    let grid = Grid::covering(&lo, &hi, hb, &anchor)?;
    let main = Field::sample(grid.clone(), None, &|x: &[f64]| -x[0] * probe.phi(x))?;
    let side = Field::sample(grid.clone(), None, &|x: &[f64]| -x[0] * probe.side_distances(x))?;
    let k_nodes: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let x = grid.node(i);
            x[0] < 0.0 && probe.phi(&x) > 0.0
        })
        .collect();
    let op = DiscreteOperator::new(p, hb)?;
    let a = op.apply(&main, &k_nodes);
    let b = op.apply(&side, &k_nodes);
    let mut alpha: f64 = 0.0;
    for ((&i, ai), bi) in k_nodes.iter().zip(&a).zip(&b) {
        let need = ai + c0 * main.value(i);
        if need > 0.0 {
            if *bi >= 0.0 {
                return Ok(CornerRoute { alpha: f64::NAN, margin: -need });
            }
            alpha = alpha.max(need / -bi);
        }
    }
    let alpha = (2.0 * alpha).max(1e-12);
    let margin = k_nodes
        .iter()
        .zip(&a)
        .zip(&b)
        .map(|((&i, ai), bi)| -(ai + alpha * bi + c0 * main.value(i)))
        .fold(f64::INFINITY, f64::min);
    Ok(CornerRoute { alpha, margin })
}

/// An orthogonal-contact configuration: the plane through `point` with
/// normal `plane_normal` meets `∂Ω` orthogonally there; `inner_normal` is
/// the interior normal of `Ω` at `point`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactConfig {
    pub point: Vec<f64>,
    pub plane_normal: Vec<f64>,
    pub inner_normal: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    /// Largest ladder step.
    pub t0: f64,
    /// Ladder floor (typically `2h` for grid fields).
    pub floor: f64,
    pub levels: usize,
}

/// `v(P0 + t eta) / t^{1+s}` with `eta = inner_normal - plane_normal` and
/// `v = u - u o Q`; passes when the ratio decays (last value at most half
/// the first, or identically zero).
pub fn check_decay_lemma(
    u: &(impl ScalarField + ?Sized),
    contact: &ContactConfig,
    p: FracParams,
    opts: &DecayOptions,
) -> Result<MPCertificate> {
    let dim = p.dim();
    for v in [&contact.point, &contact.plane_normal, &contact.inner_normal] {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
    }
    let e = &contact.plane_normal;
    let hs = HalfSpace::from_direction(e, 0.0)?;
    let hs = hs.with_lambda(dot(hs.direction(), &contact.point));
    let eta: Vec<f64> = contact.inner_normal.iter().zip(hs.direction()).map(|(n, e)| n - e).collect();
    let ts: Vec<f64> =
        (0..opts.levels).map(|k| opts.t0 * 2f64.powf(-0.5 * k as f64)).filter(|&t| t >= opts.floor).collect();
    let ratios: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let x: Vec<f64> = contact.point.iter().zip(&eta).map(|(p, e)| p + t * e).collect();
            (u.value_at(&x) - u.value_at(&hs.reflect(&x))) / t.powf(1.0 + p.s())
        })
        .collect();
    let digest = InputDigest::default()
        .tag("decay")
        .reals(&contact.point)
        .reals(&contact.plane_normal)
        .reals(&contact.inner_normal)
        .reals(&[opts.t0, opts.floor, opts.levels as f64])
        .reals(&ratios)
        .params(p)
        .finish();
    let mut cert = MPCertificate::new(Principle::Decay, digest);
    cert.measure("ladder_points", ts.len() as f64);
    if ts.len() < 5 {
        return Ok(cert.inconclusive("fewer than 5 ladder points"));
    }
    for (k, q) in ratios.iter().enumerate() {
        cert.measure(&format!("ratio_{k:02}"), *q);
    }
    let first = ratios[0].abs();
    let last = ratios[ratios.len() - 1].abs();
    let scale = ratios.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    cert.measure("first_ratio", first);
    cert.measure("last_ratio", last);
    if scale <= 1e-12 {
        cert.notes.push("v vanishes along the ray".into());
        cert.margin("decay", 0.0);
        return Ok(cert.decide(true));
    }
    cert.margin("decay", 0.5 * first - last);
    Ok(cert.decide(last <= 0.5 * first))
}

/// `psi_{B'} - psi_{Q B'} + beta (psi_{B''} - psi_{Q B''})` and its scaled
/// negative: the building blocks of the randomized suites.
#[derive(Debug, Clone)]
pub struct AntisymmetricCase {
    pub input: WeakMpInput,
    pub description: String,
}

fn reflected_pair<'a>(bt: &'a BallTorsion, hs: &HalfSpace) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    let hs = hs.clone();
    move |x: &[f64]| bt.eval(x) - bt.eval(&hs.reflect(x))
}

/// Random constructions with `kappa = 0`: `v` is the
/// antisymmetrized torsion of a random ball `B' ⊂⊂ {x1 > 0}` plus a small
/// antisymmetric bump elsewhere in `H`; `omega = B'`.
pub fn random_weak_mp_cases(seed: u64, count: usize, h: f64) -> Result<Vec<AntisymmetricCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hs = HalfSpace::new(vec![1.0, 0.0], 0.0)?;
    (0..count)
        .map(|j| {
            let s = rng.random_range(0.25..0.75);
            let p = FracParams::new(2, s)?;
            let r = rng.random_range(0.3..0.6);
            let c = vec![r + rng.random_range(0.1..0.5), rng.random_range(-0.3..0.3)];
            let beta = rng.random_range(0.0..0.2);
            let r2 = 0.25;
            let c2 = vec![c[0] + r + r2 + rng.random_range(0.2..0.5), c[1] + rng.random_range(-0.3..0.3)];
            let main = BallTorsion::new(p, c.clone(), r)?;
            let extra = BallTorsion::new(p, c2.clone(), r2)?;
            let lo = vec![0.0, c[1].min(c2[1]) - r - 0.1];
            let hi = vec![c2[0] + r2 + 0.1, c[1].max(c2[1]) + r + 0.1];
            let grid = symmetric_grid(&hs, &lo, &hi, h)?;
            let f = reflected_pair(&main, &hs);
            let f2 = reflected_pair(&extra, &hs);
            let v = Field::sample(grid, None, &|x: &[f64]| f(x) + beta * f2(x))?;
            Ok(AntisymmetricCase {
                description: format!("case {j}: s={s:.3} B'=ball({:.3},{:.3};{r:.3}) beta={beta:.3}", c[0], c[1]),
                input: WeakMpInput {
                    v,
                    hs: hs.clone(),
                    omega: main.domain(),
                    c_inf: 0.0,
                    kappa: 0.0,
                    params: p,
                    lambda1: None,
                },
            })
        })
        .collect()
}

/// Constructions with `kappa > 0`: `v = -t (psi_{B'} - psi_{Q B'})` with
/// `kappa` the smallest value making `v` a discrete supersolution of
/// `(-Δ)^s v >= c_inf v - kappa` outside the collar, and `t` chosen so that
/// `kappa` stays below its admissible threshold.
pub fn random_kappa_cases(seed: u64, count: usize, h: f64) -> Result<Vec<AntisymmetricCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b_6170_7061);
    let hs = HalfSpace::new(vec![1.0, 0.0], 0.0)?;
    (0..count)
        .map(|j| {
            let s = rng.random_range(0.3..0.7);
            let p = FracParams::new(2, s)?;
            let r = rng.random_range(0.35..0.6);
            let c = vec![r + rng.random_range(0.1..0.4), 0.0];
            let main = BallTorsion::new(p, c.clone(), r)?;
            let omega = main.domain();
            let lambda1 = estimate_lambda1(&omega, p, &SolveConfig::new(h))?.value;
            let c_inf = rng.random_range(0.0..0.5) * lambda1;
            let lo = vec![0.0, -r - 0.1];
            let hi = vec![c[0] + r + 0.1, r + 0.1];
            let grid = symmetric_grid(&hs, &lo, &hi, h)?;
            let f = reflected_pair(&main, &hs);
            let unit = Field::sample(grid, None, &|x: &[f64]| -f(x))?;
            let g = unit.grid();
            let deep: Vec<usize> = (0..g.len()).filter(|&i| omega.signed_distance(&g.node(i)) >= 2.0 * h).collect();
            let a = DiscreteOperator::new(p, h)?.apply(&unit, &deep);
            let need = deep.iter().zip(&a).map(|(&i, ai)| c_inf * unit.value(i) - ai).fold(0.0f64, f64::max);
            let threshold = (lambda1 - c_inf) / omega.volume().sqrt();
            let t = rng.random_range(0.2..0.9) * threshold / need;
            Ok(AntisymmetricCase {
                description: format!("kappa case {j}: s={s:.3} r={r:.3} c_inf={c_inf:.3} t={t:.4}"),
                input: WeakMpInput {
                    v: unit.scaled(t),
                    hs: hs.clone(),
                    omega,
                    c_inf,
                    kappa: t * need,
                    params: p,
                    lambda1: Some(lambda1),
                },
            })
        })
        .collect()
}

/// The Hopf configuration used by the suites: `v` from the weak-mp
/// construction on `B' = ball((1, 0), 0.6)`, `B1 = ball((0.8, 0), 0.3)`
/// and `K = ball((1.35, 0), k_radius)` with `k_radius <= 0.2`.
pub fn hopf_example(p: FracParams, h: f64, k_radius: f64) -> Result<HopfInput> {
    let hs = HalfSpace::new(vec![1.0, 0.0], 0.0)?;
    let bp = BallTorsion::new(p, vec![1.0, 0.0], 0.6)?;
    let grid = symmetric_grid(&hs, &[0.0, -0.7], &[1.7, 0.7], h)?;
    let f = reflected_pair(&bp, &hs);
    let v = Field::sample(grid, None, &f)?;
    Ok(HopfInput {
        v,
        b1: Domain::ball(vec![0.8, 0.0], 0.3)?,
        k: Domain::ball(vec![1.35, 0.0], k_radius)?,
        hs,
        c_bound: 0.0,
        params: p,
    })
}

/// One certificate of a suite with the outcome it is expected to have.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub expect_pass: bool,
    pub certificate: MPCertificate,
}

impl SuiteEntry {
    pub fn as_expected(&self) -> bool {
        self.certificate.passed() == self.expect_pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    WeakMp,
    StrongMp,
    Hopf,
    Corner,
    Decay,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "weak-mp" => Suite::WeakMp,
            "strong-mp" => Suite::StrongMp,
            "hopf" => Suite::Hopf,
            "corner" => Suite::Corner,
            "decay" => Suite::Decay,
            _ => return Err(Error::InvalidParameter(format!("unknown suite {s:?}"))),
        })
    }
}

/// Runs the certificate suites at spacing `h` (2D constructions).
pub fn run_suite(suite: Suite, seed: u64, h: f64) -> Result<Vec<SuiteEntry>> {
    let want = |x: Suite| suite == Suite::All || suite == x;
    let mut out = Vec::new();
    let half = FracParams::new(2, 0.5)?;
    if want(Suite::WeakMp) {
        for case in random_weak_mp_cases(seed, 20, h)? {
            out.push(SuiteEntry {
                name: case.description,
                expect_pass: true,
                certificate: check_weak_mp(&case.input)?,
            });
        }
        for case in random_kappa_cases(seed, 5, h)? {
            out.push(SuiteEntry {
                name: case.description,
                expect_pass: true,
                certificate: check_weak_mp(&case.input)?,
            });
        }
    }
    if want(Suite::StrongMp) {
        let case = random_weak_mp_cases(seed, 1, h)?.remove(0).input;
        out.push(SuiteEntry {
            name: "positive branch".into(),
            expect_pass: true,
            certificate: check_strong_mp(&case.v, &case.hs, &case.omega, 0.0, case.params)?,
        });
        let zero = Field::zeros(case.v.grid().clone(), None);
        out.push(SuiteEntry {
            name: "zero branch".into(),
            expect_pass: true,
            certificate: check_strong_mp(&zero, &case.hs, &case.omega, 0.0, case.params)?,
        });
    }
    if want(Suite::Hopf) {
        let hopf = hopf_example(half, h, 0.2)?;
        out.push(SuiteEntry { name: "hopf".into(), expect_pass: true, certificate: check_hopf(&hopf)? });
    }
    if want(Suite::Corner) {
        let (ok, zero) = corner_examples(half, 1.0 / 64.0)?;
        out.push(SuiteEntry {
            name: "corner barrier".into(),
            expect_pass: true,
            certificate: check_corner_lemma(&ok)?,
        });
        out.push(SuiteEntry {
            name: "corner zero field".into(),
            expect_pass: false,
            certificate: check_corner_lemma(&zero)?,
        });
    }
    if want(Suite::Decay) {
        let (ball, ellipse) = decay_examples(half)?;
        out.push(SuiteEntry { name: "decay ball".into(), expect_pass: true, certificate: ball });
        out.push(SuiteEntry { name: "decay ellipse".into(), expect_pass: false, certificate: ellipse });
    }
    Ok(out)
}

/// The exact corner barrier (`R = 1`, `alpha = 1`) on a grid reaching the
/// side balls, and the zero field as negative control.
pub fn corner_examples(p: FracParams, h: f64) -> Result<(CornerInput, CornerInput)> {
    let r = 1.0;
    let cb = CornerBarrier::new(p, r, 1.0)?;
    let grid = Grid::covering(&[-5.0 * r, 0.0], &[5.0 * r, 5.0 * r], h, &[0.0, 0.0])?;
    let w = Field::sample(grid.clone(), None, &cb)?;
    let domain = Domain::ball(vec![0.0, r], r)?;
    let base = CornerInput { w, domain, radius: r, c_bound: 0.0, params: p, barrier_h: None };
    let zero = CornerInput { w: Field::zeros(grid, None), ..base.clone() };
    Ok((base, zero))
}

/// Decay lemma on the exact unit-ball torsion (plane through the center)
/// and on the exact 2:1 ellipse profile at its 45° critical plane.
pub fn decay_examples(p: FracParams) -> Result<(MPCertificate, MPCertificate)> {
    let bt = BallTorsion::new(p, vec![0.0, 0.0], 1.0)?;
    let opts = DecayOptions { t0: 0.1, floor: 1e-4, levels: 10 };
    let ball = check_decay_lemma(
        &bt,
        &ContactConfig { point: vec![0.0, -1.0], plane_normal: vec![1.0, 0.0], inner_normal: vec![0.0, 1.0] },
        p,
        &opts,
    )?;
    let (a, b) = (1.0f64, 0.5f64);
    let s = p.s();
    let profile = move |x: &[f64]| (1.0 - (x[0] / a).powi(2) - (x[1] / b).powi(2)).max(0.0).powf(s);
    let rr = (a * a + b * b).sqrt();
    let point = vec![a * a / rr, -b * b / rr];
    let mut outward = [point[0] / (a * a), point[1] / (b * b)];
    let norm = outward[0].hypot(outward[1]);
    outward.iter_mut().for_each(|v| *v /= norm);
    let e = std::f64::consts::FRAC_1_SQRT_2;
    let ellipse = check_decay_lemma(
        &profile,
        &ContactConfig { point, plane_normal: vec![e, e], inner_normal: outward.iter().map(|v| -v).collect() },
        p,
        &opts,
    )?;
    Ok((ball, ellipse))
}

#[cfg(test)]
mod tests;
