//! One function per subcommand. Each returns the exit status and the
//! fields of the summary line.

use std::path::{Path, PathBuf};

use fraclap::boundary::{overdetermined_report_with, ConstancyVerdict, Ladder};
use fraclap::closed_form::{BallTorsion, CornerBarrier};
use fraclap::constants::ConstantsReport;
use fraclap::moving_plane::{
    default_directions, moving_plane_analyze_with, radial_monotone_test, MovingPlaneOptions, RadialVerdict,
    SymmetryVerdict,
};
use fraclap::mp_harness::{run_suite, CertStatus, Suite};
use fraclap::operator::{grid_for, DiscreteOperator};
use fraclap::solver::{solve_dirichlet, solve_semilinear};
use fraclap::{Error, Field, FracParams};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::output::{field_csv, table_csv, to_json, write_file};

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARSE: u8 = 1;
pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_VIOLATION: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Debug)]
pub struct CmdError {
    pub code: u8,
    pub message: String,
}

impl CmdError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, message: message.into() }
    }

    fn io(message: String) -> Self {
        Self { code: EXIT_PRECONDITION, message }
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } | Error::LinearAlgebra(_) | Error::InsufficientData(_) => EXIT_INCONCLUSIVE,
            _ => EXIT_PRECONDITION,
        };
        Self { code, message: e.to_string() }
    }
}

pub struct Outcome {
    pub exit: u8,
    pub summary: Map<String, Value>,
}

impl Outcome {
    fn new(exit: u8) -> Self {
        Self { exit, summary: Map::new() }
    }

    fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.summary.insert(key.into(), serde_json::to_value(value).expect("summary value"));
        self
    }
}

type CmdResult = Result<Outcome, CmdError>;

#[derive(Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    config: C,
    result: R,
}

fn write_report(
    path: Option<&Path>,
    command: &str,
    config: &impl Serialize,
    result: &impl Serialize,
) -> Result<(), CmdError> {
    let text = to_json(&Report { command, config, result });
    match path {
        Some(p) => write_file(p, &text).map_err(CmdError::io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pick(flag: Option<&Path>, config: Option<&String>, fallback: &str) -> PathBuf {
    flag.map(Path::to_path_buf).or_else(|| config.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(fallback))
}

fn report_path(flag: Option<&Path>, cfg: &RunConfig) -> Option<PathBuf> {
    flag.map(Path::to_path_buf).or_else(|| cfg.output.report.as_ref().map(PathBuf::from))
}

pub fn constants(n: usize, s: f64) -> CmdResult {
    let p = FracParams::new(n, s)?;
    let report = ConstantsReport::new(p);
    print!("{}", to_json(&report));
    Ok(Outcome::new(EXIT_OK).with("c_ns", report.c_ns).with("gamma_ns", report.gamma_ns))
}

pub fn oracle(shape: &str, n: usize, s: f64, radius: f64, at: &[f64], alpha: f64) -> CmdResult {
    let p = FracParams::new(n, s)?;
    if at.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: at.len() }.into());
    }
    let value = match shape {
        "ball" => BallTorsion::new(p, vec![0.0; n], radius)?.eval(at),
        "corner" => CornerBarrier::new(p, radius, alpha)?.eval(at),
        other => return Err(CmdError::parse(format!("unknown oracle shape {other:?} (ball, corner)"))),
    };
    print!("{}", to_json(&json!({ "shape": shape, "N": n, "s": s, "radius": radius, "at": at, "value": value })));
    Ok(Outcome::new(EXIT_OK).with("value", value))
}

struct Solved {
    field: Field,
    residual: f64,
    iterations: usize,
}

fn solve_field(cfg: &RunConfig) -> Result<Solved, CmdError> {
    let p = cfg.params()?;
    let scfg = cfg.solve_config();
    if cfg.rhs.is_constant() {
        let value = cfg.rhs.eval(0.0);
        let sol = solve_dirichlet(&cfg.domain, &|_: &[f64]| value, p, &scfg)?;
        Ok(Solved { field: sol.field, residual: sol.residual, iterations: 1 })
    } else {
        let rhs = cfg.rhs;
        let sol = solve_semilinear(&cfg.domain, |u| rhs.eval(u), p, &scfg)?;
        Ok(Solved { field: sol.field, residual: sol.residual, iterations: sol.iterations })
    }
}

pub fn solve(cfg: &RunConfig, out: Option<&Path>, report: Option<&Path>) -> CmdResult {
    let sol = solve_field(cfg)?;
    let data = pick(out, cfg.output.data.as_ref(), "solution.csv");
    write_file(&data, &field_csv(&sol.field)).map_err(CmdError::io)?;
    let max_u = sol.field.max_abs();
    let result = json!({
        "nodes": sol.field.grid().len(),
        "unknowns": sol.field.nonzero_nodes().len(),
        "residual": sol.residual,
        "iterations": sol.iterations,
        "max_abs": max_u,
        "lipschitz": cfg.rhs.lipschitz(max_u),
        "data": data.display().to_string(),
    });
    if let Some(path) = report_path(report, cfg) {
        write_report(Some(&path), "solve", cfg, &result)?;
    }
    Ok(Outcome::new(EXIT_OK).with("residual", sol.residual).with("max_abs", max_u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExpectConstancy {
    Constant,
    NotConstant,
}

pub fn boundary_deriv(
    cfg: &RunConfig,
    samples: Option<usize>,
    out: Option<&Path>,
    report: Option<&Path>,
    expect: Option<ExpectConstancy>,
) -> CmdResult {
    let p = cfg.params()?;
    let sol = solve_field(cfg)?;
    let n = samples.unwrap_or(cfg.analysis.samples);
    let rep = overdetermined_report_with(&sol.field, &cfg.domain, p, n, cfg.tolerances.constancy, &Ladder::default())?;
    let dim = p.dim();
    let mut cols: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    cols.extend(["derivative", "fit_residual", "flagged"].map(String::from));
    let rows: Vec<Vec<f64>> = rep
        .samples
        .iter()
        .map(|s| {
            let mut r = s.point.clone();
            r.extend([s.derivative, s.fit_residual, if s.flagged { 1.0 } else { 0.0 }]);
            r
        })
        .collect();
    let data = pick(out, cfg.output.data.as_ref(), "boundary_deriv.csv");
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    write_file(&data, &table_csv(&col_refs, &rows)).map_err(CmdError::io)?;
    if let Some(path) = report_path(report, cfg) {
        write_report(Some(&path), "boundary-deriv", cfg, &rep)?;
    }
    let exit = match (rep.verdict, expect) {
        (ConstancyVerdict::Inconclusive, _) => EXIT_INCONCLUSIVE,
        (ConstancyVerdict::NotConstant, Some(ExpectConstancy::Constant)) => EXIT_VIOLATION,
        (ConstancyVerdict::Constant | ConstancyVerdict::Trivial, Some(ExpectConstancy::NotConstant)) => EXIT_VIOLATION,
        _ => EXIT_OK,
    };
    Ok(Outcome::new(exit)
        .with("verdict", rep.verdict)
        .with("mean", rep.mean)
        .with("relative_spread", rep.relative_spread))
}

/// Directions for the moving-plane run: in 2D `count` equally spaced
/// angles (8 gives the axes and diagonals), otherwise the first `count`
/// axis and diagonal directions.
pub fn directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    if dim == 2 {
        (0..count)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / count as f64;
                let (s, c) = t.sin_cos();
                let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
                vec![snap(c), snap(s)]
            })
            .collect()
    } else {
        default_directions(dim).into_iter().take(count).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExpectSymmetry {
    Symmetric,
    Asymmetric,
}

pub fn moving_plane(
    cfg: &RunConfig,
    count: Option<usize>,
    out: Option<&Path>,
    expect: Option<ExpectSymmetry>,
) -> CmdResult {
    let sol = solve_field(cfg)?;
    let dirs = directions(cfg.params.n, count.unwrap_or(cfg.analysis.directions).max(1));
    let opts = MovingPlaneOptions { solver_residual: sol.residual, ..Default::default() };
    let rep = moving_plane_analyze_with(&sol.field, &cfg.domain, &dirs, &opts)?;
    let path = pick(out, cfg.output.report.as_ref(), "moving_plane.json");
    write_report(Some(&path), "moving-plane", cfg, &rep)?;
    let sweep_ok = rep.directions.iter().all(|d| d.sweep_passed);
    let exit = match (rep.verdict, expect) {
        (SymmetryVerdict::Inconclusive, _) => EXIT_INCONCLUSIVE,
        (SymmetryVerdict::Asymmetric, Some(ExpectSymmetry::Symmetric)) => EXIT_VIOLATION,
        (SymmetryVerdict::Symmetric, Some(ExpectSymmetry::Symmetric)) if !sweep_ok => EXIT_VIOLATION,
        (SymmetryVerdict::Symmetric, Some(ExpectSymmetry::Asymmetric)) => EXIT_VIOLATION,
        _ => EXIT_OK,
    };
    Ok(Outcome::new(exit)
        .with("verdict", rep.verdict)
        .with("sweep_passed", sweep_ok)
        .with("center", &rep.detected_center))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExpectRadial {
    Radial,
    NotRadial,
}

pub fn radial_test(cfg: &RunConfig, out: Option<&Path>, expect: Option<ExpectRadial>) -> CmdResult {
    let sol = solve_field(cfg)?;
    let offsets = if cfg.analysis.offsets.is_empty() {
        let (lo, hi) = cfg.domain.bounding_box();
        let (a, b) =
            (lo.iter().cloned().fold(f64::INFINITY, f64::min), hi.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        (0..=16).map(|k| a + (b - a) * k as f64 / 16.0).collect()
    } else {
        cfg.analysis.offsets.clone()
    };
    let dirs = directions(cfg.params.n, cfg.analysis.directions.max(1));
    let rep = radial_monotone_test(&sol.field, &dirs, &offsets)?;
    let path = pick(out, cfg.output.report.as_ref(), "radial.json");
    write_report(Some(&path), "radial-test", cfg, &rep)?;
    let radial = matches!(rep.verdict, RadialVerdict::Radial { .. });
    let exit = match (radial, expect) {
        (false, Some(ExpectRadial::Radial)) | (true, Some(ExpectRadial::NotRadial)) => EXIT_VIOLATION,
        _ => EXIT_OK,
    };
    Ok(Outcome::new(exit).with("radial", radial).with("verdict", &rep.verdict))
}

pub fn certify(cfg: &RunConfig, suite: &str, out: &Path) -> CmdResult {
    let suite: Suite = suite.parse().map_err(|e: Error| CmdError::parse(e.to_string()))?;
    let entries = run_suite(suite, cfg.seed, cfg.grid.h)?;
    std::fs::create_dir_all(out).map_err(|e| CmdError::io(format!("{}: {e}", out.display())))?;
    let mut unexpected_fail = 0;
    let mut not_applicable = 0;
    let mut inconclusive = 0;
    for (k, e) in entries.iter().enumerate() {
        let name = serde_json::to_value(e.certificate.principle).expect("principle");
        let file = out.join(format!("{k:02}-{}.json", name.as_str().unwrap_or("cert")));
        write_report(Some(&file), "certify", cfg, e)?;
        match e.certificate.status {
            CertStatus::NotApplicable => not_applicable += 1,
            CertStatus::Inconclusive => inconclusive += 1,
            _ if !e.as_expected() => unexpected_fail += 1,
            _ => {}
        }
    }
    let exit = if unexpected_fail > 0 {
        EXIT_VIOLATION
    } else if not_applicable > 0 {
        EXIT_PRECONDITION
    } else if inconclusive > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    Ok(Outcome::new(exit)
        .with("certificates", entries.len())
        .with("unexpected", unexpected_fail)
        .with("not_applicable", not_applicable)
        .with("inconclusive", inconclusive))
}

/// Operator residual of the sampled unit-ball torsion and the error of the
/// Dirichlet solve against it, both at nodes with `delta >= 0.2`.
pub fn verify_ball(n: usize, s: f64, h: f64, out: Option<&Path>) -> CmdResult {
    let p = FracParams::new(n, s)?;
    let bt = BallTorsion::new(p, vec![0.0; n], 1.0)?;
    let d = bt.domain();
    let grid = grid_for(&d, h)?;
    let psi = Field::sample(grid.clone(), Some(d.clone()), &bt)?;
    let deep: Vec<usize> = (0..grid.len()).filter(|&i| d.signed_distance(&grid.node(i)) >= 0.2).collect();
    let a = DiscreteOperator::new(p, h)?.apply(&psi, &deep);
    let residual = a.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    let cfg = fraclap::solver::SolveConfig::new(h);
    let solve_error = match solve_dirichlet(&d, &|_: &[f64]| 1.0, p, &cfg) {
        Ok(sol) => Some(deep.iter().fold(0.0f64, |m, &i| {
            let exact = psi.value(i);
            m.max((sol.field.value(i) - exact).abs() / exact)
        })),
        Err(Error::TooLarge { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let pass = residual <= 0.05 && solve_error.is_none_or(|e| e <= 0.05);
    let result = json!({
        "interior_nodes": deep.len(),
        "operator_residual": residual,
        "solve_relative_error": solve_error,
        "tolerance": 0.05,
        "pass": pass,
    });
    write_report(out, "verify-ball", &json!({ "N": n, "s": s, "h": h }), &result)?;
    Ok(Outcome::new(if pass { EXIT_OK } else { EXIT_VIOLATION })
        .with("operator_residual", residual)
        .with("solve_relative_error", solve_error))
}
