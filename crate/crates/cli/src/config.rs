//! Run configuration: one TOML file, flat tables, unknown keys rejected.

use std::path::Path;

use fraclap::operator::QuadratureScheme;
use fraclap::solver::{Nonlinear, SolveConfig};
use fraclap::{Domain, FracParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for randomized sample placement and constructions.
    pub seed: u64,
    pub params: ParamsConfig,
    pub domain: Domain,
    pub rhs: Rhs,
    pub grid: GridConfig,
    pub quadrature: QuadratureScheme,
    pub tolerances: Tolerances,
    pub nonlinear: NonlinearConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            params: ParamsConfig::default(),
            domain: Domain::ball(vec![0.0, 0.0], 1.0).expect("unit disc"),
            rhs: Rhs::default(),
            grid: GridConfig::default(),
            quadrature: QuadratureScheme::default(),
            tolerances: Tolerances::default(),
            nonlinear: NonlinearConfig::default(),
            analysis: AnalysisConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { n: 2, s: 0.5 }
    }
}

/// Right-hand side `f(u)`, restricted to a whitelist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Rhs {
    /// `f = value`
    Constant { value: f64 },
    /// `f(u) = value + slope u`
    Affine { value: f64, slope: f64 },
    /// `f(u) = coefficient (u_+)^exponent`, `exponent >= 1`
    Power { coefficient: f64, exponent: f64 },
}

impl Default for Rhs {
    fn default() -> Self {
        Rhs::Constant { value: 1.0 }
    }
}

impl Rhs {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Rhs::Constant { value } => value,
            Rhs::Affine { value, slope } => value + slope * u,
            Rhs::Power { coefficient, exponent } => coefficient * u.max(0.0).powf(exponent),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Rhs::Constant { .. })
    }

    /// Lipschitz constant of `f` on `[-m, m]`.
    pub fn lipschitz(&self, m: f64) -> f64 {
        match *self {
            Rhs::Constant { .. } => 0.0,
            Rhs::Affine { slope, .. } => slope.abs(),
            Rhs::Power { coefficient, exponent } => coefficient.abs() * exponent * m.max(0.0).powf(exponent - 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { h: 1.0 / 16.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub solver: f64,
    /// Relative spread below which the fractional normal derivative counts
    /// as constant.
    pub constancy: f64,
    pub node_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { solver: 1e-10, constancy: fraclap::boundary::DEFAULT_CONSTANCY_TOLERANCE, node_cap: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearConfig {
    pub damping: f64,
    pub max_iterations: usize,
}

impl Default for NonlinearConfig {
    fn default() -> Self {
        Self { damping: 0.5, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Boundary points for the fractional normal derivative.
    pub samples: usize,
    /// Number of moving-plane directions (axes and diagonals first).
    pub directions: usize,
    /// Plane offsets for the radial test; spread over the bounding box when empty.
    pub offsets: Vec<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { samples: 16, directions: 8, offsets: Vec::new() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub report: Option<String>,
    pub data: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.params().map_err(|e| e.to_string())?;
        if cfg.domain.dim() != cfg.params.n {
            return Err(format!("domain dimension {} does not match N = {}", cfg.domain.dim(), cfg.params.n));
        }
        cfg.solve_config().validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn params(&self) -> fraclap::Result<FracParams> {
        FracParams::new(self.params.n, self.params.s)
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            h: self.grid.h,
            quad: self.quadrature,
            tolerance: self.tolerances.solver,
            nonlinear: Nonlinear::FixedPoint {
                damping: self.nonlinear.damping,
                max_iterations: self.nonlinear.max_iterations,
            },
            node_cap: self.tolerances.node_cap,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
