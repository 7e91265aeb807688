use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::{CmdError, ExpectConstancy, ExpectRadial, ExpectSymmetry, Outcome};
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "fraclap",
    version,
    about = "Fractional Laplacian toolkit: solves, oracles, moving planes, certificates"
)]
struct Cli {
    /// Print the default configuration as TOML and exit.
    #[arg(long)]
    dump_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalization and eigenvalue-bound constants as JSON.
    Constants {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        s: f64,
    },
    /// Exact value of a closed-form solution or barrier at a point.
    Oracle {
        #[arg(long, default_value = "ball")]
        shape: String,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Dirichlet or semilinear solve; writes the nodal field as CSV.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fractional normal derivative along the boundary and its constancy.
    BoundaryDeriv {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum)]
        expect: Option<ExpectConstancy>,
    },
    /// Critical planes and symmetry verdicts of the solved field.
    MovingPlane {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        directions: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        expect: Option<ExpectSymmetry>,
    },
    /// Maximum-principle certificates, one JSON file each.
    Certify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "certs")]
        out: PathBuf,
    },
    /// Radial symmetry and monotonicity of the solved field by halfspace comparison.
    RadialTest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        expect: Option<ExpectRadial>,
    },
    /// Unit-ball torsion check of the operator and the solver.
    VerifyBall {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constants { .. } => "constants",
            Command::Oracle { .. } => "oracle",
            Command::Solve { .. } => "solve",
            Command::BoundaryDeriv { .. } => "boundary-deriv",
            Command::MovingPlane { .. } => "moving-plane",
            Command::Certify { .. } => "certify",
            Command::RadialTest { .. } => "radial-test",
            Command::VerifyBall { .. } => "verify-ball",
        }
    }
}

fn load(path: &Path) -> Result<RunConfig, CmdError> {
    RunConfig::load(path).map_err(CmdError::parse)
}

fn run(cmd: &Command) -> Result<Outcome, CmdError> {
    match cmd {
        Command::Constants { n, s } => commands::constants(*n, *s),
        Command::Oracle { shape, n, s, radius, at, alpha } => commands::oracle(shape, *n, *s, *radius, at, *alpha),
        Command::Solve { config, out, report } => commands::solve(&load(config)?, out.as_deref(), report.as_deref()),
        Command::BoundaryDeriv { config, samples, out, report, expect } => {
            commands::boundary_deriv(&load(config)?, *samples, out.as_deref(), report.as_deref(), *expect)
        }
        Command::MovingPlane { config, directions, out, expect } => {
            commands::moving_plane(&load(config)?, *directions, out.as_deref(), *expect)
        }
        Command::Certify { suite, config, out } => {
            let cfg = match config {
                Some(c) => load(c)?,
                None => RunConfig::default(),
            };
            commands::certify(&cfg, suite, out)
        }
        Command::RadialTest { config, out, expect } => commands::radial_test(&load(config)?, out.as_deref(), *expect),
        Command::VerifyBall { n, s, h, out } => commands::verify_ball(*n, *s, *h, out.as_deref()),
    }
}

fn limit_threads() {
    if let Some(n) = std::env::var("FRACLAP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { commands::EXIT_PARSE } else { 0 };
            return ExitCode::from(code);
        }
    };
    if cli.dump_defaults {
        print!("{}", RunConfig::default().to_toml());
        return ExitCode::SUCCESS;
    }
    let Some(cmd) = cli.command else {
        eprintln!("error: no subcommand given (see --help)");
        return ExitCode::from(commands::EXIT_PARSE);
    };
    limit_threads();

    let (code, mut summary) = match run(&cmd) {
        Ok(o) => (o.exit, o.summary),
        Err(e) => {
            eprintln!("error: {}", e.message);
            let mut m = serde_json::Map::new();
            m.insert("error".into(), e.message.clone().into());
            (e.code, m)
        }
    };
    let status = match code {
        commands::EXIT_OK => "ok",
        commands::EXIT_PARSE => "parse-error",
        commands::EXIT_PRECONDITION => "precondition",
        commands::EXIT_VIOLATION => "violation",
        _ => "inconclusive",
    };
    summary.insert("command".into(), cmd.name().into());
    summary.insert("status".into(), status.into());
    summary.insert("exit".into(), code.into());
    println!("{}", output::to_json_line(&summary));
    ExitCode::from(code)
}
