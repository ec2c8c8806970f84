//! `lamegap`: rate tables, gap quadrature, factor systems, gradient expansions and
//! oracle verification from one configuration file.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 configuration error, 2 case not covered, 3 numerical failure, 4 acceptance failure.
Every run writes <subcommand>.csv (first line `# lamegap <table> csv schema 1`), the resolved
<subcommand>.config.toml and <subcommand>.manifest.json into the output directory
(--out, execution.out, $LAMEGAP_OUT, else ./lamegap-out).";

#[derive(Parser, Debug)]
#[command(name = "lamegap", version, about = "Thin-gap gradient asymptotics for the Lamé system", after_help = AFTER_HELP)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// TOML run configuration (blocks: geometry, material, boundary, execution).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Single evaluation gap; replaces execution.eps_list.
    #[arg(long, global = true, conflicts_with = "eps_list")]
    eps: Option<f64>,
    /// Comma-separated evaluation gaps; replaces execution.eps_list.
    #[arg(long, global = true, value_delimiter = ',', value_name = "EPS,...")]
    eps_list: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Relative quadrature tolerance (execution.rel_tol).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (execution.threads; 0 = automatic).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override any config key, e.g. --set geometry.m=6 --set material.lambda=2.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Blow-up rate certificates for the configured case.
    #[command(after_help = "CSV columns: case, side, exponent, log_power, prefactor_expr, eps, value.\n\
        `value` is prefactor * rate with missing limit factors set to 1 and universal constants 1.")]
    Rates(RatesArgs),
    /// Thin-gap integrals over B'_R.
    #[command(after_help = "CSV columns: eps, value, error_estimate, n_evals.")]
    Quad(QuadArgs),
    /// Energy matrix a, functionals Q and free constants X.
    #[command(after_help = "CSV columns: eps, provider, quantity, i, j, value.\n\
        quantity is one of a, Q, X, lambda_min, det_F, det_D, cramer_agreement, K; unused indices are 0;\n\
        eps = 0 marks extrapolated limit data. factors.json holds the matrices for reuse with --provider file.")]
    Factors(FactorsArgs),
    /// Asymptotic gradient at gap points.
    #[command(after_help = "CSV columns: eps, x1..xd, g11..gdd (row-major d u_i/d x_j), uncertainty.")]
    Expand(ExpandArgs),
    /// Upper and lower bound certificates evaluated with limit data.
    #[command(after_help = "CSV columns: theorem, case, side, exponent, log_power, prefactor_expr, eps, value, resolved, notes.")]
    Bounds(BoundsArgs),
    /// Acceptance criteria against closed forms and the finite-element oracle.
    #[command(after_help = "CSV columns: id, name, passed, detail.\n\
        --dump writes mesh_<i>.txt per oracle gap: `nodes N` then `index x y tag`, `triangles M` then\n\
        `index n0 n1 n2`, then `field <name>` blocks of `index u_x u_y` (u0, u1.., and the total u).")]
    Verify(VerifyArgs),
    /// Finite-element sweep over the gap list with extrapolated limits.
    #[command(after_help = "CSV columns (sweep.csv): eps, nodes, triangles, a11, a22, a33, a12, a13, a23, Q1, Q2, Q3,\n\
        C1, C2, C3, flux_residual, lambda_min, grad_midgap.\n\
        CSV columns (sweep_starred.csv): quantity, value, exponent, residual.\n\
        --dump writes mesh_<i>.txt in the format described under `verify --help`.")]
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TheoremArg {
    Segment,
    Cylinder,
    Field,
    Flat,
}

#[derive(Args, Debug, Serialize)]
pub struct TheoremSel {
    /// Which estimate to tabulate.
    #[arg(long, value_enum, default_value = "segment")]
    pub theorem: TheoremArg,
    /// Distance from the axis for --theorem field.
    #[arg(long, default_value_t = 0.0)]
    pub xnorm: f64,
    /// Contact-set measure for --theorem flat.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct RatesArgs {
    #[command(flatten)]
    pub sel: TheoremSel,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum QuadKind {
    /// int |x'|^k / delta.
    Moment,
    /// Leading diagonal energy of basis field alpha.
    Energy,
    /// Leading boundary functional of basis field alpha.
    Q,
}

#[derive(Args, Debug, Serialize)]
pub struct QuadArgs {
    #[arg(long, value_enum, default_value = "moment")]
    pub kind: QuadKind,
    /// Moment power.
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Basis index for energy and q.
    #[arg(long, default_value_t = 1)]
    pub alpha: usize,
    /// Integration radius; defaults to geometry.R.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Provider {
    Oracle,
    Leading,
    File,
}

#[derive(Args, Debug, Serialize)]
pub struct FactorsArgs {
    #[arg(long, value_enum, default_value = "leading")]
    pub provider: Provider,
    /// Factor file (JSON) for --provider file.
    #[arg(long, value_name = "PATH")]
    pub factors: Option<PathBuf>,
    /// Also extrapolate limit data and K* (oracle provider).
    #[arg(long)]
    pub starred: bool,
    /// Also solve by Cramer's rule and report the agreement.
    #[arg(long)]
    pub cramer: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct StarredSource {
    /// Limit factor data (JSON from `factors`, the entry with eps = null); K* from execution.k_star.
    #[arg(long, value_name = "PATH", conflicts_with = "oracle")]
    pub factors: Option<PathBuf>,
    /// Extrapolate limit data from an oracle sweep over execution.sweep_eps (disks, d = 2).
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub source: StarredSource,
    /// Point x1,..,xd (repeatable); the default is the mid-gap point on the axis.
    #[arg(long = "point", value_name = "X1,..,XD", allow_hyphen_values = true)]
    pub points: Vec<String>,
    /// Grid of NX abscissae on [-R, R] (first coordinate) times NF gap fractions.
    #[arg(long, value_name = "NX,NF")]
    pub grid: Option<String>,
    /// N random gap points drawn with execution.seed.
    #[arg(long, value_name = "N")]
    pub sample: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub sel: TheoremSel,
    #[command(flatten)]
    pub source: StarredSource,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Criteria 1 to 5.
    Quick,
    /// Criteria 1 to 11.
    Full,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "full")]
    pub suite: Suite,
    /// Explicit criterion ids, overriding --suite.
    #[arg(long, value_delimiter = ',', value_name = "ID,...")]
    pub criteria: Option<Vec<u8>>,
    /// Write mesh and solution dumps of the oracle sweep.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    /// Write mesh and solution dumps.
    #[arg(long)]
    pub dump: bool,
}

fn resolve_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    for s in &common.set {
        cfg.set(s)?;
    }
    if let Some(e) = common.eps {
        cfg.execution.eps_list = Some(vec![e]);
    }
    if let Some(l) = &common.eps_list {
        cfg.execution.eps_list = Some(l.clone());
    }
    if let Some(t) = common.tol {
        cfg.execution.rel_tol = t;
    }
    if let Some(t) = common.threads {
        cfg.execution.threads = t;
    }
    if let Some(o) = &common.out {
        cfg.execution.out = Some(o.to_string_lossy().into_owned());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(()),
                _ => Err(CliError::Config { key: "command line".into(), msg: "invalid arguments".into() }),
            };
        }
    };
    let cfg = resolve_config(&cli.common)?;
    if cfg.execution.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.execution.threads)
            .build_global()
            .map_err(|e| CliError::Config { key: "execution.threads".into(), msg: e.to_string() })?;
    }
    let arguments = serde_json::to_value(&cli.command).map_err(|e| CliError::Io(e.to_string()))?;
    commands::dispatch(&cfg, &cli.command, &arguments, &argv[1..])
}

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let code = match run(argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lamegap: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
