//! `quasispec` command-line front end: least-squares ODE solves, pencil
//! eigenproblems, and pseudospectrum grids driven by JSON problem files or
//! built-in example experiments.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use quasispec::funcore::ChebFun;
use quasispec::lssolvers::problemfile::{parse_bc_mode, ProblemFile};
use quasispec::lssolvers::{
    apply_operator, lseig, lseig_bc, lsode, BasisGroup, BcMode, EigResult, OperatorExpr,
};
use quasispec::pseudospectra;
use quasispec::quasimatrix::Quasimatrix;

mod examples;

/// Construction tolerance: `QUASISPEC_DEFAULT_TOL` env override, else 1e-13.
fn construction_tol() -> f64 {
    std::env::var("QUASISPEC_DEFAULT_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0 && *t <= 1.0)
        .unwrap_or(1e-13)
}

/// 17-significant-digit decimal, stable across runs.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2: the input could not be parsed.
    Parse(String),
    /// Exit code 3: the solver failed.
    Solver(String),
    /// Exit code 4: the run succeeded but no eigenpair passed the tol filter.
    NoPairs,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Solver(_) => 3,
            CliError::NoPairs => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
            CliError::NoPairs => write!(f, "no eigenpair passed the residual tolerance"),
        }
    }
}

impl From<quasispec::Error> for CliError {
    fn from(e: quasispec::Error) -> Self {
        match e {
            quasispec::Error::ProblemFile(m) => CliError::Parse(m),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Solver(format!("i/o: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "quasispec",
    version,
    about = "Continuous least-squares ODE and eigenvalue solvers over quasimatrices"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a boundary-value problem L u = f from a JSON problem file.
    #[command(name = "solve-ode")]
    SolveOde(SolveOdeArgs),
    /// Solve a generalized eigenvalue problem L_A u = lambda L_B u.
    Eig(EigArgs),
    /// Evaluate the pseudospectrum function of a pencil on a grid.
    Pseudospectra(PseudoArgs),
    /// Run a built-in example experiment with its reference parameters.
    Example(ExampleArgs),
}

#[derive(Args)]
struct CommonOverrides {
    /// Override the basis size from the file.
    #[arg(long)]
    n: Option<usize>,
    /// Override the residual filter tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Boundary-condition handling: "leastsquares" or "exact".
    #[arg(long, value_name = "MODE")]
    bc_mode: Option<String>,
    /// Weight on the function rows of the objective.
    #[arg(long)]
    alpha: Option<f64>,
    /// Weight on the boundary-condition rows.
    #[arg(long)]
    beta: Option<f64>,
    /// Output CSV path (defaults to stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveOdeArgs {
    /// JSON problem file.
    file: PathBuf,
    #[command(flatten)]
    common: CommonOverrides,
    /// Number of equispaced sample points in the solution CSV.
    #[arg(long, default_value_t = 201)]
    samples: usize,
}

#[derive(Args)]
struct EigArgs {
    /// JSON problem file.
    file: PathBuf,
    #[command(flatten)]
    common: CommonOverrides,
    /// Divide A by nu = ||A||_F / ||B||_F before solving, rescale after.
    #[arg(long)]
    balance: bool,
}

#[derive(Args)]
struct PseudoArgs {
    /// JSON problem file defining the pencil (omit to use --builtin).
    file: Option<PathBuf>,
    /// Built-in pencil: "cheb-legendre" (Chebyshev vs Legendre columns).
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long, default_value_t = 0.8)]
    re_min: f64,
    #[arg(long, default_value_t = 2.2)]
    re_max: f64,
    #[arg(long, default_value_t = -0.5)]
    im_min: f64,
    #[arg(long, default_value_t = 0.5)]
    im_max: f64,
    #[arg(long, default_value_t = 81)]
    nx: usize,
    #[arg(long, default_value_t = 41)]
    ny: usize,
    /// Output CSV path (defaults to stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExampleArgs {
    /// One of: cheb-legendre, pilot-krylov, airy, schrodinger,
    /// sturm-liouville, orr-sommerfeld, lambda-bc, advdiff-integral.
    name: String,
    /// Override the reference basis size.
    #[arg(long)]
    n: Option<usize>,
    /// Override the residual filter tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Formulation for orr-sommerfeld: direct, recombined, or integral.
    #[arg(long)]
    method: Option<String>,
    /// Output CSV path (defaults to stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::SolveOde(args) => cmd_solve_ode(args),
        Cmd::Eig(args) => cmd_eig(args),
        Cmd::Pseudospectra(args) => cmd_pseudospectra(args),
        Cmd::Example(args) => examples::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quasispec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_problem(path: &PathBuf) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(ProblemFile::from_json(&text)?)
}

fn apply_overrides(pf: &mut ProblemFile, common: &CommonOverrides) -> Result<(), CliError> {
    if let Some(n) = common.n {
        pf.basis.n = n;
    }
    let cfg = pf.config.get_or_insert_with(|| quasispec::lssolvers::problemfile::ConfigSpec {
        tol: None,
        alpha: None,
        beta: None,
        balance: None,
        bc_mode: None,
    });
    if let Some(t) = common.tol {
        cfg.tol = Some(t);
    }
    if let Some(a) = common.alpha {
        cfg.alpha = Some(a);
    }
    if let Some(b) = common.beta {
        cfg.beta = Some(b);
    }
    if let Some(m) = &common.bc_mode {
        parse_bc_mode(m)?;
        cfg.bc_mode = Some(m.clone());
    }
    Ok(())
}

/// Write `text` to the path, or to stdout when no path is given.
pub fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => {
            std::fs::write(path, text)?;
            println!("output: {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn eig_csv(results: &[EigResult]) -> String {
    let mut out = String::from("re,im,relres\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{}\n",
            f17(r.lambda.re),
            f17(r.lambda.im),
            f17(r.relres)
        ));
    }
    out
}

/// Deterministic order for reported eigenpairs: ascending real part, then
/// ascending imaginary part.
pub fn sort_pairs(results: &mut [EigResult]) {
    results.sort_by(|p, q| {
        (p.lambda.re, p.lambda.im)
            .partial_cmp(&(q.lambda.re, q.lambda.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

pub fn solution_csv(u: &ChebFun, samples: usize) -> Result<String, CliError> {
    let dom = u.domain();
    let m = samples.max(2);
    let mut out = String::from("x,re,im\n");
    for k in 0..m {
        let x = dom.a + (dom.b - dom.a) * k as f64 / (m - 1) as f64;
        let v = u.eval(x).map_err(|e| CliError::Solver(e.to_string()))?;
        out.push_str(&format!("{},{},{}\n", f17(x), f17(v.re), f17(v.im)));
    }
    Ok(out)
}

fn cmd_solve_ode(args: SolveOdeArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let tol = construction_tol();
    let mut pf = load_problem(&args.file)?;
    apply_overrides(&mut pf, &args.common)?;
    let bcs = pf.boundary_conditions()?;
    if bcs.iter().any(|bc| !bc.lambda_terms.is_empty()) {
        return Err(CliError::Parse(
            "solve-ode boundary conditions must not have lambda_terms".into(),
        ));
    }
    let op = pf.operator_a(tol)?;
    let f = pf.rhs_function(tol)?;
    let basis = pf.basis(tol)?;
    let dom = basis.domain();
    let group = BasisGroup::new(basis, op.clone(), OperatorExpr::identity(dom))
        .map_err(CliError::from)?;
    let config = pf.solver_config(tol)?;
    let (u, residual) = lsode(&op, &f, &bcs, &[group], &config)?;
    println!("problem: {}", args.file.display());
    println!(
        "config: tol={} alpha={} beta={} bc_mode={:?}",
        config.tol, config.alpha, config.beta, config.bc_mode
    );
    println!("residual: {}", f17(residual));
    println!("time_ms: {}", start.elapsed().as_millis());
    emit(&args.common.output, &solution_csv(&u, args.samples)?)
}

fn cmd_eig(args: EigArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let tol = construction_tol();
    let mut pf = load_problem(&args.file)?;
    apply_overrides(&mut pf, &args.common)?;
    let mut problem = pf.eig_problem(tol)?;
    if args.balance {
        problem.config.balance = true;
    }
    let mut results = match problem.config.bc_mode {
        BcMode::Exact => lseig_bc(&problem)?,
        BcMode::LeastSquares => lseig(&problem)?,
    };
    if results.is_empty() {
        return Err(CliError::NoPairs);
    }
    sort_pairs(&mut results);
    println!("problem: {}", args.file.display());
    println!(
        "config: tol={} alpha={} beta={} balance={} bc_mode={:?}",
        problem.config.tol,
        problem.config.alpha,
        problem.config.beta,
        problem.config.balance,
        problem.config.bc_mode
    );
    println!("pairs: {}", results.len());
    println!("time_ms: {}", start.elapsed().as_millis());
    emit(&args.common.output, &eig_csv(&results))
}

fn cmd_pseudospectra(args: PseudoArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let tol = construction_tol();
    let (a, b, label): (Quasimatrix, Quasimatrix, String) = match (&args.file, &args.builtin) {
        (Some(path), None) => {
            let pf = load_problem(path)?;
            let basis = pf.basis(tol)?;
            let a = apply_operator(&pf.operator_a(tol)?, &basis)?;
            let b = apply_operator(&pf.operator_b(tol)?, &basis)?;
            (a, b, path.display().to_string())
        }
        (None, Some(name)) => {
            let (a, b) = examples::builtin_pencil(name)?;
            (a, b, format!("builtin:{name}"))
        }
        _ => {
            return Err(CliError::Parse(
                "pseudospectra needs exactly one of a problem file or --builtin".into(),
            ))
        }
    };
    if args.nx < 2 || args.ny < 2 {
        return Err(CliError::Parse("grid needs nx >= 2 and ny >= 2".into()));
    }
    let grid = pseudospectra::grid_eval(
        &a,
        &b,
        (args.re_min, args.re_max),
        (args.im_min, args.im_max),
        args.nx,
        args.ny,
    )?;
    let mut buf = Vec::new();
    grid.write_csv(&mut buf)?;
    println!("problem: {label}");
    println!(
        "grid: [{}, {}] x [{}, {}] at {}x{}",
        args.re_min, args.re_max, args.im_min, args.im_max, args.nx, args.ny
    );
    println!("time_ms: {}", start.elapsed().as_millis());
    emit(
        &args.output,
        std::str::from_utf8(&buf).expect("csv is ascii"),
    )
}
