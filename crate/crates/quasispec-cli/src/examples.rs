//! Built-in example experiments with their reference parameters.

use std::time::Instant;

use ndarray::Array2;
use quasispec::blockop::BlockQuasimatrix;
use quasispec::funcore::{ChebFun, Domain};
use quasispec::lssolvers::problems::{
    airy_krylov_basis, airy_problem, chebyshev_basis, continuity_bcs, integral_reform_advdiff,
    lambda_bc_problem, orr_sommerfeld_problems, piecewise_chebyshev_basis, pilot_operator,
    pilot_piecewise_groups, schrodinger_problem, sturm_liouville,
};
use quasispec::lssolvers::{
    krylov_subspace, lseig, lseig_bc, lsode, BasisGroup, BoundaryFunctional, OperatorExpr,
    SolverConfig,
};
use quasispec::quasimatrix::Quasimatrix;
use quasispec::rectgep;

use crate::{eig_csv, emit, f17, sort_pairs, CliError, ExampleArgs};

const NAMES: &[&str] = &[
    "cheb-legendre",
    "pilot-krylov",
    "airy",
    "schrodinger",
    "sturm-liouville",
    "orr-sommerfeld",
    "lambda-bc",
    "advdiff-integral",
];

pub fn run(args: ExampleArgs) -> Result<(), CliError> {
    let start = Instant::now();
    println!("problem: example:{}", args.name);
    let csv = match args.name.as_str() {
        "cheb-legendre" => cheb_legendre(),
        "pilot-krylov" => pilot_krylov(args.n),
        "airy" => airy(args.n, args.tol),
        "schrodinger" => schrodinger(args.n, args.tol),
        "sturm-liouville" => eig_example(sturm_liouville(
            args.n.unwrap_or(100),
            args.tol.unwrap_or(1e-10),
        )?),
        "orr-sommerfeld" => orr_sommerfeld(args.n, args.tol, args.method.as_deref()),
        "lambda-bc" => lambda_bc(args.n, args.tol),
        "advdiff-integral" => advdiff(args.n, args.tol),
        other => {
            return Err(CliError::Parse(format!(
                "unknown example {other:?}; available: {}",
                NAMES.join(", ")
            )))
        }
    }?;
    println!("time_ms: {}", start.elapsed().as_millis());
    emit(&args.output, &csv)
}

/// The pencil of Chebyshev against Legendre columns used throughout for
/// spectrum inspection.
pub fn builtin_pencil(name: &str) -> Result<(Quasimatrix, Quasimatrix), CliError> {
    match name {
        "cheb-legendre" => {
            let d = Domain::new(-1.0, 1.0)?;
            let a = Quasimatrix::new((0..6).map(|k| ChebFun::chebyshev_t(k, d)).collect())?;
            let b = Quasimatrix::new((0..6).map(|k| ChebFun::legendre_p(k, d)).collect())?;
            Ok((a, b))
        }
        other => Err(CliError::Parse(format!(
            "unknown builtin pencil {other:?}; available: cheb-legendre"
        ))),
    }
}

fn eig_example(problem: quasispec::lssolvers::EigProblem) -> Result<String, CliError> {
    let mut results = lseig_bc(&problem)?;
    if results.is_empty() {
        return Err(CliError::NoPairs);
    }
    sort_pairs(&mut results);
    println!("pairs: {}", results.len());
    Ok(eig_csv(&results))
}

/// Total least-squares eigenvalues of the Chebyshev/Legendre pencil: the
/// ratios of leading coefficients {1, 1, 4/3, 8/5, 64/35, 128/63}.
fn cheb_legendre() -> Result<String, CliError> {
    let (a, b) = builtin_pencil("cheb-legendre")?;
    let n = a.ncols();
    let ba = BlockQuasimatrix::new(a, Array2::zeros((0, n)))?;
    let bb = BlockQuasimatrix::new(b, Array2::zeros((0, n)))?;
    let out = rectgep::itomurota_block(&ba, &bb)?;
    let mut lams = out.lambdas.clone();
    lams.sort_by(|p, q| (p.re, p.im).partial_cmp(&(q.re, q.im)).unwrap());
    println!("perturbation_norm: {}", f17(out.pert_norm));
    let mut csv = String::from("re,im\n");
    for l in &lams {
        csv.push_str(&format!("{},{}\n", f17(l.re), f17(l.im)));
    }
    Ok(csv)
}

/// Krylov-accelerated solve: build span{L1^{-1} f, L1^{-2} f, ...} from
/// L1 u = u'' + |x| u', then solve the nearby L2 u = L1 u + u = e^x in that
/// basis; the residual column drops far below the same-size polynomial basis.
fn pilot_krylov(n: Option<usize>) -> Result<String, CliError> {
    let m_max = n.unwrap_or(15);
    let dom = Domain::new(-1.0, 1.0)?;
    let l1 = pilot_operator(false)?;
    let l2 = pilot_operator(true)?;
    let f = ChebFun::from_fn(f64::exp, dom, 1e-14)?;

    let inner_groups = pilot_piecewise_groups(40)?;
    let mut inner_bcs = vec![
        BoundaryFunctional::dirichlet(-1.0),
        BoundaryFunctional::dirichlet(1.0),
    ];
    inner_bcs.extend(continuity_bcs(2));
    let inner_config = SolverConfig { beta: 1e4, ..SolverConfig::default() };
    let inner =
        |g: &ChebFun| lsode(&l1, g, &inner_bcs, &inner_groups, &inner_config).map(|(u, _)| u);

    let krylov = krylov_subspace(inner, &f, m_max, true)?;
    let outer_bcs = [
        BoundaryFunctional::dirichlet(-1.0),
        BoundaryFunctional::dirichlet(1.0),
    ];
    let outer_config = SolverConfig::default();
    let mut csv = String::from("m,res_krylov,res_poly\n");
    for m in 3..=krylov.ncols() {
        let sub = Quasimatrix::new(krylov.cols()[0..m].to_vec())?;
        let (_, res_k) = lsode(&l2, &f, &outer_bcs, &[plain_group(sub)?], &outer_config)?;
        let (_, res_p) = lsode(
            &l2,
            &f,
            &outer_bcs,
            &[plain_group(chebyshev_basis(dom, m)?)?],
            &outer_config,
        )?;
        csv.push_str(&format!("{m},{},{}\n", f17(res_k), f17(res_p)));
    }
    Ok(csv)
}

fn plain_group(q: Quasimatrix) -> Result<BasisGroup, CliError> {
    let dom = q.domain();
    Ok(BasisGroup::new(
        q,
        OperatorExpr::identity(dom),
        OperatorExpr::identity(dom),
    )?)
}

/// Singularly perturbed Airy-type problem at eps = 1e-8 over a Krylov basis
/// from the shifted inverse; reports the best eigenpair residual per basis
/// dimension.
fn airy(n: Option<usize>, tol: Option<f64>) -> Result<String, CliError> {
    let epsilon = 1e-8;
    let m_max = n.unwrap_or(20);
    let filter_tol = tol.unwrap_or(1e-2);
    let basis = airy_krylov_basis(epsilon, m_max, 1e-10)?;
    let mut csv = String::from("m,lambda_re,lambda_im,relres\n");
    for m in 2..=basis.ncols() {
        let sub = Quasimatrix::new(basis.cols()[0..m].to_vec())?;
        let problem = airy_problem(epsilon, sub, filter_tol)?;
        let results = lseig(&problem)?;
        let best = results
            .iter()
            .min_by(|x, y| x.relres.partial_cmp(&y.relres).unwrap());
        match best {
            Some(b) => csv.push_str(&format!(
                "{m},{},{},{}\n",
                f17(b.lambda.re),
                f17(b.lambda.im),
                f17(b.relres)
            )),
            None => csv.push_str(&format!("{m},nan,nan,nan\n")),
        }
    }
    Ok(csv)
}

/// Schrodinger well -h^2 u'' + |x| u = lambda u at h = 0.1 on [-3, 3]:
/// global polynomial basis against a piecewise basis split at the kink,
/// same total dimension.
fn schrodinger(n: Option<usize>, tol: Option<f64>) -> Result<String, CliError> {
    let h = 0.1;
    let n_total = n.unwrap_or(40);
    let filter_tol = tol.unwrap_or(0.1);
    let dom = Domain::new(-3.0, 3.0)?;

    let global = chebyshev_basis(dom, n_total)?;
    let m = n_total / 2;
    let left = piecewise_chebyshev_basis(dom, Domain::new(-3.0, 0.0)?, m)?;
    let right = piecewise_chebyshev_basis(dom, Domain::new(0.0, 3.0)?, m)?;
    let piecewise = left.hcat(&right)?;

    let mut csv = String::from("basis,lambda_re,lambda_im,relres\n");
    for (label, basis, extra) in [("global", global, false), ("piecewise", piecewise, true)] {
        let problem = schrodinger_problem(h, basis, extra, filter_tol)?;
        let results = lseig_bc(&problem)?;
        let best = results
            .iter()
            .filter(|r| r.lambda.im.abs() < 1e-6 && r.lambda.re > 0.05)
            .min_by(|x, y| x.lambda.re.partial_cmp(&y.lambda.re).unwrap())
            .ok_or(CliError::NoPairs)?;
        csv.push_str(&format!(
            "{label},{},{},{}\n",
            f17(best.lambda.re),
            f17(best.lambda.im),
            f17(best.relres)
        ));
    }
    Ok(csv)
}

/// Orr-Sommerfeld at R = 5772 in one of three formulations.
fn orr_sommerfeld(
    n: Option<usize>,
    tol: Option<f64>,
    method: Option<&str>,
) -> Result<String, CliError> {
    let n = n.unwrap_or(100);
    let tol = tol.unwrap_or(1e-6);
    let problems = orr_sommerfeld_problems(5772.0, n, tol)?;
    let method = method.unwrap_or("integral");
    let mut results = match method {
        "direct" => lseig_bc(&problems.direct)?,
        "recombined" => lseig(&problems.recombined)?,
        "integral" => lseig_bc(&problems.integral)?,
        other => {
            return Err(CliError::Parse(format!(
                "unknown method {other:?}; expected direct, recombined, or integral"
            )))
        }
    };
    if results.is_empty() {
        return Err(CliError::NoPairs);
    }
    // Rightmost (largest real part) first for this report.
    results.sort_by(|p, q| (q.lambda.re, q.lambda.im).partial_cmp(&(p.lambda.re, p.lambda.im)).unwrap());
    println!("method: {method}");
    println!(
        "rightmost: {} + {}i",
        f17(results[0].lambda.re),
        f17(results[0].lambda.im)
    );
    Ok(eig_csv(&results))
}

/// Eigenvalue-dependent boundary conditions (-u(0) = (lambda + d) u'(0),
/// u(1) = lambda u'(1), d = -4 pi^2); three smallest real eigenvalues.
fn lambda_bc(n: Option<usize>, tol: Option<f64>) -> Result<String, CliError> {
    let problem = lambda_bc_problem(n.unwrap_or(100), tol.unwrap_or(1e-9))?;
    let results = lseig(&problem)?;
    let mut real: Vec<&quasispec::lssolvers::EigResult> = results
        .iter()
        .filter(|r| r.lambda.im.abs() < 1e-6 * r.lambda.norm().max(1.0) && r.lambda.re > 1.0)
        .collect();
    real.sort_by(|p, q| p.lambda.re.partial_cmp(&q.lambda.re).unwrap());
    if real.is_empty() {
        return Err(CliError::NoPairs);
    }
    let mut csv = String::from("re,im,relres\n");
    for r in real.iter().take(3) {
        csv.push_str(&format!(
            "{},{},{}\n",
            f17(r.lambda.re),
            f17(r.lambda.im),
            f17(r.relres)
        ));
    }
    Ok(csv)
}

/// Integral reformulation of u'' + u' = lambda u with Dirichlet conditions.
fn advdiff(n: Option<usize>, tol: Option<f64>) -> Result<String, CliError> {
    let dom = Domain::new(-1.0, 1.0)?;
    let mut problem = integral_reform_advdiff(dom, n.unwrap_or(48))?;
    problem.config.tol = tol.unwrap_or(1e-8);
    eig_example(problem)
}
