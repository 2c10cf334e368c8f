//! Ready-made problem builders: the classical benchmark eigenproblems
//! (Sturm-Liouville, Airy, Schroedinger, Orr-Sommerfeld, lambda-dependent
//! boundary conditions) and the integral-reformulation construction.

use super::{
    Action, BasisGroup, BcTerm, BoundaryFunctional, EigProblem, OperatorExpr, SolverConfig,
};
use crate::error::Result;
use crate::funcore::{ChebFun, Domain, Side};
use crate::quasimatrix::Quasimatrix;
use num_complex::Complex64;

type C = Complex64;

fn one() -> C {
    C::new(1.0, 0.0)
}

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// The first `n` Chebyshev polynomials on `dom`.
pub fn chebyshev_basis(dom: Domain, n: usize) -> Result<Quasimatrix> {
    Quasimatrix::new((0..n).map(|k| ChebFun::chebyshev_t(k, dom)).collect())
}

/// Basis of `T_k` supported on a single subinterval of `dom` (zero on the
/// rest), for piecewise formulations.
pub fn piecewise_chebyshev_basis(
    dom: Domain,
    sub: Domain,
    n: usize,
) -> Result<Quasimatrix> {
    let mut edges = vec![dom.a];
    if sub.a > dom.a + 1e-14 * dom.length() {
        edges.push(sub.a);
    }
    if sub.b < dom.b - 1e-14 * dom.length() {
        edges.push(sub.b);
    }
    edges.push(dom.b);
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut pieces = Vec::new();
        for w in edges.windows(2) {
            let piece_dom = Domain::new(w[0], w[1])?;
            let mid = 0.5 * (w[0] + w[1]);
            let coeffs = if mid > sub.a && mid < sub.b {
                ChebFun::chebyshev_t(k, piece_dom).pieces()[0].coeffs.clone()
            } else {
                vec![C::default()]
            };
            pieces.push((piece_dom, coeffs));
        }
        cols.push(ChebFun::from_piece_coeffs(dom, pieces)?);
    }
    Quasimatrix::new(cols)
}

/// Sturm-Liouville benchmark `(e^{3x} u')' + 2 e^{3x} u = -lambda e^{3x} u`
/// on [0, 1] with Dirichlet conditions; eigenvalues `k^2 pi^2 + 1/4`.
pub fn sturm_liouville(n: usize, tol: f64) -> Result<EigProblem> {
    let dom = Domain::new(0.0, 1.0)?;
    let e3x = ChebFun::from_fn(|x| (3.0 * x).exp(), dom, 1e-13)?;
    let expr_a = OperatorExpr::new(vec![
        (e3x.clone(), Action::Derivative(2)),
        (e3x.scale(re(3.0)), Action::Derivative(1)),
        (e3x.scale(re(2.0)), Action::Identity),
    ])?;
    let expr_b = OperatorExpr::new(vec![(e3x.scale(re(-1.0)), Action::Identity)])?;
    let mut problem = EigProblem {
        groups: vec![BasisGroup::new(chebyshev_basis(dom, n)?, expr_a, expr_b)?],
        bcs: vec![
            BoundaryFunctional::dirichlet(0.0),
            BoundaryFunctional::dirichlet(1.0),
        ],
        config: SolverConfig { tol, ..SolverConfig::default() },
    };
    super::equilibrate_bcs(&mut problem)?;
    Ok(problem)
}

/// Eigenproblem `-u'' = lambda u` on [0, 1] with the affine-in-lambda
/// boundary conditions `-u(0) = (lambda + d) u'(0)` and `u(1) = lambda u'(1)`,
/// `d = -4 pi^2`.
pub fn lambda_bc_problem(n: usize, tol: f64) -> Result<EigProblem> {
    let dom = Domain::new(0.0, 1.0)?;
    let d = -4.0 * std::f64::consts::PI * std::f64::consts::PI;
    let expr_a = OperatorExpr::scalar_terms(dom, &[(re(-1.0), Action::Derivative(2))])?;
    let expr_b = OperatorExpr::identity(dom);
    // -u(0) - d u'(0) = lambda u'(0)
    let bc_left = BoundaryFunctional {
        const_terms: vec![BcTerm::new(0.0, 0, re(-1.0)), BcTerm::new(0.0, 1, re(-d))],
        lambda_terms: vec![BcTerm::new(0.0, 1, one())],
        rhs: C::default(),
    };
    // u(1) = lambda u'(1)
    let bc_right = BoundaryFunctional {
        const_terms: vec![BcTerm::new(1.0, 0, one())],
        lambda_terms: vec![BcTerm::new(1.0, 1, one())],
        rhs: C::default(),
    };
    let mut problem = EigProblem {
        groups: vec![BasisGroup::new(chebyshev_basis(dom, n)?, expr_a, expr_b)?],
        bcs: vec![bc_left, bc_right],
        config: SolverConfig { tol, ..SolverConfig::default() },
    };
    super::equilibrate_bcs(&mut problem)?;
    Ok(problem)
}

/// Airy eigenproblem `eps u'' + x u = lambda u` on [-1, 1], Dirichlet,
/// posed over an arbitrary (e.g. Krylov) basis.
pub fn airy_problem(epsilon: f64, basis: Quasimatrix, tol: f64) -> Result<EigProblem> {
    let dom = basis.domain();
    let expr_a = OperatorExpr::new(vec![
        (ChebFun::constant(re(epsilon), dom), Action::Derivative(2)),
        (ChebFun::identity_x(dom), Action::Identity),
    ])?;
    let expr_b = OperatorExpr::identity(dom);
    let mut problem = EigProblem {
        groups: vec![BasisGroup::new(basis, expr_a, expr_b)?],
        bcs: vec![
            BoundaryFunctional::dirichlet(dom.a),
            BoundaryFunctional::dirichlet(dom.b),
        ],
        config: SolverConfig { tol, ..SolverConfig::default() },
    };
    super::equilibrate_bcs(&mut problem)?;
    Ok(problem)
}

/// Inverse-iteration Krylov basis for the Airy operator, using the banded
/// Dirichlet solver for the inner solves. Starts from `u0 = x^2 - 1`.
pub fn airy_krylov_basis(epsilon: f64, m: usize, inner_tol: f64) -> Result<Quasimatrix> {
    let dom = Domain::new(-1.0, 1.0)?;
    let xfun = ChebFun::identity_x(dom);
    let u0 = ChebFun::from_coeffs(vec![re(-0.5), C::default(), re(0.5)], dom);
    super::krylov_subspace(
        |f| crate::ultra::solve_dirichlet(re(epsilon), &xfun, f, (C::default(), C::default()), inner_tol),
        &u0,
        m,
        false,
    )
}

/// Schroedinger benchmark `-h^2 u'' + |x| u = lambda u` on [-3, 3],
/// Dirichlet, over a caller-supplied basis. With a global polynomial basis
/// pass `extra_continuity = false`; with the piecewise basis (columns
/// supported on one side of 0) pass `true` to add the continuity conditions
/// on u, u', u'' at 0.
pub fn schrodinger_problem(
    h: f64,
    basis: Quasimatrix,
    extra_continuity: bool,
    tol: f64,
) -> Result<EigProblem> {
    let dom = basis.domain();
    let absx = ChebFun::from_piece_coeffs(
        dom,
        vec![
            (Domain::new(dom.a, 0.0)?, abs_piece_coeffs(dom.a, 0.0)),
            (Domain::new(0.0, dom.b)?, abs_piece_coeffs(0.0, dom.b)),
        ],
    )?;
    let expr_a = OperatorExpr::new(vec![
        (ChebFun::constant(re(-h * h), dom), Action::Derivative(2)),
        (absx, Action::Identity),
    ])?;
    let expr_b = OperatorExpr::identity(dom);
    let mut bcs = vec![
        BoundaryFunctional::dirichlet(dom.a),
        BoundaryFunctional::dirichlet(dom.b),
    ];
    if extra_continuity {
        for order in 0..3 {
            bcs.push(BoundaryFunctional {
                const_terms: vec![
                    BcTerm::sided(0.0, order, one(), Side::Left),
                    BcTerm::sided(0.0, order, re(-1.0), Side::Right),
                ],
                lambda_terms: vec![],
                rhs: C::default(),
            });
        }
    }
    let mut problem = EigProblem {
        groups: vec![BasisGroup::new(basis, expr_a, expr_b)?],
        bcs,
        config: SolverConfig { tol, ..SolverConfig::default() },
    };
    super::equilibrate_bcs(&mut problem)?;
    Ok(problem)
}

/// Chebyshev coefficients of |x| restricted to a subinterval that does not
/// straddle 0 (an affine function of the local variable).
fn abs_piece_coeffs(a: f64, b: f64) -> Vec<C> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // |x| = sign * (mid + half * t) on the piece.
    let sign = if mid + 1e-300 >= 0.0 && b > 0.0 { 1.0 } else { -1.0 };
    vec![re(sign * mid), re(sign * half)]
}

/// Integral reformulation of `u'' + u' = lambda u`, `u(a) = u(b) = 0`,
/// written in the second derivative `v = u''` with
/// `u = int int v + alpha (x - a) + beta`. Eigenvalues on [-1, 1] are
/// `-1/4 - (k pi / 2)^2`.
pub fn integral_reform_advdiff(dom: Domain, n: usize) -> Result<EigProblem> {
    let cheb = chebyshev_basis(dom, n)?;
    let expr_a1 = OperatorExpr::scalar_terms(
        dom,
        &[(one(), Action::Identity), (one(), Action::Cumsum(1))],
    )?;
    let expr_b1 = OperatorExpr::scalar_terms(dom, &[(one(), Action::Cumsum(2))])?;
    let lift1 = OperatorExpr::scalar_terms(dom, &[(one(), Action::Cumsum(2))])?;
    let g1 = BasisGroup::new(cheb, expr_a1, expr_b1)?.with_lift(lift1)?;

    let one_col = Quasimatrix::new(vec![ChebFun::constant(one(), dom)])?;
    let x_minus_a = ChebFun::identity_x(dom).sub(&ChebFun::constant(re(dom.a), dom))?;

    // alpha-column: contributes alpha to u', alpha (x - a) to u.
    let g2 = BasisGroup::new(
        one_col.clone(),
        OperatorExpr::identity(dom),
        OperatorExpr::new(vec![(x_minus_a.clone(), Action::Identity)])?,
    )?
    .with_lift(OperatorExpr::new(vec![(x_minus_a, Action::Identity)])?)?;

    // beta-column: constant shift of u; vanishes under u'' + u'.
    let g3 = BasisGroup::new(
        one_col,
        OperatorExpr::zero(dom),
        OperatorExpr::identity(dom),
    )?;

    let mut problem = EigProblem {
        groups: vec![g1, g2, g3],
        bcs: vec![
            BoundaryFunctional::dirichlet(dom.a),
            BoundaryFunctional::dirichlet(dom.b),
        ],
        config: SolverConfig::default(),
    };
    super::equilibrate_bcs(&mut problem)?;
    Ok(problem)
}

/// The three Orr-Sommerfeld formulations at Reynolds number `R` with `n`
/// Chebyshev modes: the direct differential pencil (solve with lseig_bc,
/// 4 boundary rows), the boundary-vanishing recombined basis
/// `(1+x)^2 (1-x)^2 T_i` (solve with lseig, balancing recommended), and the
/// integral reformulation in `v = u''''` (solve with lseig_bc).
pub struct OrrSommerfeldProblems {
    pub direct: EigProblem,
    pub recombined: EigProblem,
    pub integral: EigProblem,
}

fn os_exprs(r: f64, dom: Domain) -> Result<(OperatorExpr, OperatorExpr)> {
    let i = C::new(0.0, 1.0);
    // 1 - x^2 in Chebyshev coefficients: 1/2 - T_2/2.
    let one_minus_x2 = ChebFun::from_coeffs(vec![re(0.5), C::default(), re(-0.5)], dom);
    // L_A u = (1/R)(u'''' - 2u'' + u) - 2i u - i(1-x^2)(u'' - u)
    let expr_a = OperatorExpr::new(vec![
        (ChebFun::constant(re(1.0 / r), dom), Action::Derivative(4)),
        (
            ChebFun::constant(re(-2.0 / r), dom)
                .sub(&one_minus_x2.scale(i))?,
            Action::Derivative(2),
        ),
        (
            ChebFun::constant(re(1.0 / r) - 2.0 * i, dom)
                .add(&one_minus_x2.scale(i))?,
            Action::Identity,
        ),
    ])?;
    // L_B u = u'' - u
    let expr_b = OperatorExpr::scalar_terms(
        dom,
        &[(one(), Action::Derivative(2)), (re(-1.0), Action::Identity)],
    )?;
    Ok((expr_a, expr_b))
}

fn os_bcs(dom: Domain) -> Vec<BoundaryFunctional> {
    vec![
        BoundaryFunctional::dirichlet(dom.a),
        BoundaryFunctional::dirichlet(dom.b),
        BoundaryFunctional::derivative(dom.a, 1),
        BoundaryFunctional::derivative(dom.b, 1),
    ]
}

pub fn orr_sommerfeld_problems(r: f64, n: usize, tol: f64) -> Result<OrrSommerfeldProblems> {
    let dom = Domain::new(-1.0, 1.0)?;
    let (expr_a, expr_b) = os_exprs(r, dom)?;
    let config = SolverConfig { tol, ..SolverConfig::default() };

    let mut direct = EigProblem {
        groups: vec![BasisGroup::new(
            chebyshev_basis(dom, n)?,
            expr_a.clone(),
            expr_b.clone(),
        )?],
        bcs: os_bcs(dom),
        config: config.clone(),
    };
    super::equilibrate_bcs(&mut direct)?;

    // (1+x)^2 (1-x)^2 = (1-x^2)^2; every column satisfies all four BCs.
    let window = ChebFun::from_fn(|x| (1.0 - x * x) * (1.0 - x * x), dom, 1e-14)?;
    let mut rec_cols = Vec::with_capacity(n);
    for k in 0..n {
        rec_cols.push(window.multiply(&ChebFun::chebyshev_t(k, dom))?);
    }
    let recombined = EigProblem {
        groups: vec![BasisGroup::new(
            Quasimatrix::new(rec_cols)?,
            expr_a.clone(),
            expr_b.clone(),
        )?],
        bcs: vec![],
        config: SolverConfig { balance: true, ..config.clone() },
    };

    // Integral reformulation: unknown v = u'''' plus a cubic polynomial
    // tail; derivatives become cumulative integrals of v.
    let i = C::new(0.0, 1.0);
    let one_minus_x2 = ChebFun::from_coeffs(vec![re(0.5), C::default(), re(-0.5)], dom);
    // I_A v = (1/R) v - (2/R + i(1-x^2)) int^2 v + (1/R - 2i + i(1-x^2)) int^4 v
    let int_a = OperatorExpr::new(vec![
        (ChebFun::constant(re(1.0 / r), dom), Action::Identity),
        (
            ChebFun::constant(re(-2.0 / r), dom).sub(&one_minus_x2.scale(i))?,
            Action::Cumsum(2),
        ),
        (
            ChebFun::constant(re(1.0 / r) - 2.0 * i, dom).add(&one_minus_x2.scale(i))?,
            Action::Cumsum(4),
        ),
    ])?;
    // I_B v = int^2 v - int^4 v
    let int_b = OperatorExpr::scalar_terms(
        dom,
        &[(one(), Action::Cumsum(2)), (re(-1.0), Action::Cumsum(4))],
    )?;
    let lift4 = OperatorExpr::scalar_terms(dom, &[(one(), Action::Cumsum(4))])?;
    let g_main = BasisGroup::new(chebyshev_basis(dom, n)?, int_a, int_b)?.with_lift(lift4)?;
    // Cubic tail carried directly through the differential operators.
    let g_tail = BasisGroup::new(chebyshev_basis(dom, 4)?, expr_a, expr_b)?;
    let mut integral = EigProblem {
        groups: vec![g_main, g_tail],
        bcs: os_bcs(dom),
        config,
    };
    super::equilibrate_bcs(&mut integral)?;

    Ok(OrrSommerfeldProblems { direct, recombined, integral })
}

/// Pilot boundary-value operator `L1 u = u'' + |x| u'` on [-1, 1] (and the
/// nearby `L2 u = L1 u + u`), used to demonstrate Krylov bases for LSode.
pub fn pilot_operator(with_identity: bool) -> Result<OperatorExpr> {
    let dom = Domain::new(-1.0, 1.0)?;
    let absx = ChebFun::from_piece_coeffs(
        dom,
        vec![
            (Domain::new(-1.0, 0.0)?, abs_piece_coeffs(-1.0, 0.0)),
            (Domain::new(0.0, 1.0)?, abs_piece_coeffs(0.0, 1.0)),
        ],
    )?;
    let mut terms = vec![
        (ChebFun::constant(one(), dom), Action::Derivative(2)),
        (absx, Action::Derivative(1)),
    ];
    if with_identity {
        terms.push((ChebFun::constant(one(), dom), Action::Identity));
    }
    OperatorExpr::new(terms)
}

/// Piecewise polynomial groups for the pilot problem's inner solves
/// (breakpoint at 0 where |x| loses smoothness), with identity lift.
pub fn pilot_piecewise_groups(m: usize) -> Result<Vec<BasisGroup>> {
    let dom = Domain::new(-1.0, 1.0)?;
    let left = piecewise_chebyshev_basis(dom, Domain::new(-1.0, 0.0)?, m)?;
    let right = piecewise_chebyshev_basis(dom, Domain::new(0.0, 1.0)?, m)?;
    let id = OperatorExpr::identity(dom);
    Ok(vec![
        BasisGroup::new(left, id.clone(), id.clone())?,
        BasisGroup::new(right, id.clone(), id)?,
    ])
}

/// Continuity conditions (u and u' match at 0) for piecewise bases on a
/// domain straddling 0.
pub fn continuity_bcs(orders: usize) -> Vec<BoundaryFunctional> {
    (0..orders)
        .map(|order| BoundaryFunctional {
            const_terms: vec![
                BcTerm::sided(0.0, order, one(), Side::Left),
                BcTerm::sided(0.0, order, re(-1.0), Side::Right),
            ],
            lambda_terms: vec![],
            rhs: C::default(),
        })
        .collect()
}
