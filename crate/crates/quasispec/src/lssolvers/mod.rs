//! Least-squares solvers for ODE boundary-value and eigenvalue problems
//! over arbitrary bases: LSode (boundary-value problems), LSeig and
//! LSeig-bc (eigenproblems, with lambda-dependent boundary conditions
//! allowed), Krylov basis construction, and residual filtering.

pub mod problemfile;
pub mod problems;

use crate::blockop::{BlockQuasimatrix, FunVec};
use crate::dense;
use crate::error::{Error, Result};
use crate::funcore::{ChebFun, Domain, Side};
use crate::quasimatrix::Quasimatrix;
use crate::rectgep;
use ndarray::{Array1, Array2};
use num_complex::Complex64;

type C = Complex64;

/// What an operator term does to a function before the coefficient
/// multiplies it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Identity,
    Derivative(usize),
    Cumsum(usize),
}

impl Action {
    pub fn apply(&self, f: &ChebFun) -> ChebFun {
        match *self {
            Action::Identity => f.clone(),
            Action::Derivative(k) => f.derivative(k),
            Action::Cumsum(k) => f.cumsum(k),
        }
    }
}

/// A linear operator `u -> sum_j coeff_j(x) * action_j(u)`.
#[derive(Debug, Clone)]
pub struct OperatorExpr {
    terms: Vec<(ChebFun, Action)>,
    dom: Domain,
}

impl OperatorExpr {
    pub fn new(terms: Vec<(ChebFun, Action)>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| {
            Error::InvalidConfig("operator expression needs at least one term".into())
        })?;
        let dom = first.0.domain();
        for (c, _) in &terms[1..] {
            if !domains_match(c.domain(), dom) {
                return Err(Error::DomainMismatch);
            }
        }
        Ok(OperatorExpr { terms, dom })
    }

    /// Terms with constant scalar coefficients.
    pub fn scalar_terms(dom: Domain, terms: &[(C, Action)]) -> Result<Self> {
        OperatorExpr::new(
            terms
                .iter()
                .map(|&(c, a)| (ChebFun::constant(c, dom), a))
                .collect(),
        )
    }

    pub fn identity(dom: Domain) -> Self {
        OperatorExpr {
            terms: vec![(ChebFun::constant(C::new(1.0, 0.0), dom), Action::Identity)],
            dom,
        }
    }

    /// The zero operator (a single identity term with zero coefficient).
    pub fn zero(dom: Domain) -> Self {
        OperatorExpr {
            terms: vec![(ChebFun::zero(dom), Action::Identity)],
            dom,
        }
    }

    pub fn domain(&self) -> Domain {
        self.dom
    }

    pub fn terms(&self) -> &[(ChebFun, Action)] {
        &self.terms
    }

    pub fn apply(&self, f: &ChebFun) -> Result<ChebFun> {
        if !domains_match(f.domain(), self.dom) {
            return Err(Error::DomainMismatch);
        }
        let mut acc: Option<ChebFun> = None;
        for (coeff, action) in &self.terms {
            let g = action.apply(f);
            let term = if is_constant(coeff) {
                g.scale(constant_value(coeff))
            } else {
                coeff.multiply(&g)?
            };
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc.expect("at least one term"))
    }
}

fn domains_match(a: Domain, b: Domain) -> bool {
    let scale = a.length().max(b.length());
    (a.a - b.a).abs() <= 1e-12 * scale && (a.b - b.b).abs() <= 1e-12 * scale
}

fn is_constant(f: &ChebFun) -> bool {
    f.pieces().len() == 1 && f.pieces()[0].coeffs.len() <= 1
}

fn constant_value(f: &ChebFun) -> C {
    f.pieces()[0].coeffs.first().copied().unwrap_or_default()
}

/// Apply an operator expression columnwise.
pub fn apply_operator(e: &OperatorExpr, q: &Quasimatrix) -> Result<Quasimatrix> {
    let cols: Result<Vec<ChebFun>> = q.cols().iter().map(|c| e.apply(c)).collect();
    Quasimatrix::new(cols?)
}

/// One term of a boundary functional: `weight * u^(order)(point)`, with an
/// optional one-sided limit for evaluation at interior breakpoints.
#[derive(Debug, Clone)]
pub struct BcTerm {
    pub point: f64,
    pub order: usize,
    pub weight: C,
    pub side: Option<Side>,
}

impl BcTerm {
    pub fn new(point: f64, order: usize, weight: C) -> Self {
        BcTerm { point, order, weight, side: None }
    }

    pub fn sided(point: f64, order: usize, weight: C, side: Side) -> Self {
        BcTerm { point, order, weight, side: Some(side) }
    }
}

/// A boundary condition affine in the eigenvalue, in the convention
/// `b_const(u) = lambda * b_lambda(u)` (equivalently `(B_A - lambda B_B)c = 0`).
/// For boundary-value problems `rhs` is the inhomogeneous value and
/// `lambda_terms` must be empty.
#[derive(Debug, Clone)]
pub struct BoundaryFunctional {
    pub const_terms: Vec<BcTerm>,
    pub lambda_terms: Vec<BcTerm>,
    pub rhs: C,
}

impl BoundaryFunctional {
    pub fn dirichlet(point: f64) -> Self {
        BoundaryFunctional {
            const_terms: vec![BcTerm::new(point, 0, C::new(1.0, 0.0))],
            lambda_terms: vec![],
            rhs: C::default(),
        }
    }

    pub fn derivative(point: f64, order: usize) -> Self {
        BoundaryFunctional {
            const_terms: vec![BcTerm::new(point, order, C::new(1.0, 0.0))],
            lambda_terms: vec![],
            rhs: C::default(),
        }
    }

    pub fn with_rhs(mut self, rhs: C) -> Self {
        self.rhs = rhs;
        self
    }

    fn max_order(&self) -> usize {
        self.const_terms
            .iter()
            .chain(&self.lambda_terms)
            .map(|t| t.order)
            .max()
            .unwrap_or(0)
    }
}

/// A set of basis columns sharing the operator actions. `expr_a` and
/// `expr_b` map columns into the two sides of the pencil; `lift` maps a
/// column to its contribution to the solution itself (identity for direct
/// formulations; e.g. a double cumsum for integral reformulations), and is
/// what boundary functionals are evaluated on.
#[derive(Debug, Clone)]
pub struct BasisGroup {
    pub columns: Quasimatrix,
    pub expr_a: OperatorExpr,
    pub expr_b: OperatorExpr,
    pub lift: OperatorExpr,
}

impl BasisGroup {
    pub fn new(columns: Quasimatrix, expr_a: OperatorExpr, expr_b: OperatorExpr) -> Result<Self> {
        let dom = columns.domain();
        if !domains_match(expr_a.domain(), dom) || !domains_match(expr_b.domain(), dom) {
            return Err(Error::DomainMismatch);
        }
        let lift = OperatorExpr::identity(dom);
        Ok(BasisGroup { columns, expr_a, expr_b, lift })
    }

    pub fn with_lift(mut self, lift: OperatorExpr) -> Result<Self> {
        if !domains_match(lift.domain(), self.columns.domain()) {
            return Err(Error::DomainMismatch);
        }
        self.lift = lift;
        Ok(self)
    }
}

/// How boundary conditions enter the solves: jointly least-squared with the
/// operator residual, or enforced exactly through the structured projector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcMode {
    LeastSquares,
    Exact,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Residual filter: eigenpairs with relative residual above this are dropped.
    pub tol: f64,
    /// Weight on the function rows of the block objective.
    pub alpha: f64,
    /// Weight on the boundary-condition rows.
    pub beta: f64,
    /// Divide A by nu = ||A||_F / ||B||_F before solving, rescale lambdas after.
    pub balance: bool,
    pub bc_mode: BcMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            alpha: 1.0,
            beta: 1.0,
            balance: false,
            bc_mode: BcMode::LeastSquares,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must lie in (0, 1], got {}",
                self.tol
            )));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::NonPositiveWeight);
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EigProblem {
    pub groups: Vec<BasisGroup>,
    pub bcs: Vec<BoundaryFunctional>,
    pub config: SolverConfig,
}

impl EigProblem {
    pub fn ncols(&self) -> usize {
        self.groups.iter().map(|g| g.columns.ncols()).sum()
    }

    pub fn domain(&self) -> Domain {
        self.groups[0].columns.domain()
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let first = self
            .groups
            .first()
            .ok_or_else(|| Error::InvalidConfig("problem needs at least one basis group".into()))?;
        let dom = first.columns.domain();
        for g in &self.groups {
            if !domains_match(g.columns.domain(), dom) {
                return Err(Error::DomainMismatch);
            }
        }
        let closure = |p: f64| p >= dom.a - 1e-12 * dom.length() && p <= dom.b + 1e-12 * dom.length();
        for bc in &self.bcs {
            for t in bc.const_terms.iter().chain(&bc.lambda_terms) {
                if !closure(t.point) {
                    return Err(Error::OutOfDomain { x: t.point, a: dom.a, b: dom.b });
                }
            }
        }
        if self.ncols() < self.bcs.len() {
            return Err(Error::InvalidConfig(format!(
                "{} basis columns cannot carry {} boundary conditions",
                self.ncols(),
                self.bcs.len()
            )));
        }
        Ok(())
    }
}

/// One accepted eigenpair. `coeffs` are the basis coefficients (unit norm);
/// `eigenfunction` is the lifted solution-space function; `relres` is the
/// per-pair relative residual in the block norm, boundary rows included.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub lambda: C,
    pub coeffs: Array1<C>,
    pub eigenfunction: ChebFun,
    pub relres: f64,
}

fn eval_terms(terms: &[BcTerm], ders: &[ChebFun]) -> Result<C> {
    let mut acc = C::default();
    for t in terms {
        let d = &ders[t.order];
        let v = match t.side {
            Some(side) => d.eval_side(t.point, side)?,
            None => d.eval(t.point)?,
        };
        acc += t.weight * v;
    }
    Ok(acc)
}

/// Boundary-condition rows `(B_A, B_B)`: entry `(i, j)` evaluates the i-th
/// functional's const (resp. lambda) part on the lifted j-th basis column.
pub fn bc_matrices(
    bcs: &[BoundaryFunctional],
    groups: &[BasisGroup],
) -> Result<(Array2<C>, Array2<C>)> {
    let n: usize = groups.iter().map(|g| g.columns.ncols()).sum();
    let d = bcs.len();
    let mut b_a = Array2::<C>::zeros((d, n));
    let mut b_b = Array2::<C>::zeros((d, n));
    if d == 0 {
        return Ok((b_a, b_b));
    }
    let max_order = bcs.iter().map(|b| b.max_order()).max().unwrap_or(0);
    let mut j = 0;
    for g in groups {
        for col in g.columns.cols() {
            let lifted = g.lift.apply(col)?;
            let mut ders = Vec::with_capacity(max_order + 1);
            ders.push(lifted);
            for k in 1..=max_order {
                let next = ders[k - 1].derivative(1);
                ders.push(next);
            }
            for (i, bc) in bcs.iter().enumerate() {
                b_a[[i, j]] = eval_terms(&bc.const_terms, &ders)?;
                b_b[[i, j]] = eval_terms(&bc.lambda_terms, &ders)?;
            }
            j += 1;
        }
    }
    Ok((b_a, b_b))
}

/// Scale each boundary functional so its `(B_A, B_B)` row pair has at most
/// unit largest 2-norm. Homogeneous conditions are scale-free, and
/// equilibrated rows keep high-order conditions (whose raw entries grow like
/// the fourth power of the polynomial degree) from dominating the assembled
/// pencil. Rows are only ever scaled down: a basis that already satisfies a
/// condition leaves a row of pure roundoff, and normalizing it up would
/// install an O(1) junk constraint.
pub fn equilibrate_bcs(problem: &mut EigProblem) -> Result<()> {
    if problem.bcs.is_empty() {
        return Ok(());
    }
    let (ba, bb) = bc_matrices(&problem.bcs, &problem.groups)?;
    for (i, bc) in problem.bcs.iter_mut().enumerate() {
        let ra: f64 = ba.row(i).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let rb: f64 = bb.row(i).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let s = ra.max(rb);
        if s > 1.0 {
            let inv = C::new(1.0 / s, 0.0);
            for t in bc.const_terms.iter_mut().chain(bc.lambda_terms.iter_mut()) {
                t.weight *= inv;
            }
            bc.rhs *= inv;
        }
    }
    Ok(())
}

/// Lifted solution basis: the quasimatrix whose columns are `lift(column)`
/// across all groups, i.e. the map from coefficients to the solution.
pub fn lifted_basis(groups: &[BasisGroup]) -> Result<Quasimatrix> {
    let mut cols = Vec::new();
    for g in groups {
        for c in g.columns.cols() {
            cols.push(g.lift.apply(c)?);
        }
    }
    Quasimatrix::new(cols)
}

/// Assemble the weighted block pencil `(A, B)` of the least-squares
/// eigenproblem: function rows `L_A U`, `L_B U` and boundary rows
/// `B_A`, `B_B`, with row weights sqrt(alpha), sqrt(beta) applied.
pub fn assemble(problem: &EigProblem) -> Result<(BlockQuasimatrix, BlockQuasimatrix)> {
    problem.validate()?;
    let mut a_cols = Vec::new();
    let mut b_cols = Vec::new();
    for g in &problem.groups {
        for c in g.columns.cols() {
            a_cols.push(g.expr_a.apply(c)?);
            b_cols.push(g.expr_b.apply(c)?);
        }
    }
    let (ba, bb) = bc_matrices(&problem.bcs, &problem.groups)?;
    let a = BlockQuasimatrix::new(Quasimatrix::new(a_cols)?, ba)?
        .scale_rows(problem.config.alpha, problem.config.beta)?;
    let b = BlockQuasimatrix::new(Quasimatrix::new(b_cols)?, bb)?
        .scale_rows(problem.config.alpha, problem.config.beta)?;
    Ok((a, b))
}

fn scale_block(m: &BlockQuasimatrix, s: f64) -> Result<BlockQuasimatrix> {
    // scale_rows multiplies by the square roots of its arguments.
    m.scale_rows(s * s, s * s)
}

/// Joint column equilibration of the pencil: scale column j of both sides
/// by 1 / max(||A e_j||, ||B e_j||). This is a diagonal change of basis, so
/// the spectrum is untouched, while the pencil's columns (whose norms grow
/// like the fourth power of the polynomial degree under differential
/// operators) become comparably sized. Returns the scaled pencil and the
/// per-column factors used to map coefficient vectors back.
fn equilibrate_columns(
    a: &BlockQuasimatrix,
    b: &BlockQuasimatrix,
) -> Result<(BlockQuasimatrix, BlockQuasimatrix, Vec<f64>)> {
    let n = a.ncols();
    let mut d = Vec::with_capacity(n);
    for j in 0..n {
        let s = a.col(j).norm().max(b.col(j).norm());
        d.push(if s > 0.0 { 1.0 / s } else { 1.0 });
    }
    let scale = |m: &BlockQuasimatrix| -> Result<BlockQuasimatrix> {
        let cols: Vec<ChebFun> = (0..n)
            .map(|j| m.top.col(j).scale(C::new(d[j], 0.0)))
            .collect();
        let mut bottom = m.bottom.clone();
        for j in 0..n {
            for i in 0..bottom.nrows() {
                bottom[[i, j]] *= d[j];
            }
        }
        BlockQuasimatrix::new(Quasimatrix::new(cols)?, bottom)
    };
    Ok((scale(a)?, scale(b)?, d))
}

/// Undo the column equilibration on a coefficient vector and renormalize.
fn unscale_coeffs(c: &Array1<C>, d: &[f64]) -> Array1<C> {
    let mut out = c.clone();
    for (v, &s) in out.iter_mut().zip(d) {
        *v *= s;
    }
    let nrm = out.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if nrm > 0.0 {
        out.mapv_inplace(|v| v / nrm);
    }
    out
}

fn pair_relres(a: &BlockQuasimatrix, b: &BlockQuasimatrix, lambda: C, c: &Array1<C>) -> Result<f64> {
    let ac = a.apply(c)?;
    let bc = b.apply(c)?;
    let denom = ac.norm();
    if !lambda.is_finite() {
        return Ok(f64::INFINITY);
    }
    let r = ac.sub(&bc.scale(lambda))?;
    if denom <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(r.norm() / denom)
}

fn build_results(
    problem: &EigProblem,
    a: &BlockQuasimatrix,
    b: &BlockQuasimatrix,
    lambdas: &[C],
    x: &Array2<C>,
) -> Result<Vec<EigResult>> {
    let lifted = lifted_basis(&problem.groups)?;
    let mut out = Vec::new();
    for (k, &lambda) in lambdas.iter().enumerate() {
        let c = x.column(k).to_owned();
        let relres = pair_relres(a, b, lambda, &c)?;
        if !relres.is_finite() || relres > problem.config.tol {
            continue;
        }
        let eigenfunction = lifted.apply(&c)?;
        out.push(EigResult { lambda, coeffs: c, eigenfunction, relres });
    }
    Ok(out)
}

/// LSeig: assemble the block pencil, solve it as a total-least-squares
/// rectangular eigenproblem, and keep the pairs whose relative residual is
/// below `config.tol`. Results keep the solver's ordering (descending real
/// part, then descending imaginary part).
pub fn lseig(problem: &EigProblem) -> Result<Vec<EigResult>> {
    let (a, b) = assemble(problem)?;
    let (ae, be, d) = equilibrate_columns(&a, &b)?;
    let nu = balance_factor(problem, &ae, &be);
    let a_solve = if nu != 1.0 { scale_block(&ae, 1.0 / nu)? } else { ae };
    let solved = rectgep::itomurota_block(&a_solve, &be)?;
    let lambdas: Vec<C> = solved.lambdas.iter().map(|l| l * nu).collect();
    let mut x = solved.x;
    for j in 0..x.ncols() {
        let c = unscale_coeffs(&x.column(j).to_owned(), &d);
        x.column_mut(j).assign(&c);
    }
    build_results(problem, &a, &b, &lambdas, &x)
}

fn balance_factor(problem: &EigProblem, a: &BlockQuasimatrix, b: &BlockQuasimatrix) -> f64 {
    if !problem.config.balance {
        return 1.0;
    }
    let na = a.norm_frobenius();
    let nb = b.norm_frobenius();
    if na > 0.0 && nb > 0.0 {
        na / nb
    } else {
        1.0
    }
}

/// LSeig-bc: enforce the boundary rows exactly. The function rows are
/// projected onto the leading `n - d` left singular functions of the
/// concatenation `[L_A U, L_B U]`, the boundary rows are kept as hard
/// constraints, and the resulting square pencil is solved densely. Accepted
/// pairs must satisfy the boundary rows to 1e-10.
pub fn lseig_bc(problem: &EigProblem) -> Result<Vec<EigResult>> {
    problem.validate()?;
    let n = problem.ncols();
    let d = problem.bcs.len();
    if d == 0 {
        return Err(Error::InvalidConfig(
            "lseig_bc needs at least one boundary condition".into(),
        ));
    }
    if d >= n {
        return Err(Error::InvalidConfig(format!(
            "lseig_bc needs fewer boundary conditions ({d}) than basis columns ({n})"
        )));
    }
    let (a, b) = assemble(problem)?;
    let (ae, be, dcol) = equilibrate_columns(&a, &b)?;
    let nu = balance_factor(problem, &ae, &be);
    let a_solve = if nu != 1.0 { scale_block(&ae, 1.0 / nu)? } else { ae };

    let factors = a_solve.top.hcat_svd(&be.top)?;
    let u1 = Quasimatrix::new(factors.u.cols()[0..n - d].to_vec())?;
    let mut s_mat = Array2::<C>::zeros((n, n));
    let mut t_mat = Array2::<C>::zeros((n, n));
    let pa = u1.adjoint_mul(&a_solve.top)?;
    let pb = u1.adjoint_mul(&be.top)?;
    for i in 0..n - d {
        for j in 0..n {
            s_mat[[i, j]] = pa[[i, j]];
            t_mat[[i, j]] = pb[[i, j]];
        }
    }
    for i in 0..d {
        for j in 0..n {
            s_mat[[n - d + i, j]] = a_solve.bottom[[i, j]];
            t_mat[[n - d + i, j]] = be.bottom[[i, j]];
        }
    }
    let pairs = dense::dense_gep(&s_mat, &t_mat)?;

    let lifted = lifted_basis(&problem.groups)?;
    let (raw_ba, raw_bb) = bc_matrices(&problem.bcs, &problem.groups)?;
    let mut out = Vec::new();
    for p in &pairs {
        if !p.lambda.is_finite() {
            continue;
        }
        let lambda = p.lambda * nu;
        let c = unscale_coeffs(&p.vector, &dcol);
        let c = &c;
        // Hard-constraint check on the unweighted boundary rows.
        let mut bc_err: f64 = 0.0;
        for i in 0..d {
            let mut v = C::default();
            for j in 0..n {
                v += (raw_ba[[i, j]] - lambda * raw_bb[[i, j]]) * c[j];
            }
            bc_err = bc_err.max(v.norm());
        }
        let bc_scale = dense::frob_norm(&raw_ba) + lambda.norm() * dense::frob_norm(&raw_bb);
        if bc_err > 1e-10 * bc_scale.max(1.0) {
            continue;
        }
        let relres = pair_relres(&a, &b, lambda, c)?;
        if !relres.is_finite() || relres > problem.config.tol {
            continue;
        }
        let eigenfunction = lifted.apply(c)?;
        out.push(EigResult { lambda, coeffs: c.clone(), eigenfunction, relres });
    }
    Ok(out)
}

/// LSode: least-squares solve of `L u = f` with lambda-free boundary
/// conditions. Returns the lifted solution and the block residual norm of
/// the objective at the minimizer.
pub fn lsode(
    op: &OperatorExpr,
    f: &ChebFun,
    bcs: &[BoundaryFunctional],
    groups: &[BasisGroup],
    config: &SolverConfig,
) -> Result<(ChebFun, f64)> {
    config.validate()?;
    let n: usize = groups.iter().map(|g| g.columns.ncols()).sum();
    let d = bcs.len();
    if n == 0 {
        return Err(Error::InvalidConfig("lsode needs at least one basis column".into()));
    }
    if d > n {
        return Err(Error::InvalidConfig(format!(
            "{n} basis columns cannot carry {d} boundary conditions"
        )));
    }
    for bc in bcs {
        if !bc.lambda_terms.is_empty() {
            return Err(Error::InvalidConfig(
                "lsode boundary conditions must be lambda-free".into(),
            ));
        }
    }
    let mut a_cols = Vec::with_capacity(n);
    for g in groups {
        for c in g.columns.cols() {
            a_cols.push(op.apply(&g.lift.apply(c)?)?);
        }
    }
    let a_top = Quasimatrix::new(a_cols)?;
    let (ba, _) = bc_matrices(bcs, groups)?;
    let m = BlockQuasimatrix::new(a_top.clone(), ba.clone())?
        .scale_rows(config.alpha, config.beta)?;
    let rhs = FunVec {
        fun: f.scale(C::new(config.alpha.sqrt(), 0.0)),
        tail: Array1::from_iter(bcs.iter().map(|b| b.rhs * config.beta.sqrt())),
    };

    let c = match config.bc_mode {
        BcMode::LeastSquares => {
            let (q, r) = m.qr()?;
            for j in 0..n {
                if r[[j, j]].norm() <= 1e-13 * r[[0, 0]].norm().max(1e-300) {
                    return Err(Error::RankDeficient);
                }
            }
            let y = q.adjoint_apply(&rhs)?;
            dense::solve_upper_triangular(&r, &y)
        }
        BcMode::Exact => {
            if d == 0 {
                return Err(Error::InvalidConfig(
                    "bc_mode=exact needs at least one boundary condition".into(),
                ));
            }
            if d >= n {
                return Err(Error::InvalidConfig(format!(
                    "bc_mode=exact needs fewer boundary conditions ({d}) than columns ({n})"
                )));
            }
            // Project the function rows onto the leading n - d left singular
            // functions of L U; keep the boundary rows exactly.
            let factors = a_top.svd()?;
            let u1 = Quasimatrix::new(factors.u.cols()[0..n - d].to_vec())?;
            let pa = u1.adjoint_mul(&a_top)?;
            let pf = u1.adjoint_apply(f)?;
            let mut s_mat = Array2::<C>::zeros((n, n));
            let mut y = Array1::<C>::zeros(n);
            for i in 0..n - d {
                for j in 0..n {
                    s_mat[[i, j]] = pa[[i, j]];
                }
                y[i] = pf[i];
            }
            for i in 0..d {
                for j in 0..n {
                    s_mat[[n - d + i, j]] = ba[[i, j]];
                }
                y[n - d + i] = bcs[i].rhs;
            }
            let (q, r) = dense::householder_qr(&s_mat);
            for j in 0..n {
                if r[[j, j]].norm() <= 1e-13 * r[[0, 0]].norm().max(1e-300) {
                    return Err(Error::RankDeficient);
                }
            }
            let qy = dense::adjoint_mul(&q, &y.clone().insert_axis(ndarray::Axis(1)));
            dense::solve_upper_triangular(&r, &qy.column(0).to_owned())
        }
    };

    let residual = m.apply(&c)?.sub(&rhs)?.norm();
    let solution = lifted_basis(groups)?.apply(&c)?;
    Ok((solution, residual))
}

/// Orthonormal basis of the inverse-iteration Krylov space
/// `span(u0, L^-1 u0, L^-2 u0, ...)` (or starting from `L^-1 u0` when
/// `start_with_solve` is set), built by the Arnoldi process with one full
/// reorthogonalization pass. Breakdown (a new direction whose norm after
/// orthogonalization falls below 1e-13 of its original size) returns the
/// basis built so far.
pub fn krylov_subspace<F>(
    mut inner_solve: F,
    u0: &ChebFun,
    m: usize,
    start_with_solve: bool,
) -> Result<Quasimatrix>
where
    F: FnMut(&ChebFun) -> Result<ChebFun>,
{
    if m == 0 {
        return Err(Error::InvalidConfig("krylov_subspace needs m >= 1".into()));
    }
    let seed = if start_with_solve { inner_solve(u0)? } else { u0.clone() };
    let nrm = seed.norm_l2();
    if nrm <= 1e-300 {
        return Err(Error::InvalidConfig("krylov_subspace needs a nonzero start".into()));
    }
    let mut basis = vec![seed.scale(C::new(1.0 / nrm, 0.0))];
    while basis.len() < m {
        let mut w = inner_solve(basis.last().expect("nonempty"))?;
        let scale = w.norm_l2();
        if scale <= 1e-300 {
            break;
        }
        for _ in 0..2 {
            for q in &basis {
                let h = q.inner(&w)?;
                w = w.sub(&q.scale(h))?;
            }
        }
        let nrm = w.norm_l2();
        if nrm < 1e-13 * scale {
            break;
        }
        basis.push(w.scale(C::new(1.0 / nrm, 0.0)));
    }
    Quasimatrix::new(basis)
}

/// Aggregate relative residual `||A V - B V Lambda||_2 / ||A V||_2` in the
/// block 2-norm (largest singular value).
pub fn relative_residual_matrix(
    a: &BlockQuasimatrix,
    b: &BlockQuasimatrix,
    v: &Array2<C>,
    lambdas: &[C],
) -> Result<f64> {
    let k = lambdas.len();
    if v.ncols() != k || v.nrows() != a.ncols() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} x {}", a.ncols(), k),
            got: format!("{:?}", v.dim()),
        });
    }
    let mut res_funs = Vec::with_capacity(k);
    let mut av_funs = Vec::with_capacity(k);
    let d = a.nrows_bottom();
    let mut res_tail = Array2::<C>::zeros((d, k));
    let mut av_tail = Array2::<C>::zeros((d, k));
    for j in 0..k {
        let c = v.column(j).to_owned();
        let av = a.apply(&c)?;
        let bv = b.apply(&c)?;
        let r = av.sub(&bv.scale(lambdas[j]))?;
        res_funs.push(r.fun);
        av_funs.push(av.fun.clone());
        for i in 0..d {
            res_tail[[i, j]] = r.tail[i];
            av_tail[[i, j]] = av.tail[i];
        }
    }
    let res_block = BlockQuasimatrix::new(Quasimatrix::new(res_funs)?, res_tail)?;
    let av_block = BlockQuasimatrix::new(Quasimatrix::new(av_funs)?, av_tail)?;
    let num = res_block.svd()?.s.first().copied().unwrap_or(0.0);
    let den = av_block.svd()?.s.first().copied().unwrap_or(0.0);
    if den <= 0.0 {
        return Ok(if num > 0.0 { f64::INFINITY } else { 0.0 });
    }
    Ok(num / den)
}
