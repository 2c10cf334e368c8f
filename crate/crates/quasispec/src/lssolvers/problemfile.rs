//! JSON problem descriptions for the command-line front end.
//!
//! A problem file holds `domain`, `operatorA`/`operatorB` term lists, `bcs`,
//! a `basis` spec, a `config` block, and optionally `rhs` (for ODE
//! boundary-value problems). Field names here are part of the stable file
//! format; the structures below map one-to-one onto [`super`] solver types.

use super::{
    Action, BasisGroup, BcMode, BcTerm, BoundaryFunctional, EigProblem, OperatorExpr, SolverConfig,
};
use crate::error::{Error, Result};
use crate::funcore::{ChebFun, Domain};
use crate::quasimatrix::Quasimatrix;
use num_complex::Complex64;
use serde::Deserialize;

type C = Complex64;

fn bad(msg: impl Into<String>) -> Error {
    Error::ProblemFile(msg.into())
}

/// A real or complex scalar: either `1.5` or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Real(f64),
    Complex([f64; 2]),
}

impl Num {
    pub fn to_c(self) -> C {
        match self {
            Num::Real(x) => C::new(x, 0.0),
            Num::Complex([re, im]) => C::new(re, im),
        }
    }
}

/// One coefficient function: polynomial in x (monomial coefficients,
/// constant first) or a named special function.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type")]
pub enum CoeffSpec {
    #[serde(rename = "poly")]
    Poly { coeffs: Vec<Num> },
    #[serde(rename = "named")]
    Named { name: String },
}

/// One operator term: an action name (`"id"`, `"d1"`, `"d2"`, …,
/// `"cumsum1"`, `"cumsum2"`, …) with its coefficient function.
#[derive(Debug, Clone, Deserialize)]
pub struct TermSpec {
    pub action: String,
    pub coeff: CoeffSpec,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BcTermSpec {
    pub order: usize,
    #[serde(default = "default_weight")]
    pub weight: Num,
}

fn default_weight() -> Num {
    Num::Real(1.0)
}

/// Boundary condition `sum(terms) = lambda * sum(lambda_terms) + rhs`,
/// all functionals evaluated at `point`.
#[derive(Debug, Clone, Deserialize)]
pub struct BcSpec {
    pub point: f64,
    #[serde(default)]
    pub terms: Vec<BcTermSpec>,
    #[serde(default)]
    pub lambda_terms: Vec<BcTermSpec>,
    #[serde(default)]
    pub rhs: Option<Num>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BasisSpec {
    #[serde(rename = "type")]
    pub kind: String,
    pub n: usize,
    #[serde(default)]
    pub params: BasisParams,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct BasisParams {
    /// Interior breakpoints for `type: "piecewise"`.
    #[serde(default)]
    pub breakpoints: Vec<f64>,
    /// Path to a column file for `type: "file"`: JSON
    /// `{"columns": [[c0, c1, ...], ...]}` of global Chebyshev coefficients.
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ConfigSpec {
    pub tol: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub balance: Option<bool>,
    pub bc_mode: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub domain: [f64; 2],
    #[serde(rename = "operatorA")]
    pub operator_a: Vec<TermSpec>,
    #[serde(rename = "operatorB", default)]
    pub operator_b: Vec<TermSpec>,
    #[serde(default)]
    pub rhs: Option<CoeffSpec>,
    #[serde(default)]
    pub bcs: Vec<BcSpec>,
    pub basis: BasisSpec,
    #[serde(default)]
    pub config: Option<ConfigSpec>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| bad(format!("{e}")))
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::new(self.domain[0], self.domain[1])
    }

    pub fn solver_config(&self, construction_tol: f64) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::default();
        if let Some(c) = &self.config {
            if let Some(t) = c.tol {
                cfg.tol = t;
            }
            if let Some(a) = c.alpha {
                cfg.alpha = a;
            }
            if let Some(b) = c.beta {
                cfg.beta = b;
            }
            if let Some(bal) = c.balance {
                cfg.balance = bal;
            }
            if let Some(m) = &c.bc_mode {
                cfg.bc_mode = parse_bc_mode(m)?;
            }
        }
        let _ = construction_tol;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn boundary_conditions(&self) -> Result<Vec<BoundaryFunctional>> {
        let dom = self.domain()?;
        self.bcs.iter().map(|bc| build_bc(bc, dom)).collect()
    }

    pub fn operator_a(&self, tol: f64) -> Result<OperatorExpr> {
        build_operator(&self.operator_a, self.domain()?, tol)
    }

    /// Operator on the eigenvalue side; defaults to the identity when the
    /// file omits `operatorB`.
    pub fn operator_b(&self, tol: f64) -> Result<OperatorExpr> {
        let dom = self.domain()?;
        if self.operator_b.is_empty() {
            Ok(OperatorExpr::identity(dom))
        } else {
            build_operator(&self.operator_b, dom, tol)
        }
    }

    pub fn rhs_function(&self, tol: f64) -> Result<ChebFun> {
        let dom = self.domain()?;
        match &self.rhs {
            Some(spec) => build_coeff(spec, dom, tol),
            None => Err(bad("solve-ode needs an `rhs` field")),
        }
    }

    pub fn basis(&self, tol: f64) -> Result<Quasimatrix> {
        build_basis(&self.basis, self.domain()?, tol)
    }

    /// Assemble the whole file into an eigenvalue problem.
    pub fn eig_problem(&self, tol: f64) -> Result<EigProblem> {
        let config = self.solver_config(tol)?;
        let group = BasisGroup::new(self.basis(tol)?, self.operator_a(tol)?, self.operator_b(tol)?)?;
        let mut problem = EigProblem {
            groups: vec![group],
            bcs: self.boundary_conditions()?,
            config,
        };
        super::equilibrate_bcs(&mut problem)?;
        Ok(problem)
    }
}

pub fn parse_bc_mode(name: &str) -> Result<BcMode> {
    match name {
        "leastsquares" | "least_squares" => Ok(BcMode::LeastSquares),
        "exact" => Ok(BcMode::Exact),
        other => Err(bad(format!(
            "unknown bc_mode {other:?}; expected \"leastsquares\" or \"exact\""
        ))),
    }
}

pub fn parse_action(name: &str) -> Result<Action> {
    if name == "id" {
        return Ok(Action::Identity);
    }
    if let Some(k) = name.strip_prefix("cumsum") {
        if let Ok(k) = k.parse::<usize>() {
            if k >= 1 {
                return Ok(Action::Cumsum(k));
            }
        }
    } else if let Some(k) = name.strip_prefix('d') {
        if let Ok(k) = k.parse::<usize>() {
            if k >= 1 {
                return Ok(Action::Derivative(k));
            }
        }
    }
    Err(bad(format!(
        "unknown action {name:?}; expected \"id\", \"d<k>\", or \"cumsum<k>\""
    )))
}

fn build_coeff(spec: &CoeffSpec, dom: Domain, tol: f64) -> Result<ChebFun> {
    match spec {
        CoeffSpec::Poly { coeffs } => {
            if coeffs.is_empty() {
                return Err(bad("poly coefficient list must be non-empty"));
            }
            let c: Vec<C> = coeffs.iter().map(|v| v.to_c()).collect();
            // Horner evaluation of the monomial-basis polynomial.
            let re_f = move |x: f64| {
                c.iter()
                    .rev()
                    .fold(C::default(), |acc, &ck| acc * x + ck)
            };
            let real = ChebFun::from_fn(|x| re_f(x).re, dom, tol)?;
            let imag = ChebFun::from_fn(|x| re_f(x).im, dom, tol)?;
            real.add(&imag.scale(C::new(0.0, 1.0)))
        }
        CoeffSpec::Named { name } => named_coeff(name, dom, tol),
    }
}

pub fn named_coeff(name: &str, dom: Domain, tol: f64) -> Result<ChebFun> {
    match name {
        "one" => Ok(ChebFun::constant(C::new(1.0, 0.0), dom)),
        "x" => ChebFun::from_fn(|x| x, dom, tol),
        "exp_x" => ChebFun::from_fn(f64::exp, dom, tol),
        "exp3x" => ChebFun::from_fn(|x| (3.0 * x).exp(), dom, tol),
        "one_minus_x2" => ChebFun::from_fn(|x| 1.0 - x * x, dom, tol),
        "one_minus_x2_sq" => ChebFun::from_fn(|x| (1.0 - x * x) * (1.0 - x * x), dom, tol),
        "abs_x" => abs_x(dom),
        other => Err(bad(format!(
            "unknown named coefficient {other:?}; known: one, x, exp_x, exp3x, one_minus_x2, one_minus_x2_sq, abs_x"
        ))),
    }
}

/// |x| as an exact two-piece linear function (requires 0 strictly inside the
/// domain; otherwise |x| is a single affine piece).
fn abs_x(dom: Domain) -> Result<ChebFun> {
    let piece = |a: f64, b: f64| -> (Domain, Vec<C>) {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let sign = if b > 0.0 { 1.0 } else { -1.0 };
        (
            Domain::new(a, b).unwrap(),
            vec![C::new(sign * mid, 0.0), C::new(sign * half, 0.0)],
        )
    };
    if dom.a < 0.0 && dom.b > 0.0 {
        ChebFun::from_piece_coeffs(dom, vec![piece(dom.a, 0.0), piece(0.0, dom.b)])
    } else {
        let (d, c) = piece(dom.a, dom.b);
        ChebFun::from_piece_coeffs(dom, vec![(d, c)])
    }
}

fn build_operator(terms: &[TermSpec], dom: Domain, tol: f64) -> Result<OperatorExpr> {
    if terms.is_empty() {
        return Err(bad("operator term list must be non-empty"));
    }
    let built: Result<Vec<_>> = terms
        .iter()
        .map(|t| Ok((build_coeff(&t.coeff, dom, tol)?, parse_action(&t.action)?)))
        .collect();
    OperatorExpr::new(built?)
}

fn build_bc(spec: &BcSpec, dom: Domain) -> Result<BoundaryFunctional> {
    if spec.point < dom.a - 1e-12 * dom.length() || spec.point > dom.b + 1e-12 * dom.length() {
        return Err(bad(format!(
            "boundary point {} outside domain [{}, {}]",
            spec.point, dom.a, dom.b
        )));
    }
    if spec.terms.is_empty() && spec.lambda_terms.is_empty() {
        return Err(bad("boundary condition needs terms or lambda_terms"));
    }
    let conv = |ts: &[BcTermSpec]| -> Vec<BcTerm> {
        ts.iter()
            .map(|t| BcTerm::new(spec.point, t.order, t.weight.to_c()))
            .collect()
    };
    Ok(BoundaryFunctional {
        const_terms: conv(&spec.terms),
        lambda_terms: conv(&spec.lambda_terms),
        rhs: spec.rhs.map(Num::to_c).unwrap_or_default(),
    })
}

#[derive(Debug, Deserialize)]
struct ColumnFile {
    columns: Vec<Vec<Num>>,
}

fn build_basis(spec: &BasisSpec, dom: Domain, tol: f64) -> Result<Quasimatrix> {
    if spec.n == 0 && spec.kind != "file" {
        return Err(bad("basis size n must be positive"));
    }
    match spec.kind.as_str() {
        "chebyshev" => super::problems::chebyshev_basis(dom, spec.n),
        "recombined" => {
            // Columns w(x) T_k(x) with w = ((x-a)(b-x))^2, vanishing with
            // first derivatives at both endpoints.
            let (a, b) = (dom.a, dom.b);
            let scale = (0.5 * (b - a)).powi(4);
            let window =
                ChebFun::from_fn(move |x| (x - a) * (x - a) * (b - x) * (b - x) / scale, dom, tol)?;
            let cols: Result<Vec<_>> = (0..spec.n)
                .map(|k| window.multiply(&ChebFun::chebyshev_t(k, dom)))
                .collect();
            Quasimatrix::new(cols?)
        }
        "piecewise" => {
            let mut edges = vec![dom.a];
            edges.extend(spec.params.breakpoints.iter().copied());
            edges.push(dom.b);
            for w in edges.windows(2) {
                if w[1] <= w[0] {
                    return Err(bad("piecewise breakpoints must be strictly increasing and interior"));
                }
            }
            let pieces = edges.len() - 1;
            if spec.n % pieces != 0 {
                return Err(bad(format!(
                    "piecewise basis: n = {} must be divisible by the {} subintervals",
                    spec.n, pieces
                )));
            }
            let per = spec.n / pieces;
            let mut cols = Vec::with_capacity(spec.n);
            for w in edges.windows(2) {
                let sub = Domain::new(w[0], w[1])?;
                let q = super::problems::piecewise_chebyshev_basis(dom, sub, per)?;
                for j in 0..per {
                    cols.push(q.col(j).clone());
                }
            }
            Quasimatrix::new(cols)
        }
        "file" => {
            let path = spec
                .params
                .path
                .as_deref()
                .ok_or_else(|| bad("basis type \"file\" needs params.path"))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| bad(format!("cannot read basis file {path:?}: {e}")))?;
            let parsed: ColumnFile =
                serde_json::from_str(&text).map_err(|e| bad(format!("basis file {path:?}: {e}")))?;
            if parsed.columns.is_empty() {
                return Err(bad(format!("basis file {path:?} has no columns")));
            }
            let cols: Result<Vec<_>> = parsed
                .columns
                .iter()
                .map(|c| {
                    if c.is_empty() {
                        return Err(bad("basis file column has no coefficients"));
                    }
                    Ok(ChebFun::from_coeffs(
                        c.iter().map(|v| v.to_c()).collect(),
                        dom,
                    ))
                })
                .collect();
            Quasimatrix::new(cols?)
        }
        other => Err(bad(format!(
            "unknown basis type {other:?}; expected chebyshev, recombined, piecewise, or file"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lssolvers::lseig_bc;

    const ADVDIFF: &str = r#"{
        "domain": [-1.0, 1.0],
        "operatorA": [
            {"action": "d2", "coeff": {"type": "poly", "coeffs": [1]}},
            {"action": "d1", "coeff": {"type": "poly", "coeffs": [1]}}
        ],
        "bcs": [
            {"point": -1.0, "terms": [{"order": 0, "weight": 1}]},
            {"point": 1.0, "terms": [{"order": 0, "weight": 1}]}
        ],
        "basis": {"type": "chebyshev", "n": 48},
        "config": {"tol": 1e-8, "bc_mode": "exact"}
    }"#;

    #[test]
    fn advection_diffusion_file_reproduces_the_spectrum() {
        let pf = ProblemFile::from_json(ADVDIFF).unwrap();
        let problem = pf.eig_problem(1e-13).unwrap();
        let mut lambdas: Vec<f64> = lseig_bc(&problem)
            .unwrap()
            .into_iter()
            .filter(|r| r.lambda.im.abs() < 1e-8)
            .map(|r| r.lambda.re)
            .collect();
        lambdas.sort_by(|p, q| q.partial_cmp(p).unwrap());
        assert!(lambdas.len() >= 5);
        for (k, lam) in lambdas.iter().take(5).enumerate() {
            let pi = std::f64::consts::PI;
            let exact = -0.25 - ((k + 1) as f64 * pi / 2.0).powi(2);
            assert!(
                (lam - exact).abs() <= 1e-8 * exact.abs(),
                "lambda_{k} = {lam}, exact {exact}"
            );
        }
    }

    #[test]
    fn malformed_json_is_a_problem_file_error() {
        assert!(matches!(
            ProblemFile::from_json("{ not json"),
            Err(Error::ProblemFile(_))
        ));
    }

    #[test]
    fn unknown_top_level_fields_are_rejected() {
        let text = ADVDIFF.replacen("\"domain\"", "\"bogus\": 1, \"domain\"", 1);
        assert!(matches!(
            ProblemFile::from_json(&text),
            Err(Error::ProblemFile(_))
        ));
    }

    #[test]
    fn action_names_parse() {
        assert!(matches!(parse_action("id"), Ok(Action::Identity)));
        assert!(matches!(parse_action("d4"), Ok(Action::Derivative(4))));
        assert!(matches!(parse_action("cumsum2"), Ok(Action::Cumsum(2))));
        assert!(parse_action("d0").is_err());
        assert!(parse_action("grad").is_err());
    }

    #[test]
    fn named_coefficients_evaluate_correctly() {
        let dom = Domain::new(-1.0, 1.0).unwrap();
        let absx = named_coeff("abs_x", dom, 1e-13).unwrap();
        for &x in &[-0.7, -0.2, 0.0, 0.4, 1.0] {
            assert!((absx.eval(x).unwrap().re - x.abs()).abs() <= 1e-13);
        }
        let e3 = named_coeff("exp3x", dom, 1e-13).unwrap();
        assert!((e3.eval(0.5).unwrap().re - 1.5f64.exp()).abs() <= 1e-12);
        assert!(named_coeff("nope", dom, 1e-13).is_err());
    }

    #[test]
    fn complex_poly_coefficients_are_honored() {
        let spec = CoeffSpec::Poly {
            coeffs: vec![Num::Real(1.0), Num::Complex([0.0, 2.0])],
        };
        let dom = Domain::new(-1.0, 1.0).unwrap();
        let f = build_coeff(&spec, dom, 1e-13).unwrap();
        let v = f.eval(0.5).unwrap();
        assert!((v - C::new(1.0, 1.0)).norm() <= 1e-13, "got {v}");
    }

    #[test]
    fn lambda_terms_map_to_the_functional() {
        let text = r#"{
            "domain": [0.0, 1.0],
            "operatorA": [{"action": "d2", "coeff": {"type": "poly", "coeffs": [-1]}}],
            "bcs": [
                {"point": 0.0,
                 "terms": [{"order": 0, "weight": -1}],
                 "lambda_terms": [{"order": 1, "weight": 1}]}
            ],
            "basis": {"type": "chebyshev", "n": 8}
        }"#;
        let pf = ProblemFile::from_json(text).unwrap();
        let bcs = pf.boundary_conditions().unwrap();
        assert_eq!(bcs.len(), 1);
        assert_eq!(bcs[0].const_terms.len(), 1);
        assert_eq!(bcs[0].lambda_terms.len(), 1);
        assert_eq!(bcs[0].lambda_terms[0].order, 1);
    }

    #[test]
    fn recombined_basis_columns_vanish_at_endpoints() {
        let spec = BasisSpec {
            kind: "recombined".into(),
            n: 4,
            params: BasisParams::default(),
        };
        let dom = Domain::new(-1.0, 1.0).unwrap();
        let q = build_basis(&spec, dom, 1e-13).unwrap();
        for j in 0..4 {
            assert!(q.col(j).eval(-1.0).unwrap().norm() <= 1e-12);
            assert!(q.col(j).eval(1.0).unwrap().norm() <= 1e-12);
        }
    }

    #[test]
    fn piecewise_basis_splits_columns_evenly() {
        let spec = BasisSpec {
            kind: "piecewise".into(),
            n: 6,
            params: BasisParams { breakpoints: vec![0.0], path: None },
        };
        let dom = Domain::new(-1.0, 1.0).unwrap();
        let q = build_basis(&spec, dom, 1e-13).unwrap();
        assert_eq!(q.ncols(), 6);
        // First half supported left of 0, second half right of 0.
        assert!(q.col(0).eval(0.5).unwrap().norm() <= 1e-13);
        assert!(q.col(3).eval(-0.5).unwrap().norm() <= 1e-13);
    }

    #[test]
    fn basis_from_file_round_trips() {
        let dir = std::env::temp_dir().join("quasispec-basisfile-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cols.json");
        std::fs::write(&path, r#"{"columns": [[1], [0, 1], [0, 0, 1]]}"#).unwrap();
        let spec = BasisSpec {
            kind: "file".into(),
            n: 3,
            params: BasisParams {
                breakpoints: vec![],
                path: Some(path.to_string_lossy().into_owned()),
            },
        };
        let dom = Domain::new(-1.0, 1.0).unwrap();
        let q = build_basis(&spec, dom, 1e-13).unwrap();
        assert_eq!(q.ncols(), 3);
        // Third column is T_2 = 2x^2 - 1.
        assert!((q.col(2).eval(0.3).unwrap().re - (2.0 * 0.09 - 1.0)).abs() <= 1e-14);
    }
}
