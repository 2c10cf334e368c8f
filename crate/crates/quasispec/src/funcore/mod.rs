//! Adaptive piecewise Chebyshev representation of scalar functions on an
//! interval, with the calculus operations used by the higher layers.

pub mod cheb;

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Default construction tolerance.
pub const DEFAULT_TOL: f64 = 1e-13;
/// Maximum polynomial degree per piece before construction fails.
pub const DEGREE_CAP: usize = 1 << 16;

/// A finite interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
}

impl Domain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDomain { a, b });
        }
        Ok(Domain { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Map `x` in `[a, b]` to `t` in `[-1, 1]`.
    pub fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / self.length()
    }

    /// Map `t` in `[-1, 1]` to `x` in `[a, b]`.
    pub fn from_unit(&self, t: f64) -> f64 {
        self.a + 0.5 * (t + 1.0) * self.length()
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * self.length().max(1.0);
        x >= self.a - slack && x <= self.b + slack
    }

    fn approx_eq(a: f64, b: f64, scale: f64) -> bool {
        (a - b).abs() <= 1e-12 * scale
    }
}

/// One polynomial piece: Chebyshev-T coefficients mapped to `dom`.
#[derive(Debug, Clone)]
pub struct Piece {
    pub dom: Domain,
    pub coeffs: Vec<Complex64>,
}

impl Piece {
    fn eval(&self, x: f64) -> Complex64 {
        cheb::clenshaw(&self.coeffs, self.dom.to_unit(x).clamp(-1.0, 1.0))
    }

    fn vscale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Re-expand this piece on a subinterval of its domain (exact up to roundoff).
    fn restrict(&self, sub: Domain) -> Piece {
        let n = self.coeffs.len() - 1;
        let pts = cheb::cheb_points(n);
        let vals: Vec<Complex64> = pts
            .iter()
            .map(|&t| self.eval(sub.from_unit(t)))
            .collect();
        let mut coeffs = cheb::vals2coeffs(&vals);
        chop_in_place(&mut coeffs, 1e-15);
        Piece { dom: sub, coeffs }
    }
}

/// A scalar function on `[a, b]` stored as contiguous Chebyshev pieces.
#[derive(Debug, Clone)]
pub struct ChebFun {
    dom: Domain,
    pieces: Vec<Piece>,
}

/// Which one-sided limit to take at an interior breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn chop_in_place(coeffs: &mut Vec<Complex64>, rel_tol: f64) {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        coeffs.truncate(1);
        return;
    }
    let cut = rel_tol * scale;
    let mut last = 0;
    for (k, c) in coeffs.iter().enumerate() {
        if c.norm() > cut {
            last = k;
        }
    }
    coeffs.truncate(last + 1);
}

fn adaptive_piece(
    f: &dyn Fn(f64) -> Complex64,
    dom: Domain,
    tol: f64,
) -> Result<Piece> {
    let mut deg = 16;
    loop {
        let pts = cheb::cheb_points(deg);
        let mut vals = Vec::with_capacity(deg + 1);
        let mut vscale: f64 = 0.0;
        for &t in &pts {
            let x = dom.from_unit(t);
            let v = f(x);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFiniteSample { x });
            }
            vscale = vscale.max(v.norm());
            vals.push(v);
        }
        let mut coeffs = cheb::vals2coeffs(&vals);
        let scale = vscale.max(coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max));
        if scale == 0.0 {
            return Ok(Piece { dom, coeffs: vec![Complex64::default()] });
        }
        let n = coeffs.len();
        let tail = coeffs[n - 1].norm().max(coeffs[n - 2].norm()).max(coeffs[n - 3].norm());
        if tail <= tol * scale {
            let cut = tol * scale;
            let mut last = 0;
            for (k, c) in coeffs.iter().enumerate() {
                if c.norm() > cut {
                    last = k;
                }
            }
            coeffs.truncate(last + 1);
            return Ok(Piece { dom, coeffs });
        }
        if deg >= DEGREE_CAP {
            return Err(Error::Unresolved { tol, cap: DEGREE_CAP });
        }
        deg *= 2;
    }
}

impl ChebFun {
    /// Adaptive construction from a callable: sample at second-kind Chebyshev
    /// points, double the degree until the coefficient tail drops below
    /// `tol` times the scale, then chop.
    pub fn from_callable(
        f: impl Fn(f64) -> Complex64,
        dom: Domain,
        tol: f64,
    ) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidConfig(format!("tol {tol} outside (0, 1)")));
        }
        let piece = adaptive_piece(&f, dom, tol)?;
        Ok(ChebFun { dom, pieces: vec![piece] })
    }

    /// Adaptive construction from a real-valued callable.
    pub fn from_fn(f: impl Fn(f64) -> f64, dom: Domain, tol: f64) -> Result<Self> {
        Self::from_callable(move |x| Complex64::new(f(x), 0.0), dom, tol)
    }

    /// Single-piece function from unit-interval Chebyshev coefficients.
    pub fn from_coeffs(coeffs: Vec<Complex64>, dom: Domain) -> Self {
        let coeffs = if coeffs.is_empty() { vec![Complex64::default()] } else { coeffs };
        ChebFun { dom, pieces: vec![Piece { dom, coeffs }] }
    }

    /// Build from explicit pieces; subintervals must tile `dom` in order.
    pub fn from_piece_coeffs(
        dom: Domain,
        pieces: Vec<(Domain, Vec<Complex64>)>,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidBreakpoints);
        }
        let scale = dom.length();
        let mut prev = dom.a;
        for (sub, _) in &pieces {
            if !Domain::approx_eq(sub.a, prev, scale) {
                return Err(Error::InvalidBreakpoints);
            }
            prev = sub.b;
        }
        if !Domain::approx_eq(prev, dom.b, scale) {
            return Err(Error::InvalidBreakpoints);
        }
        let pieces = pieces
            .into_iter()
            .map(|(d, c)| Piece {
                dom: d,
                coeffs: if c.is_empty() { vec![Complex64::default()] } else { c },
            })
            .collect();
        Ok(ChebFun { dom, pieces })
    }

    /// Piecewise construction: one callable per subinterval delimited by the
    /// strictly increasing interior `breaks`. No continuity is enforced.
    pub fn piecewise(
        dom: Domain,
        breaks: &[f64],
        fns: &[&dyn Fn(f64) -> Complex64],
        tol: f64,
    ) -> Result<Self> {
        if fns.len() != breaks.len() + 1 {
            return Err(Error::ShapeMismatch {
                expected: format!("{} piece functions", breaks.len() + 1),
                got: format!("{}", fns.len()),
            });
        }
        let mut edges = vec![dom.a];
        for &x in breaks {
            if x <= *edges.last().unwrap() || x >= dom.b {
                return Err(Error::InvalidBreakpoints);
            }
            edges.push(x);
        }
        edges.push(dom.b);
        let mut pieces = Vec::with_capacity(fns.len());
        for (i, f) in fns.iter().enumerate() {
            let sub = Domain::new(edges[i], edges[i + 1])?;
            pieces.push(adaptive_piece(f, sub, tol)?);
        }
        Ok(ChebFun { dom, pieces })
    }

    pub fn constant(c: Complex64, dom: Domain) -> Self {
        Self::from_coeffs(vec![c], dom)
    }

    pub fn zero(dom: Domain) -> Self {
        Self::constant(Complex64::default(), dom)
    }

    /// `T_k` mapped affinely onto `dom`.
    pub fn chebyshev_t(k: usize, dom: Domain) -> Self {
        let mut coeffs = vec![Complex64::default(); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Self::from_coeffs(coeffs, dom)
    }

    /// Legendre polynomial `P_k` mapped affinely onto `dom`.
    pub fn legendre_p(k: usize, dom: Domain) -> Self {
        Self::from_fn(
            move |x| {
                let t = dom.to_unit(x);
                let (mut p0, mut p1) = (1.0, t);
                if k == 0 {
                    return p0;
                }
                for m in 1..k {
                    let p2 = ((2 * m + 1) as f64 * t * p1 - m as f64 * p0)
                        / (m + 1) as f64;
                    p0 = p1;
                    p1 = p2;
                }
                p1
            },
            dom,
            DEFAULT_TOL,
        )
        .expect("polynomial always resolves")
    }

    /// The coordinate function `x` on `dom`.
    pub fn identity_x(dom: Domain) -> Self {
        let mid = 0.5 * (dom.a + dom.b);
        let half = 0.5 * dom.length();
        Self::from_coeffs(
            vec![Complex64::new(mid, 0.0), Complex64::new(half, 0.0)],
            dom,
        )
    }

    pub fn domain(&self) -> Domain {
        self.dom
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces[..self.pieces.len() - 1]
            .iter()
            .map(|p| p.dom.b)
            .collect()
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(|p| p.coeffs.len() - 1).max().unwrap_or(0)
    }

    /// Coefficient-magnitude proxy for the function scale.
    pub fn vscale(&self) -> f64 {
        self.pieces.iter().map(|p| p.vscale()).fold(0.0, f64::max)
    }

    fn piece_for(&self, x: f64, side: Side) -> &Piece {
        for (i, p) in self.pieces.iter().enumerate() {
            let last = i + 1 == self.pieces.len();
            match side {
                Side::Right => {
                    if x < p.dom.b || last {
                        return p;
                    }
                }
                Side::Left => {
                    if x <= p.dom.b || last {
                        return p;
                    }
                }
            }
        }
        unreachable!()
    }

    /// Evaluate at `x`; at interior breakpoints the right piece wins.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if !self.dom.contains(x) {
            return Err(Error::OutOfDomain { x, a: self.dom.a, b: self.dom.b });
        }
        Ok(self.piece_for(x, Side::Right).eval(x))
    }

    /// One-sided evaluation at `x` (used for interface conditions).
    pub fn eval_side(&self, x: f64, side: Side) -> Result<Complex64> {
        if !self.dom.contains(x) {
            return Err(Error::OutOfDomain { x, a: self.dom.a, b: self.dom.b });
        }
        // At the left endpoint only the right limit exists, and vice versa.
        let side = if x <= self.dom.a {
            Side::Right
        } else if x >= self.dom.b {
            Side::Left
        } else {
            side
        };
        Ok(self.piece_for(x, side).eval(x))
    }

    /// `k`-fold derivative.
    pub fn derivative(&self, k: usize) -> ChebFun {
        let mut out = self.clone();
        for _ in 0..k {
            for p in &mut out.pieces {
                let factor = 2.0 / p.dom.length();
                let mut d = cheb::diff_coeffs(&p.coeffs);
                for c in &mut d {
                    *c *= factor;
                }
                p.coeffs = d;
            }
        }
        out
    }

    /// `k`-fold indefinite integral vanishing (with all lower-order
    /// integrals) at the left endpoint; continuous across pieces.
    pub fn cumsum(&self, k: usize) -> ChebFun {
        let mut out = self.clone();
        for _ in 0..k {
            let mut acc = Complex64::default();
            for p in &mut out.pieces {
                let factor = 0.5 * p.dom.length();
                let mut b = cheb::cumsum_coeffs(&p.coeffs);
                for c in &mut b {
                    *c *= factor;
                }
                b[0] += acc;
                // Value at the right end of the piece: sum of coefficients.
                acc = b.iter().sum();
                p.coeffs = b;
            }
        }
        out
    }

    pub fn definite_integral(&self) -> Complex64 {
        self.pieces
            .iter()
            .map(|p| cheb::integrate_coeffs(&p.coeffs) * (0.5 * p.dom.length()))
            .sum()
    }

    pub fn conj(&self) -> ChebFun {
        let mut out = self.clone();
        for p in &mut out.pieces {
            for c in &mut p.coeffs {
                *c = c.conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> ChebFun {
        let mut out = self.clone();
        for p in &mut out.pieces {
            for c in &mut p.coeffs {
                *c *= s;
            }
        }
        out
    }

    /// Union of the two functions' breakpoints, merged with a relative tolerance.
    fn union_breaks(&self, other: &ChebFun) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .chain(other.breakpoints())
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = self.dom.length();
        let mut merged: Vec<f64> = Vec::new();
        for x in all {
            if merged.last().map_or(true, |&p| !Domain::approx_eq(p, x, scale)) {
                merged.push(x);
            }
        }
        merged
    }

    /// Re-split onto the given interior breakpoints (a superset of our own).
    fn on_breaks(&self, breaks: &[f64]) -> ChebFun {
        let mut edges = vec![self.dom.a];
        edges.extend_from_slice(breaks);
        edges.push(self.dom.b);
        let mut pieces = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let sub = Domain { a: w[0], b: w[1] };
            let mid = 0.5 * (w[0] + w[1]);
            let src = self.piece_for(mid, Side::Right);
            if Domain::approx_eq(src.dom.a, sub.a, self.dom.length())
                && Domain::approx_eq(src.dom.b, sub.b, self.dom.length())
            {
                pieces.push(src.clone());
            } else {
                pieces.push(src.restrict(sub));
            }
        }
        ChebFun { dom: self.dom, pieces }
    }

    fn aligned(&self, other: &ChebFun) -> Result<(ChebFun, ChebFun)> {
        let sd = self.dom;
        let od = other.dom;
        if !(Domain::approx_eq(sd.a, od.a, sd.length())
            && Domain::approx_eq(sd.b, od.b, sd.length()))
        {
            return Err(Error::DomainMismatch);
        }
        let breaks = self.union_breaks(other);
        Ok((self.on_breaks(&breaks), other.on_breaks(&breaks)))
    }

    pub fn add(&self, other: &ChebFun) -> Result<ChebFun> {
        let (mut a, b) = self.aligned(other)?;
        for (pa, pb) in a.pieces.iter_mut().zip(&b.pieces) {
            if pa.coeffs.len() < pb.coeffs.len() {
                pa.coeffs.resize(pb.coeffs.len(), Complex64::default());
            }
            for (ca, cb) in pa.coeffs.iter_mut().zip(&pb.coeffs) {
                *ca += cb;
            }
        }
        Ok(a)
    }

    pub fn sub(&self, other: &ChebFun) -> Result<ChebFun> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Pointwise product; the result carries the union of both breakpoint sets.
    pub fn multiply(&self, other: &ChebFun) -> Result<ChebFun> {
        let (a, b) = self.aligned(other)?;
        let mut pieces = Vec::with_capacity(a.pieces.len());
        for (pa, pb) in a.pieces.iter().zip(&b.pieces) {
            let la = pa.coeffs.len();
            let lb = pb.coeffs.len();
            let n = la + lb - 1;
            if n > DEGREE_CAP + 1 {
                return Err(Error::Unresolved { tol: DEFAULT_TOL, cap: DEGREE_CAP });
            }
            let mut ca = pa.coeffs.clone();
            let mut cb = pb.coeffs.clone();
            ca.resize(n, Complex64::default());
            cb.resize(n, Complex64::default());
            let va = cheb::coeffs2vals(&ca);
            let vb = cheb::coeffs2vals(&cb);
            let prod: Vec<Complex64> = va.iter().zip(&vb).map(|(x, y)| x * y).collect();
            let mut coeffs = cheb::vals2coeffs(&prod);
            chop_in_place(&mut coeffs, 1e-15);
            pieces.push(Piece { dom: pa.dom, coeffs });
        }
        Ok(ChebFun { dom: a.dom, pieces })
    }

    /// `int conj(self) * other` over the domain.
    pub fn inner(&self, other: &ChebFun) -> Result<Complex64> {
        let (a, b) = self.aligned(other)?;
        let mut s = Complex64::default();
        for (pa, pb) in a.pieces.iter().zip(&b.pieces) {
            let la = pa.coeffs.len();
            let lb = pb.coeffs.len();
            let piece_val = if la * lb <= 1 << 18 {
                cheb::pair_integral(&pa.coeffs, &pb.coeffs)
            } else {
                // FFT path for high-degree pieces.
                let conj_coeffs: Vec<Complex64> =
                    pa.coeffs.iter().map(|c| c.conj()).collect();
                let n = la + lb - 1;
                let mut ca = conj_coeffs;
                let mut cb = pb.coeffs.clone();
                ca.resize(n, Complex64::default());
                cb.resize(n, Complex64::default());
                let va = cheb::coeffs2vals(&ca);
                let vb = cheb::coeffs2vals(&cb);
                let prod: Vec<Complex64> = va.iter().zip(&vb).map(|(x, y)| x * y).collect();
                cheb::integrate_coeffs(&cheb::vals2coeffs(&prod))
            };
            s += piece_val * (0.5 * pa.dom.length());
        }
        Ok(s)
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).map(|v| v.re.max(0.0).sqrt()).unwrap_or(0.0)
    }
}
