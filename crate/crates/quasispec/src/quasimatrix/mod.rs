//! Quasimatrices: matrices with finitely many columns, each column a
//! function on a common interval. Factorizations are realized on a
//! Clenshaw-Curtis grid fine enough that all inner products among columns
//! are computed by exact quadrature, so the discrete Gram-Schmidt sweep
//! coincides with the continuous one.

use crate::dense;
use crate::error::{Error, Result};
use crate::funcore::{cheb, ChebFun, Domain};
use ndarray::{Array1, Array2};
use num_complex::Complex64;

type C = Complex64;

/// Relative threshold below which a diagonal R entry is treated as zero.
pub const RANK_TOL: f64 = 1e-13;

/// An infinity-by-n matrix: an ordered list of function columns on a shared
/// domain.
#[derive(Debug, Clone)]
pub struct Quasimatrix {
    dom: Domain,
    cols: Vec<ChebFun>,
}

/// SVD of a function-valued matrix; the left factor type varies by context.
#[derive(Debug, Clone)]
pub struct SvdFactors<L> {
    pub u: L,
    pub s: Vec<f64>,
    pub v: Array2<C>,
}

impl<L> SvdFactors<L> {
    /// Block partition of V for a factorization of a two-block column
    /// concatenation `[A B]` with `split` columns in A: returns
    /// `(V11, V21)` = top and bottom halves of the first `keep` columns.
    pub fn v_blocks(&self, split: usize, keep: usize) -> (Array2<C>, Array2<C>) {
        let total = self.v.nrows();
        let v11 = self.v.slice(ndarray::s![0..split, 0..keep]).to_owned();
        let v21 = self.v.slice(ndarray::s![split..total, 0..keep]).to_owned();
        (v11, v21)
    }

    /// Trailing-column counterpart: `(V12, V22)` from columns `keep..`.
    pub fn v_blocks_trailing(&self, split: usize, keep: usize) -> (Array2<C>, Array2<C>) {
        let total = self.v.nrows();
        let v12 = self.v.slice(ndarray::s![0..split, keep..]).to_owned();
        let v22 = self.v.slice(ndarray::s![split..total, keep..]).to_owned();
        (v12, v22)
    }
}

/// Quadrature realization shared by all columns: per piece, Clenshaw-Curtis
/// points and weights fine enough for exact products.
pub struct Grid {
    pub pieces: Vec<GridPiece>,
    /// Square roots of all quadrature weights, flattened in piece order.
    pub sqrt_w: Vec<f64>,
    pub len: usize,
}

pub struct GridPiece {
    pub dom: Domain,
    /// Number of points on this piece.
    pub npts: usize,
    /// Offset of this piece's block in the flattened vectors.
    pub offset: usize,
}

impl Grid {
    /// Build a grid for a set of functions: union of their breakpoints, and
    /// on each piece twice the maximal degree plus two points, so that
    /// quadrature of any pairwise product is exact.
    pub fn for_functions<'a>(
        dom: Domain,
        funcs: impl Iterator<Item = &'a ChebFun> + Clone,
    ) -> Grid {
        let mut breaks: Vec<f64> = Vec::new();
        for f in funcs.clone() {
            breaks.extend(f.breakpoints());
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = dom.length();
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);
        let mut edges = vec![dom.a];
        edges.extend(breaks);
        edges.push(dom.b);

        let mut pieces = Vec::with_capacity(edges.len() - 1);
        let mut sqrt_w = Vec::new();
        let mut offset = 0;
        for w in edges.windows(2) {
            let sub = Domain { a: w[0], b: w[1] };
            let mid = 0.5 * (sub.a + sub.b);
            let mut maxdeg = 0usize;
            for f in funcs.clone() {
                // Degree of the piece covering this subinterval.
                for p in f.pieces() {
                    if p.dom.contains(mid) {
                        maxdeg = maxdeg.max(p.coeffs.len() - 1);
                        break;
                    }
                }
            }
            let npts = 2 * maxdeg + 2;
            let wts = cheb::cc_weights(npts - 1);
            let half = 0.5 * sub.length();
            for &wj in &wts {
                sqrt_w.push((wj * half).sqrt());
            }
            pieces.push(GridPiece { dom: sub, npts, offset });
            offset += npts;
        }
        Grid { pieces, sqrt_w, len: offset }
    }

    /// Weighted sample vector of `f` on the grid: `sqrt(w_i) f(x_i)`.
    pub fn realize(&self, f: &ChebFun) -> Array1<C> {
        let mut out = Array1::<C>::zeros(self.len);
        for gp in &self.pieces {
            let mid = 0.5 * (gp.dom.a + gp.dom.b);
            // Source piece covering this grid piece.
            let src = f
                .pieces()
                .iter()
                .find(|p| p.dom.contains(mid))
                .expect("grid piece not covered");
            let pts = cheb::cheb_points(gp.npts - 1);
            let same = (src.dom.a - gp.dom.a).abs() <= 1e-12 * f.domain().length()
                && (src.dom.b - gp.dom.b).abs() <= 1e-12 * f.domain().length();
            if same {
                let mut coeffs = src.coeffs.clone();
                coeffs.resize(coeffs.len().max(gp.npts), C::default());
                if coeffs.len() == gp.npts {
                    let vals = cheb::coeffs2vals(&coeffs);
                    for (k, v) in vals.into_iter().enumerate() {
                        out[gp.offset + k] = v;
                    }
                } else {
                    for (k, &t) in pts.iter().enumerate() {
                        out[gp.offset + k] = cheb::clenshaw(&src.coeffs, t);
                    }
                }
            } else {
                for (k, &t) in pts.iter().enumerate() {
                    let x = gp.dom.from_unit(t);
                    let tloc = src.dom.to_unit(x).clamp(-1.0, 1.0);
                    out[gp.offset + k] = cheb::clenshaw(&src.coeffs, tloc);
                }
            }
        }
        for i in 0..self.len {
            out[i] *= self.sqrt_w[i];
        }
        out
    }

    /// Reconstruct a function from a weighted sample vector.
    pub fn unrealize(&self, dom: Domain, v: &Array1<C>) -> ChebFun {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for gp in &self.pieces {
            let mut vals = Vec::with_capacity(gp.npts);
            for k in 0..gp.npts {
                let i = gp.offset + k;
                let w = self.sqrt_w[i];
                vals.push(if w > 0.0 { v[i] / w } else { C::default() });
            }
            // Endpoint weights vanish for Clenshaw-Curtis with > 1 point;
            // fill those values by polynomial evaluation is unnecessary:
            // weights are strictly positive for CC on open interior and the
            // endpoint weights are positive too (2/(N^2-1) pattern), so the
            // division above is always valid in practice.
            let mut coeffs = cheb::vals2coeffs(&vals);
            let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if scale > 0.0 {
                let cut = 1e-14 * scale;
                let mut last = 0;
                for (k, c) in coeffs.iter().enumerate() {
                    if c.norm() > cut {
                        last = k;
                    }
                }
                coeffs.truncate(last + 1);
            } else {
                coeffs.truncate(1);
            }
            pieces.push((gp.dom, coeffs));
        }
        ChebFun::from_piece_coeffs(dom, pieces).expect("grid pieces tile the domain")
    }
}

fn complex_dot(a: &Array1<C>, b: &Array1<C>) -> C {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn vec_norm(a: &Array1<C>) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

impl Quasimatrix {
    pub fn new(cols: Vec<ChebFun>) -> Result<Self> {
        let first = cols.first().ok_or_else(|| Error::ShapeMismatch {
            expected: "at least one column".into(),
            got: "0 columns".into(),
        })?;
        let dom = first.domain();
        for c in &cols[1..] {
            let d = c.domain();
            if (d.a - dom.a).abs() > 1e-12 * dom.length()
                || (d.b - dom.b).abs() > 1e-12 * dom.length()
            {
                return Err(Error::DomainMismatch);
            }
        }
        Ok(Quasimatrix { dom, cols })
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn domain(&self) -> Domain {
        self.dom
    }

    pub fn col(&self, j: usize) -> &ChebFun {
        &self.cols[j]
    }

    pub fn cols(&self) -> &[ChebFun] {
        &self.cols
    }

    /// Column concatenation `[self other]`.
    pub fn hcat(&self, other: &Quasimatrix) -> Result<Quasimatrix> {
        let mut cols = self.cols.clone();
        cols.extend(other.cols.iter().cloned());
        Quasimatrix::new(cols)
    }

    /// `A c`: linear combination of the columns.
    pub fn apply(&self, c: &Array1<C>) -> Result<ChebFun> {
        if c.len() != self.cols.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} coefficients", self.cols.len()),
                got: format!("{}", c.len()),
            });
        }
        let grid = Grid::for_functions(self.dom, self.cols.iter());
        let mut acc = Array1::<C>::zeros(grid.len);
        for (j, col) in self.cols.iter().enumerate() {
            if c[j] == C::default() {
                continue;
            }
            let v = grid.realize(col);
            for i in 0..grid.len {
                acc[i] += c[j] * v[i];
            }
        }
        Ok(grid.unrealize(self.dom, &acc))
    }

    /// `A^* f`: vector of inner products of the columns with `f`.
    pub fn adjoint_apply(&self, f: &ChebFun) -> Result<Array1<C>> {
        let mut out = Array1::<C>::zeros(self.cols.len());
        for (j, col) in self.cols.iter().enumerate() {
            out[j] = col.inner(f)?;
        }
        Ok(out)
    }

    /// `A^* B` as a dense matrix of pairwise inner products, computed on a
    /// shared exact grid.
    pub fn adjoint_mul(&self, other: &Quasimatrix) -> Result<Array2<C>> {
        if (self.dom.a - other.dom.a).abs() > 1e-12 * self.dom.length()
            || (self.dom.b - other.dom.b).abs() > 1e-12 * self.dom.length()
        {
            return Err(Error::DomainMismatch);
        }
        let grid = Grid::for_functions(self.dom, self.cols.iter().chain(other.cols.iter()));
        let lhs: Vec<Array1<C>> = self.cols.iter().map(|c| grid.realize(c)).collect();
        let rhs: Vec<Array1<C>> = other.cols.iter().map(|c| grid.realize(c)).collect();
        let mut g = Array2::<C>::zeros((self.cols.len(), other.cols.len()));
        for (i, a) in lhs.iter().enumerate() {
            for (j, b) in rhs.iter().enumerate() {
                g[[i, j]] = complex_dot(a, b);
            }
        }
        Ok(g)
    }

    /// `A M` for a dense matrix M.
    pub fn mul_matrix(&self, m: &Array2<C>) -> Result<Quasimatrix> {
        if m.nrows() != self.cols.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows", self.cols.len()),
                got: format!("{}", m.nrows()),
            });
        }
        let grid = Grid::for_functions(self.dom, self.cols.iter());
        let realized: Vec<Array1<C>> = self.cols.iter().map(|c| grid.realize(c)).collect();
        let mut out = Vec::with_capacity(m.ncols());
        for j in 0..m.ncols() {
            let mut acc = Array1::<C>::zeros(grid.len);
            for (k, rv) in realized.iter().enumerate() {
                let s = m[[k, j]];
                if s == C::default() {
                    continue;
                }
                for i in 0..grid.len {
                    acc[i] += s * rv[i];
                }
            }
            out.push(grid.unrealize(self.dom, &acc));
        }
        Quasimatrix::new(out)
    }

    /// Frobenius norm: root sum of squared column norms.
    pub fn norm_frobenius(&self) -> f64 {
        self.cols
            .iter()
            .map(|c| c.norm_l2().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Operator 2-norm: the largest singular value.
    pub fn norm2(&self) -> Result<f64> {
        let f = self.svd()?;
        Ok(f.s.first().copied().unwrap_or(0.0))
    }

    /// Householder-free QR by modified Gram-Schmidt with one full
    /// reorthogonalization pass, carried out on the exact quadrature grid.
    /// Columns whose residual norm falls below `RANK_TOL` times the largest
    /// initial column norm are replaced by an orthonormalized fresh
    /// direction and get an exactly zero row of R.
    pub fn qr(&self) -> Result<(Quasimatrix, Array2<C>)> {
        let n = self.cols.len();
        // Include the replacement-candidate pool so the grid stays exact
        // even when a rank-deficient column is swapped for a fresh T_k.
        let candidates: Vec<ChebFun> = (0..n + 8)
            .map(|k| ChebFun::chebyshev_t(k, self.dom))
            .collect();
        let grid = Grid::for_functions(self.dom, self.cols.iter().chain(candidates.iter()));
        let realized: Vec<Array1<C>> = self.cols.iter().map(|c| grid.realize(c)).collect();
        let scale = realized.iter().map(vec_norm).fold(0.0, f64::max).max(1e-300);
        let mut qs: Vec<Array1<C>> = Vec::with_capacity(n);
        let mut r = Array2::<C>::zeros((n, n));
        for j in 0..n {
            let mut v = realized[j].clone();
            for pass in 0..2 {
                for (k, q) in qs.iter().enumerate() {
                    let d = complex_dot(q, &v);
                    if pass == 0 {
                        r[[k, j]] = d;
                    } else {
                        r[[k, j]] += d;
                    }
                    for i in 0..grid.len {
                        let t = d * q[i];
                        v[i] -= t;
                    }
                }
            }
            let nrm = vec_norm(&v);
            if nrm > RANK_TOL * scale {
                r[[j, j]] = C::new(nrm, 0.0);
                for c in v.iter_mut() {
                    *c /= nrm;
                }
                qs.push(v);
            } else {
                // Rank-deficient column: zero diagonal, fresh direction for Q.
                r[[j, j]] = C::default();
                let q = fresh_direction(&grid, self.dom, &qs)?;
                qs.push(q);
            }
        }
        let qcols: Vec<ChebFun> = qs.iter().map(|v| grid.unrealize(self.dom, v)).collect();
        Ok((Quasimatrix::new(qcols)?, r))
    }

    /// SVD through QR: `A = Q R`, then a dense SVD of R.
    pub fn svd(&self) -> Result<SvdFactors<Quasimatrix>> {
        let (q, r) = self.qr()?;
        let (ur, s, v) = dense::svd(&r);
        let u = q.mul_matrix(&ur)?;
        Ok(SvdFactors { u, s, v })
    }

    /// SVD of the column concatenation `[self other]`.
    pub fn hcat_svd(&self, other: &Quasimatrix) -> Result<SvdFactors<Quasimatrix>> {
        self.hcat(other)?.svd()
    }
}

/// Produce a unit-norm grid vector orthogonal to all of `qs`, starting from
/// low-degree Chebyshev polynomials.
fn fresh_direction(grid: &Grid, dom: Domain, qs: &[Array1<C>]) -> Result<Array1<C>> {
    for deg in 0..(qs.len() + 8) {
        let cand_f = ChebFun::chebyshev_t(deg, dom);
        let mut v = grid.realize(&cand_f);
        let nrm0 = vec_norm(&v);
        if nrm0 == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= nrm0;
        }
        for _ in 0..2 {
            for q in qs {
                let d = complex_dot(q, &v);
                for i in 0..v.len() {
                    let t = d * q[i];
                    v[i] -= t;
                }
            }
        }
        let nrm = vec_norm(&v);
        if nrm > 1e-2 {
            for c in v.iter_mut() {
                *c /= nrm;
            }
            return Ok(v);
        }
    }
    Err(Error::RankDeficient)
}

#[cfg(test)]
mod tests;
