//! Block objects stacking a quasimatrix over a dense matrix: the
//! "(inf + d) x n" operators whose top rows are functions and whose bottom
//! rows carry boundary-condition data, together with their QR and SVD.

use crate::dense;
use crate::error::{Error, Result};
use crate::funcore::{ChebFun, Domain};
use crate::quasimatrix::{Grid, Quasimatrix, SvdFactors, RANK_TOL};
use ndarray::{concatenate, s, Array1, Array2, Axis};
use num_complex::Complex64;

type C = Complex64;

/// A function stacked over a d-vector; the image of a block quasimatrix.
#[derive(Debug, Clone)]
pub struct FunVec {
    pub fun: ChebFun,
    pub tail: Array1<C>,
}

impl FunVec {
    pub fn norm(&self) -> f64 {
        (self.fun.norm_l2().powi(2)
            + self.tail.iter().map(|c| c.norm_sqr()).sum::<f64>())
        .sqrt()
    }

    /// Sesquilinear inner product, conjugating `self`.
    pub fn inner(&self, other: &FunVec) -> Result<C> {
        if self.tail.len() != other.tail.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("tail length {}", self.tail.len()),
                got: format!("{}", other.tail.len()),
            });
        }
        let mut s = self.fun.inner(&other.fun)?;
        for (a, b) in self.tail.iter().zip(other.tail.iter()) {
            s += a.conj() * b;
        }
        Ok(s)
    }

    pub fn sub(&self, other: &FunVec) -> Result<FunVec> {
        Ok(FunVec {
            fun: self.fun.sub(&other.fun)?,
            tail: &self.tail - &other.tail,
        })
    }

    pub fn scale(&self, s: C) -> FunVec {
        FunVec {
            fun: self.fun.scale(s),
            tail: self.tail.mapv(|c| c * s),
        }
    }
}

/// A quasimatrix stacked over a d x n matrix.
#[derive(Debug, Clone)]
pub struct BlockQuasimatrix {
    pub top: Quasimatrix,
    pub bottom: Array2<C>,
}

impl BlockQuasimatrix {
    pub fn new(top: Quasimatrix, bottom: Array2<C>) -> Result<Self> {
        if bottom.ncols() != top.ncols() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} bottom columns", top.ncols()),
                got: format!("{}", bottom.ncols()),
            });
        }
        Ok(BlockQuasimatrix { top, bottom })
    }

    pub fn ncols(&self) -> usize {
        self.top.ncols()
    }

    pub fn nrows_bottom(&self) -> usize {
        self.bottom.nrows()
    }

    pub fn domain(&self) -> Domain {
        self.top.domain()
    }

    /// Column `j` as a FunVec.
    pub fn col(&self, j: usize) -> FunVec {
        FunVec {
            fun: self.top.col(j).clone(),
            tail: self.bottom.column(j).to_owned(),
        }
    }

    pub fn apply(&self, c: &Array1<C>) -> Result<FunVec> {
        Ok(FunVec {
            fun: self.top.apply(c)?,
            tail: self.bottom.dot(c),
        })
    }

    pub fn adjoint_apply(&self, w: &FunVec) -> Result<Array1<C>> {
        if w.tail.len() != self.bottom.nrows() {
            return Err(Error::ShapeMismatch {
                expected: format!("tail length {}", self.bottom.nrows()),
                got: format!("{}", w.tail.len()),
            });
        }
        let mut out = self.top.adjoint_apply(&w.fun)?;
        let bt = self.bottom.t().mapv(|c| c.conj()).dot(&w.tail);
        out += &bt;
        Ok(out)
    }

    /// Column concatenation `[self other]`; the bottoms concatenate too.
    pub fn hcat(&self, other: &BlockQuasimatrix) -> Result<BlockQuasimatrix> {
        if self.bottom.nrows() != other.bottom.nrows() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} bottom rows", self.bottom.nrows()),
                got: format!("{}", other.bottom.nrows()),
            });
        }
        let top = self.top.hcat(&other.top)?;
        let bottom = concatenate![Axis(1), self.bottom, other.bottom];
        BlockQuasimatrix::new(top, bottom)
    }

    pub fn norm_frobenius(&self) -> f64 {
        (self.top.norm_frobenius().powi(2)
            + self.bottom.iter().map(|c| c.norm_sqr()).sum::<f64>())
        .sqrt()
    }

    /// Weighted copy: function rows scaled by sqrt(alpha), matrix rows by
    /// sqrt(beta), so that unweighted FunVec norms of images realize the
    /// (alpha, beta)-weighted norm.
    pub fn scale_rows(&self, alpha: f64, beta: f64) -> Result<BlockQuasimatrix> {
        if !(alpha > 0.0) || !(beta > 0.0) {
            return Err(Error::NonPositiveWeight);
        }
        let sa = C::new(alpha.sqrt(), 0.0);
        let cols = self.top.cols().iter().map(|f| f.scale(sa)).collect();
        let top = Quasimatrix::new(cols)?;
        let bottom = self.bottom.mapv(|c| c * beta.sqrt());
        BlockQuasimatrix::new(top, bottom)
    }

    /// QR under the FunVec inner product: modified Gram-Schmidt with one
    /// reorthogonalization on the grid realization extended by the matrix
    /// rows (equivalent to the three-stage construction via a second thin
    /// QR of stacked R factors, and exact for the same reason).
    pub fn qr(&self) -> Result<(BlockQuasimatrix, Array2<C>)> {
        let n = self.ncols();
        let d = self.bottom.nrows();
        let dom = self.domain();
        let candidates: Vec<ChebFun> = (0..n + 8)
            .map(|k| ChebFun::chebyshev_t(k, dom))
            .collect();
        let grid = Grid::for_functions(
            dom,
            self.top.cols().iter().chain(candidates.iter()),
        );
        let m = grid.len + d;
        let realize = |j: usize| -> Array1<C> {
            let mut v = Array1::<C>::zeros(m);
            let g = grid.realize(self.top.col(j));
            v.slice_mut(s![0..grid.len]).assign(&g);
            v.slice_mut(s![grid.len..]).assign(&self.bottom.column(j));
            v
        };
        let realized: Vec<Array1<C>> = (0..n).map(realize).collect();
        let scale = realized
            .iter()
            .map(|v| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut qs: Vec<Array1<C>> = Vec::with_capacity(n);
        let mut r = Array2::<C>::zeros((n, n));
        for j in 0..n {
            let mut v = realized[j].clone();
            for pass in 0..2 {
                for (k, q) in qs.iter().enumerate() {
                    let dprod: C = q.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                    if pass == 0 {
                        r[[k, j]] = dprod;
                    } else {
                        r[[k, j]] += dprod;
                    }
                    for i in 0..m {
                        let t = dprod * q[i];
                        v[i] -= t;
                    }
                }
            }
            let nrm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if nrm > RANK_TOL * scale {
                r[[j, j]] = C::new(nrm, 0.0);
                for c in v.iter_mut() {
                    *c /= nrm;
                }
                qs.push(v);
            } else {
                r[[j, j]] = C::default();
                qs.push(fresh_block_direction(&grid, dom, d, &qs)?);
            }
        }
        let mut qcols = Vec::with_capacity(n);
        let mut qbot = Array2::<C>::zeros((d, n));
        for (j, v) in qs.iter().enumerate() {
            let topv = v.slice(s![0..grid.len]).to_owned();
            qcols.push(grid.unrealize(dom, &topv));
            qbot.column_mut(j).assign(&v.slice(s![grid.len..]));
        }
        Ok((
            BlockQuasimatrix::new(Quasimatrix::new(qcols)?, qbot)?,
            r,
        ))
    }

    /// SVD through QR plus a dense SVD of R.
    pub fn svd(&self) -> Result<SvdFactors<BlockQuasimatrix>> {
        let (q, r) = self.qr()?;
        let (ur, s, v) = dense::svd(&r);
        let u = BlockQuasimatrix::new(q.top.mul_matrix(&ur)?, q.bottom.dot(&ur))?;
        Ok(SvdFactors { u, s, v })
    }

    /// Columns `lo..hi` as a new block quasimatrix.
    pub fn col_range(&self, lo: usize, hi: usize) -> Result<BlockQuasimatrix> {
        let cols: Vec<ChebFun> = self.top.cols()[lo..hi].to_vec();
        BlockQuasimatrix::new(
            Quasimatrix::new(cols)?,
            self.bottom.slice(s![.., lo..hi]).to_owned(),
        )
    }
}

/// SVD of the 2x2 block `[[A B], [C D]]`: quasimatrix SVD of the column
/// concatenation with the dense rows stacked underneath.
pub fn block2x2_svd(
    a: &Quasimatrix,
    b: &Quasimatrix,
    c: &Array2<C>,
    d: &Array2<C>,
) -> Result<SvdFactors<BlockQuasimatrix>> {
    let n = a.ncols();
    if b.ncols() != n || c.ncols() != n || d.ncols() != n || c.nrows() != d.nrows() {
        return Err(Error::ShapeMismatch {
            expected: format!("four blocks of width {n} with matching bottom heights"),
            got: format!(
                "B: {}, C: {:?}, D: {:?}",
                b.ncols(),
                c.dim(),
                d.dim()
            ),
        });
    }
    let left = BlockQuasimatrix::new(a.clone(), c.clone())?;
    let right = BlockQuasimatrix::new(b.clone(), d.clone())?;
    left.hcat(&right)?.svd()
}

fn fresh_block_direction(
    grid: &Grid,
    dom: Domain,
    d: usize,
    qs: &[Array1<C>],
) -> Result<Array1<C>> {
    let m = grid.len + d;
    // Candidates: low-degree Chebyshev tops with zero tails, then unit tails.
    let mut candidates: Vec<Array1<C>> = Vec::new();
    for deg in 0..(qs.len() + 8) {
        let f = ChebFun::chebyshev_t(deg, dom);
        let mut v = Array1::<C>::zeros(m);
        v.slice_mut(s![0..grid.len]).assign(&grid.realize(&f));
        candidates.push(v);
    }
    for i in 0..d {
        let mut v = Array1::<C>::zeros(m);
        v[grid.len + i] = C::new(1.0, 0.0);
        candidates.push(v);
    }
    for mut v in candidates {
        let nrm0 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if nrm0 == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= nrm0;
        }
        for _ in 0..2 {
            for q in qs {
                let dprod: C = q.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                for i in 0..m {
                    let t = dprod * q[i];
                    v[i] -= t;
                }
            }
        }
        let nrm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-2 {
            for c in v.iter_mut() {
                *c /= nrm;
            }
            return Ok(v);
        }
    }
    Err(Error::RankDeficient)
}
