//! Pseudospectra of quasimatrix pencils: the normalized smallest singular
//! value `sigma_min(z B - A) / sqrt(1 + |z|^2)` evaluated pointwise or on a
//! rectangular grid. One QR of the concatenation `[A B]` is shared across
//! all evaluation points, so a grid costs one quasimatrix factorization
//! plus a dense SVD per node.

use crate::dense;
use crate::error::{Error, Result};
use crate::quasimatrix::Quasimatrix;
use ndarray::{s, Array2};
use num_complex::Complex64;
use std::io::Write;

type C = Complex64;

/// Reusable factorization for pseudospectrum evaluations of one pencil:
/// with `[A B] = Q R`, the function value at `z` is
/// `sigma_min(R [-I; zI]) / sqrt(1 + |z|^2)`.
#[derive(Debug, Clone)]
pub struct PseudoCache {
    r: Array2<C>,
    n: usize,
}

impl PseudoCache {
    pub fn new(a: &Quasimatrix, b: &Quasimatrix) -> Result<Self> {
        let n = a.ncols();
        if b.ncols() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n} columns"),
                got: format!("{}", b.ncols()),
            });
        }
        let (_, r) = a.hcat(b)?.qr()?;
        Ok(PseudoCache { r, n })
    }

    pub fn sigma_min_at(&self, z: C) -> f64 {
        let n = self.n;
        // M(z) = R * [-I; zI] = z R_right - R_left.
        let left = self.r.slice(s![.., 0..n]);
        let right = self.r.slice(s![.., n..2 * n]);
        let m = right.mapv(|v| v * z) - &left;
        let (_, sig, _) = dense::svd(&m);
        let smin = sig.last().copied().unwrap_or(0.0);
        smin / (1.0 + z.norm_sqr()).sqrt()
    }
}

/// The pseudospectrum function at a single point.
pub fn sigma_min_at(a: &Quasimatrix, b: &Quasimatrix, z: C) -> Result<f64> {
    Ok(PseudoCache::new(a, b)?.sigma_min_at(z))
}

/// Grid of pseudospectrum values; `values[[i, j]]` corresponds to
/// `im_points[i]` and `re_points[j]`.
#[derive(Debug, Clone)]
pub struct PseudoGrid {
    pub re_points: Vec<f64>,
    pub im_points: Vec<f64>,
    pub values: Array2<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Evaluate the pseudospectrum function over a rectangular grid.
pub fn grid_eval(
    a: &Quasimatrix,
    b: &Quasimatrix,
    re_range: (f64, f64),
    im_range: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<PseudoGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidConfig("grid_eval needs nx, ny >= 2".into()));
    }
    let cache = PseudoCache::new(a, b)?;
    let re_points = linspace(re_range.0, re_range.1, nx);
    let im_points = linspace(im_range.0, im_range.1, ny);
    let mut values = Array2::<f64>::zeros((ny, nx));
    for (i, &y) in im_points.iter().enumerate() {
        for (j, &x) in re_points.iter().enumerate() {
            values[[i, j]] = cache.sigma_min_at(C::new(x, y));
        }
    }
    Ok(PseudoGrid { re_points, im_points, values })
}

impl PseudoGrid {
    /// CSV layout: header row of re_points (first cell blank), then one row
    /// per im_point: the im value followed by the grid values. 17
    /// significant digits throughout.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        write!(w, "im\\re")?;
        for x in &self.re_points {
            write!(w, ",{x:.16e}")?;
        }
        writeln!(w)?;
        for (i, y) in self.im_points.iter().enumerate() {
            write!(w, "{y:.16e}")?;
            for j in 0..self.re_points.len() {
                write!(w, ",{:.16e}", self.values[[i, j]])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
