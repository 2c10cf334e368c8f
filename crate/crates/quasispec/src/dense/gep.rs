//! Generalized eigenproblem `A x = lambda B x` for dense complex square
//! matrices via LAPACK's zggev (QZ iteration).

use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::os::raw::c_char;

type C = Complex64;

extern "C" {
    fn zggev_(
        jobvl: *const c_char,
        jobvr: *const c_char,
        n: *const i32,
        a: *mut C,
        lda: *const i32,
        b: *mut C,
        ldb: *const i32,
        alpha: *mut C,
        beta: *mut C,
        vl: *mut C,
        ldvl: *const i32,
        vr: *mut C,
        ldvr: *const i32,
        work: *mut C,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

/// One eigenpair of the pencil (A, B).
#[derive(Debug, Clone)]
pub struct GepPair {
    /// `alpha / beta`; infinite when `beta` underflows.
    pub lambda: C,
    /// Right eigenvector, unit 2-norm, first sizable entry rotated to the
    /// positive real axis.
    pub vector: Array1<C>,
}

fn to_col_major(a: &Array2<C>) -> Vec<C> {
    let (m, n) = a.dim();
    let mut v = Vec::with_capacity(m * n);
    for j in 0..n {
        for i in 0..m {
            v.push(a[[i, j]]);
        }
    }
    v
}

/// Solve the dense pencil; eigenvalues are returned sorted by descending real
/// part, ties broken by descending imaginary part. Infinite eigenvalues
/// (vanishing `beta`) sort last.
pub fn dense_gep(a: &Array2<C>, b: &Array2<C>) -> Result<Vec<GepPair>> {
    let n = a.nrows();
    if a.dim() != (n, n) || b.dim() != (n, n) {
        return Err(Error::ShapeMismatch {
            expected: format!("square {n} x {n} pencil"),
            got: format!("{:?} and {:?}", a.dim(), b.dim()),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut af = to_col_major(a);
    let mut bf = to_col_major(b);
    let mut alpha = vec![C::default(); n];
    let mut beta = vec![C::default(); n];
    let mut vr = vec![C::default(); n * n];
    let nn = n as i32;
    let jobvl = b'N' as c_char;
    let jobvr = b'V' as c_char;
    let mut info: i32 = 0;
    let lwork = (8 * n.max(2)) as i32;
    let mut work = vec![C::default(); lwork as usize];
    let mut rwork = vec![0.0f64; 8 * n];
    unsafe {
        zggev_(
            &jobvl,
            &jobvr,
            &nn,
            af.as_mut_ptr(),
            &nn,
            bf.as_mut_ptr(),
            &nn,
            alpha.as_mut_ptr(),
            beta.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr(),
            &nn,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::GepFailure(info));
    }
    let scale: f64 = alpha.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let mut pairs: Vec<GepPair> = (0..n)
        .map(|j| {
            let lambda = if beta[j].norm() <= 1e-300 * scale {
                C::new(f64::INFINITY, 0.0)
            } else {
                alpha[j] / beta[j]
            };
            let mut vector = Array1::from_iter((0..n).map(|i| vr[j * n + i]));
            normalize_vector(&mut vector);
            GepPair { lambda, vector }
        })
        .collect();
    pairs.sort_by(|x, y| compare_eigs(y.lambda, x.lambda));
    Ok(pairs)
}

/// Descending-real-part order with descending imaginary tiebreak; NaN and
/// infinity sort toward the end of a descending list's finite block is not
/// needed -- infinities have the largest real part and appear first.
pub fn compare_eigs(x: C, y: C) -> std::cmp::Ordering {
    let key = |c: C| (c.re, c.im);
    let (xr, xi) = key(x);
    let (yr, yi) = key(y);
    xr.partial_cmp(&yr)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(xi.partial_cmp(&yi).unwrap_or(std::cmp::Ordering::Equal))
}

/// Unit 2-norm, with the first entry of magnitude above 1e-8 times the max
/// rotated real positive.
pub fn normalize_vector(v: &mut Array1<C>) {
    let nrm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if nrm == 0.0 {
        return;
    }
    for c in v.iter_mut() {
        *c /= nrm;
    }
    let vmax = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|c| c.norm() > 1e-8 * vmax) {
        let phase = first / first.norm();
        for c in v.iter_mut() {
            *c /= phase;
        }
    }
}
