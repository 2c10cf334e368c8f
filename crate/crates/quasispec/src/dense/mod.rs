//! Dense complex linear algebra: thin Householder QR, one-sided Jacobi SVD,
//! triangular solves, and a generalized eigensolver backed by LAPACK's zggev.

mod gep;

pub use gep::{dense_gep, GepPair};

use ndarray::{Array1, Array2};
use num_complex::Complex64;

type C = Complex64;

/// Thin QR `A = Q R` of an m x n matrix with m >= n; Q is m x n with
/// orthonormal columns, R is n x n upper triangular.
pub fn householder_qr(a: &Array2<C>) -> (Array2<C>, Array2<C>) {
    let (m, n) = a.dim();
    assert!(m >= n, "householder_qr needs m >= n");
    let mut r = a.clone();
    // Householder vectors stored column-wise.
    let mut vs: Vec<Array1<C>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = Array1::<C>::zeros(m);
        for i in k..m {
            v[i] = r[[i, k]];
        }
        let normx = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if normx > 0.0 {
            let x0 = v[k];
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C::new(1.0, 0.0) };
            v[k] += phase * normx;
            let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if vnorm > 0.0 {
                for c in v.iter_mut() {
                    *c /= vnorm;
                }
                // Apply I - 2 v v^* to the trailing columns of R.
                for j in k..n {
                    let dot: C = (k..m).map(|i| v[i].conj() * r[[i, j]]).sum();
                    for i in k..m {
                        let d = 2.0 * dot * v[i];
                        r[[i, j]] -= d;
                    }
                }
            }
        }
        vs.push(v);
    }
    // Zero the strictly lower part explicitly.
    let mut rr = Array2::<C>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            rr[[i, j]] = r[[i, j]];
        }
    }
    // Accumulate Q by applying the reflectors to the first n columns of I.
    let mut q = Array2::<C>::zeros((m, n));
    for j in 0..n {
        q[[j, j]] = C::new(1.0, 0.0);
    }
    for k in (0..n).rev() {
        let v = &vs[k];
        for j in 0..n {
            let dot: C = (k..m).map(|i| v[i].conj() * q[[i, j]]).sum();
            for i in k..m {
                let d = 2.0 * dot * v[i];
                q[[i, j]] -= d;
            }
        }
    }
    (q, rr)
}

/// Singular value decomposition `A = U diag(s) V^*` of an m x n matrix,
/// singular values descending. U is m x n, V is n x n (thin form; for m < n
/// the decomposition is taken through A^*).
pub fn svd(a: &Array2<C>) -> (Array2<C>, Vec<f64>, Array2<C>) {
    let (m, n) = a.dim();
    if m < n {
        let at = a.t().mapv(|c| c.conj());
        let (u, s, v) = svd_tall(&at);
        return (v, s, u);
    }
    svd_tall(a)
}

/// One-sided Jacobi SVD for m >= n.
fn svd_tall(a: &Array2<C>) -> (Array2<C>, Vec<f64>, Array2<C>) {
    let (m, n) = a.dim();
    assert!(m >= n);
    // Pre-QR keeps the Jacobi sweeps n x n.
    let (q, r) = householder_qr(a);
    let mut u = r; // n x n working matrix, becomes U_r * diag(s)
    let mut v = Array2::<C>::eye(n);
    let eps = 1e-15;
    let frob: f64 = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if frob > 0.0 {
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for qq in (p + 1)..n {
                    // Gram entries of columns p and q.
                    let mut app = 0.0f64;
                    let mut aqq = 0.0f64;
                    let mut apq = C::default();
                    for i in 0..n {
                        app += u[[i, p]].norm_sqr();
                        aqq += u[[i, qq]].norm_sqr();
                        apq += u[[i, p]].conj() * u[[i, qq]];
                    }
                    off = off.max(apq.norm() / frob.powi(2));
                    if apq.norm() <= eps * (app.sqrt() * aqq.sqrt()) {
                        continue;
                    }
                    // Complex Jacobi rotation zeroing the (p, q) Gram entry.
                    let phase = apq / apq.norm();
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let cth = 1.0 / (1.0 + t * t).sqrt();
                    let sth = cth * t;
                    for i in 0..n {
                        let up = u[[i, p]];
                        let uq = u[[i, qq]];
                        u[[i, p]] = cth * up - sth * phase.conj() * uq;
                        u[[i, qq]] = sth * phase * up + cth * uq;
                    }
                    for i in 0..n {
                        let vp = v[[i, p]];
                        let vq = v[[i, qq]];
                        v[[i, p]] = cth * vp - sth * phase.conj() * vq;
                        v[[i, qq]] = sth * phase * vp + cth * vq;
                    }
                }
            }
            if off < 1e-30 {
                break;
            }
        }
    }
    // Column norms are the singular values.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| u[[i, j]].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
    let mut s = Vec::with_capacity(n);
    let mut ur = Array2::<C>::zeros((n, n));
    let mut vv = Array2::<C>::zeros((n, n));
    let tiny = 1e-300;
    for (dst, &src) in order.iter().enumerate() {
        let sv = norms[src];
        s.push(sv);
        for i in 0..n {
            vv[[i, dst]] = v[[i, src]];
            ur[[i, dst]] = if sv > tiny { u[[i, src]] / sv } else { C::default() };
        }
    }
    // Complete zero-singular-value columns of U_r to an orthonormal set.
    for j in 0..n {
        if s[j] > tiny {
            continue;
        }
        for seed in 0..n {
            let mut cand = Array1::<C>::zeros(n);
            cand[seed] = C::new(1.0, 0.0);
            for k in 0..n {
                if s[k] <= tiny && k >= j {
                    continue;
                }
                let dot: C = (0..n).map(|i| ur[[i, k]].conj() * cand[i]).sum();
                for i in 0..n {
                    let d = dot * ur[[i, k]];
                    cand[i] -= d;
                }
            }
            let nrm = cand.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 1e-3 {
                for i in 0..n {
                    ur[[i, j]] = cand[i] / nrm;
                }
                break;
            }
        }
    }
    (q.dot(&ur), s, vv)
}

/// Solve `R x = b` for upper-triangular R.
pub fn solve_upper_triangular(r: &Array2<C>, b: &Array1<C>) -> Array1<C> {
    let n = r.nrows();
    let mut x = b.clone();
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= r[[i, j]] * x[j];
        }
        x[i] = s / r[[i, i]];
    }
    x
}

/// Frobenius norm.
pub fn frob_norm(a: &Array2<C>) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `A^* B`.
pub fn adjoint_mul(a: &Array2<C>, b: &Array2<C>) -> Array2<C> {
    a.t().mapv(|c| c.conj()).dot(b)
}

#[cfg(test)]
mod tests;
