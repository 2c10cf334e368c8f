//! Rectangular generalized eigenproblems `A x = lambda B x` for tall pencils,
//! solved in the total-least-squares sense: SVD of the concatenation, a
//! square pencil on the V blocks, and the certificate that the computed
//! spectrum belongs to a minimally perturbed consistent pencil.

use crate::blockop::{block2x2_svd, BlockQuasimatrix};
use crate::dense;
pub use crate::dense::dense_gep;
use crate::error::{Error, Result};
use ndarray::{s, Array2};
use num_complex::Complex64;

type C = Complex64;

/// Spectrum of a rectangular pencil plus the Frobenius norm of the smallest
/// perturbation `[dA dB]` making the pencil consistent.
#[derive(Debug, Clone)]
pub struct RectEigOutput {
    pub lambdas: Vec<C>,
    /// Eigenvector coefficient columns, same order as `lambdas`.
    pub x: Array2<C>,
    pub pert_norm: f64,
}

fn adjoint(m: &Array2<C>) -> Array2<C> {
    m.t().mapv(|c| c.conj())
}

fn pencil_from_v_blocks(
    v11: &Array2<C>,
    v21: &Array2<C>,
    sigmas: &[f64],
    trailing: f64,
) -> Result<RectEigOutput> {
    let n = v11.ncols();
    // U1* A = Sigma1 V11*, U1* B = Sigma1 V21*.
    let mut s_mat = adjoint(v11);
    let mut t_mat = adjoint(v21);
    for i in 0..n {
        let sig = C::new(sigmas[i], 0.0);
        for j in 0..n {
            s_mat[[i, j]] *= sig;
            t_mat[[i, j]] *= sig;
        }
    }
    let pairs = dense_gep(&s_mat, &t_mat)?;
    let mut x = Array2::<C>::zeros((n, n));
    let mut lambdas = Vec::with_capacity(n);
    for (j, p) in pairs.iter().enumerate() {
        lambdas.push(p.lambda);
        x.column_mut(j).assign(&p.vector);
    }
    // Flag ill-conditioned eigenvector bases; diagonalizability of the
    // projected pencil is a hypothesis of the minimal-perturbation result.
    let (_, xs, _) = dense::svd(&x);
    if xs[n - 1] > 0.0 && xs[0] / xs[n - 1] > 1e8 {
        log::warn!(
            "eigenvector matrix condition {:.3e}; projected pencil may be near-defective",
            xs[0] / xs[n - 1]
        );
    }
    Ok(RectEigOutput { lambdas, x, pert_norm: trailing })
}

/// Discrete rectangular TLS eigensolver for tall dense pencils (m >= n):
/// SVD of `[A B]`, then the square pencil `V11* X = V21* X Lambda`.
pub fn itomurota_discrete(a: &Array2<C>, b: &Array2<C>) -> Result<RectEigOutput> {
    let (m, n) = a.dim();
    if b.dim() != (m, n) {
        return Err(Error::ShapeMismatch {
            expected: format!("{m} x {n}"),
            got: format!("{:?}", b.dim()),
        });
    }
    if m < n {
        return Err(Error::ShapeMismatch {
            expected: format!("at least {n} rows"),
            got: format!("{m}"),
        });
    }
    let mut ab = Array2::<C>::zeros((m, 2 * n));
    ab.slice_mut(s![.., 0..n]).assign(a);
    ab.slice_mut(s![.., n..]).assign(b);
    let (_, sig, v) = dense::svd(&ab);
    let v11 = v.slice(s![0..n, 0..n]).to_owned();
    let v21 = v.slice(s![n..2 * n, 0..n]).to_owned();
    let trailing: f64 = sig.iter().skip(n).map(|s| s * s).sum::<f64>().sqrt();
    pencil_from_v_blocks(&v11, &v21, &sig, trailing)
}

/// Continuous block extension: same construction with the SVD taken over
/// the block quasimatrix concatenation `[[A_top B_top], [A_bot B_bot]]`.
pub fn itomurota_block(
    a: &BlockQuasimatrix,
    b: &BlockQuasimatrix,
) -> Result<RectEigOutput> {
    let n = a.ncols();
    if b.ncols() != n || b.nrows_bottom() != a.nrows_bottom() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} columns, {} bottom rows", n, a.nrows_bottom()),
            got: format!("{} columns, {} bottom rows", b.ncols(), b.nrows_bottom()),
        });
    }
    let f = block2x2_svd(&a.top, &b.top, &a.bottom, &b.bottom)?;
    let (v11, v21) = f.v_blocks(n, n);
    let trailing: f64 = f.s.iter().skip(n).map(|s| s * s).sum::<f64>().sqrt();
    pencil_from_v_blocks(&v11, &v21, &f.s, trailing)
}

/// The unique nearest consistent pencil `(A_hat, B_hat)`: subtract the
/// trailing singular part of the `[B A]` concatenation. Requires the gap
/// condition `sigma_n(B) > sigma_{n+1}([B A])`.
pub fn min_perturbation(
    a: &BlockQuasimatrix,
    b: &BlockQuasimatrix,
) -> Result<(BlockQuasimatrix, BlockQuasimatrix)> {
    let n = a.ncols();
    if b.ncols() != n || b.nrows_bottom() != a.nrows_bottom() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} columns, {} bottom rows", n, a.nrows_bottom()),
            got: format!("{} columns, {} bottom rows", b.ncols(), b.nrows_bottom()),
        });
    }
    // Supplementary ordering: SVD of [B A].
    let f = block2x2_svd(&b.top, &a.top, &b.bottom, &a.bottom)?;
    let sigma_n_b = b.svd()?.s[n - 1];
    let sigma_np1 = f.s.get(n).copied().unwrap_or(0.0);
    let sigma_1 = f.s.first().copied().unwrap_or(0.0);
    if sigma_n_b - sigma_np1 <= 1e-12 * sigma_1 {
        return Err(Error::TlsGapViolated);
    }
    // [B A] - U2 Sigma2 [V12* V22*] kills the trailing part.
    let u2 = f.u.col_range(n, 2 * n)?;
    let (v12, v22) = f.v_blocks_trailing(n, n);
    let mut sv12 = adjoint(&v12);
    let mut sv22 = adjoint(&v22);
    for i in 0..n {
        let sig = C::new(f.s[n + i], 0.0);
        for j in 0..n {
            sv12[[i, j]] *= sig;
            sv22[[i, j]] *= sig;
        }
    }
    let sub_block = |m: &BlockQuasimatrix, coeff: &Array2<C>| -> Result<BlockQuasimatrix> {
        let delta_top = u2.top.mul_matrix(coeff)?;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            cols.push(m.top.col(j).sub(delta_top.col(j))?);
        }
        let bottom = &m.bottom - &u2.bottom.dot(coeff);
        BlockQuasimatrix::new(crate::quasimatrix::Quasimatrix::new(cols)?, bottom)
    };
    let a_hat = sub_block(a, &sv22)?;
    let b_hat = sub_block(b, &sv12)?;
    Ok((a_hat, b_hat))
}

#[cfg(test)]
mod tests;
