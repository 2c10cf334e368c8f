use super::*;
use crate::funcore::DEFAULT_TOL;
use ndarray::Array1;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn dom() -> Domain {
    Domain::new(-1.0, 1.0).unwrap()
}

fn cheb_cols(n: usize) -> Quasimatrix {
    Quasimatrix::new((0..n).map(|k| ChebFun::chebyshev_t(k, dom())).collect()).unwrap()
}

fn random_qm(rng: &mut ChaCha8Rng, n: usize, maxdeg: usize) -> Quasimatrix {
    let cols = (0..n)
        .map(|_| {
            let deg = rng.gen_range(1..=maxdeg);
            let coeffs: Vec<C> = (0..=deg)
                .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            ChebFun::from_coeffs(coeffs, dom())
        })
        .collect();
    Quasimatrix::new(cols).unwrap()
}

fn max_abs(a: &Array2<C>) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn qr_single_constant_column() {
    let a = cheb_cols(1);
    let (q, r) = a.qr().unwrap();
    assert!((r[[0, 0]] - c(2.0f64.sqrt())).norm() < 1e-14);
    let v = q.col(0).eval(0.3).unwrap();
    assert!((v - c(1.0 / 2.0f64.sqrt())).norm() < 1e-14);
}

#[test]
fn qr_orthogonal_inputs_give_diagonal_r() {
    // 1 and x are orthogonal on [-1, 1].
    let a = cheb_cols(2);
    let (_, r) = a.qr().unwrap();
    assert!((r[[0, 0]] - c(2.0f64.sqrt())).norm() < 1e-14);
    assert!((r[[1, 1]] - c((2.0 / 3.0f64).sqrt())).norm() < 1e-14);
    assert!(r[[0, 1]].norm() < 1e-14);
}

#[test]
fn qr_of_orthonormal_is_identity_r() {
    let a = cheb_cols(3);
    let (q, _) = a.qr().unwrap();
    let (_, r2) = q.qr().unwrap();
    let eye = Array2::<C>::eye(3);
    assert!(max_abs(&(&r2 - &eye)) < 1e-12);
}

#[test]
fn qr_reconstruction_and_orthonormality_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let n = rng.gen_range(1..=8);
        let a = random_qm(&mut rng, n, 20);
        let (q, r) = a.qr().unwrap();
        // Orthonormality.
        let g = q.adjoint_mul(&q).unwrap();
        assert!(max_abs(&(&g - &Array2::<C>::eye(n))) < 1e-10);
        // Column-wise reconstruction.
        for j in 0..n {
            let coeffs = r.column(j).to_owned();
            let recon = q.apply(&coeffs).unwrap();
            let diff = recon.sub(a.col(j)).unwrap().norm_l2();
            let scale = a.col(j).norm_l2().max(1e-300);
            assert!(diff / scale < 1e-11, "col {j} error {}", diff / scale);
        }
        // Diagonal real nonnegative.
        for j in 0..n {
            assert!(r[[j, j]].im == 0.0 && r[[j, j]].re >= 0.0);
        }
    }
}

#[test]
fn qr_rank_deficient_zero_column() {
    let cols = vec![
        ChebFun::chebyshev_t(0, dom()),
        ChebFun::zero(dom()),
        ChebFun::chebyshev_t(1, dom()),
    ];
    let a = Quasimatrix::new(cols).unwrap();
    let (q, r) = a.qr().unwrap();
    assert!(r[[1, 1]].norm() == 0.0);
    let g = q.adjoint_mul(&q).unwrap();
    assert!(max_abs(&(&g - &Array2::<C>::eye(3))) < 1e-10);
    // Reconstruction still holds.
    for j in 0..3 {
        let recon = q.apply(&r.column(j).to_owned()).unwrap();
        let diff = recon.sub(a.col(j)).unwrap().norm_l2();
        assert!(diff < 1e-11);
    }
}

#[test]
fn apply_and_adjoint_apply() {
    let a = cheb_cols(2);
    let f = a
        .apply(&Array1::from_vec(vec![c(2.0), c(-1.0)]))
        .unwrap();
    // 2 T_0 - T_1 at x = 0.5 is 1.5.
    assert!((f.eval(0.5).unwrap() - c(1.5)).norm() < 1e-13);
    let w = a.adjoint_apply(&ChebFun::chebyshev_t(1, dom())).unwrap();
    assert!(w[0].norm() < 1e-14);
    assert!((w[1] - c(2.0 / 3.0)).norm() < 1e-14);
}

#[test]
fn adjoint_apply_inverts_apply_for_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_qm(&mut rng, 5, 15);
    let (q, _) = a.qr().unwrap();
    let coeffs = Array1::from_vec(vec![c(1.0), c(-2.0), c(0.5), c(3.0), c(0.1)]);
    let f = q.apply(&coeffs).unwrap();
    let back = q.adjoint_apply(&f).unwrap();
    for j in 0..5 {
        assert!((back[j] - coeffs[j]).norm() < 1e-11);
    }
}

#[test]
fn svd_sigmas_match_gram_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_qm(&mut rng, 6, 25);
    let f = a.svd().unwrap();
    // Squared singular values are the eigenvalues of the Gram matrix.
    let g = a.adjoint_mul(&a).unwrap();
    let (_, gs, _) = dense::svd(&g);
    for (si, gi) in f.s.iter().zip(gs.iter()) {
        assert!((si * si - gi).abs() < 1e-9 * gs[0].max(1.0));
    }
    // Reconstruction: A v_j = s_j u_j.
    for j in 0..6 {
        let av = a.apply(&f.v.column(j).to_owned()).unwrap();
        let su = f.u.col(j).scale(c(f.s[j]));
        assert!(av.sub(&su).unwrap().norm_l2() < 1e-10 * f.s[0]);
    }
}

#[test]
fn norm2_unitary_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a = random_qm(&mut rng, 4, 12);
    let (q, _) = a.qr().unwrap();
    let w = Array2::from_shape_fn((4, 3), |_| {
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let qw = q.mul_matrix(&w).unwrap();
    let (_, ws, _) = dense::svd(&w);
    assert!((qw.norm2().unwrap() - ws[0]).abs() < 1e-10);
}

#[test]
fn best_low_rank_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = random_qm(&mut rng, 5, 18);
    let f = a.svd().unwrap();
    let k = 2;
    // Rank-k truncation via U_k diag(s_k) V_k^*.
    let mut svk = Array2::<C>::zeros((5, 5));
    for j in 0..k {
        for i in 0..5 {
            svk[[i, j]] = f.v[[i, j]].conj() * f.s[j];
        }
    }
    // Columns of the truncation: sum_j u_j s_j conj(v_ij).
    let mut err2 = 0.0;
    for col in 0..5 {
        let mut trunc = ChebFun::zero(dom());
        for j in 0..k {
            trunc = trunc
                .add(&f.u.col(j).scale(f.s[j] * f.v[[col, j]].conj()))
                .unwrap();
        }
        err2 += a.col(col).sub(&trunc).unwrap().norm_l2().powi(2);
    }
    let tail: f64 = f.s[k..].iter().map(|s| s * s).sum();
    assert!((err2.sqrt() - tail.sqrt()).abs() < 1e-10);
}

#[test]
fn hcat_svd_partition_shapes() {
    let a = cheb_cols(3);
    let b = cheb_cols(3);
    let f = a.hcat_svd(&b).unwrap();
    assert_eq!(f.s.len(), 6);
    let (v11, v21) = f.v_blocks(3, 3);
    assert_eq!(v11.dim(), (3, 3));
    assert_eq!(v21.dim(), (3, 3));
    let (v12, v22) = f.v_blocks_trailing(3, 3);
    assert_eq!(v12.dim(), (3, 3));
    assert_eq!(v22.dim(), (3, 3));
    // [A A] has exactly 3 nonzero singular values.
    assert!(f.s[3] < 1e-12 * f.s[0]);
}

#[test]
fn frobenius_norm() {
    let a = cheb_cols(2);
    // sqrt(2 + 2/3)
    let want = (2.0 + 2.0 / 3.0f64).sqrt();
    assert!((a.norm_frobenius() - want).abs() < 1e-13);
}

#[test]
fn piecewise_columns_supported() {
    let pw = ChebFun::piecewise(
        dom(),
        &[0.0],
        &[&|x| C::new(x, 0.0), &|x| C::new(-x, 0.0)],
        DEFAULT_TOL,
    )
    .unwrap();
    let a = Quasimatrix::new(vec![ChebFun::chebyshev_t(0, dom()), pw]).unwrap();
    let (q, r) = a.qr().unwrap();
    let g = q.adjoint_mul(&q).unwrap();
    assert!(max_abs(&(&g - &Array2::<C>::eye(2))) < 1e-10);
    for j in 0..2 {
        let recon = q.apply(&r.column(j).to_owned()).unwrap();
        assert!(recon.sub(a.col(j)).unwrap().norm_l2() < 1e-11);
    }
}

#[test]
fn domain_mismatch_rejected() {
    let a = ChebFun::chebyshev_t(0, dom());
    let b = ChebFun::chebyshev_t(0, Domain::new(0.0, 1.0).unwrap());
    assert!(Quasimatrix::new(vec![a, b]).is_err());
}
