use super::*;
use crate::blockop::FunVec;
use crate::funcore::{ChebFun, Domain};
use crate::quasimatrix::Quasimatrix;
use ndarray::{array, s};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn dom() -> Domain {
    Domain::new(-1.0, 1.0).unwrap()
}

/// Wrap a dense m x n pencil half as a block quasimatrix with a zero top.
fn wrap_dense(m: &Array2<C>) -> BlockQuasimatrix {
    let n = m.ncols();
    let top = Quasimatrix::new(vec![ChebFun::zero(dom()); n]).unwrap();
    BlockQuasimatrix::new(top, m.clone()).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Array2<C> {
    Array2::from_shape_fn((m, n), |_| {
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

#[test]
fn discrete_identity_b_reduces_to_eigenproblem() {
    let a = array![
        [c(1.0), c(0.0), c(0.0)],
        [c(0.0), c(2.0), c(0.0)],
        [c(0.0), c(0.0), c(3.0)]
    ];
    let b = Array2::<C>::eye(3);
    let out = itomurota_discrete(&a, &b).unwrap();
    assert!(out.pert_norm < 1e-12);
    let want = [3.0, 2.0, 1.0];
    for (l, w) in out.lambdas.iter().zip(want.iter()) {
        assert!((l - c(*w)).norm() < 1e-10);
    }
}

#[test]
fn discrete_consistent_tall_pencil() {
    let a = array![[c(1.0), c(0.0)], [c(0.0), c(2.0)], [c(0.0), c(0.0)]];
    let b = array![[c(1.0), c(0.0)], [c(0.0), c(1.0)], [c(0.0), c(0.0)]];
    let out = itomurota_discrete(&a, &b).unwrap();
    assert!(out.pert_norm < 1e-12);
    assert!((out.lambdas[0] - c(2.0)).norm() < 1e-10);
    assert!((out.lambdas[1] - c(1.0)).norm() < 1e-10);
}

#[test]
fn discrete_wide_pencil_rejected() {
    let a = Array2::<C>::zeros((2, 3));
    assert!(itomurota_discrete(&a, &a).is_err());
}

#[test]
fn discrete_scale_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let a = random_matrix(&mut rng, 6, 3);
    let b = random_matrix(&mut rng, 6, 3);
    let out1 = itomurota_discrete(&a, &b).unwrap();
    let s = C::new(-2.5, 1.0);
    let out2 = itomurota_discrete(&a.mapv(|x| x * s), &b.mapv(|x| x * s)).unwrap();
    for (l1, l2) in out1.lambdas.iter().zip(out2.lambdas.iter()) {
        assert!((l1 - l2).norm() < 1e-10 * (1.0 + l1.norm()));
    }
}

#[test]
fn discrete_perturbation_construction_oracle() {
    // The computed (Lambda, X) must be exact for the minimally perturbed
    // pencil returned by min_perturbation.
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let bm = random_matrix(&mut rng, 6, 3);
    let z = random_matrix(&mut rng, 3, 3);
    let noise = random_matrix(&mut rng, 6, 3).mapv(|x| x * 1e-3);
    let am = &bm.dot(&z) + &noise;
    let out = itomurota_discrete(&am, &bm).unwrap();
    let (a_hat, b_hat) = min_perturbation(&wrap_dense(&am), &wrap_dense(&bm)).unwrap();
    for (k, lam) in out.lambdas.iter().enumerate() {
        let xk = out.x.column(k).to_owned();
        let ax = a_hat.bottom.dot(&xk);
        let bx = b_hat.bottom.dot(&xk);
        let resid: f64 = ax
            .iter()
            .zip(bx.iter())
            .map(|(p, q)| (p - lam * q).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(resid < 1e-10, "pair {k} residual {resid}");
    }
    // Frobenius distance matches the reported perturbation norm.
    let df = (a_hat.bottom.iter().zip(am.iter()).map(|(x, y)| (x - y).norm_sqr())
        .chain(b_hat.bottom.iter().zip(bm.iter()).map(|(x, y)| (x - y).norm_sqr()))
        .sum::<f64>())
    .sqrt();
    assert!((df - out.pert_norm).abs() < 1e-10);
}

#[test]
fn block_cheb_vs_legendre_spectrum() {
    let d = dom();
    let a = Quasimatrix::new((0..6).map(|k| ChebFun::chebyshev_t(k, d)).collect()).unwrap();
    let b = Quasimatrix::new((0..6).map(|k| ChebFun::legendre_p(k, d)).collect()).unwrap();
    let zero = Array2::<C>::zeros((0, 6));
    let ab = BlockQuasimatrix::new(a.clone(), zero.clone()).unwrap();
    let bb = BlockQuasimatrix::new(b.clone(), zero).unwrap();
    let out = itomurota_block(&ab, &bb).unwrap();
    let want = [
        128.0 / 63.0,
        64.0 / 35.0,
        8.0 / 5.0,
        4.0 / 3.0,
        1.0,
        1.0,
    ];
    for (l, w) in out.lambdas.iter().zip(want.iter()) {
        assert!((l - c(*w)).norm() < 1e-10, "lambda {l} want {w}");
    }
    assert!(out.pert_norm < 1e-10);
    // Eigenvector for 4/3: proportional to [-1/sqrt2, 0, 1/sqrt2, 0, 0, 0].
    let k = 3;
    let v = out.x.column(k);
    let r = 1.0 / 2.0f64.sqrt();
    assert!((v[0].norm() - r).abs() < 1e-9);
    assert!((v[2].norm() - r).abs() < 1e-9);
    assert!((v[0] + v[2]).norm() < 1e-9, "opposite signs expected");
    for idx in [1, 3, 4, 5] {
        assert!(v[idx].norm() < 1e-8);
    }
}

#[test]
fn block_b_equals_a_gives_unit_spectrum() {
    let d = dom();
    let a = Quasimatrix::new((0..4).map(|k| ChebFun::chebyshev_t(k, d)).collect()).unwrap();
    let zero = Array2::<C>::zeros((1, 4));
    let ab = BlockQuasimatrix::new(a, zero).unwrap();
    let out = itomurota_block(&ab, &ab).unwrap();
    for l in &out.lambdas {
        assert!((l - c(1.0)).norm() < 1e-10);
    }
    assert!(out.pert_norm < 1e-10);
}

#[test]
fn block_residuals_orthogonal_to_u1() {
    // For the Chebyshev/Legendre pencil the projected residual of every
    // returned pair must vanish.
    let d = dom();
    let a = Quasimatrix::new((0..5).map(|k| ChebFun::chebyshev_t(k, d)).collect()).unwrap();
    let b = Quasimatrix::new((0..5).map(|k| ChebFun::legendre_p(k, d)).collect()).unwrap();
    let zero = Array2::<C>::zeros((0, 5));
    let ab = BlockQuasimatrix::new(a.clone(), zero.clone()).unwrap();
    let bb = BlockQuasimatrix::new(b.clone(), zero.clone()).unwrap();
    let out = itomurota_block(&ab, &bb).unwrap();
    let f = crate::blockop::block2x2_svd(&ab.top, &bb.top, &ab.bottom, &bb.bottom).unwrap();
    let u1 = f.u.col_range(0, 5).unwrap();
    for (k, lam) in out.lambdas.iter().enumerate() {
        let xk = out.x.column(k).to_owned();
        let ax = ab.apply(&xk).unwrap();
        let bx = bb.apply(&xk).unwrap();
        let resid = FunVec {
            fun: ax.fun.sub(&bx.fun.scale(*lam)).unwrap(),
            tail: &ax.tail - &bx.tail.mapv(|t| t * lam),
        };
        let proj = u1.adjoint_apply(&resid).unwrap();
        let pnorm: f64 = proj.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        assert!(pnorm <= 1e-9 * ax.norm().max(1e-300), "pair {k}: {pnorm}");
    }
}

#[test]
fn min_perturbation_consistent_pencil_unchanged() {
    let d = dom();
    let a = Quasimatrix::new((0..4).map(|k| ChebFun::chebyshev_t(k, d)).collect()).unwrap();
    let b = Quasimatrix::new((0..4).map(|k| ChebFun::legendre_p(k, d)).collect()).unwrap();
    let zero = Array2::<C>::zeros((0, 4));
    let ab = BlockQuasimatrix::new(a, zero.clone()).unwrap();
    let bb = BlockQuasimatrix::new(b, zero).unwrap();
    let (a_hat, b_hat) = min_perturbation(&ab, &bb).unwrap();
    for j in 0..4 {
        assert!(a_hat.top.col(j).sub(ab.top.col(j)).unwrap().norm_l2() < 1e-10);
        assert!(b_hat.top.col(j).sub(bb.top.col(j)).unwrap().norm_l2() < 1e-10);
    }
}

#[test]
fn min_perturbation_recovers_noise_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let d = dom();
    let cols: Vec<ChebFun> = (0..3).map(|k| ChebFun::chebyshev_t(k, d)).collect();
    let bq = Quasimatrix::new(cols).unwrap();
    let z = random_matrix(&mut rng, 3, 3);
    let eps = 1e-4;
    let noise: Vec<ChebFun> = (0..3)
        .map(|_| {
            let coeffs: Vec<C> = (0..5)
                .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * eps)
                .collect();
            ChebFun::from_coeffs(coeffs, d)
        })
        .collect();
    let bz = bq.mul_matrix(&z).unwrap();
    let acols: Vec<ChebFun> = (0..3)
        .map(|j| bz.col(j).add(&noise[j]).unwrap())
        .collect();
    let aq = Quasimatrix::new(acols).unwrap();
    let zero = Array2::<C>::zeros((0, 3));
    let ab = BlockQuasimatrix::new(aq.clone(), zero.clone()).unwrap();
    let bb = BlockQuasimatrix::new(bq.clone(), zero).unwrap();
    let (a_hat, b_hat) = min_perturbation(&ab, &bb).unwrap();
    let mut d2 = 0.0;
    for j in 0..3 {
        d2 += a_hat.top.col(j).sub(aq.col(j)).unwrap().norm_l2().powi(2);
        d2 += b_hat.top.col(j).sub(bq.col(j)).unwrap().norm_l2().powi(2);
    }
    let injected: f64 = noise.iter().map(|f| f.norm_l2().powi(2)).sum::<f64>().sqrt();
    // Optimal perturbation cannot exceed the injected noise, and should be
    // an order-1 fraction of it.
    let found = d2.sqrt();
    assert!(found <= injected * (1.0 + 1e-6), "{found} vs {injected}");
    assert!(found > 0.05 * injected);
    // Consistency of the corrected pencil: [B_hat A_hat] has rank 3.
    let s = b_hat.hcat(&a_hat).unwrap().svd().unwrap().s;
    assert!(s[3] <= 1e-10 * s[0]);
}

#[test]
fn min_perturbation_gap_violation_rejected() {
    // B with a zero column: sigma_n(B) = 0, gap impossible.
    let d = dom();
    let bq = Quasimatrix::new(vec![ChebFun::chebyshev_t(0, d), ChebFun::zero(d)]).unwrap();
    let aq = Quasimatrix::new(vec![
        ChebFun::chebyshev_t(1, d),
        ChebFun::chebyshev_t(2, d),
    ])
    .unwrap();
    let zero = Array2::<C>::zeros((0, 2));
    let ab = BlockQuasimatrix::new(aq, zero.clone()).unwrap();
    let bb = BlockQuasimatrix::new(bq, zero).unwrap();
    assert!(matches!(
        min_perturbation(&ab, &bb),
        Err(Error::TlsGapViolated)
    ));
}

#[test]
fn min_perturbation_matches_eckart_young_on_discrete_instance() {
    // 4 x 2 dense instance: the optimal correction norm equals the tail of
    // the [B A] singular values (Eckart-Young on the concatenation).
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let bm = random_matrix(&mut rng, 4, 2);
    // Near-consistent so the TLS gap hypothesis holds.
    let am = &bm.dot(&random_matrix(&mut rng, 2, 2)) + &random_matrix(&mut rng, 4, 2).mapv(|x| x * 1e-2);
    let (a_hat, b_hat) = min_perturbation(&wrap_dense(&am), &wrap_dense(&bm)).unwrap();
    let mut ba = Array2::<C>::zeros((4, 4));
    ba.slice_mut(s![.., 0..2]).assign(&bm);
    ba.slice_mut(s![.., 2..]).assign(&am);
    let (_, sig, _) = dense::svd(&ba);
    let tail = (sig[2] * sig[2] + sig[3] * sig[3]).sqrt();
    let df = (a_hat.bottom.iter().zip(am.iter()).map(|(x, y)| (x - y).norm_sqr())
        .chain(b_hat.bottom.iter().zip(bm.iter()).map(|(x, y)| (x - y).norm_sqr()))
        .sum::<f64>())
    .sqrt();
    assert!((df - tail).abs() < 1e-10, "{df} vs {tail}");
    // Corrected pencil has rank 2.
    let mut ba_hat = Array2::<C>::zeros((4, 4));
    ba_hat.slice_mut(s![.., 0..2]).assign(&b_hat.bottom);
    ba_hat.slice_mut(s![.., 2..]).assign(&a_hat.bottom);
    let (_, sh, _) = dense::svd(&ba_hat);
    assert!(sh[2] <= 1e-10 * sh[0]);
}

#[test]
fn block_matches_discrete_for_zero_top() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let am = random_matrix(&mut rng, 5, 2);
    let bm = random_matrix(&mut rng, 5, 2);
    let out_d = itomurota_discrete(&am, &bm).unwrap();
    let out_b = itomurota_block(&wrap_dense(&am), &wrap_dense(&bm)).unwrap();
    for (l1, l2) in out_d.lambdas.iter().zip(out_b.lambdas.iter()) {
        assert!((l1 - l2).norm() < 1e-9 * (1.0 + l1.norm()));
    }
    assert!((out_d.pert_norm - out_b.pert_norm).abs() < 1e-9);
}

#[test]
fn pert_norm_matches_trailing_sigmas() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let am = random_matrix(&mut rng, 7, 3);
    let bm = random_matrix(&mut rng, 7, 3);
    let out = itomurota_discrete(&am, &bm).unwrap();
    let mut ab = Array2::<C>::zeros((7, 6));
    ab.slice_mut(s![.., 0..3]).assign(&am);
    ab.slice_mut(s![.., 3..]).assign(&bm);
    let (_, sig, _) = dense::svd(&ab);
    let tail: f64 = sig[3..].iter().map(|s| s * s).sum::<f64>().sqrt();
    assert!((out.pert_norm - tail).abs() < 1e-12 * (1.0 + tail));
}

