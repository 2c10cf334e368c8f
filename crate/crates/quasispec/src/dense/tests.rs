use super::*;
use ndarray::{array, Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Array2<C> {
    Array2::from_shape_fn((m, n), |_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn max_abs(a: &Array2<C>) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn qr_reconstructs_and_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for &(m, n) in &[(5, 3), (8, 8), (20, 7)] {
        let a = random_matrix(&mut rng, m, n);
        let (q, r) = householder_qr(&a);
        let err = max_abs(&(&q.dot(&r) - &a));
        assert!(err < 1e-13, "recon error {err}");
        let qtq = adjoint_mul(&q, &q);
        let eye = Array2::<C>::eye(n);
        assert!(max_abs(&(&qtq - &eye)) < 1e-13);
        // R upper triangular.
        for i in 0..n {
            for j in 0..i {
                assert_eq!(r[[i, j]], C::default());
            }
        }
    }
}

#[test]
fn svd_reconstructs_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for &(m, n) in &[(6, 4), (4, 6), (9, 9)] {
        let a = random_matrix(&mut rng, m, n);
        let (u, s, v) = svd(&a);
        let k = s.len();
        assert_eq!(k, m.min(n));
        let mut sigma = Array2::<C>::zeros((k, k));
        for i in 0..k {
            sigma[[i, i]] = c(s[i], 0.0);
        }
        let recon = u.dot(&sigma).dot(&v.t().mapv(|x| x.conj()));
        assert!(max_abs(&(&recon - &a)) < 1e-12);
        for w in s.windows(2) {
            assert!(w[0] >= w[1]);
        }
        let utu = adjoint_mul(&u, &u);
        assert!(max_abs(&(&utu - &Array2::<C>::eye(k))) < 1e-12);
    }
}

#[test]
fn svd_known_singular_values() {
    // diag(3, 1e-2) rotated; singular values survive the similarity.
    let a = array![[c(3.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1e-2, 0.0)]];
    let (_, s, _) = svd(&a);
    assert!((s[0] - 3.0).abs() < 1e-14);
    assert!((s[1] - 1e-2).abs() < 1e-15);
}

#[test]
fn svd_rank_deficient_has_orthonormal_u() {
    let a = array![
        [c(1.0, 0.0), c(1.0, 0.0)],
        [c(1.0, 0.0), c(1.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.0)]
    ];
    let (u, s, _) = svd(&a);
    assert!((s[0] - 2.0).abs() < 1e-13);
    assert!(s[1] < 1e-13);
    let utu = adjoint_mul(&u, &u);
    assert!(max_abs(&(&utu - &Array2::<C>::eye(2))) < 1e-12);
}

#[test]
fn triangular_solve() {
    let r = array![[c(2.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(4.0, 0.0)]];
    let b = Array1::from_vec(vec![c(4.0, 0.0), c(8.0, 0.0)]);
    let x = solve_upper_triangular(&r, &b);
    assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
    assert!((x[1] - c(2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn gep_diagonal_pencil() {
    let a = array![[c(2.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(5.0, 0.0)]];
    let b = Array2::<C>::eye(2);
    let pairs = dense_gep(&a, &b).unwrap();
    assert!((pairs[0].lambda - c(5.0, 0.0)).norm() < 1e-13);
    assert!((pairs[1].lambda - c(2.0, 0.0)).norm() < 1e-13);
    // Descending real part.
    assert!(pairs[0].lambda.re > pairs[1].lambda.re);
}

#[test]
fn gep_nontrivial_b() {
    // A x = lambda B x with A = [[1,2],[3,4]], B = diag(1, 2).
    let a = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(3.0, 0.0), c(4.0, 0.0)]];
    let b = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(2.0, 0.0)]];
    let pairs = dense_gep(&a, &b).unwrap();
    for p in &pairs {
        let ax = a.dot(&p.vector);
        let bx = b.dot(&p.vector);
        let resid: f64 = ax
            .iter()
            .zip(bx.iter())
            .map(|(x, y)| (x - p.lambda * y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(resid < 1e-12, "residual {resid}");
    }
}

#[test]
fn gep_infinite_eigenvalue() {
    // B singular: one eigenvalue escapes to infinity.
    let a = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    let b = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
    let pairs = dense_gep(&a, &b).unwrap();
    assert!(pairs[0].lambda.re.is_infinite());
    assert!((pairs[1].lambda - c(1.0, 0.0)).norm() < 1e-13);
}

#[test]
fn gep_normalization_convention() {
    let a = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(0.0, 0.0)]];
    let b = Array2::<C>::eye(2);
    let pairs = dense_gep(&a, &b).unwrap();
    for p in &pairs {
        let nrm: f64 = p.vector.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        assert!((nrm - 1.0).abs() < 1e-13);
        let vmax = p.vector.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let first = p.vector.iter().find(|x| x.norm() > 1e-8 * vmax).unwrap();
        assert!(first.im.abs() < 1e-13 && first.re > 0.0);
    }
}

#[test]
fn svd_randomized_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let m = rng.gen_range(1..12);
        let n = rng.gen_range(1..12);
        let a = random_matrix(&mut rng, m, n);
        let (u, s, v) = svd(&a);
        let k = m.min(n);
        let mut sigma = Array2::<C>::zeros((k, k));
        for i in 0..k {
            sigma[[i, i]] = c(s[i], 0.0);
        }
        let recon = u.dot(&sigma).dot(&v.t().mapv(|x| x.conj()));
        assert!(max_abs(&(&recon - &a)) < 1e-11);
    }
}
