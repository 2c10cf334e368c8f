//! Coefficient-level kernels for Chebyshev-T expansions on [-1, 1].
//!
//! Values live at second-kind points `x_j = cos(j pi / N)`, ordered from
//! `x = 1` down to `x = -1`. Transforms go through a mirrored complex FFT.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Second-kind Chebyshev points `cos(j pi / N)` for `j = 0..=N`, descending.
pub fn cheb_points(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    (0..=n)
        .map(|j| (j as f64 * std::f64::consts::PI / n as f64).cos())
        .collect()
}

fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(buf.len());
        fft.process(buf);
    });
}

fn fft_inverse(buf: &mut [Complex64]) {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(buf.len());
        fft.process(buf);
    });
}

/// Chebyshev interpolation coefficients from values at second-kind points.
pub fn vals2coeffs(vals: &[Complex64]) -> Vec<Complex64> {
    let np = vals.len();
    if np == 1 {
        return vec![vals[0]];
    }
    let n = np - 1;
    // Even extension: [v_0 .. v_N, v_{N-1} .. v_1].
    let mut buf = Vec::with_capacity(2 * n);
    buf.extend_from_slice(vals);
    for j in (1..n).rev() {
        buf.push(vals[j]);
    }
    fft_forward(&mut buf);
    let scale = 1.0 / n as f64;
    let mut coeffs = Vec::with_capacity(np);
    coeffs.push(buf[0] * (0.5 * scale));
    for k in 1..n {
        coeffs.push(buf[k] * scale);
    }
    coeffs.push(buf[n] * (0.5 * scale));
    coeffs
}

/// Values at the `N+1` second-kind points of a length-`N+1` coefficient vector.
pub fn coeffs2vals(coeffs: &[Complex64]) -> Vec<Complex64> {
    let np = coeffs.len();
    if np == 1 {
        return vec![coeffs[0]];
    }
    let n = np - 1;
    let mut buf = vec![Complex64::default(); 2 * n];
    buf[0] = coeffs[0] * (2.0 * n as f64);
    buf[n] = coeffs[n] * (2.0 * n as f64);
    for k in 1..n {
        let w = coeffs[k] * (n as f64);
        buf[k] = w;
        buf[2 * n - k] = w;
    }
    fft_inverse(&mut buf);
    let scale = 1.0 / (2.0 * n as f64);
    buf.truncate(np);
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Clenshaw evaluation of a T-series at `t` in [-1, 1].
pub fn clenshaw(coeffs: &[Complex64], t: f64) -> Complex64 {
    let mut b1 = Complex64::default();
    let mut b2 = Complex64::default();
    for &c in coeffs.iter().rev() {
        let b0 = c + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1 - t * b2
}

/// Coefficients of the derivative of a T-series (unit interval; the caller
/// applies the affine chain-rule factor).
pub fn diff_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![Complex64::default()];
    }
    let mut out = vec![Complex64::default(); n - 1];
    let mut prev = Complex64::default(); // b_{k+1}
    let mut prev2 = Complex64::default(); // b_{k+2}
    for k in (1..n).rev() {
        let b = prev2 + 2.0 * k as f64 * coeffs[k];
        if k >= 1 {
            out[k - 1] = b;
        }
        prev2 = prev;
        prev = b;
    }
    out[0] *= 0.5;
    out
}

/// Coefficients of the antiderivative of a T-series vanishing at `t = -1`
/// (unit interval; the caller applies the affine scale factor).
pub fn cumsum_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut out = vec![Complex64::default(); n + 1];
    let get = |k: usize| {
        if k < n {
            coeffs[k]
        } else {
            Complex64::default()
        }
    };
    out[1] = get(0) - get(2) * 0.5;
    for k in 2..=n {
        out[k] = (get(k - 1) - get(k + 1)) / (2.0 * k as f64);
    }
    // Fix the constant so the series vanishes at t = -1.
    let mut c0 = Complex64::default();
    for (k, b) in out.iter().enumerate().skip(1) {
        if k % 2 == 0 {
            c0 -= *b;
        } else {
            c0 += *b;
        }
    }
    out[0] = c0;
    out
}

/// Integral of `T_k` over [-1, 1]: `2/(1-k^2)` for even `k`, zero otherwise.
pub fn t_integral(k: usize) -> f64 {
    if k % 2 == 0 {
        2.0 / (1.0 - (k * k) as f64)
    } else {
        0.0
    }
}

/// `sum_k a_k \int T_k` over [-1, 1].
pub fn integrate_coeffs(coeffs: &[Complex64]) -> Complex64 {
    let mut s = Complex64::default();
    for (k, &c) in coeffs.iter().enumerate().step_by(2) {
        s += c * t_integral(k);
    }
    s
}

/// `int_{-1}^{1} conj(u) v` for two T-series via the product-to-sum identity.
///
/// `int T_j T_k = (I_{j+k} + I_{|j-k|}) / 2`, nonzero only for matching parity.
pub fn pair_integral(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut s = Complex64::default();
    for (j, &aj) in a.iter().enumerate() {
        let cj = aj.conj();
        if cj.norm_sqr() == 0.0 {
            continue;
        }
        let start = j % 2;
        let mut inner = Complex64::default();
        for k in (start..b.len()).step_by(2) {
            let w = 0.5 * (t_integral(j + k) + t_integral(j.abs_diff(k)));
            inner += b[k] * w;
        }
        s += cj * inner;
    }
    s
}

/// Clenshaw-Curtis quadrature weights on the `N+1` second-kind points,
/// normalized for `[-1, 1]`. Computed with one mirrored FFT.
pub fn cc_weights(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![2.0];
    }
    // w_j = (1/N) eps_j W_j where W_j = 2 sum_k eps_k I_k cos(pi j k / N).
    let ints: Vec<Complex64> = (0..=n).map(|k| Complex64::new(t_integral(k), 0.0)).collect();
    let mut buf = Vec::with_capacity(2 * n);
    buf.extend_from_slice(&ints);
    for j in (1..n).rev() {
        buf.push(ints[j]);
    }
    fft_forward(&mut buf);
    let mut w = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let eps = if j == 0 || j == n { 0.5 } else { 1.0 };
        w.push(eps * buf[j].re / n as f64);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn transform_round_trip() {
        let coeffs: Vec<Complex64> = (0..9).map(|k| c(1.0 / (1 + k) as f64)).collect();
        let vals = coeffs2vals(&coeffs);
        let back = vals2coeffs(&vals);
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn vals2coeffs_recovers_t3() {
        // T_3(x) = 4x^3 - 3x sampled at 2nd-kind points.
        let pts = cheb_points(8);
        let vals: Vec<Complex64> = pts.iter().map(|&x| c(4.0 * x * x * x - 3.0 * x)).collect();
        let coeffs = vals2coeffs(&vals);
        for (k, ck) in coeffs.iter().enumerate() {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((ck.re - expect).abs() < 1e-14, "k={k} got {ck}");
            assert!(ck.im.abs() < 1e-14);
        }
    }

    #[test]
    fn clenshaw_matches_t3() {
        let coeffs = vec![c(0.0), c(0.0), c(0.0), c(1.0)];
        let v = clenshaw(&coeffs, 0.5);
        assert!((v.re - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn diff_t2_is_4_t1() {
        // d/dx T_2 = 4x
        let d = diff_coeffs(&[c(0.0), c(0.0), c(1.0)]);
        assert!((d[0].re).abs() < 1e-15);
        assert!((d[1].re - 4.0).abs() < 1e-15);
    }

    #[test]
    fn cumsum_t1() {
        // int_{-1}^x t dt = (x^2 - 1)/2 = (T_2 - 1)/4
        let b = cumsum_coeffs(&[c(0.0), c(1.0)]);
        assert!((b[0].re + 0.25).abs() < 1e-15);
        assert!(b[1].norm() < 1e-15);
        assert!((b[2].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cc_weights_integrate_polynomials() {
        let n = 12;
        let w = cc_weights(n);
        let pts = cheb_points(n);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // Exact for degree <= N.
        for deg in 0..=n {
            let q: f64 = w.iter().zip(&pts).map(|(wi, x)| wi * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "deg {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn pair_integral_chebyshev_orthogonality() {
        // <T_0,T_0> = 2, <T_1,T_1> = 2/3, <T_0,T_1> = 0, <T_2,T_2> = 2 - 2/15... check vs quadrature.
        let t0 = vec![c(1.0)];
        let t1 = vec![c(0.0), c(1.0)];
        assert!((pair_integral(&t0, &t0).re - 2.0).abs() < 1e-15);
        assert!((pair_integral(&t1, &t1).re - 2.0 / 3.0).abs() < 1e-15);
        assert!(pair_integral(&t0, &t1).norm() < 1e-15);
    }
}
