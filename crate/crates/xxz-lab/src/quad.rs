//! Gauss-Legendre quadrature.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::Mutex;
use std::collections::HashMap;
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre polynomial and cached.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&n) {
        return v.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    cache
        .lock()
        .unwrap()
        .insert(n, (nodes.clone(), weights.clone()));
    (nodes, weights)
}

/// Fixed-order integration of `f` over `[a, b]`.
pub fn integrate_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..n {
        s += w[i] * f(c + h * x[i]);
    }
    s * h
}

/// Fixed-order integration of a complex-valued integrand over `[a, b]`.
pub fn integrate_fixed_c<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, n: usize) -> Complex64 {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        s += f(c + h * x[i]) * w[i];
    }
    s * h
}

/// Panel-halving Gauss-Legendre integration: refine until two successive
/// refinements agree to `tol` (absolute), starting from `panels` panels of
/// 32 nodes each.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let mut panels = 2usize;
    let mut prev = panel_sum(f, a, b, panels);
    for _ in 0..16 {
        panels *= 2;
        let cur = panel_sum(f, a, b, panels);
        let err = (cur - prev).abs();
        // the relative floor keeps roundoff-limited integrals from
        // spinning forever under a tight absolute tolerance
        if err <= tol || err <= 1e-13 * cur.abs() {
            return Ok((cur, err));
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "no convergence to tol {tol:.1e} on [{a}, {b}]"
    )))
}

fn panel_sum<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    let mut comp = 0.0;
    for p in 0..panels {
        let v = integrate_fixed(f, a + p as f64 * h, a + (p + 1) as f64 * h, 32);
        // compensated accumulation
        let y = v - comp;
        let t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    s
}

/// Complex version of [`integrate_adaptive`].
pub fn integrate_adaptive_c<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    let mut panels = 2usize;
    let mut prev = panel_sum_c(f, a, b, panels);
    for _ in 0..16 {
        panels *= 2;
        let cur = panel_sum_c(f, a, b, panels);
        let err = (cur - prev).norm();
        if err <= tol || err <= 1e-13 * cur.norm() {
            return Ok((cur, err));
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "no convergence to tol {tol:.1e} on [{a}, {b}]"
    )))
}

fn panel_sum_c<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, panels: usize) -> Complex64 {
    let h = (b - a) / panels as f64;
    let mut s = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        s += integrate_fixed_c(f, a + p as f64 * h, a + (p + 1) as f64 * h, 32);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        // n-point rule is exact through degree 2n-1
        let f = |x: f64| 3.0 * x.powi(5) - x.powi(2) + 0.5;
        let exact = 3.0 / 6.0 * (64.0 - 1.0) - (8.0 - 1.0) / 3.0 + 0.5;
        let got = integrate_fixed(&f, 1.0, 2.0, 4);
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");
    }

    #[test]
    fn gaussian_integral() {
        let f = |x: f64| (-x * x).exp();
        let (v, _) = integrate_adaptive(&f, -8.0, 8.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 7, 32, 64, 101] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
        }
    }
}
