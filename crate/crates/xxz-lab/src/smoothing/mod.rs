//! Gaussian-smoothed window indicators and their band-limited
//! truncations.
//!
//! For a finite energy window `[a, b]`, a margin `theta`, and a sharpness
//! `xi`, the smoothed indicator is the convolution of the indicator of
//! the enlarged window `[a - 2 theta, b + 2 theta]` with a Gaussian of
//! variance `1 / (2 xi)`:
//!
//! `f(x) = (erf(sqrt(xi) (x - a + 2 theta)) - erf(sqrt(xi) (x - b - 2 theta))) / 2`.
//!
//! It is close to 1 on `[a, b]`, close to 0 outside the `3 theta`
//! enlargement, and its Fourier transform decays like a Gaussian, which
//! makes a hard frequency cutoff at `zeta` cheap: the band-limited
//! version differs from `f` by an explicit exponentially small amount.

mod erf;

pub use erf::{erf, erfc};

use crate::error::{Error, Result};
use crate::quad::{integrate_adaptive, integrate_adaptive_c};
use crate::spectral::{EnergyWindow, HalfInt};
use num_complex::Complex64;
use std::f64::consts::PI;

/// A smoothed indicator of a finite energy window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedIndicator {
    a: f64,
    b: f64,
    theta: f64,
    xi: f64,
}

impl SmoothedIndicator {
    pub fn new(window: &EnergyWindow, theta: f64, xi: f64) -> Result<Self> {
        if !window.lo().is_finite() || !window.hi().is_finite() {
            return Err(Error::InvalidParameter(
                "smoothed indicator needs a finite window".into(),
            ));
        }
        if !(theta > 0.0) || !(xi > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need positive margin and sharpness, got theta={theta} xi={xi}"
            )));
        }
        Ok(SmoothedIndicator {
            a: window.lo(),
            b: window.hi(),
            theta,
            xi,
        })
    }

    pub fn window(&self) -> EnergyWindow {
        EnergyWindow::new(self.a, self.b).unwrap()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Width of the enlarged window, `b - a + 4 theta`.
    pub fn enlarged_width(&self) -> f64 {
        self.b - self.a + 4.0 * self.theta
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = self.xi.sqrt();
        0.5 * (erf(s * (x - self.a + 2.0 * self.theta)) - erf(s * (x - self.b - 2.0 * self.theta)))
    }

    /// Fourier transform with the symmetric convention
    /// `fhat(s) = (2 pi)^{-1/2} integral f(x) e^{i s x} dx`, evaluated in
    /// closed form.
    pub fn fourier(&self, s: f64) -> Complex64 {
        let w = (2.0 * PI).sqrt().recip();
        let gauss = (-s * s / (4.0 * self.xi)).exp();
        let alpha = self.a - 2.0 * self.theta;
        let beta = self.b + 2.0 * self.theta;
        if s == 0.0 {
            return Complex64::new(w * (beta - alpha) * gauss, 0.0);
        }
        let num = Complex64::new(0.0, s * beta).exp() - Complex64::new(0.0, s * alpha).exp();
        num / Complex64::new(0.0, s) * (w * gauss)
    }

    /// `|fhat(s)|` in closed form.
    pub fn fourier_abs(&self, s: f64) -> f64 {
        let w = self.enlarged_width();
        let gauss = (-s * s / (4.0 * self.xi)).exp();
        if s == 0.0 {
            return w / (2.0 * PI).sqrt() * gauss;
        }
        (2.0 / PI).sqrt() * (0.5 * s * w).sin().abs() / s.abs() * gauss
    }

    /// Guaranteed closeness to the hard indicator:
    /// `f >= 1 - deficit` on the window and `f <= deficit` outside the
    /// `3 theta` enlargement.
    pub fn plateau_deficit(&self) -> f64 {
        2.0 / ((PI * self.xi).sqrt() * self.theta) * (-self.xi * self.theta * self.theta).exp()
    }

    /// Closed-form bound on the L1 norm of the Fourier transform.
    pub fn fourier_l1_bound(&self) -> f64 {
        (2.0 * self.xi).sqrt() * self.enlarged_width()
    }

    /// Bound on the Fourier mass outside `[-zeta, zeta]`.
    pub fn fourier_tail_bound(&self, zeta: f64) -> f64 {
        2.0 * (2.0 / PI).sqrt() * self.enlarged_width() * (self.xi / zeta)
            * (-zeta * zeta / (4.0 * self.xi)).exp()
    }

    /// Numerical L1 norm of the Fourier transform, integrated piecewise
    /// between the zeros of the oscillating factor.
    pub fn fourier_l1(&self, tol: f64) -> Result<f64> {
        let half = self.fourier_half_line(0.0, tol)?;
        Ok(2.0 * half)
    }

    /// Numerical Fourier mass outside `[-zeta, zeta]`.
    pub fn fourier_tail(&self, zeta: f64, tol: f64) -> Result<f64> {
        if !(zeta > 0.0) {
            return Err(Error::InvalidParameter("cutoff must be positive".into()));
        }
        Ok(2.0 * self.fourier_half_line(zeta, tol)?)
    }

    /// `integral_{s0}^{infinity} |fhat(s)| ds` numerically, with an
    /// analytic remainder past the adaptive cutoff.
    fn fourier_half_line(&self, s0: f64, tol: f64) -> Result<f64> {
        // envelope sqrt(2/pi) min(W/2, 1/s) e^{-s^2/(4 xi)}; cut where the
        // Gaussian alone is negligible
        let smax = (s0 * s0 + 4.0 * self.xi * 80.0).sqrt();
        // |sin(s W / 2)| has kinks at s = 2 k pi / W; segment boundaries
        // sit on those zeros so each piece is smooth
        let spacing = 2.0 * PI / self.enlarged_width();
        let piece_tol = (tol * 1e-2).max(1e-14);
        let mut total = 0.0;
        let mut comp = 0.0;
        let mut lo = s0;
        let mut k = (s0 / spacing).floor() as i64 + 1;
        while lo < smax {
            let hi = (k as f64 * spacing).min(smax).max(lo + 1e-12);
            k += 1;
            let (v, _) = integrate_adaptive(&|s| self.fourier_abs(s), lo, hi, piece_tol)?;
            let y = v - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
            lo = hi;
        }
        Ok(total)
    }

    /// The band-limited version: inverse transform of `fhat` restricted
    /// to `[-zeta, zeta]`, evaluated by quadrature.
    pub fn band_limited_eval(&self, x: f64, zeta: f64, tol: f64) -> Result<f64> {
        // fhat(-s) conjugates, so the inverse integral is twice the real
        // part of the positive half
        let f = |s: f64| self.fourier(s) * Complex64::new(0.0, -s * x).exp();
        let (v, _) = integrate_adaptive_c(&f, 0.0, zeta, tol)?;
        Ok(2.0 * v.re / (2.0 * PI).sqrt())
    }

    /// Bound on `sup |band_limited - f|` for cutoff `zeta`.
    pub fn band_limit_sup_bound(&self, zeta: f64) -> f64 {
        self.fourier_tail_bound(zeta)
    }
}

/// The standard parameter choice tied to the spectral-gap unit
/// `u = 1 - 1/Delta`: margin `u / 6`, window from 0 up to
/// `(q + 3/4) u`, frequency cutoff `Delta xi / 8`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardSmoothing {
    pub indicator: SmoothedIndicator,
    pub zeta: f64,
}

pub fn standard_smoothing(q: HalfInt, delta: f64, xi: f64) -> Result<StandardSmoothing> {
    if !(delta > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "anisotropy must exceed 1, got {delta}"
        )));
    }
    let u = 1.0 - 1.0 / delta;
    let window = EnergyWindow::new(0.0, (q.as_f64() + 0.75) * u)?;
    let indicator = SmoothedIndicator::new(&window, u / 6.0, xi)?;
    Ok(StandardSmoothing {
        indicator,
        zeta: delta * xi / 8.0,
    })
}

/// The smallest integer sharpness for which the plateau deficit drops to
/// `1 - 2^{-1/2}`, making the smoothed sandwich lose at most a factor 2.
pub fn xi_threshold(delta: f64) -> Result<u64> {
    if !(delta > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "anisotropy must exceed 1, got {delta}"
        )));
    }
    let theta = (1.0 - 1.0 / delta) / 6.0;
    let target = 1.0 - 0.5f64.sqrt();
    for xi in 1..=u64::MAX {
        let deficit = 2.0 / ((PI * xi as f64).sqrt() * theta) * (-(xi as f64) * theta * theta).exp();
        if deficit <= target {
            return Ok(xi);
        }
        if xi > 1_000_000_000 {
            break;
        }
    }
    Err(Error::NoConvergence(
        "no sharpness below 1e9 reaches the deficit target".into(),
    ))
}

/// Verified bounds for one parameter set, serializable for reports.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BoundsReport {
    pub xi: f64,
    pub theta: f64,
    pub zeta: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub plateau_deficit_bound: f64,
    /// The deficit bound exceeds 1, so the plateau statements hold but
    /// say nothing.
    pub vacuous: bool,
    pub min_on_window: f64,
    pub max_outside_enlargement: f64,
    pub l1_bound: f64,
    pub l1_numeric: f64,
    pub tail_bound: f64,
    pub tail_numeric: f64,
    pub band_limit_sup_bound: f64,
    pub band_limit_sup_numeric: f64,
    pub plateau_ok: bool,
    pub outside_ok: bool,
    pub l1_ok: bool,
    pub tail_ok: bool,
    pub band_limit_ok: bool,
}

impl BoundsReport {
    pub fn all_ok(&self) -> bool {
        self.plateau_ok && self.outside_ok && self.l1_ok && self.tail_ok && self.band_limit_ok
    }
}

/// Evaluate every closed-form bound against direct numerics.
///
/// The indicator rises monotonically to the left of the window midpoint
/// and falls to the right, so the extrema over the window and over the
/// complement of its enlargement sit at the respective endpoints.
pub fn check_bounds(sm: &StandardSmoothing) -> Result<BoundsReport> {
    let f = &sm.indicator;
    let (a, b) = (f.window().lo(), f.window().hi());
    let theta = f.theta();
    let deficit = f.plateau_deficit();
    let min_on_window = f.eval(a).min(f.eval(b));
    let max_outside = f.eval(a - 3.0 * theta).max(f.eval(b + 3.0 * theta));
    let l1_numeric = f.fourier_l1(1e-10)?;
    let l1_bound = f.fourier_l1_bound();
    let tail_numeric = f.fourier_tail(sm.zeta, 1e-12)?;
    let tail_bound = f.fourier_tail_bound(sm.zeta);
    let sup_bound = f.band_limit_sup_bound(sm.zeta);
    let mut sup_numeric = 0.0f64;
    // scan the region where both functions vary, plus a margin
    let pad = 3.0 * theta + 6.0 / f.xi().sqrt();
    let (lo, hi) = (a - pad, b + pad);
    let steps = 240;
    for i in 0..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let diff = (f.band_limited_eval(x, sm.zeta, 1e-12)? - f.eval(x)).abs();
        sup_numeric = sup_numeric.max(diff);
    }
    let slack = 1e-9;
    Ok(BoundsReport {
        xi: f.xi(),
        theta,
        zeta: sm.zeta,
        window_lo: a,
        window_hi: b,
        plateau_deficit_bound: deficit,
        vacuous: deficit >= 1.0,
        min_on_window,
        max_outside_enlargement: max_outside,
        l1_bound,
        l1_numeric,
        tail_bound,
        tail_numeric,
        band_limit_sup_bound: sup_bound,
        band_limit_sup_numeric: sup_numeric,
        plateau_ok: min_on_window >= 1.0 - deficit - slack,
        outside_ok: max_outside <= deficit + slack,
        l1_ok: l1_numeric <= l1_bound + slack,
        tail_ok: tail_numeric <= tail_bound + slack,
        band_limit_ok: sup_numeric <= sup_bound + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_adaptive_c;

    fn sample() -> SmoothedIndicator {
        let w = EnergyWindow::new(0.0, 1.0).unwrap();
        SmoothedIndicator::new(&w, 0.1, 16.0).unwrap()
    }

    #[test]
    fn fourier_matches_direct_integral() {
        // fhat(s) = (2 pi)^{-1/2} integral f(x) e^{isx} dx over the
        // effective support
        let f = sample();
        for s in [0.0, 0.3, 1.7, -2.4, 6.0] {
            let direct = integrate_adaptive_c(
                &|x| Complex64::new(f.eval(x), 0.0) * Complex64::new(0.0, s * x).exp(),
                -4.0,
                5.0,
                1e-12,
            )
            .unwrap()
            .0
                / (2.0 * PI).sqrt();
            let closed = f.fourier(s);
            assert!(
                (direct - closed).norm() < 1e-9,
                "s={s}: {direct} vs {closed}"
            );
        }
    }

    #[test]
    fn inverse_transform_recovers_f() {
        // with a generous cutoff the band-limited version is f itself
        let f = sample();
        let zeta = 60.0;
        for x in [-0.5, 0.0, 0.2, 0.5, 1.0, 1.4] {
            let got = f.band_limited_eval(x, zeta, 1e-13).unwrap();
            assert!((got - f.eval(x)).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn plateau_and_monotonicity() {
        let f = sample();
        let d = f.plateau_deficit();
        assert!(f.eval(0.0) >= 1.0 - d);
        assert!(f.eval(1.0) >= 1.0 - d);
        assert!(f.eval(-0.3) <= d);
        assert!(f.eval(1.3) <= d);
        // rising then falling around the midpoint
        let mid = 0.5;
        let mut prev = f.eval(mid - 2.0);
        let mut x = mid - 2.0;
        while x < mid {
            x += 0.05;
            let cur = f.eval(x);
            assert!(cur >= prev - 1e-15);
            prev = cur;
        }
        // symmetry about the midpoint
        for dx in [0.1, 0.4, 0.9, 2.0] {
            assert!((f.eval(mid + dx) - f.eval(mid - dx)).abs() < 1e-13);
        }
    }

    #[test]
    fn l1_and_tail_bounds_hold() {
        for xi in [4.0, 16.0, 64.0] {
            let w = EnergyWindow::new(0.0, 0.875).unwrap();
            let f = SmoothedIndicator::new(&w, 1.0 / 12.0, xi).unwrap();
            let l1 = f.fourier_l1(1e-10).unwrap();
            assert!(l1 <= f.fourier_l1_bound(), "xi={xi}: {l1}");
            assert!(l1 > 0.9); // sanity: mass near total variation scale
            let zeta = 2.0 * xi / 8.0;
            let tail = f.fourier_tail(zeta, 1e-12).unwrap();
            assert!(tail <= f.fourier_tail_bound(zeta), "xi={xi}");
        }
    }

    #[test]
    fn standard_parameters_and_threshold() {
        let q = HalfInt::from_twice(1);
        let sm = standard_smoothing(q, 2.0, 64.0).unwrap();
        let u: f64 = 0.5;
        assert!((sm.indicator.theta() - u / 6.0).abs() < 1e-15);
        assert!((sm.indicator.window().hi() - 1.25 * u).abs() < 1e-15);
        assert!((sm.zeta - 16.0).abs() < 1e-15);

        let xi0 = xi_threshold(2.0).unwrap();
        let theta = u / 6.0;
        let deficit = |xi: f64| 2.0 / ((PI * xi).sqrt() * theta) * (-xi * theta * theta).exp();
        assert!(deficit(xi0 as f64) <= 1.0 - 0.5f64.sqrt());
        assert!(deficit(xi0 as f64 - 1.0) > 1.0 - 0.5f64.sqrt());
    }

    #[test]
    fn report_passes_at_moderate_sharpness() {
        // the deficit drops below 1 only past sharpness ~190 here
        let sm = standard_smoothing(HalfInt::integer(1), 2.0, 256.0).unwrap();
        let rep = check_bounds(&sm).unwrap();
        assert!(rep.all_ok(), "{rep:?}");
        assert!(!rep.vacuous);
        // very soft indicators still satisfy the (vacuous) bounds
        let soft = standard_smoothing(HalfInt::integer(1), 2.0, 4.0).unwrap();
        let rep = check_bounds(&soft).unwrap();
        assert!(rep.all_ok(), "{rep:?}");
        assert!(rep.vacuous);
    }
}
