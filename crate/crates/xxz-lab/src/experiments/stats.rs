//! Ensemble statistics with compensated summation and a fixed reduction
//! order, so results do not depend on thread count.

use crate::error::{Error, Result};

/// Compensated (Kahan) sum in slice order.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Mean, standard error, extremes, and count of one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleStats {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
}

impl EnsembleStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty ensemble".into()));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        let n = values.len();
        let mean = kahan_sum(values.iter().copied()) / n as f64;
        let ss = kahan_sum(values.iter().map(|&v| (v - mean) * (v - mean)));
        let stderr = if n > 1 {
            (ss / (n as f64 - 1.0) / n as f64).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(EnsembleStats {
            n,
            mean,
            stderr,
            min,
            max,
        })
    }
}

/// An exponential-decay fit `y ~ exp(log_amplitude - rate * x)` obtained
/// by least squares on `log y`.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ExpFit {
    pub rate: f64,
    pub log_amplitude: f64,
    pub r_squared: f64,
}

pub fn fit_exponential_decay(x: &[f64], y: &[f64]) -> Result<ExpFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(
            "decay fit needs two or more matched points".into(),
        ));
    }
    if let Some(&bad) = y.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "decay fit needs positive values, got {bad}"
        )));
    }
    let logs: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = kahan_sum(x.iter().copied()) / n;
    let my = kahan_sum(logs.iter().copied()) / n;
    let sxx = kahan_sum(x.iter().map(|&v| (v - mx) * (v - mx)));
    let sxy = kahan_sum(x.iter().zip(&logs).map(|(&a, &b)| (a - mx) * (b - my)));
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = kahan_sum(
        x.iter()
            .zip(&logs)
            .map(|(&a, &b)| (b - (intercept + slope * a)).powi(2)),
    );
    let ss_tot = kahan_sum(logs.iter().map(|&b| (b - my) * (b - my)));
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(ExpFit {
        rate: -slope,
        log_amplitude: intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_constant_and_pair() {
        let s = EnsembleStats::from_values(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.stderr, 0.0);
        let s = EnsembleStats::from_values(&[1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 3.0);
        // sample std sqrt(2), stderr = sqrt(2)/sqrt(2) = 1
        assert!((s.stderr - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kahan_beats_naive_on_accumulated_roundoff() {
        let n = 1_000_000;
        let vals = vec![0.1f64; n];
        let naive: f64 = vals.iter().sum();
        let compensated = kahan_sum(vals.iter().copied());
        let exact = n as f64 * 0.1;
        assert!((compensated - exact).abs() < 1e-10);
        assert!((compensated - exact).abs() < (naive - exact).abs());
    }

    #[test]
    fn stderr_scales_like_inverse_sqrt_n() {
        // deterministic pseudo-random sample; halving the count grows the
        // standard error by about sqrt(2)
        let vals: Vec<f64> = (0..4000).map(|i| ((i as f64) * 0.7548776).fract()).collect();
        let full = EnsembleStats::from_values(&vals).unwrap();
        let half = EnsembleStats::from_values(&vals[..2000]).unwrap();
        let ratio = half.stderr / full.stderr;
        assert!((ratio - 2f64.sqrt()).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let x: Vec<f64> = (1..=6).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 3.0 * (-0.7 * v).exp()).collect();
        let fit = fit_exponential_decay(&x, &y).unwrap();
        assert!((fit.rate - 0.7).abs() < 1e-12);
        assert!((fit.log_amplitude - 3f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(EnsembleStats::from_values(&[]).is_err());
        assert!(EnsembleStats::from_values(&[f64::NAN]).is_err());
        assert!(fit_exponential_decay(&[1.0], &[1.0]).is_err());
        assert!(fit_exponential_decay(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    }
}
