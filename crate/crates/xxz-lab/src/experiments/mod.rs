//! Disorder ensembles, schedules, statistics, and reproducible
//! experiment runners with CSV/JSON output.

pub mod config;
pub mod runners;
pub mod stats;
pub mod table;

pub use config::{DisorderSpec, Distribution, ExperimentConfig, ObservableSpec};
pub use stats::{fit_exponential_decay, kahan_sum, EnsembleStats, ExpFit};
pub use table::{Cell, OutputFormat, Table};

use crate::error::{Error, Result};
use crate::lattice::SiteInterval;
use crate::qoperators::{DisorderRealization, Provenance};
use crate::spectral::HalfInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::ContinuousCDF;

/// Environment variable supplying the default worker count.
pub const THREADS_ENV: &str = "XXZ_LAB_THREADS";

/// Draw realization `index` of the ensemble on `ambient`. Deterministic
/// splittable scheme: one ChaCha8 keyed by the master seed, with the
/// realization index as the stream counter, so realizations are
/// independent and order-free.
pub fn sample_disorder(
    spec: &DisorderSpec,
    index: u64,
    ambient: &SiteInterval,
) -> Result<DisorderRealization> {
    spec.validate()?;
    if index >= spec.count as u64 {
        return Err(Error::InvalidParameter(format!(
            "realization index {index} >= count {}",
            spec.count
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    rng.set_stream(index);
    let omega: Vec<f64> = match &spec.distribution {
        Distribution::Uniform01 => (0..ambient.len()).map(|_| rng.gen::<f64>()).collect(),
        Distribution::Beta { a, b } => {
            let dist = statrs::distribution::Beta::new(*a, *b)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            (0..ambient.len())
                .map(|_| dist.inverse_cdf(rng.gen::<f64>()).clamp(0.0, 1.0))
                .collect()
        }
    };
    DisorderRealization::new(
        *ambient,
        omega,
        Some(Provenance {
            master_seed: spec.master_seed,
            realization: index,
            distribution: spec.distribution.label(),
        }),
    )
}

/// The recursive window budget: 0 at q = 0, then each half step adds
/// `9 ceil(q) + 13`.
pub fn beta_schedule(q: HalfInt) -> Result<u64> {
    if q.twice() < 0 {
        return Err(Error::InvalidParameter(format!(
            "schedule index must be >= 0, got {q}"
        )));
    }
    let mut beta = 0u64;
    for step in 1..=q.twice() as u64 {
        // ceil of the half-integer step/2
        beta += 9 * step.div_ceil(2) + 13;
    }
    Ok(beta)
}

///`(alpha_q, beta_q)`: the budget and its look-ahead `13 + beta_{q+1/2}`.
pub fn alpha_beta(q: HalfInt) -> Result<(u64, u64)> {
    Ok((13 + beta_schedule(q.plus_half())?, beta_schedule(q)?))
}

/// The smoothing-sharpness schedule: the largest of the window-budget
/// term, the time term, and the floor below which the smoothed sandwich
/// loses more than a factor 2.
pub fn xi_schedule(q: HalfInt, ell: u64, t: f64, delta: f64, c1_threshold: u64) -> Result<u64> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be >= 1".into()));
    }
    let p = q.plus_half();
    let (alpha_p, _) = alpha_beta(p)?;
    let budget = alpha_p.div_ceil(5) * ell;
    let time = (8.0 * t.abs() / delta).ceil() as u64;
    Ok(budget.max(time).max(c1_threshold))
}

/// Build the worker pool; `None` or `Some(0)` leaves the size to the
/// runtime default.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(e.to_string()))
}

/// CLI flag, then config, then environment, then runtime default.
pub fn resolve_threads(cli: Option<usize>, cfg: Option<usize>) -> Option<usize> {
    cli.or(cfg).or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.parse().ok())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_spec(seed: u64, count: usize) -> DisorderSpec {
        DisorderSpec {
            distribution: Distribution::Uniform01,
            master_seed: seed,
            count,
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let amb = SiteInterval::of_len(12);
        let spec = uniform_spec(99, 5);
        let a = sample_disorder(&spec, 3, &amb).unwrap();
        let b = sample_disorder(&spec, 3, &amb).unwrap();
        assert_eq!(a.couplings(), b.couplings());
        let c = sample_disorder(&spec, 2, &amb).unwrap();
        assert_ne!(a.couplings(), c.couplings());
        assert!(a.couplings().iter().all(|&w| (0.0..=1.0).contains(&w)));
        assert_eq!(a.provenance().unwrap().realization, 3);
        assert!(sample_disorder(&spec, 5, &amb).is_err());
    }

    #[test]
    fn uniform_mean_is_one_half() {
        let amb = SiteInterval::of_len(50);
        let spec = uniform_spec(7, 2000);
        let mut sum = 0.0;
        let mut n = 0usize;
        for i in 0..2000 {
            let w = sample_disorder(&spec, i, &amb).unwrap();
            sum += kahan_sum(w.couplings().iter().copied());
            n += w.couplings().len();
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn beta_sampling_respects_parameters() {
        let amb = SiteInterval::of_len(50);
        let spec = DisorderSpec {
            distribution: Distribution::Beta { a: 2.0, b: 2.0 },
            master_seed: 11,
            count: 400,
        };
        let mut sum = 0.0;
        for i in 0..400 {
            let w = sample_disorder(&spec, i, &amb).unwrap();
            assert!(w.couplings().iter().all(|&x| (0.0..=1.0).contains(&x)));
            sum += kahan_sum(w.couplings().iter().copied());
        }
        let mean = sum / (400.0 * 50.0);
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");

        let bad = DisorderSpec {
            distribution: Distribution::Beta { a: 0.3, b: 1.0 },
            master_seed: 1,
            count: 1,
        };
        assert!(sample_disorder(&bad, 0, &amb).is_err());
    }

    #[test]
    fn schedule_base_cases() {
        assert_eq!(beta_schedule(HalfInt::integer(0)).unwrap(), 0);
        // one half step: 9 * 1 + 13
        assert_eq!(beta_schedule(HalfInt::from_twice(1)).unwrap(), 22);
        let (alpha0, beta0) = alpha_beta(HalfInt::integer(0)).unwrap();
        assert_eq!(beta0, 0);
        assert_eq!(alpha0, 35);
        assert!(beta_schedule(HalfInt::from_twice(-1)).is_err());
    }

    #[test]
    fn schedule_sandwich_up_to_ten() {
        for twice in 0..=20 {
            let q = HalfInt::from_twice(twice);
            let beta = beta_schedule(q).unwrap() as f64;
            let qq = q.as_f64();
            assert!(9.0 * qq * qq + 30.5 * qq <= beta + 1e-9, "q={q}");
            assert!(beta <= 9.0 * qq * qq + 39.5 * qq + 1e-9, "q={q}");
        }
    }

    #[test]
    fn xi_schedule_takes_the_active_maximum() {
        // t = 0 and a tiny floor leave only the budget term
        let q = HalfInt::integer(0);
        let (alpha_half, _) = alpha_beta(q.plus_half()).unwrap();
        let want = alpha_half.div_ceil(5);
        assert_eq!(xi_schedule(q, 1, 0.0, 100.0, 1).unwrap(), want);
        // a huge time makes the time term dominate
        let xi = xi_schedule(q, 1, 1e6, 2.0, 1).unwrap();
        assert_eq!(xi, 4_000_000);
        // a huge floor wins over both
        assert_eq!(xi_schedule(q, 1, 0.0, 2.0, 10_000).unwrap(), 10_000);
        assert!(xi_schedule(q, 0, 0.0, 2.0, 1).is_err());
    }

    #[test]
    fn thread_resolution_order() {
        assert_eq!(resolve_threads(Some(3), Some(2)), Some(3));
        assert_eq!(resolve_threads(None, Some(2)), Some(2));
    }
}
