//! Range of SRW in ℤ^d and the speed of ERW in d ≥ 4.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::BiasParams;
use crate::parallel::map_trials;
use crate::rng::RngStream;
use crate::special::gamma;
use crate::stats::{quantile, summarize, SampleSummary};
use crate::walkers::WalkState;

/// Escape probability of SRW on ℤ³:
/// `32π³ / (√6 Γ(1/24) Γ(5/24) Γ(7/24) Γ(11/24))`.
pub fn glasser_zucker_constant() -> f64 {
    let pi = std::f64::consts::PI;
    let g = gamma(1.0 / 24.0) * gamma(5.0 / 24.0) * gamma(7.0 / 24.0) * gamma(11.0 / 24.0);
    32.0 * pi.powi(3) / (6f64.sqrt() * g)
}

#[derive(Clone, Debug, Serialize)]
pub struct RangeReport {
    pub dim: usize,
    pub n: u64,
    /// `R_n / n` per trial.
    pub samples: Vec<f64>,
    pub summary: SampleSummary,
}

pub fn range_trial(dim: usize, n: u64, rng: &mut RngStream) -> f64 {
    let mut w = WalkState::at_origin(BiasParams::unbiased(dim).expect("dim >= 1"));
    for _ in 0..n {
        w.srw_step(rng);
    }
    w.range_count() as f64 / n as f64
}

pub fn range_experiment(dim: usize, n: u64, trials: u64, seed: u64) -> Result<RangeReport> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    if n == 0 || trials == 0 {
        return Err(Error::arg("n", "steps and trials must be at least 1"));
    }
    let samples = map_trials(0, trials, |i| range_trial(dim, n, &mut RngStream::new(seed, i)));
    Ok(RangeReport {
        dim,
        n,
        summary: summarize(&samples)?,
        samples,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpeedReport {
    pub dim: usize,
    pub epsilon: f64,
    pub n: u64,
    /// `X_n / n` per trial.
    pub samples: Vec<f64>,
    pub summary: SampleSummary,
    /// `c ε / d` with c the escape probability above.
    pub bound: f64,
}

pub fn speed_trial(bias: BiasParams, n: u64, rng: &mut RngStream) -> f64 {
    let mut w = WalkState::at_origin(bias);
    for _ in 0..n {
        w.erw_step(rng);
    }
    w.x() as f64 / n as f64
}

pub fn speed_experiment(dim: usize, epsilon: f64, n: u64, trials: u64, seed: u64) -> Result<SpeedReport> {
    if dim < 4 {
        return Err(Error::arg("dim", format!("the speed bound covers d >= 4, got {dim}")));
    }
    if n == 0 || trials == 0 {
        return Err(Error::arg("n", "steps and trials must be at least 1"));
    }
    let bias = BiasParams::new(epsilon, dim)?;
    let samples = map_trials(0, trials, |i| speed_trial(bias, n, &mut RngStream::new(seed, i)));
    Ok(SpeedReport {
        dim,
        epsilon,
        n,
        summary: summarize(&samples)?,
        bound: glasser_zucker_constant() * epsilon / dim as f64,
        samples,
    })
}

impl SpeedReport {
    pub fn p05(&self) -> f64 {
        quantile(&self.samples, 0.05).expect("nonempty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escape_constant() {
        let c = glasser_zucker_constant();
        assert_eq!((c * 1e5).round() / 1e5, 0.65946);
        // Watson's integral value to ten places
        assert!((c - 0.659_462_670_5).abs() < 1e-9, "{c}");
    }

    #[test]
    fn one_dimensional_range_is_sublinear() {
        let r = range_experiment(1, 100_000, 20, 1).unwrap();
        assert!(r.summary.mean < 0.02);
    }

    #[test]
    fn three_dimensional_range() {
        let r = range_experiment(3, 50_000, 20, 2).unwrap();
        // finite-n range exceeds c n
        assert!(r.summary.mean > 0.65 && r.summary.mean < 0.70, "{:?}", r.summary);
    }

    #[test]
    fn speed_requires_four_dimensions() {
        assert!(speed_experiment(3, 1.0, 10, 1, 1).is_err());
    }

    #[test]
    fn speed_bound_and_control() {
        let r = speed_experiment(4, 1.0, 20_000, 20, 3).unwrap();
        assert!((r.bound - 0.164866).abs() < 1e-6);
        assert!(r.summary.mean > r.bound);
        let c = speed_experiment(4, 0.0, 20_000, 20, 3).unwrap();
        assert_eq!(c.bound, 0.0);
        assert!(c.summary.mean.abs() < 0.01);
    }
}
