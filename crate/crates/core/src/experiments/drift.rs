//! Rightward displacement of planar ERW against the n^{3/4} / log^{5/4} n
//! lower-order scale.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::BiasParams;
use crate::parallel::map_trials;
use crate::rng::RngStream;
use crate::stats::{quantile, summarize, SampleSummary};
use crate::walkers::WalkState;

/// `n^{3/4} / (ln n)^{5/4}`.
pub fn drift_scale(n: u64) -> f64 {
    let n = n as f64;
    n.powf(0.75) / n.ln().powf(1.25)
}

/// X at each checkpoint of one trajectory.
pub fn drift_trial(bias: BiasParams, checkpoints: &[u64], rng: &mut RngStream) -> Vec<i64> {
    let mut w = WalkState::at_origin(bias);
    checkpoints
        .iter()
        .map(|&n| {
            while w.steps() < n {
                w.erw_step(rng);
            }
            w.x()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftRow {
    pub n: u64,
    pub x: SampleSummary,
    pub normalized: SampleSummary,
    pub x_p01: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub epsilon: f64,
    pub checkpoints: Vec<u64>,
    /// One row per trial, one column per checkpoint.
    pub trials: Vec<Vec<i64>>,
    pub rows: Vec<DriftRow>,
    /// Smallest ratio of a later 5th-percentile normalized value to an
    /// earlier one.
    pub worst_p05_ratio: f64,
}

pub fn drift_experiment(epsilon: f64, checkpoints: &[u64], trials: u64, seed: u64) -> Result<DriftReport> {
    if checkpoints.is_empty() {
        return Err(Error::arg("n_list", "at least one checkpoint is required"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] < 2 {
        return Err(Error::arg("n_list", "checkpoints must be increasing and at least 2"));
    }
    if trials == 0 {
        return Err(Error::arg("trials", "must be at least 1"));
    }
    let bias = BiasParams::new(epsilon, 2)?;
    let runs = map_trials(0, trials, |i| {
        drift_trial(bias, checkpoints, &mut RngStream::new(seed, i))
    });
    let mut rows = Vec::new();
    for (k, &n) in checkpoints.iter().enumerate() {
        let xs: Vec<f64> = runs.iter().map(|r| r[k] as f64).collect();
        let norm: Vec<f64> = xs.iter().map(|x| x / drift_scale(n)).collect();
        rows.push(DriftRow {
            n,
            x_p01: quantile(&xs, 0.01)?,
            x: summarize(&xs)?,
            normalized: summarize(&norm)?,
        });
    }
    let mut worst = f64::INFINITY;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            worst = worst.min(rows[j].normalized.q05 / rows[i].normalized.q05);
        }
    }
    Ok(DriftReport {
        epsilon,
        checkpoints: checkpoints.to_vec(),
        trials: runs,
        rows,
        worst_p05_ratio: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_values() {
        let n: f64 = 1e4;
        assert!((drift_scale(10_000) - 1000.0 / n.ln().powf(1.25)).abs() < 1e-9);
    }

    #[test]
    fn unbiased_median_near_zero() {
        let r = drift_experiment(0.0, &[2000], 400, 4).unwrap();
        // sd of X_n is sqrt(n/2) ≈ 32; the median of 400 has sd ≈ 2
        assert!(r.rows[0].x.q50.abs() < 8.0, "{:?}", r.rows[0].x);
    }

    #[test]
    fn full_bias_moves_right() {
        let r = drift_experiment(1.0, &[1000, 10_000], 200, 5).unwrap();
        assert!(r.rows[0].x_p01 > 0.0);
        assert!(r.rows[1].x.q50 > r.rows[0].x.q50);
    }

    #[test]
    fn bad_checkpoints() {
        assert!(drift_experiment(1.0, &[], 1, 1).is_err());
        assert!(drift_experiment(1.0, &[100, 10], 1, 1).is_err());
    }
}
