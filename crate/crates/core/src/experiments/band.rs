//! Tan points collected inside a horizontal band before the walk leaves the
//! band's enclosure.
//!
//! A fresh SRW starts at (0, 0) on the lower edge of the band ℤ×[0, h−1];
//! every new tan point with y in the band counts, the start included, until
//! y leaves [−h, 2h−1].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Direction;
use crate::parallel::map_trials;
use crate::rng::RngStream;
use crate::stats::{loglog_fit, paley_zygmund_check, summarize, LogLogFit, PaleyZygmund, SampleSummary};
use crate::tan::TanTracker;

pub const DEFAULT_HEIGHTS: [i64; 5] = [8, 16, 32, 64, 128];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BandTrial {
    pub tan_count: u64,
    pub steps: u64,
}

pub fn band_trial(h: i64, rng: &mut RngStream) -> BandTrial {
    let mut tracker = TanTracker::new();
    let (mut x, mut y) = (0i64, 0i64);
    let mut steps = 0u64;
    let mut count = 0u64;
    loop {
        if (0..h).contains(&y) && tracker.observe(x, y) {
            count += 1;
        }
        if y < -h || y > 2 * h - 1 {
            break;
        }
        let d = Direction::from_index(((rng.uniform() * 4.0) as usize).min(3));
        if d.axis == 0 {
            x += d.sign as i64;
        } else {
            y += d.sign as i64;
        }
        steps += 1;
    }
    BandTrial {
        tan_count: count,
        steps,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BandReport {
    pub h: i64,
    pub trials: Vec<BandTrial>,
    pub summary: SampleSummary,
    /// Fraction of trials with at least half the mean count.
    pub half_mean_fraction: f64,
    pub paley_zygmund: PaleyZygmund,
}

/// Trials for height `h` use lane `h` of `seed`.
pub fn band_experiment(h: i64, trials: u64, seed: u64) -> Result<BandReport> {
    if h < 2 {
        return Err(Error::arg("h", format!("band height {h} is below 2")));
    }
    if trials == 0 {
        return Err(Error::arg("trials", "must be at least 1"));
    }
    let runs = map_trials(0, trials, |i| {
        band_trial(h, &mut RngStream::with_lane(seed, h as u64, i))
    });
    let counts: Vec<f64> = runs.iter().map(|t| t.tan_count as f64).collect();
    let summary = summarize(&counts)?;
    let pz = paley_zygmund_check(&counts)?;
    Ok(BandReport {
        h,
        half_mean_fraction: pz.lhs,
        paley_zygmund: pz,
        summary,
        trials: runs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BandScaling {
    pub reports: Vec<BandReport>,
    pub fit: LogLogFit,
    /// `mean(2h) / mean(h)` for consecutive doublings, keyed by the larger h.
    pub doubling_ratios: Vec<(i64, f64)>,
}

pub fn band_scaling(heights: &[i64], trials: u64, seed: u64) -> Result<BandScaling> {
    let reports = heights
        .iter()
        .map(|&h| band_experiment(h, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.h as f64, r.summary.mean)).collect();
    let fit = loglog_fit(&pts)?;
    let doubling_ratios = reports
        .windows(2)
        .filter(|w| w[1].h == 2 * w[0].h)
        .map(|w| (w[1].h, w[1].summary.mean / w[0].summary.mean))
        .collect();
    Ok(BandScaling {
        reports,
        fit,
        doubling_ratios,
    })
}
