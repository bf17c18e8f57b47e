//! One-dimensional ERW started at 0: return to the origin and the chance
//! of pushing the maximum one site further.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::BiasParams;
use crate::parallel::map_trials;
use crate::rng::RngStream;
use crate::stats::wilson_interval;
use crate::walkers::WalkState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RecurrenceTrial {
    /// Step at which the walk came back to 0, if within the cap.
    pub return_step: Option<u64>,
    /// Largest position reached before returning (or before the cap).
    pub max_x: i64,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalRow {
    pub x: i64,
    /// Trials that reached x for the first time, with [0, x] visited, and
    /// then resolved (reached x+1 or returned to 0 within the cap).
    pub events: u64,
    pub advances: u64,
    pub p_hat: f64,
    pub ci_halfwidth: f64,
    pub predicted: f64,
}

impl ConditionalRow {
    pub fn within(&self, k: f64) -> bool {
        (self.p_hat - self.predicted).abs() <= k * self.ci_halfwidth
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceReport {
    pub p: f64,
    pub step_cap: u64,
    pub trials: Vec<RecurrenceTrial>,
    pub return_fraction: f64,
    pub conditional_table: Vec<ConditionalRow>,
}

/// `1 − 2(1−p)/(x+1)`.
pub fn predicted_advance(p: f64, x: i64) -> f64 {
    1.0 - 2.0 * (1.0 - p) / (x as f64 + 1.0)
}

pub fn recurrence_trial(bias: BiasParams, step_cap: u64, rng: &mut RngStream) -> RecurrenceTrial {
    let mut w = WalkState::at_origin(bias);
    let mut max_x = 0;
    while w.steps() < step_cap {
        w.erw_step(rng);
        let x = w.x();
        if x == 0 {
            return RecurrenceTrial {
                return_step: Some(w.steps()),
                max_x,
                steps: w.steps(),
            };
        }
        max_x = max_x.max(x);
    }
    RecurrenceTrial {
        return_step: None,
        max_x,
        steps: w.steps(),
    }
}

/// Fraction of trials back at 0 within `cap` steps.
pub fn return_fraction_at(trials: &[RecurrenceTrial], cap: u64) -> f64 {
    let back = trials
        .iter()
        .filter(|t| t.return_step.is_some_and(|s| s <= cap))
        .count();
    back as f64 / trials.len() as f64
}

/// Conditional advance frequencies for `x = 1..=x_max`. A trial reaching
/// x for the first time sits at x with [0, x] visited; it advances if its
/// maximum later exceeds x. Trials stuck at maximum x when the cap fires
/// are unresolved and left out.
pub fn conditional_table(p: f64, trials: &[RecurrenceTrial], x_max: i64) -> Vec<ConditionalRow> {
    (1..=x_max)
        .map(|x| {
            let reached = trials.iter().filter(|t| t.max_x >= x);
            let mut events = 0u64;
            let mut advances = 0u64;
            for t in reached {
                if t.max_x > x {
                    events += 1;
                    advances += 1;
                } else if t.return_step.is_some() {
                    events += 1;
                }
            }
            let (_, half) = wilson_interval(advances, events);
            ConditionalRow {
                x,
                events,
                advances,
                p_hat: if events == 0 {
                    0.0
                } else {
                    advances as f64 / events as f64
                },
                ci_halfwidth: half,
                predicted: predicted_advance(p, x),
            }
        })
        .collect()
}

pub fn recurrence1d_experiment(
    p: f64,
    trials: u64,
    step_cap: u64,
    seed: u64,
    x_max: i64,
) -> Result<RecurrenceReport> {
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::arg("p", format!("{p} is outside (1/2, 1]")));
    }
    if trials == 0 {
        return Err(Error::arg("trials", "must be at least 1"));
    }
    let bias = BiasParams::from_right_probability(p)?;
    let runs = map_trials(0, trials, |i| {
        recurrence_trial(bias, step_cap, &mut RngStream::new(seed, i))
    });
    Ok(RecurrenceReport {
        p,
        step_cap,
        return_fraction: return_fraction_at(&runs, step_cap),
        conditional_table: conditional_table(p, &runs, x_max),
        trials: runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictions() {
        assert_eq!(predicted_advance(0.75, 1), 0.75);
        assert_eq!(predicted_advance(1.0, 1), 1.0);
        assert!((predicted_advance(0.75, 3) - 0.875).abs() < 1e-15);
    }

    #[test]
    fn rejects_unbiased_walks() {
        assert!(recurrence1d_experiment(0.5, 10, 10, 1, 5).is_err());
        assert!(recurrence1d_experiment(1.2, 10, 10, 1, 5).is_err());
    }

    #[test]
    fn full_bias_never_returns() {
        let r = recurrence1d_experiment(1.0, 20, 500, 1, 5).unwrap();
        assert_eq!(r.return_fraction, 0.0);
        assert!(r.trials.iter().all(|t| t.max_x == 500));
        assert!(r.conditional_table.iter().all(|c| c.p_hat == 1.0));
    }

    #[test]
    fn conditional_table_counts() {
        let t = |ret: Option<u64>, max_x| RecurrenceTrial {
            return_step: ret,
            max_x,
            steps: 0,
        };
        let runs = [t(Some(4), 1), t(Some(9), 3), t(None, 2), t(Some(2), 0)];
        let tab = conditional_table(0.75, &runs, 3);
        assert_eq!((tab[0].events, tab[0].advances), (3, 2));
        // the capped trial at max 2 is unresolved for x = 2
        assert_eq!((tab[1].events, tab[1].advances), (1, 1));
        assert_eq!((tab[2].events, tab[2].advances), (1, 0));
        assert_eq!(return_fraction_at(&runs, 5), 0.5);
    }

    #[test]
    fn matches_prediction_at_small_x() {
        let r = recurrence1d_experiment(0.75, 20_000, 20_000, 3, 6).unwrap();
        for row in &r.conditional_table {
            assert!(row.within(3.0), "{row:?}");
        }
        assert!(r.return_fraction > 0.8);
    }
}
