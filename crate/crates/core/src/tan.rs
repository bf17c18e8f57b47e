//! Tan points of planar SRW and their probabilities.
//!
//! A site is tan when the walk reaches it before any site further right in
//! the same row. Reversing the walk turns "site −z is tan" into "SRW started
//! at z first meets the ray {(x, 0): x ≥ 0} at its tip". The estimators and
//! the asymptotic prediction below are written in that second form: their
//! `(x, y)` is the start offset from the tip. [`TanTracker`],
//! [`brute_force_tan_set`] and [`eq2_bounds_check`] work with tan sites
//! directly.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{polar_angle, LatticePoint};
use crate::parallel::{map_trials, sum_trials};
use crate::rng::RngStream;
use crate::squares::SquareJumper;
use crate::stats::wilson_interval;

/// Default step cap of the direct estimator.
pub const DEFAULT_STEP_CAP: u64 = 10_000_000;
/// Default escape radius (L∞) of the square-jump estimator.
pub const DEFAULT_RADIUS_CAP: i64 = 10_000_000;

/// Online tan detection: tracks the largest x seen in each row.
#[derive(Clone, Debug, Default)]
pub struct TanTracker {
    rowmax: FxHashMap<i64, i64>,
    tan_count: u64,
    tan_points: Option<Vec<LatticePoint>>,
}

impl TanTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn recording() -> Self {
        TanTracker {
            tan_points: Some(Vec::new()),
            ..Self::default()
        }
    }

    /// Feeds the next trajectory site; true if it is a new tan point.
    #[inline]
    pub fn observe(&mut self, x: i64, y: i64) -> bool {
        let fresh = match self.rowmax.get_mut(&y) {
            Some(m) if x <= *m => false,
            Some(m) => {
                *m = x;
                true
            }
            None => {
                self.rowmax.insert(y, x);
                true
            }
        };
        if fresh {
            self.tan_count += 1;
            if let Some(p) = self.tan_points.as_mut() {
                p.push(LatticePoint::xy(x, y));
            }
        }
        fresh
    }

    pub fn observe_point(&mut self, p: &LatticePoint) -> bool {
        self.observe(p.x(), p.y())
    }

    pub fn tan_count(&self) -> u64 {
        self.tan_count
    }

    pub fn rowmax(&self, y: i64) -> Option<i64> {
        self.rowmax.get(&y).copied()
    }

    pub fn tan_points(&self) -> Option<&[LatticePoint]> {
        self.tan_points.as_deref()
    }
}

/// Tan set of a full trajectory by the literal definition, O(n²).
pub fn brute_force_tan_set(trace: &[LatticePoint]) -> BTreeSet<LatticePoint> {
    let mut out = BTreeSet::new();
    for (t, p) in trace.iter().enumerate() {
        let earlier_visit = trace[..t].iter().any(|q| q == p);
        if earlier_visit {
            continue;
        }
        let shaded = trace[..t].iter().any(|q| q.y() == p.y() && q.x() > p.x());
        if !shaded {
            out.insert(p.clone());
        }
    }
    out
}

/// Monte Carlo estimate of a tip-hit probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TanEstimate {
    pub trials: u64,
    pub resolved: u64,
    pub hits: u64,
    pub p_hat: f64,
    /// Half-width of the 95% Wilson interval.
    pub ci_halfwidth: f64,
    pub censored_fraction: f64,
}

impl TanEstimate {
    pub fn from_counts(trials: u64, resolved: u64, hits: u64) -> Self {
        let p_hat = if resolved == 0 {
            0.0
        } else {
            hits as f64 / resolved as f64
        };
        TanEstimate {
            trials,
            resolved,
            hits,
            p_hat,
            ci_halfwidth: wilson_interval(hits, resolved).1,
            censored_fraction: if trials == 0 {
                0.0
            } else {
                (trials - resolved) as f64 / trials as f64
            },
        }
    }

    /// The origin is tan with certainty.
    pub fn certain() -> Self {
        TanEstimate {
            trials: 0,
            resolved: 0,
            hits: 0,
            p_hat: 1.0,
            ci_halfwidth: 0.0,
            censored_fraction: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Tip,
    Ray,
    Censored,
}

#[inline]
fn on_ray(x: i64, y: i64) -> bool {
    y == 0 && x >= 0
}

#[inline]
fn settle(x: i64, y: i64) -> Option<Outcome> {
    if on_ray(x, y) {
        Some(if x == 0 { Outcome::Tip } else { Outcome::Ray })
    } else {
        None
    }
}

#[inline]
fn unit_step(x: &mut i64, y: &mut i64, u: f64) {
    match (u * 4.0) as u32 {
        0 => *x += 1,
        1 => *x -= 1,
        2 => *y += 1,
        _ => *y -= 1,
    }
}

/// One SRW trial from `(x, y)` toward the ray, by single steps.
pub fn direct_trial(mut x: i64, mut y: i64, step_cap: u64, rng: &mut RngStream) -> Outcome {
    let mut steps = 0u64;
    loop {
        if let Some(o) = settle(x, y) {
            return o;
        }
        if steps == step_cap {
            return Outcome::Censored;
        }
        unit_step(&mut x, &mut y, rng.uniform());
        steps += 1;
    }
}

/// L∞ distance from `(x, y)` to the ray.
#[inline]
fn ray_clearance(x: i64, y: i64) -> i64 {
    if x >= 0 {
        y.abs()
    } else {
        (-x).max(y.abs())
    }
}

/// One SRW trial from `(x, y)` toward the ray, jumping across squares that
/// miss the ray. Censored once the walk leaves the box `[-radius_cap,
/// radius_cap]²`; squares never straddle the box edge, so censoring is the
/// exact exit event of the box.
pub fn square_trial(mut x: i64, mut y: i64, radius_cap: i64, rng: &mut RngStream) -> Outcome {
    let jumper = SquareJumper::shared();
    loop {
        if let Some(o) = settle(x, y) {
            return o;
        }
        if x.abs().max(y.abs()) > radius_cap {
            return Outcome::Censored;
        }
        let u = rng.uniform();
        let room = radius_cap + 1 - x.abs().max(y.abs());
        match jumper.fitting(ray_clearance(x, y).min(room)) {
            Some(k) => {
                let (dx, dy) = k.displacement(u);
                x += dx;
                y += dy;
            }
            None => unit_step(&mut x, &mut y, u),
        }
    }
}

fn check_start(x: i64, y: i64) -> Result<()> {
    if x == 0 && y == 0 {
        return Err(Error::arg(
            "point",
            "(0,0) is the tip itself; its probability is 1",
        ));
    }
    Ok(())
}

fn tally(outcomes: &[Outcome]) -> (u64, u64) {
    let hits = outcomes.iter().filter(|&&o| o == Outcome::Tip).count() as u64;
    let resolved = outcomes.iter().filter(|&&o| o != Outcome::Censored).count() as u64;
    (resolved, hits)
}

/// Direct estimate of P[SRW from (x, y) first meets the ray at the tip],
/// i.e. of P[site (−x, −y) is tan]. Trial `i` uses stream `i` of `seed`.
pub fn tan_probability_mc(
    x: i64,
    y: i64,
    trials: u64,
    step_cap: u64,
    seed: u64,
) -> Result<TanEstimate> {
    check_start(x, y)?;
    if trials == 0 {
        return Err(Error::arg("trials", "must be at least 1"));
    }
    let outcomes = map_trials(0, trials, |i| {
        direct_trial(x, y, step_cap, &mut RngStream::new(seed, i))
    });
    let (resolved, hits) = tally(&outcomes);
    Ok(TanEstimate::from_counts(trials, resolved, hits))
}

/// Same quantity as [`tan_probability_mc`], sampled with square jumps and
/// censored by distance instead of time. Runs batches of trials until
/// `resolved_target` trials have resolved (or `max_trials` are spent).
pub fn tan_probability_fast(
    x: i64,
    y: i64,
    resolved_target: u64,
    radius_cap: i64,
    seed: u64,
) -> Result<TanEstimate> {
    check_start(x, y)?;
    if resolved_target == 0 {
        return Err(Error::arg("trials", "must be at least 1"));
    }
    if radius_cap < x.abs().max(y.abs()) {
        return Err(Error::arg("radius_cap", "start lies outside the radius cap"));
    }
    let max_trials = resolved_target.saturating_mul(4);
    let mut outcomes = Vec::new();
    let mut resolved = 0u64;
    while resolved < resolved_target && (outcomes.len() as u64) < max_trials {
        let start = outcomes.len() as u64;
        let need = resolved_target - resolved;
        let batch = map_trials(start, start + need, |i| {
            square_trial(x, y, radius_cap, &mut RngStream::new(seed, i))
        });
        resolved += tally(&batch).0;
        outcomes.extend(batch);
    }
    let (resolved, hits) = tally(&outcomes);
    Ok(TanEstimate::from_counts(outcomes.len() as u64, resolved, hits))
}

/// Joint estimates for every start offset in `[-w, w]²` from one family of
/// walks: a walk from the origin resolves site `(a, b)` the first time it
/// enters row `b` at `x ≥ a`, and the site is tan if that entry is at `a`.
#[derive(Clone, Debug, Serialize)]
pub struct TanGrid {
    pub window: i64,
    pub trials: u64,
    pub step_cap: u64,
    cells: Vec<(u64, u64)>,
}

impl TanGrid {
    fn slot(&self, x: i64, y: i64) -> Option<usize> {
        let w = self.window;
        if x.abs() > w || y.abs() > w {
            return None;
        }
        Some(((y + w) * (2 * w + 1) + (x + w)) as usize)
    }

    /// Estimate for start offset `(x, y)`, which is the site `(−x, −y)`.
    pub fn estimate(&self, x: i64, y: i64) -> Option<TanEstimate> {
        if x == 0 && y == 0 {
            return Some(TanEstimate::certain());
        }
        let (resolved, hits) = self.cells[self.slot(-x, -y)?];
        Some(TanEstimate::from_counts(self.trials, resolved, hits))
    }
}

/// Row state for the grid estimator: rightmost x reached and tan bits.
fn grid_trial(window: i64, step_cap: u64, rng: &mut RngStream, acc: &mut [u64]) {
    let w = window;
    let rows = (2 * w + 1) as usize;
    let mut rowmax = vec![i64::MIN; rows];
    let mut tan = vec![0u64; rows];
    let mut open = rows;
    let (mut x, mut y) = (0i64, 0i64);
    let mut steps = 0u64;
    loop {
        if y.abs() <= w {
            let r = (y + w) as usize;
            let m = rowmax[r];
            if x > m {
                if m < w && x >= w {
                    open -= 1;
                }
                if x.abs() <= w {
                    tan[r] |= 1u64 << (x + w);
                }
                rowmax[r] = x;
                if open == 0 {
                    break;
                }
            }
        }
        if steps == step_cap {
            break;
        }
        unit_step(&mut x, &mut y, rng.uniform());
        steps += 1;
    }
    let cols = 2 * w + 1;
    for r in 0..rows {
        let m = rowmax[r];
        for c in 0..cols {
            let a = c - w;
            if a <= m {
                let slot = 2 * (r * cols as usize + c as usize);
                acc[slot] += 1;
                acc[slot + 1] += (tan[r] >> c) & 1;
            }
        }
    }
}

/// Runs batches of `batch` trials until every site in the window has at
/// least `resolved_target` resolutions; trial `i` uses stream `i` of `seed`.
pub fn tan_grid_mc(
    window: i64,
    resolved_target: u64,
    step_cap: u64,
    seed: u64,
) -> Result<TanGrid> {
    if !(1..=30).contains(&window) {
        return Err(Error::arg("window", "must lie in 1..=30"));
    }
    if resolved_target == 0 {
        return Err(Error::arg("trials", "must be at least 1"));
    }
    let cells = ((2 * window + 1) * (2 * window + 1)) as usize;
    let batch = resolved_target.clamp(1, 1 << 14);
    let mut acc = vec![0u64; 2 * cells];
    let mut trials = 0u64;
    let min_resolved = |acc: &[u64]| acc.iter().step_by(2).copied().min().unwrap_or(0);
    while min_resolved(&acc) < resolved_target && trials < resolved_target.saturating_mul(8) {
        let part = sum_trials(trials, trials + batch, 2 * cells, |i, a| {
            grid_trial(window, step_cap, &mut RngStream::new(seed, i), a)
        });
        for (s, p) in acc.iter_mut().zip(part) {
            *s += p;
        }
        trials += batch;
    }
    Ok(TanGrid {
        window,
        trials,
        step_cap,
        cells: acc.chunks(2).map(|c| (c[0], c[1])).collect(),
    })
}

/// `√((1+√2)/(2π))`.
pub fn eq1_constant() -> f64 {
    ((1.0 + 2f64.sqrt()) / (2.0 * PI)).sqrt()
}

/// Leading-order tip-hit probability from start offset `(x, y)`:
/// `C sin(θ/2) / √r`. Zero on the ray itself.
pub fn eq1_prediction(x: i64, y: i64) -> Result<f64> {
    check_start(x, y)?;
    let r = ((x * x + y * y) as f64).sqrt();
    let theta = polar_angle(x, y);
    Ok(eq1_constant() * (theta / 2.0).sin() / r.sqrt())
}

/// Site-frame scale of the tan probability: `r^{-1/2}` for `x ≥ 0` and
/// `|y| r^{-3/2}` for `x < 0`.
pub fn eq2_scale(x: i64, y: i64) -> f64 {
    let r = ((x * x + y * y) as f64).sqrt();
    if x >= 0 {
        1.0 / r.sqrt()
    } else {
        y.abs() as f64 / r.powf(1.5)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Eq2Sample {
    /// Tan site relative to the walk's start.
    pub site: (i64, i64),
    pub p_hat: f64,
    pub ci_halfwidth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eq2Band {
    pub count: usize,
    /// Smallest and largest `p_hat / g`.
    pub c_low: f64,
    pub c_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eq2Report {
    pub right: Option<Eq2Band>,
    pub left: Option<Eq2Band>,
    /// Sites whose interval excludes the predicted order: zero scale with a
    /// positive estimate, or positive scale with an estimate pinned at 0.
    pub violations: Vec<(i64, i64)>,
}

impl Eq2Report {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
            && [&self.right, &self.left]
                .iter()
                .all(|b| b.as_ref().map_or(true, |b| b.c_low > 0.0))
    }
}

/// Checks estimates against the two-sided order bounds in the site frame and
/// reports the empirical constants on each half-plane.
pub fn eq2_bounds_check(samples: &[Eq2Sample]) -> Eq2Report {
    let mut right = Vec::new();
    let mut left = Vec::new();
    let mut violations = Vec::new();
    for s in samples {
        let (x, y) = s.site;
        if x == 0 && y == 0 {
            continue;
        }
        let g = eq2_scale(x, y);
        if g == 0.0 {
            if s.p_hat - s.ci_halfwidth > 0.0 {
                violations.push(s.site);
            }
            continue;
        }
        if s.p_hat + s.ci_halfwidth <= 0.0 {
            violations.push(s.site);
        }
        let ratio = s.p_hat / g;
        if x >= 0 {
            right.push(ratio);
        } else {
            left.push(ratio);
        }
    }
    let band = |v: &[f64]| {
        (!v.is_empty()).then(|| Eq2Band {
            count: v.len(),
            c_low: v.iter().copied().fold(f64::INFINITY, f64::min),
            c_high: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    };
    Eq2Report {
        right: band(&right),
        left: band(&left),
        violations,
    }
}
