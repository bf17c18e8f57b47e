//! Configured experiments with per-trial tables and JSON summaries.

pub mod band;
pub mod drift;
pub mod range;
pub mod recurrence;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::parallel::{map_trials, with_workers};
use crate::rng::RngStream;
use crate::tan::{direct_trial, square_trial, Outcome, TanEstimate, DEFAULT_RADIUS_CAP, DEFAULT_STEP_CAP};

pub use band::{band_experiment, band_scaling, BandReport, BandScaling, DEFAULT_HEIGHTS};
pub use drift::{drift_experiment, drift_scale, DriftReport};
pub use range::{glasser_zucker_constant, range_experiment, speed_experiment, RangeReport, SpeedReport};
pub use recurrence::{predicted_advance, recurrence1d_experiment, RecurrenceReport};
pub use crate::stats::{loglog_fit, paley_zygmund_check, summarize, LogLogFit, SampleSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Recurrence1d,
    Band,
    Drift,
    Range,
    Speed,
    Tanprob,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Recurrence1d,
        ExperimentKind::Band,
        ExperimentKind::Drift,
        ExperimentKind::Range,
        ExperimentKind::Speed,
        ExperimentKind::Tanprob,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Recurrence1d => "recurrence1d",
            ExperimentKind::Band => "band",
            ExperimentKind::Drift => "drift",
            ExperimentKind::Range => "range",
            ExperimentKind::Speed => "speed",
            ExperimentKind::Tanprob => "tanprob",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.as_str()).collect();
                Error::arg("kind", format!("unknown experiment kind {s:?} (expected one of {})", names.join(", ")))
            })
    }

    /// Header line of the per-trial CSV.
    pub fn csv_header(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Recurrence1d => &["trial", "returned", "return_step", "max_x", "steps"],
            ExperimentKind::Band => &["h", "trial", "tan_count", "steps"],
            ExperimentKind::Drift => &["trial", "n", "x", "normalized"],
            ExperimentKind::Range => &["trial", "dim", "n", "range_ratio"],
            ExperimentKind::Speed => &["trial", "dim", "epsilon", "n", "speed"],
            ExperimentKind::Tanprob => &["trial", "outcome"],
        }
    }
}

/// One experiment of a campaign. `kind` stays a string until validation so
/// an unknown kind is reported against its field.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// First-visit right probability of the one-dimensional walk.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heights: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<i64>,
    /// Tan estimator: "squares" (default) or "direct".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Largest x in the recurrence conditional table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<i64>,
    pub trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn need<T: Copy>(v: Option<T>, field: &'static str, kind: ExperimentKind) -> Result<T> {
    v.ok_or_else(|| Error::arg(field, format!("required for kind {}", kind.as_str())))
}

impl ExperimentConfig {
    /// Checks kind-specific fields without running anything.
    pub fn validate(&self) -> Result<ExperimentKind> {
        let kind = ExperimentKind::parse(&self.kind)?;
        if self.trials == 0 {
            return Err(Error::arg("trials", "must be at least 1"));
        }
        match kind {
            ExperimentKind::Recurrence1d => {
                let p = self.right_probability()?;
                if !(p > 0.5 && p <= 1.0) {
                    return Err(Error::arg("p", format!("{p} is outside (1/2, 1]")));
                }
                if let Some(d) = self.dim.filter(|&d| d != 1) {
                    return Err(Error::arg("dim", format!("recurrence1d is one-dimensional, got {d}")));
                }
                need(self.step_cap.or(self.n), "step_cap", kind)?;
            }
            ExperimentKind::Band => {
                if let Some(d) = self.dim.filter(|&d| d != 2) {
                    return Err(Error::arg("dim", format!("band is planar, got {d}")));
                }
                if self.heights().iter().any(|&h| h < 2) {
                    return Err(Error::arg("h", "band heights must be at least 2"));
                }
            }
            ExperimentKind::Drift => {
                if let Some(d) = self.dim.filter(|&d| d != 2) {
                    return Err(Error::arg("dim", format!("drift is planar, got {d}")));
                }
                need(self.epsilon, "epsilon", kind)?;
                if self.checkpoints().is_empty() {
                    return Err(Error::arg("n_list", "required for kind drift"));
                }
            }
            ExperimentKind::Range => {
                need(self.n, "n", kind)?;
                if self.dim == Some(0) {
                    return Err(Error::InvalidDimension(0));
                }
            }
            ExperimentKind::Speed => {
                need(self.n, "n", kind)?;
                need(self.epsilon, "epsilon", kind)?;
                let d = need(self.dim, "dim", kind)?;
                if d < 4 {
                    return Err(Error::arg("dim", format!("speed needs d >= 4, got {d}")));
                }
            }
            ExperimentKind::Tanprob => {
                let (x, y) = (need(self.x, "x", kind)?, need(self.y, "y", kind)?);
                if (x, y) == (0, 0) {
                    return Err(Error::arg("x", "(0,0) is certain; nothing to estimate"));
                }
                self.tan_method()?;
            }
        }
        if let Some(e) = self.epsilon {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidEpsilon(e));
            }
        }
        Ok(kind)
    }

    fn right_probability(&self) -> Result<f64> {
        match (self.p, self.epsilon) {
            (Some(p), _) => Ok(p),
            (None, Some(e)) => Ok((1.0 + e) / 2.0),
            (None, None) => Err(Error::arg("p", "required for kind recurrence1d")),
        }
    }

    pub fn heights(&self) -> Vec<i64> {
        match (&self.heights, self.h) {
            (Some(v), _) => v.clone(),
            (None, Some(h)) => vec![h],
            (None, None) => DEFAULT_HEIGHTS.to_vec(),
        }
    }

    fn checkpoints(&self) -> Vec<u64> {
        match (&self.n_list, self.n) {
            (Some(v), _) => v.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => Vec::new(),
        }
    }

    fn tan_method(&self) -> Result<TanMethod> {
        match self.method.as_deref() {
            None | Some("squares") => Ok(TanMethod::Squares),
            Some("direct") => Ok(TanMethod::Direct),
            Some(m) => Err(Error::arg("method", format!("unknown tan method {m:?} (squares, direct)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TanMethod {
    Squares,
    Direct,
}

/// A CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(&'static str),
    Empty,
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            // `{}` on f64 is the shortest decimal that round-trips
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialTable {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl TrialTable {
    /// UTF-8, comma separated, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{c}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub table: TrialTable,
    /// Kind-specific results; no timing, so it is reproducible.
    pub summary: Value,
    /// One line for humans.
    pub headline: String,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

/// Runs `cfg` with `default_seed` and `default_workers` unless the config
/// sets its own.
pub fn run_experiment(cfg: &ExperimentConfig, default_seed: u64, default_workers: usize) -> Result<ExperimentOutput> {
    let kind = cfg.validate()?;
    let seed = cfg.master_seed.unwrap_or(default_seed);
    let workers = cfg.workers.unwrap_or(default_workers);
    with_workers(workers, || run_kind(kind, cfg, seed))
}

fn run_kind(kind: ExperimentKind, cfg: &ExperimentConfig, seed: u64) -> Result<ExperimentOutput> {
    let header = kind.csv_header();
    let trials = cfg.trials;
    match kind {
        ExperimentKind::Recurrence1d => {
            let p = cfg.right_probability()?;
            let cap = cfg.step_cap.or(cfg.n).expect("validated");
            let r = recurrence1d_experiment(p, trials, cap, seed, cfg.x_max.unwrap_or(30))?;
            let rows = r
                .trials
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    vec![
                        Cell::Int(i as i64),
                        Cell::Bool(t.return_step.is_some()),
                        t.return_step.map_or(Cell::Empty, |s| Cell::Int(s as i64)),
                        Cell::Int(t.max_x),
                        Cell::Int(t.steps as i64),
                    ]
                })
                .collect();
            let mut caps: Vec<u64> = [10_000u64, 100_000, 1_000_000].into_iter().filter(|&c| c < cap).collect();
            caps.push(cap);
            let by_cap: Vec<Value> = caps
                .iter()
                .map(|&c| json!({"cap": c, "return_fraction": recurrence::return_fraction_at(&r.trials, c)}))
                .collect();
            Ok(ExperimentOutput {
                kind,
                headline: format!("recurrence1d p={p} cap={cap}: return_fraction={}", r.return_fraction),
                summary: json!({
                    "p": p,
                    "step_cap": cap,
                    "return_fraction": r.return_fraction,
                    "return_fraction_by_cap": by_cap,
                    "conditional_table": to_value(&r.conditional_table),
                }),
                table: TrialTable { header, rows },
            })
        }
        ExperimentKind::Band => {
            let s = if cfg.heights().len() >= 3 {
                Some(band_scaling(&cfg.heights(), trials, seed)?)
            } else {
                None
            };
            let reports = match &s {
                Some(s) => s.reports.clone(),
                None => cfg
                    .heights()
                    .iter()
                    .map(|&h| band_experiment(h, trials, seed))
                    .collect::<Result<Vec<_>>>()?,
            };
            let mut rows = Vec::new();
            for r in &reports {
                for (i, t) in r.trials.iter().enumerate() {
                    rows.push(vec![
                        Cell::Int(r.h),
                        Cell::Int(i as i64),
                        Cell::Int(t.tan_count as i64),
                        Cell::Int(t.steps as i64),
                    ]);
                }
            }
            let per_h: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({
                        "h": r.h,
                        "summary": to_value(&r.summary),
                        "half_mean_fraction": r.half_mean_fraction,
                        "paley_zygmund": to_value(&r.paley_zygmund),
                    })
                })
                .collect();
            let headline = match &s {
                Some(s) => format!("band heights {:?}: slope={} r2={}", cfg.heights(), s.fit.slope, s.fit.r2),
                None => format!("band h={:?}: mean tan count={}", cfg.heights(), reports[0].summary.mean),
            };
            Ok(ExperimentOutput {
                kind,
                headline,
                summary: json!({
                    "heights": per_h,
                    "fit": s.as_ref().map(|s| to_value(&s.fit)),
                    "doubling_ratios": s.as_ref().map(|s| to_value(&s.doubling_ratios)),
                }),
                table: TrialTable { header, rows },
            })
        }
        ExperimentKind::Drift => {
            let eps = cfg.epsilon.expect("validated");
            let ns = cfg.checkpoints();
            let r = drift_experiment(eps, &ns, trials, seed)?;
            let mut rows = Vec::new();
            for (i, xs) in r.trials.iter().enumerate() {
                for (k, &x) in xs.iter().enumerate() {
                    rows.push(vec![
                        Cell::Int(i as i64),
                        Cell::Int(ns[k] as i64),
                        Cell::Int(x),
                        Cell::Float(x as f64 / drift_scale(ns[k])),
                    ]);
                }
            }
            let last = r.rows.last().expect("nonempty");
            Ok(ExperimentOutput {
                kind,
                headline: format!(
                    "drift eps={eps}: n={} median X={} p01 X={} worst p05 ratio={}",
                    last.n, last.x.q50, last.x_p01, r.worst_p05_ratio
                ),
                summary: json!({
                    "epsilon": eps,
                    "rows": to_value(&r.rows),
                    "worst_p05_ratio": r.worst_p05_ratio,
                }),
                table: TrialTable { header, rows },
            })
        }
        ExperimentKind::Range => {
            let dim = cfg.dim.unwrap_or(3);
            let n = cfg.n.expect("validated");
            let r = range_experiment(dim, n, trials, seed)?;
            let rows = r
                .samples
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![Cell::Int(i as i64), Cell::Int(dim as i64), Cell::Int(n as i64), Cell::Float(v)])
                .collect();
            Ok(ExperimentOutput {
                kind,
                headline: format!("range d={dim} n={n}: mean R_n/n={} ± {}", r.summary.mean, r.summary.ci95_halfwidth),
                summary: json!({
                    "dim": dim,
                    "n": n,
                    "summary": to_value(&r.summary),
                    "escape_constant": glasser_zucker_constant(),
                }),
                table: TrialTable { header, rows },
            })
        }
        ExperimentKind::Speed => {
            let dim = cfg.dim.expect("validated");
            let eps = cfg.epsilon.expect("validated");
            let n = cfg.n.expect("validated");
            let r = speed_experiment(dim, eps, n, trials, seed)?;
            let rows = r
                .samples
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    vec![
                        Cell::Int(i as i64),
                        Cell::Int(dim as i64),
                        Cell::Float(eps),
                        Cell::Int(n as i64),
                        Cell::Float(v),
                    ]
                })
                .collect();
            Ok(ExperimentOutput {
                kind,
                headline: format!(
                    "speed d={dim} eps={eps} n={n}: mean X_n/n={} p05={} bound={}",
                    r.summary.mean,
                    r.p05(),
                    r.bound
                ),
                summary: json!({
                    "dim": dim,
                    "epsilon": eps,
                    "n": n,
                    "summary": to_value(&r.summary),
                    "p05": r.p05(),
                    "bound": r.bound,
                }),
                table: TrialTable { header, rows },
            })
        }
        ExperimentKind::Tanprob => {
            let (x, y) = (cfg.x.expect("validated"), cfg.y.expect("validated"));
            let method = cfg.tan_method()?;
            let outcomes = match method {
                TanMethod::Direct => {
                    let cap = cfg.step_cap.unwrap_or(DEFAULT_STEP_CAP);
                    map_trials(0, trials, |i| direct_trial(x, y, cap, &mut RngStream::new(seed, i)))
                }
                TanMethod::Squares => {
                    let cap = cfg.step_cap.map_or(DEFAULT_RADIUS_CAP, |c| c as i64);
                    map_trials(0, trials, |i| square_trial(x, y, cap, &mut RngStream::new(seed, i)))
                }
            };
            let rows = outcomes
                .iter()
                .enumerate()
                .map(|(i, o)| {
                    let label = match o {
                        Outcome::Tip => "tip",
                        Outcome::Ray => "ray",
                        Outcome::Censored => "censored",
                    };
                    vec![Cell::Int(i as i64), Cell::Text(label)]
                })
                .collect();
            let hits = outcomes.iter().filter(|&&o| o == Outcome::Tip).count() as u64;
            let resolved = outcomes.iter().filter(|&&o| o != Outcome::Censored).count() as u64;
            let e = TanEstimate::from_counts(trials, resolved, hits);
            let pred = crate::tan::eq1_prediction(x, y)?;
            Ok(ExperimentOutput {
                kind,
                headline: format!(
                    "tanprob ({x},{y}): p_hat={} ± {} (leading order {pred}, censored {})",
                    e.p_hat, e.ci_halfwidth, e.censored_fraction
                ),
                summary: json!({
                    "x": x,
                    "y": y,
                    "method": if method == TanMethod::Direct { "direct" } else { "squares" },
                    "estimate": to_value(&e),
                    "leading_order": pred,
                }),
                table: TrialTable { header, rows },
            })
        }
    }
}
