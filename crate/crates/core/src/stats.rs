//! Sample statistics shared by the estimators and experiments.
//!
//! Everything here sorts its input before reducing, so results are
//! bit-identical under any permutation of the samples.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    pub ci95_halfwidth: f64,
    pub censored_fraction: f64,
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::arg("samples", "NaN in sample set"));
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(samples: &[f64], q: f64) -> Result<f64> {
    Ok(quantile_sorted(&sorted(samples)?, q))
}

pub fn summarize(samples: &[f64]) -> Result<SampleSummary> {
    summarize_censored(samples, 0)
}

/// Summary of resolved samples; `censored` counts trials that produced no
/// sample.
pub fn summarize_censored(samples: &[f64], censored: usize) -> Result<SampleSummary> {
    let v = sorted(samples)?;
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Ok(SampleSummary {
        count: n,
        mean,
        variance,
        q05: quantile_sorted(&v, 0.05),
        q25: quantile_sorted(&v, 0.25),
        q50: quantile_sorted(&v, 0.50),
        q75: quantile_sorted(&v, 0.75),
        q95: quantile_sorted(&v, 0.95),
        ci95_halfwidth: Z95 * (variance / n as f64).sqrt(),
        censored_fraction: censored as f64 / (n + censored) as f64,
    })
}

/// 95% Wilson score interval for `successes` out of `n`: `(centre, half-width)`.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.5, 0.5);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    (centre, half)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::arg("points", "need at least 3 points for a fit"));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        return Err(Error::arg("points", "log-log fit needs positive coordinates"));
    }
    let mut pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("points", "all x values coincide"));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LogLogFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PaleyZygmund {
    /// Fraction of samples at least half the sample mean.
    pub lhs: f64,
    /// `mean² / (4 · second moment)`.
    pub rhs: f64,
    /// Wilson half-width on `lhs`.
    pub slack: f64,
    pub holds: bool,
}

/// Second-moment lower bound `P[X ≥ E X / 2] ≥ (E X)² / (4 E X²)` evaluated
/// on the empirical distribution.
pub fn paley_zygmund_check(samples: &[f64]) -> Result<PaleyZygmund> {
    let v = sorted(samples)?;
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    if mean < 0.0 {
        return Err(Error::arg("samples", "mean must be nonnegative"));
    }
    let second = v.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let above = v.iter().filter(|&&x| x >= 0.5 * mean).count();
    let lhs = above as f64 / n as f64;
    let rhs = if second > 0.0 {
        mean * mean / (4.0 * second)
    } else {
        0.0
    };
    let (_, slack) = wilson_interval(above as u64, n as u64);
    Ok(PaleyZygmund {
        lhs,
        rhs,
        slack,
        holds: lhs >= rhs - slack,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    /// 0.999 quantile of the reference distribution.
    pub critical: f64,
}

impl ChiSquare {
    pub fn passes(&self) -> bool {
        self.statistic < self.critical
    }

    fn with_dof(statistic: f64, dof: usize) -> Self {
        let critical = ChiSquared::new(dof as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.999);
        ChiSquare {
            statistic,
            dof,
            critical,
        }
    }

    /// Sum of independent statistics, with their degrees of freedom added.
    pub fn combine(parts: &[ChiSquare]) -> ChiSquare {
        let stat = parts.iter().map(|c| c.statistic).sum();
        let dof = parts.iter().map(|c| c.dof).sum::<usize>().max(1);
        Self::with_dof(stat, dof)
    }
}

/// Two-sample homogeneity test on binned counts. Bins empty in both
/// samples are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() {
        return Err(Error::arg("bins", "histograms differ in length"));
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(Error::EmptySamples);
    }
    let (na, nb) = (na as f64, nb as f64);
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let total = (x + y) as f64;
        if total == 0.0 {
            continue;
        }
        bins += 1;
        let ea = total * na / (na + nb);
        let eb = total * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    Ok(ChiSquare::with_dof(stat, bins.saturating_sub(1).max(1)))
}

/// Homogeneity of two samples of discrete keys. Keys with fewer than
/// `min_total` observations across both samples are pooled into one bin.
pub fn binned_homogeneity<K: Ord + Clone>(a: &[K], b: &[K], min_total: u64) -> Result<ChiSquare> {
    let mut counts: std::collections::BTreeMap<K, (u64, u64)> = Default::default();
    for k in a {
        counts.entry(k.clone()).or_default().0 += 1;
    }
    for k in b {
        counts.entry(k.clone()).or_default().1 += 1;
    }
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    let (mut pa, mut pb) = (0u64, 0u64);
    for (_, (ca, cb)) in counts {
        if ca + cb >= min_total {
            xa.push(ca);
            xb.push(cb);
        } else {
            pa += ca;
            pb += cb;
        }
    }
    xa.push(pa);
    xb.push(pb);
    chi_square_homogeneity(&xa, &xb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_summary() {
        let s = summarize(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.q50, 2.0);
        assert_eq!(s.variance, 1.0);
        assert_eq!(s.count, 3);
        assert!(s.q05 <= s.q25 && s.q25 <= s.q50 && s.q50 <= s.q75 && s.q75 <= s.q95);
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(summarize(&[]), Err(Error::EmptySamples));
        assert!(paley_zygmund_check(&[]).is_err());
    }

    #[test]
    fn censored_fraction() {
        let s = summarize_censored(&[1.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(s.censored_fraction, 0.25);
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0]
            .iter()
            .map(|&h: &f64| (h, h.powf(1.5)))
            .collect();
        let fit = loglog_fit(&pts).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        // fixed ±10% multiplicative perturbations
        let noise = [1.1, 0.9, 1.05, 0.95, 1.08, 0.92, 1.0];
        let pts: Vec<(f64, f64)> = noise
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let h = 2f64.powi(i as i32 + 2);
                (h, 3.0 * h.powf(1.5) * e)
            })
            .collect();
        let fit = loglog_fit(&pts).unwrap();
        assert!((fit.slope - 1.5).abs() < 0.1, "slope {}", fit.slope);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(loglog_fit(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(loglog_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn paley_zygmund_constant() {
        let pz = paley_zygmund_check(&[1.0; 10]).unwrap();
        assert_eq!((pz.lhs, pz.rhs), (1.0, 0.25));
        assert!(pz.holds);
    }

    #[test]
    fn paley_zygmund_two_point() {
        let pz = paley_zygmund_check(&[0.0, 2.0, 0.0, 2.0]).unwrap();
        assert_eq!(pz.lhs, 0.5);
        assert_eq!(pz.rhs, 0.125);
        assert!(pz.holds);
    }

    #[test]
    fn wilson_basics() {
        let (c, h) = wilson_interval(50, 100);
        assert!((c - 0.5).abs() < 1e-12);
        assert!((h - 0.0962).abs() < 1e-3);
        let (c0, h0) = wilson_interval(0, 100);
        assert!(c0 - h0 <= 1e-15 && c0 + h0 > 0.0);
    }

    #[test]
    fn homogeneity_accepts_equal_and_rejects_different() {
        let a = [1000, 2000, 3000, 4000];
        assert!(chi_square_homogeneity(&a, &a).unwrap().passes());
        let b = [4000, 3000, 2000, 1000];
        assert!(!chi_square_homogeneity(&a, &b).unwrap().passes());
        let c = chi_square_homogeneity(&[10, 0, 5], &[12, 0, 4]).unwrap();
        assert_eq!(c.dof, 1);
        // df = 3 critical value at 0.999
        let d = chi_square_homogeneity(&a, &a).unwrap();
        assert!((d.critical - 16.266).abs() < 1e-3);
        let both = ChiSquare::combine(&[d.clone(), d]);
        assert_eq!(both.dof, 6);
        assert!((both.critical - 22.458).abs() < 1e-3);
    }

    #[test]
    fn binned_pools_rare_keys() {
        let a = [1, 1, 1, 2, 2, 9];
        let b = [1, 1, 2, 2, 2, 8];
        let c = binned_homogeneity(&a, &b, 3).unwrap();
        // bins: 1, 2, pooled {8, 9}
        assert_eq!(c.dof, 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn permutation_invariant(mut v in prop::collection::vec(-1e6f64..1e6, 1..200), seed in any::<u64>()) {
                let a = summarize(&v).unwrap();
                let n = v.len();
                let mut s = seed;
                for i in (1..n).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    v.swap(i, (s >> 33) as usize % (i + 1));
                }
                let b = summarize(&v).unwrap();
                prop_assert_eq!(a, b);
            }

            #[test]
            fn quantiles_monotone_and_variance_nonnegative(v in prop::collection::vec(-1e3f64..1e3, 1..100)) {
                let s = summarize(&v).unwrap();
                prop_assert!(s.variance >= 0.0);
                prop_assert!(s.q05 <= s.q25 && s.q25 <= s.q50 && s.q50 <= s.q75 && s.q75 <= s.q95);
            }

            #[test]
            fn paley_zygmund_holds_on_any_nonnegative_sample(v in prop::collection::vec(0.0f64..100.0, 1..100)) {
                let pz = paley_zygmund_check(&v).unwrap();
                prop_assert!(pz.lhs + 1e-12 >= pz.rhs);
            }
        }
    }
}
