//! Exit law of planar SRW from a square, used to jump a walker across
//! regions that cannot contain its target.
//!
//! For the square with interior `|dx|, |dy| ≤ L` the walk started at the
//! centre leaves through each side with probability 1/4, and the exit point
//! on a side has the discrete harmonic measure
//!
//!   H(j) = Σ_{k odd} (1/N) sin(kπ/2) sin(kπ(j+L+1)/N) / cosh(α_k (L+1)),
//!
//! with N = 2L+2 and cosh α_k = 2 − cos(kπ/N) (separation of variables on
//! the Dirichlet problem). Terms decay like e^{-kπ/2}, so a few dozen suffice.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Largest tabulated half-width is 2^MAX_LEVEL.
pub const MAX_LEVEL: u32 = 16;

/// Exit probabilities through the side `x = L+1`, indexed by `j + L`.
pub fn side_exit_law(half: u32) -> Vec<f64> {
    let l = half as i64;
    let n = 2.0 * (l as f64) + 2.0;
    let mut out = vec![0.0; (2 * l + 1) as usize];
    let mut k = 1u64;
    while (k as f64) < n {
        let theta = k as f64 * PI / n;
        let s = (theta / 2.0).sin();
        let delta = 2.0 * s * s;
        let alpha = (delta + (delta * (2.0 + delta)).sqrt()).ln_1p();
        let t = alpha * (l as f64 + 1.0);
        let e = (-t).exp();
        if e < 1e-18 {
            break;
        }
        let sign = if k % 4 == 1 { 1.0 } else { -1.0 };
        let w = sign * 2.0 * e / (1.0 + e * e) / n;
        for (i, slot) in out.iter_mut().enumerate() {
            *slot += w * (theta * (i as f64 + 1.0)).sin();
        }
        k += 2;
    }
    out
}

/// Sampler for one square size.
#[derive(Clone, Debug)]
pub struct ExitKernel {
    half: i64,
    cdf: Vec<f64>,
}

impl ExitKernel {
    pub fn new(half: u32) -> Self {
        let law = side_exit_law(half);
        let total: f64 = law.iter().map(|p| p.max(0.0)).sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = law
            .iter()
            .map(|p| {
                acc += p.max(0.0) / total;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        ExitKernel {
            half: half as i64,
            cdf,
        }
    }

    pub fn half(&self) -> i64 {
        self.half
    }

    /// Exit displacement from the centre for one uniform variate: the side is
    /// read from the top quarter of `u`, the offset along it from the rest.
    pub fn displacement(&self, u: f64) -> (i64, i64) {
        let scaled = u * 4.0;
        let side = (scaled as usize).min(3);
        let v = scaled - side as f64;
        let i = self.cdf.partition_point(|&c| c <= v).min(self.cdf.len() - 1);
        let j = i as i64 - self.half;
        let r = self.half + 1;
        match side {
            0 => (r, j),
            1 => (-r, j),
            2 => (j, r),
            _ => (j, -r),
        }
    }
}

/// Kernels for half-widths 2, 4, …, 2^MAX_LEVEL.
pub struct SquareJumper {
    kernels: Vec<ExitKernel>,
}

impl SquareJumper {
    pub fn shared() -> &'static SquareJumper {
        static CELL: OnceLock<SquareJumper> = OnceLock::new();
        CELL.get_or_init(|| SquareJumper {
            kernels: (1..=MAX_LEVEL).map(|k| ExitKernel::new(1 << k)).collect(),
        })
    }

    /// Largest kernel whose square fits strictly inside distance `clear`
    /// (L∞) of the centre, i.e. with `L + 1 ≤ clear`.
    pub fn fitting(&self, clear: i64) -> Option<&ExitKernel> {
        if clear < 3 {
            return None;
        }
        let level = (63 - (clear - 1).leading_zeros()).min(MAX_LEVEL);
        Some(&self.kernels[level as usize - 1])
    }
}
