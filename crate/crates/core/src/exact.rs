//! Exact dynamic programs for walks in the slit plane ℤ² minus the
//! nonnegative x-axis.
//!
//! The forbidden set is `{(x, 0) : x ≥ 0}`. Two quantities come out of the
//! same one-step kernel:
//!
//! * `a_n`, the number of n-step walks from the origin that avoid the
//!   forbidden set at every time ≥ 1;
//! * brackets on tan probabilities. For a walk started at offset `(x, y)`
//!   from a ray tip, the chance that its first visit to the ray is the tip
//!   equals the mass absorbed at the origin when unit mass starts at
//!   `(x, y)` and the forbidden set absorbs. Stopping after `n_max` steps
//!   gives `lower` (absorbed at the origin so far) and `upper` (`lower` plus
//!   everything not yet absorbed).
//!
//! [`MassGrid`] runs the per-point program, either in floating point or
//! exactly (integer path counts over the implicit denominator 4^n).
//! [`TanOracle`] brackets every point of a window at once: by path reversal
//! the absorbed-at-origin mass from `z` equals the Green's function at `z` of
//! the killed walk started at the origin, and the unabsorbed mass is a
//! survival probability that obeys the same recursion run backwards.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::special::gamma;

/// Largest step count accepted by the exact (integer) programs.
pub const EXACT_MAX_STEPS: usize = 500;

#[inline]
pub fn is_forbidden(x: i64, y: i64) -> bool {
    y == 0 && x >= 0
}

/// Weight carried by one cell of a [`MassGrid`].
pub trait Weight: Clone + std::fmt::Debug {
    fn empty() -> Self;
    fn unit() -> Self;
    /// Weight arriving at a cell from its four neighbours in one step.
    fn gather(a: &Self, b: &Self, c: &Self, d: &Self) -> Self;
    fn accumulate(&mut self, other: &Self);
    /// Re-expresses a weight recorded at step `n` at step `n + 1`.
    fn carry(&mut self);
    /// Weight that `count` of the four moves out of a cell carry.
    fn share(&self, count: u32) -> Self;
    fn to_probability(&self, steps: usize) -> f64;
}

impl Weight for f64 {
    fn empty() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    #[inline]
    fn gather(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        0.25 * (a + b + c + d)
    }
    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }
    fn carry(&mut self) {}
    fn share(&self, count: u32) -> Self {
        0.25 * count as f64 * self
    }
    fn to_probability(&self, _steps: usize) -> f64 {
        *self
    }
}

/// Path counts; the probability is `count / 4^n`.
impl Weight for BigUint {
    fn empty() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn gather(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let mut s = a.clone();
        s += b;
        s += c;
        s += d;
        s
    }
    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }
    fn carry(&mut self) {
        *self <<= 2u32;
    }
    fn share(&self, count: u32) -> Self {
        self * count
    }
    fn to_probability(&self, steps: usize) -> f64 {
        count_ratio(self, steps)
    }
}

/// `count / 4^steps` without overflowing the intermediate.
pub fn count_ratio(count: &BigUint, steps: usize) -> f64 {
    let bits = count.bits() as i64;
    let shift = (bits - 60).max(0);
    let mantissa = (count >> shift as usize).to_f64().unwrap_or(f64::INFINITY);
    mantissa * 2f64.powi((shift - 2 * steps as i64) as i32)
}

/// Probability mass on a square box of the slit plane, absorbed on the
/// forbidden set at times ≥ 1. Mass that steps off the box is killed and
/// tracked.
#[derive(Clone, Debug)]
pub struct MassGrid<W: Weight> {
    radius: i64,
    width: usize,
    steps: usize,
    mass: Vec<W>,
    next: Vec<W>,
    // bounding box of the support, inclusive
    lo: (i64, i64),
    hi: (i64, i64),
    absorbed_origin: W,
    absorbed_axis: W,
    killed: W,
}

impl<W: Weight> MassGrid<W> {
    /// Unit weight at `start`, on the box `[-radius, radius]²`.
    pub fn new(start: (i64, i64), radius: i64) -> Result<Self> {
        if start.0.abs() > radius || start.1.abs() > radius {
            return Err(Error::arg("radius", "start lies outside the box"));
        }
        let width = (2 * radius + 1) as usize;
        let mut mass = vec![W::empty(); width * width];
        let mut g = MassGrid {
            radius,
            width,
            steps: 0,
            next: mass.clone(),
            mass: Vec::new(),
            lo: start,
            hi: start,
            absorbed_origin: W::empty(),
            absorbed_axis: W::empty(),
            killed: W::empty(),
        };
        mass[g.idx(start.0, start.1)] = W::unit();
        g.mass = mass;
        Ok(g)
    }

    #[inline]
    fn idx(&self, x: i64, y: i64) -> usize {
        (y + self.radius) as usize * self.width + (x + self.radius) as usize
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn at(&self, x: i64, y: i64) -> &W {
        &self.mass[self.idx(x, y)]
    }

    pub fn absorbed_origin(&self) -> &W {
        &self.absorbed_origin
    }

    pub fn absorbed_axis(&self) -> &W {
        &self.absorbed_axis
    }

    pub fn killed(&self) -> &W {
        &self.killed
    }

    /// Total weight still on the box.
    pub fn alive(&self) -> W {
        let mut total = W::empty();
        for y in self.lo.1..=self.hi.1 {
            for x in self.lo.0..=self.hi.0 {
                total.accumulate(self.at(x, y));
            }
        }
        total
    }

    pub fn step(&mut self) {
        let r = self.radius;
        let zero = W::empty();
        self.killed.carry();
        self.absorbed_origin.carry();
        self.absorbed_axis.carry();
        // killed: moves from boundary cells that leave the box
        for y in self.lo.1..=self.hi.1 {
            for x in self.lo.0..=self.hi.0 {
                let outside = u32::from(x == -r) + u32::from(x == r) + u32::from(y == -r) + u32::from(y == r);
                if outside > 0 {
                    let w = self.mass[self.idx(x, y)].share(outside);
                    self.killed.accumulate(&w);
                }
            }
        }

        let lo = ((self.lo.0 - 1).max(-r), (self.lo.1 - 1).max(-r));
        let hi = ((self.hi.0 + 1).min(r), (self.hi.1 + 1).min(r));
        for y in lo.1..=hi.1 {
            for x in lo.0..=hi.0 {
                let get = |xx: i64, yy: i64| {
                    if xx < -r || xx > r || yy < -r || yy > r {
                        &zero
                    } else {
                        &self.mass[self.idx(xx, yy)]
                    }
                };
                let v = W::gather(get(x - 1, y), get(x + 1, y), get(x, y - 1), get(x, y + 1));
                let i = self.idx(x, y);
                if is_forbidden(x, y) {
                    if x == 0 {
                        self.absorbed_origin.accumulate(&v);
                    } else {
                        self.absorbed_axis.accumulate(&v);
                    }
                    self.next[i] = W::empty();
                } else {
                    self.next[i] = v;
                }
            }
        }
        // the window only grows, so `next` never holds stale cells outside it
        std::mem::swap(&mut self.mass, &mut self.next);
        self.lo = lo;
        self.hi = hi;
        self.steps += 1;
    }
}

impl MassGrid<f64> {
    /// `|alive + absorbed + killed − 1|`.
    pub fn conservation_error(&self) -> f64 {
        (self.alive() + self.absorbed_origin + self.absorbed_axis + self.killed - 1.0).abs()
    }
}

impl MassGrid<BigUint> {
    /// Checks `alive + absorbed + killed = 4^n` exactly.
    pub fn conserves_exactly(&self) -> bool {
        let total = self.alive() + &self.absorbed_origin + &self.absorbed_axis + &self.killed;
        total == BigUint::one() << (2 * self.steps)
    }
}

/// Number of walks of each length `0..=n_max` from the origin that avoid
/// the nonnegative x-axis at all times ≥ 1.
pub fn slit_walk_counts(n_max: usize) -> Result<Vec<BigUint>> {
    if n_max > EXACT_MAX_STEPS {
        return Err(Error::arg(
            "n_max",
            format!("exact counts are limited to {EXACT_MAX_STEPS} steps"),
        ));
    }
    let mut grid = MassGrid::<BigUint>::new((0, 0), n_max.max(1) as i64)?;
    let mut counts = Vec::with_capacity(n_max + 1);
    counts.push(BigUint::one());
    for _ in 0..n_max {
        grid.step();
        counts.push(grid.alive());
    }
    Ok(counts)
}

/// Limit of `(a_n / 4^n) · n^{1/4}`: `√(1+√2) / (2 Γ(3/4))`.
pub fn theorem1_constant() -> f64 {
    (1.0 + 2f64.sqrt()).sqrt() / (2.0 * gamma(0.75))
}

/// `(a_n / 4^n) · n^{1/4}`.
pub fn theorem1_ratio(a_n: &BigUint, n: usize) -> f64 {
    count_ratio(a_n, n) * (n as f64).powf(0.25)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlitRow {
    pub n: usize,
    pub a_n: BigUint,
    pub survival: f64,
    pub ratio: f64,
}

pub fn slit_table(n_max: usize) -> Result<Vec<SlitRow>> {
    Ok(slit_walk_counts(n_max)?
        .into_iter()
        .enumerate()
        .map(|(n, a_n)| SlitRow {
            n,
            survival: count_ratio(&a_n, n),
            ratio: theorem1_ratio(&a_n, n),
            a_n,
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TanBracket {
    pub lower: f64,
    pub upper: f64,
}

impl TanBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

fn check_tan_point(x: i64, y: i64) -> Result<Option<TanBracket>> {
    if x == 0 && y == 0 {
        return Err(Error::arg("(x, y)", "the tip itself has probability 1"));
    }
    if is_forbidden(x, y) {
        // starts on the ray beyond the tip: absorbed at time 0
        return Ok(Some(TanBracket { lower: 0.0, upper: 0.0 }));
    }
    Ok(None)
}

/// Box half-width used by the per-point program: wide enough that the
/// killed mass is negligible, and exact (nothing killed) for small `n_max`.
fn grid_radius(x: i64, y: i64, n_max: usize) -> i64 {
    let spread = (10.0 * (n_max as f64).sqrt()).ceil() as i64 + 10;
    x.abs().max(y.abs()) + (n_max as i64).min(spread)
}

/// Bracket on the probability that a walk started at offset `(x, y)` from
/// a ray tip (ray pointing in +x) first meets the ray at the tip, within
/// `n_max` steps (lower) or possibly later (upper).
pub fn exact_tan_probability(x: i64, y: i64, n_max: usize) -> Result<TanBracket> {
    if let Some(b) = check_tan_point(x, y)? {
        return Ok(b);
    }
    if n_max == 0 {
        return Err(Error::arg("n_max", "must be at least 1"));
    }
    TanOracle::compute(x.abs().max(y.abs()), n_max)?.bracket(x, y)
}

/// The same bracket from a forward [`MassGrid`] started at `(x, y)`. Killed
/// mass, if any, is counted in `upper`.
pub fn mass_grid_bracket(x: i64, y: i64, n_max: usize) -> Result<TanBracket> {
    if let Some(b) = check_tan_point(x, y)? {
        return Ok(b);
    }
    if n_max == 0 {
        return Err(Error::arg("n_max", "must be at least 1"));
    }
    let mut grid = MassGrid::<f64>::new((x, y), grid_radius(x, y, n_max))?;
    for _ in 0..n_max {
        grid.step();
    }
    let lower = grid.absorbed_origin;
    Ok(TanBracket {
        lower,
        upper: (lower + grid.alive() + grid.killed).min(1.0),
    })
}

/// Same bracket from integer path counts: `(lower, upper)` numerators over
/// the common denominator `4^n_max`.
pub fn exact_tan_counts(x: i64, y: i64, n_max: usize) -> Result<(BigUint, BigUint)> {
    if n_max > EXACT_MAX_STEPS {
        return Err(Error::arg(
            "n_max",
            format!("exact counts are limited to {EXACT_MAX_STEPS} steps"),
        ));
    }
    if check_tan_point(x, y)?.is_some() {
        return Ok((BigUint::zero(), BigUint::zero()));
    }
    let radius = x.abs().max(y.abs()) + n_max as i64;
    let mut grid = MassGrid::<BigUint>::new((x, y), radius)?;
    for _ in 0..n_max {
        grid.step();
    }
    let lower = grid.absorbed_origin.clone();
    let upper = &lower + grid.alive() + &grid.killed;
    Ok((lower, upper))
}

/// Tan brackets for every offset in `[-window, window]²` from two fields on
/// a half-plane grid (both are symmetric under y ↦ −y):
///
/// * `green(z) = Σ_{n=1}^{N} m_n(z)`, where `m_n` is the killed walk from the
///   origin: absorbed on the forbidden set, killed off the box. By reversal
///   this is the mass from `z` absorbed at the origin within N steps without
///   leaving the box, a lower bound.
/// * `survival(z)`: the backward recursion for `P_z(not absorbed by N)` with
///   the value 1 imposed off the box. Imposing 1 overestimates, and covers
///   every path the box cut from `green`, so `green + survival` is an upper
///   bound.
#[derive(Clone, Debug)]
pub struct TanOracle {
    window: i64,
    radius: i64,
    n_max: usize,
    green: Vec<f64>,
    survival: Vec<f64>,
}

impl TanOracle {
    pub fn compute(window: i64, n_max: usize) -> Result<Self> {
        if window < 1 {
            return Err(Error::arg("window", "must be at least 1"));
        }
        if n_max == 0 {
            return Err(Error::arg("n_max", "must be at least 1"));
        }
        let spread = (4.5 * (n_max as f64).sqrt()).ceil() as i64 + 2;
        let radius = window + spread.min(n_max as i64 + 1);
        let green = HalfPlane::new(radius, 0.0).green(n_max);
        let survival = HalfPlane::new(radius, 1.0).survival(n_max);
        Ok(TanOracle {
            window,
            radius,
            n_max,
            green,
            survival,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn bracket(&self, x: i64, y: i64) -> Result<TanBracket> {
        if x.abs() > self.window || y.abs() > self.window {
            return Err(Error::arg("(x, y)", "outside the oracle window"));
        }
        if let Some(b) = check_tan_point(x, y)? {
            return Ok(b);
        }
        let i = half_plane_index(self.radius, x, y.abs());
        let lower = self.green[i];
        Ok(TanBracket {
            lower,
            upper: (lower + self.survival[i]).min(1.0),
        })
    }
}

/// Rows `y = 0..=radius` (plus one ghost row) and columns
/// `x = -radius..=radius` (plus a ghost column each side). Ghost cells hold
/// the off-box value; row 0 reads row 1 for its missing lower neighbour.
struct HalfPlane {
    radius: i64,
    stride: usize,
    rows: usize,
    ghost: f64,
}

#[inline]
fn half_plane_index(radius: i64, x: i64, y: i64) -> usize {
    let stride = (2 * radius + 3) as usize;
    y as usize * stride + (x + radius + 1) as usize
}

impl HalfPlane {
    fn new(radius: i64, ghost: f64) -> Self {
        HalfPlane {
            radius,
            stride: (2 * radius + 3) as usize,
            rows: radius as usize + 2,
            ghost,
        }
    }

    fn field(&self, interior: f64) -> Vec<f64> {
        let mut f = vec![interior; self.stride * self.rows];
        for row in f.chunks_exact_mut(self.stride) {
            row[0] = self.ghost;
            row[self.stride - 1] = self.ghost;
        }
        let last = (self.rows - 1) * self.stride;
        f[last..].fill(self.ghost);
        f
    }

    fn clear_slit(&self, f: &mut [f64]) {
        let start = half_plane_index(self.radius, 0, 0);
        let end = half_plane_index(self.radius, self.radius, 0);
        f[start..=end].fill(0.0);
    }

    /// One application of the averaging kernel on rows `0..active_rows`,
    /// columns within `active_cols` of the centre.
    fn sweep(&self, cur: &[f64], next: &mut [f64], active_rows: usize, active_cols: i64) {
        let s = self.stride;
        let c0 = (self.radius + 1 - active_cols).max(1) as usize;
        let c1 = (self.radius + 1 + active_cols).min(2 * self.radius + 1) as usize;
        for r in 0..active_rows.min(self.rows - 1) {
            let below = if r == 0 { s } else { (r - 1) * s };
            let row = r * s;
            let above = (r + 1) * s;
            let out = &mut next[row + c0..=row + c1];
            let left = &cur[row + c0 - 1..row + c1];
            let right = &cur[row + c0 + 1..=row + c1 + 1];
            let up = &cur[above + c0..=above + c1];
            let down = &cur[below + c0..=below + c1];
            for ((((o, l), rr), u), d) in out.iter_mut().zip(left).zip(right).zip(up).zip(down) {
                *o = 0.25 * ((l + rr) + (u + d));
            }
        }
    }

    fn green(&self, n_max: usize) -> Vec<f64> {
        let mut cur = self.field(0.0);
        let mut next = cur.clone();
        let mut total = cur.clone();
        cur[half_plane_index(self.radius, 0, 0)] = 1.0;
        for n in 1..=n_max {
            let reach = (n as i64).min(self.radius);
            self.sweep(&cur, &mut next, reach as usize + 1, reach);
            self.clear_slit(&mut next);
            for (t, v) in total.iter_mut().zip(&next) {
                *t += v;
            }
            std::mem::swap(&mut cur, &mut next);
        }
        total
    }

    fn survival(&self, n_max: usize) -> Vec<f64> {
        let mut cur = self.field(1.0);
        self.clear_slit(&mut cur);
        let mut next = cur.clone();
        for _ in 0..n_max {
            self.sweep(&cur, &mut next, self.rows - 1, self.radius);
            self.clear_slit(&mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive enumeration of all 4^n walks.
    fn brute_force_count(n: usize) -> u64 {
        fn rec(x: i64, y: i64, left: usize) -> u64 {
            if left == 0 {
                return 1;
            }
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .map(|&(dx, dy)| {
                    let (nx, ny) = (x + dx, y + dy);
                    if is_forbidden(nx, ny) {
                        0
                    } else {
                        rec(nx, ny, left - 1)
                    }
                })
                .sum()
        }
        rec(0, 0, n)
    }

    #[test]
    fn small_counts() {
        let a = slit_walk_counts(2).unwrap();
        assert_eq!(a, vec![1u32.into(), 3u32.into(), 9u32.into()]);
    }

    #[test]
    fn counts_match_enumeration() {
        let a = slit_walk_counts(10).unwrap();
        for (n, a_n) in a.iter().enumerate() {
            assert_eq!(a_n, &BigUint::from(brute_force_count(n)), "n={n}");
        }
    }

    #[test]
    fn constant_value() {
        assert!((theorem1_constant() - 0.633_977_801_552_852).abs() < 1e-12);
    }

    #[test]
    fn ratio_converges() {
        let a = slit_walk_counts(30).unwrap();
        let c = theorem1_constant();
        let gap = |n: usize| (theorem1_ratio(&a[n], n) - c).abs();
        assert!(gap(20) < 0.25 * c);
        assert!(gap(30) < gap(20) && gap(20) < gap(10));
    }

    #[test]
    fn count_ratio_handles_huge_counts() {
        let four_pow = BigUint::one() << 1000u32;
        assert_eq!(count_ratio(&four_pow, 500), 1.0);
        assert_eq!(count_ratio(&BigUint::from(3u32), 1), 0.75);
    }

    #[test]
    fn one_step_down_hits_the_tip() {
        let b = exact_tan_probability(0, 1, 1).unwrap();
        assert!(b.lower >= 0.25);
        assert_eq!(b.lower, 0.25);
        assert_eq!(b.upper, 1.0);
    }

    #[test]
    fn origin_is_rejected_and_axis_is_zero() {
        assert!(exact_tan_probability(0, 0, 10).is_err());
        let b = exact_tan_probability(3, 0, 10).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn brackets_are_monotone_in_steps() {
        let mut last = TanBracket { lower: 0.0, upper: 1.0 };
        for n in [1, 2, 5, 20, 80, 200] {
            let b = exact_tan_probability(-2, 3, n).unwrap();
            assert!(0.0 <= b.lower && b.lower <= b.upper && b.upper <= 1.0);
            assert!(b.lower >= last.lower - 1e-15);
            assert!(b.upper <= last.upper + 1e-15);
            last = b;
        }
    }

    #[test]
    fn float_and_integer_programs_agree() {
        let n = 60;
        for &(x, y) in &[(-1, 0), (2, 3), (0, -4), (5, 1)] {
            let f = mass_grid_bracket(x, y, n).unwrap();
            let (lo, hi) = exact_tan_counts(x, y, n).unwrap();
            assert!((f.lower - count_ratio(&lo, n)).abs() < 1e-13);
            assert!((f.upper - count_ratio(&hi, n)).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_mass_conservation() {
        let mut g = MassGrid::<BigUint>::new((-1, 2), 6).unwrap();
        for _ in 0..25 {
            g.step();
            assert!(g.conserves_exactly());
        }
        assert!(*g.killed() > BigUint::zero());
    }

    #[test]
    fn float_mass_conservation() {
        let mut g = MassGrid::<f64>::new((2, -3), 8).unwrap();
        for _ in 0..200 {
            g.step();
            assert!(g.conservation_error() < 1e-12);
        }
    }

    #[test]
    fn forbidden_cells_stay_empty() {
        let mut g = MassGrid::<f64>::new((-2, 1), 12).unwrap();
        for _ in 0..15 {
            g.step();
            for x in 0..=12 {
                assert_eq!(*g.at(x, 0), 0.0);
            }
        }
    }

    #[test]
    fn oracle_agrees_with_per_point_program() {
        let n = 100;
        let oracle = TanOracle::compute(3, n).unwrap();
        for x in -3..=3 {
            for y in -3..=3 {
                if x == 0 && y == 0 {
                    continue;
                }
                let a = oracle.bracket(x, y).unwrap();
                let b = mass_grid_bracket(x, y, n).unwrap();
                assert!((a.lower - b.lower).abs() < 1e-12, "({x},{y}) {a:?} {b:?}");
                assert!((a.upper - b.upper).abs() < 1e-9, "({x},{y}) {a:?} {b:?}");
            }
        }
        assert!(oracle.bracket(4, 0).is_err());
    }
}
