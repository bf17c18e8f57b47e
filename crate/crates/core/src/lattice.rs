//! Lattice geometry on ℤ^d: points, the 2d nearest-neighbour directions,
//! the excitation bias and the step distributions built from it.
//!
//! Directions are ordered axis-major with the positive sign first, so index
//! `2 * axis` is `+axis` and `2 * axis + 1` is `-axis`. Inverse-CDF sampling
//! walks this order, which makes trajectories reproducible from the variate
//! sequence alone.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Tolerance on the total mass of a step distribution.
pub const DISTRIBUTION_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    coords: Vec<i64>,
}

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        Ok(LatticePoint { coords })
    }

    pub fn origin(dim: usize) -> Result<Self> {
        Self::new(vec![0; dim])
    }

    pub fn xy(x: i64, y: i64) -> Self {
        LatticePoint { coords: vec![x, y] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn x(&self) -> i64 {
        self.coords[0]
    }

    /// Second coordinate; panics in one dimension.
    pub fn y(&self) -> i64 {
        self.coords[1]
    }

    pub fn step(&mut self, dir: Direction) {
        self.coords[dir.axis] += dir.sign as i64;
    }

    pub fn shifted(&self, dir: Direction) -> Self {
        let mut p = self.clone();
        p.step(dir);
        p
    }

    /// Euclidean norm.
    pub fn radius(&self) -> f64 {
        self.coords
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }

    /// Polar angle of the first two coordinates, in `[0, 2π)` counterclockwise
    /// from the positive x-axis.
    pub fn angle(&self) -> f64 {
        polar_angle(self.coords[0], self.coords.get(1).copied().unwrap_or(0))
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Angle of `(x, y)` in `[0, 2π)`.
pub fn polar_angle(x: i64, y: i64) -> f64 {
    let t = (y as f64).atan2(x as f64);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    pub axis: usize,
    pub sign: i8,
}

impl Direction {
    pub const RIGHT: Direction = Direction { axis: 0, sign: 1 };
    pub const LEFT: Direction = Direction { axis: 0, sign: -1 };
    pub const UP: Direction = Direction { axis: 1, sign: 1 };
    pub const DOWN: Direction = Direction { axis: 1, sign: -1 };

    /// All 2d directions in canonical order.
    pub fn all(dim: usize) -> Vec<Direction> {
        (0..2 * dim).map(Direction::from_index).collect()
    }

    pub fn from_index(index: usize) -> Direction {
        Direction {
            axis: index / 2,
            sign: if index % 2 == 0 { 1 } else { -1 },
        }
    }

    pub fn index(self) -> usize {
        2 * self.axis + usize::from(self.sign < 0)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.axis, self.sign) {
            (0, 1) => write!(f, "right"),
            (0, _) => write!(f, "left"),
            (1, 1) => write!(f, "up"),
            (1, _) => write!(f, "down"),
            (a, s) => write!(f, "{}{a}", if s > 0 { '+' } else { '-' }),
        }
    }
}

/// Excitation strength and dimension. On a first visit the walker steps
/// right with probability (1+ε)/(2d) and left with (1−ε)/(2d).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasParams {
    epsilon: f64,
    dim: usize,
}

impl BiasParams {
    pub fn new(epsilon: f64, dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(BiasParams { epsilon, dim })
    }

    /// Unbiased parameters; the excited walk degenerates to SRW.
    pub fn unbiased(dim: usize) -> Result<Self> {
        Self::new(0.0, dim)
    }

    /// One-dimensional walk with first-visit right-probability `p`.
    pub fn from_right_probability(p: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&p) {
            return Err(Error::arg("p", format!("must lie in [1/2, 1], got {p}")));
        }
        Self::new(2.0 * p - 1.0, 1)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// First-visit probability of stepping right; `p` in the 1D setting.
    pub fn right_probability(&self) -> f64 {
        (1.0 + self.epsilon) / (2 * self.dim) as f64
    }
}

/// A probability vector over the 2d directions, with its running sums cached
/// for inverse-CDF sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDistribution {
    masses: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepDistribution {
    /// Builds a distribution from `(direction, mass)` pairs over one
    /// dimension. Every direction must appear exactly once.
    pub fn new(entries: &[(Direction, f64)]) -> Result<Self> {
        if entries.is_empty() || entries.len() % 2 != 0 {
            return Err(Error::MalformedDistribution(format!(
                "expected 2d entries, got {}",
                entries.len()
            )));
        }
        let mut masses = vec![f64::NAN; entries.len()];
        for &(dir, m) in entries {
            let i = dir.index();
            if i >= masses.len() || !masses[i].is_nan() {
                return Err(Error::MalformedDistribution(format!(
                    "direction {dir} out of range or repeated"
                )));
            }
            masses[i] = m;
        }
        Self::from_masses(masses)
    }

    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() || masses.len() % 2 != 0 {
            return Err(Error::MalformedDistribution(format!(
                "expected 2d masses, got {}",
                masses.len()
            )));
        }
        if let Some(m) = masses.iter().find(|m| !(**m >= 0.0) || !m.is_finite()) {
            return Err(Error::MalformedDistribution(format!("invalid mass {m}")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_SUM_TOLERANCE {
            return Err(Error::MalformedDistribution(format!(
                "masses sum to {total}"
            )));
        }
        let cumulative = masses
            .iter()
            .scan(0.0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        Ok(StepDistribution { masses, cumulative })
    }

    pub fn dim(&self) -> usize {
        self.masses.len() / 2
    }

    pub fn mass(&self, dir: Direction) -> f64 {
        self.masses[dir.index()]
    }

    pub fn entries(&self) -> Vec<(Direction, f64)> {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, &m)| (Direction::from_index(i), m))
            .collect()
    }

    /// Inverse CDF: the first direction whose running sum exceeds `u`.
    /// A `u` that lands past the last rounded partial sum maps to the last
    /// direction carrying mass.
    #[inline]
    pub fn index_for(&self, u: f64) -> usize {
        for (i, &c) in self.cumulative.iter().enumerate() {
            if u < c {
                return i;
            }
        }
        self.masses.iter().rposition(|&m| m > 0.0).unwrap_or(0)
    }

    #[inline]
    pub fn direction_for(&self, u: f64) -> Direction {
        Direction::from_index(self.index_for(u))
    }
}

/// First-visit law: right (1+ε)/(2d), left (1−ε)/(2d), others 1/(2d).
pub fn first_visit_distribution(bias: BiasParams) -> StepDistribution {
    let two_d = (2 * bias.dim) as f64;
    let mut masses = vec![1.0 / two_d; 2 * bias.dim];
    masses[0] = (1.0 + bias.epsilon) / two_d;
    masses[1] = (1.0 - bias.epsilon) / two_d;
    StepDistribution::from_masses(masses).expect("bias invariants give a valid distribution")
}

pub fn uniform_step_distribution(dim: usize) -> Result<StepDistribution> {
    Ok(first_visit_distribution(BiasParams::unbiased(dim)?))
}

/// Draws one direction, consuming exactly one uniform variate.
#[inline]
pub fn sample_direction(dist: &StepDistribution, rng: &mut RngStream) -> Direction {
    dist.direction_for(rng.uniform())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_bias_is_uniform() {
        let d = first_visit_distribution(BiasParams::new(0.0, 2).unwrap());
        for (_, m) in d.entries() {
            assert_eq!(m, 0.25);
        }
    }

    #[test]
    fn full_bias_in_two_dimensions() {
        let d = first_visit_distribution(BiasParams::new(1.0, 2).unwrap());
        assert_eq!(d.mass(Direction::RIGHT), 0.5);
        assert_eq!(d.mass(Direction::LEFT), 0.0);
        assert_eq!(d.mass(Direction::UP), 0.25);
        assert_eq!(d.mass(Direction::DOWN), 0.25);
    }

    #[test]
    fn half_bias_one_dimension() {
        let d = first_visit_distribution(BiasParams::new(0.5, 1).unwrap());
        assert_eq!(d.mass(Direction::RIGHT), 0.75);
        assert_eq!(d.mass(Direction::LEFT), 0.25);
        let b = BiasParams::from_right_probability(0.75).unwrap();
        assert_eq!(b.epsilon(), 0.5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(BiasParams::new(1.5, 2), Err(Error::InvalidEpsilon(1.5)));
        assert_eq!(BiasParams::new(-0.1, 2), Err(Error::InvalidEpsilon(-0.1)));
        assert_eq!(BiasParams::new(0.5, 0), Err(Error::InvalidDimension(0)));
        assert!(BiasParams::new(f64::NAN, 2).is_err());
        assert!(uniform_step_distribution(0).is_err());
    }

    #[test]
    fn uniform_distributions() {
        for d in 1..=3 {
            let u = uniform_step_distribution(d).unwrap();
            assert_eq!(u.entries().len(), 2 * d);
            for (_, m) in u.entries() {
                assert_eq!(m, 1.0 / (2 * d) as f64);
            }
        }
    }

    #[test]
    fn canonical_direction_order() {
        let dirs = Direction::all(2);
        assert_eq!(
            dirs,
            vec![Direction::RIGHT, Direction::LEFT, Direction::UP, Direction::DOWN]
        );
        for (i, d) in dirs.iter().enumerate() {
            assert_eq!(d.index(), i);
        }
        assert_eq!(Direction::all(5).len(), 10);
    }

    #[test]
    fn malformed_distributions() {
        assert!(StepDistribution::from_masses(vec![0.5, 0.6]).is_err());
        assert!(StepDistribution::from_masses(vec![1.5, -0.5]).is_err());
        assert!(StepDistribution::from_masses(vec![1.0]).is_err());
        assert!(StepDistribution::new(&[(Direction::RIGHT, 0.5), (Direction::RIGHT, 0.5)]).is_err());
        assert!(StepDistribution::new(&[(Direction::RIGHT, 0.5), (Direction::LEFT, 0.5)]).is_ok());
    }

    #[test]
    fn point_mass_always_chosen() {
        let d = StepDistribution::from_masses(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let mut rng = RngStream::new(7, 0);
        for _ in 0..1000 {
            assert_eq!(sample_direction(&d, &mut rng), Direction::UP);
        }
        assert_eq!(d.direction_for(1.0 - 1e-17), Direction::UP);
    }

    #[test]
    fn polar_coordinates() {
        let p = LatticePoint::xy(0, 100);
        assert_eq!(p.radius(), 100.0);
        assert!((p.angle() - PI / 2.0).abs() < 1e-15);
        assert!((LatticePoint::xy(0, -3).angle() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(LatticePoint::xy(5, 0).angle(), 0.0);
        assert!((LatticePoint::xy(-1, 0).angle() - PI).abs() < 1e-15);
        assert_eq!(LatticePoint::xy(2, -1).to_string(), "(2,-1)");
    }

    #[test]
    fn point_equality_and_steps() {
        let mut p = LatticePoint::origin(3).unwrap();
        p.step(Direction { axis: 2, sign: -1 });
        assert_eq!(p, LatticePoint::new(vec![0, 0, -1]).unwrap());
        assert_ne!(p, LatticePoint::origin(3).unwrap());
        assert!(LatticePoint::new(vec![]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn first_visit_masses_sum_to_one(eps in 0.0f64..=1.0, dim in 1usize..8) {
                let d = first_visit_distribution(BiasParams::new(eps, dim).unwrap());
                let total: f64 = d.entries().iter().map(|e| e.1).sum();
                prop_assert!((total - 1.0).abs() <= 4.0 * f64::EPSILON);
                for (_, m) in d.entries() {
                    prop_assert!((0.0..=1.0).contains(&m));
                }
            }
        }
    }
}
