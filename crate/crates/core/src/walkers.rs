//! Direct simulation of simple and excited random walks on ℤ^d.
//!
//! Both steppers consume exactly one uniform variate per step and map it
//! through an inverse CDF over the canonical direction order, so an excited
//! walk with ε = 0 and a simple walk fed the same stream trace the same path.
//!
//! A site's first-visit status is fixed on arrival: the step leaving a site
//! that was entered for the first time uses the biased law, every later
//! departure uses the uniform law. The start site counts as a first visit.

use crate::error::{Error, Result};
use crate::lattice::{
    first_visit_distribution, uniform_step_distribution, BiasParams, Direction, LatticePoint,
    StepDistribution,
};
use crate::rng::RngStream;
use crate::visited::VisitedSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stepper {
    Simple,
    Excited,
}

#[derive(Clone, Debug)]
pub struct WalkState {
    position: Vec<i64>,
    visited: VisitedSet,
    steps: u64,
    bias: BiasParams,
    at_first_visit: bool,
    trace: Option<Vec<LatticePoint>>,
    uniform: StepDistribution,
    excited: StepDistribution,
}

impl WalkState {
    pub fn new(start: LatticePoint, bias: BiasParams) -> Result<Self> {
        if start.dim() != bias.dim() {
            return Err(Error::arg(
                "start",
                format!("dimension {} does not match bias dimension {}", start.dim(), bias.dim()),
            ));
        }
        let mut visited = VisitedSet::for_dimension(bias.dim());
        visited.insert(start.coords());
        Ok(WalkState {
            position: start.coords().to_vec(),
            visited,
            steps: 0,
            bias,
            at_first_visit: true,
            trace: None,
            uniform: uniform_step_distribution(bias.dim())?,
            excited: first_visit_distribution(bias),
        })
    }

    pub fn at_origin(bias: BiasParams) -> Self {
        Self::new(LatticePoint::origin(bias.dim()).expect("dim >= 1"), bias)
            .expect("dimensions agree")
    }

    /// Turns on trajectory recording; the trace starts at the current site.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(vec![self.point()]);
        self
    }

    pub fn position(&self) -> &[i64] {
        &self.position
    }

    pub fn point(&self) -> LatticePoint {
        LatticePoint::new(self.position.clone()).expect("dim >= 1")
    }

    pub fn x(&self) -> i64 {
        self.position[0]
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn bias(&self) -> BiasParams {
        self.bias
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// True while the walker sits on a site it entered for the first time.
    pub fn is_at_first_visit(&self) -> bool {
        self.at_first_visit
    }

    pub fn has_visited(&mut self, coords: &[i64]) -> bool {
        self.visited.contains(coords)
    }

    pub fn trace(&self) -> Option<&[LatticePoint]> {
        self.trace.as_deref()
    }

    /// Number of distinct sites visited, start included.
    pub fn range_count(&self) -> usize {
        self.visited.len()
    }

    /// Moves one lattice step in `dir` and records the arrival.
    #[inline]
    pub fn apply(&mut self, dir: Direction) {
        self.position[dir.axis] += dir.sign as i64;
        self.steps += 1;
        self.at_first_visit = self.visited.insert(&self.position);
        if let Some(t) = self.trace.as_mut() {
            t.push(LatticePoint::new(self.position.clone()).expect("dim >= 1"));
        }
    }

    #[inline]
    pub fn srw_step(&mut self, rng: &mut RngStream) -> Direction {
        let dir = self.uniform.direction_for(rng.uniform());
        self.apply(dir);
        dir
    }

    #[inline]
    pub fn erw_step(&mut self, rng: &mut RngStream) -> Direction {
        let dist = if self.at_first_visit {
            &self.excited
        } else {
            &self.uniform
        };
        let dir = dist.direction_for(rng.uniform());
        self.apply(dir);
        dir
    }

    #[inline]
    pub fn step(&mut self, stepper: Stepper, rng: &mut RngStream) -> Direction {
        match stepper {
            Stepper::Simple => self.srw_step(rng),
            Stepper::Excited => self.erw_step(rng),
        }
    }

    /// Steps until a bound in `stop` fires. Bounds are checked before each
    /// step, so a walk already inside the absorbing set never moves.
    pub fn run(
        &mut self,
        stepper: Stepper,
        stop: &StopCondition,
        rng: &mut RngStream,
    ) -> Result<StopReason> {
        stop.validate()?;
        let budget_end = stop.max_steps.map(|m| self.steps.saturating_add(m));
        loop {
            if let Some(absorb) = &stop.absorb {
                if absorb(&self.position) {
                    return Ok(StopReason::Absorbed);
                }
            }
            if stop.target_x == Some(self.position[0]) {
                return Ok(StopReason::ReachedTargetX);
            }
            if budget_end == Some(self.steps) {
                return Ok(StopReason::MaxSteps);
            }
            self.step(stepper, rng);
        }
    }
}

pub fn range_count(state: &WalkState) -> usize {
    state.range_count()
}

type Predicate = Box<dyn Fn(&[i64]) -> bool + Send + Sync>;

/// Termination rule for [`WalkState::run`]. `max_steps` counts steps taken
/// within the run.
#[derive(Default)]
pub struct StopCondition {
    pub max_steps: Option<u64>,
    pub absorb: Option<Predicate>,
    pub target_x: Option<i64>,
}

impl StopCondition {
    pub fn steps(n: u64) -> Self {
        StopCondition {
            max_steps: Some(n),
            ..Default::default()
        }
    }

    pub fn absorbing(mut self, pred: impl Fn(&[i64]) -> bool + Send + Sync + 'static) -> Self {
        self.absorb = Some(Box::new(pred));
        self
    }

    pub fn with_max_steps(mut self, n: u64) -> Self {
        self.max_steps = Some(n);
        self
    }

    pub fn with_target_x(mut self, x: i64) -> Self {
        self.target_x = Some(x);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_steps.is_none() && self.absorb.is_none() && self.target_x.is_none() {
            return Err(Error::arg("stop", "at least one bound must be set"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxSteps,
    Absorbed,
    ReachedTargetX,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::MaxSteps => "max_steps",
            StopReason::Absorbed => "absorbed",
            StopReason::ReachedTargetX => "target_x",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walker(eps: f64, dim: usize) -> WalkState {
        WalkState::at_origin(BiasParams::new(eps, dim).unwrap())
    }

    #[test]
    fn fresh_walker_has_range_one() {
        let w = walker(0.3, 3);
        assert_eq!(w.range_count(), 1);
        assert_eq!(range_count(&w), 1);
        assert!(w.is_at_first_visit());
        assert_eq!(w.steps(), 0);
    }

    #[test]
    fn straight_walk_range() {
        let mut w = walker(0.0, 1).with_trace();
        for _ in 0..50 {
            w.apply(Direction::RIGHT);
        }
        assert_eq!(w.range_count(), 51);
        assert_eq!(w.trace().unwrap().len() as u64, w.steps() + 1);
    }

    #[test]
    fn forced_right_variate() {
        // u = 0 selects the first direction, which is "right"
        let mut w = walker(0.0, 1);
        let d = w.uniform.direction_for(0.0);
        w.apply(d);
        assert_eq!(w.position(), &[1]);
        assert_eq!(w.steps(), 1);
    }

    #[test]
    fn revisits_are_not_first_visits() {
        let mut w = walker(0.5, 2);
        w.apply(Direction::RIGHT);
        assert!(w.is_at_first_visit());
        w.apply(Direction::LEFT);
        assert!(!w.is_at_first_visit());
        assert_eq!(w.range_count(), 2);
    }

    #[test]
    fn zero_steps_returns_immediately() {
        let mut w = walker(0.0, 2);
        let mut rng = RngStream::new(3, 0);
        let r = w.run(Stepper::Simple, &StopCondition::steps(0), &mut rng).unwrap();
        assert_eq!(r, StopReason::MaxSteps);
        assert_eq!(w.steps(), 0);
    }

    #[test]
    fn absorbed_at_start() {
        let mut w = walker(0.0, 2);
        let mut rng = RngStream::new(3, 0);
        let stop = StopCondition::default().absorbing(|p| p.iter().all(|&c| c == 0));
        assert_eq!(w.run(Stepper::Excited, &stop, &mut rng).unwrap(), StopReason::Absorbed);
        assert_eq!(w.steps(), 0);
    }

    #[test]
    fn unbounded_stop_is_rejected() {
        let mut w = walker(0.0, 2);
        let mut rng = RngStream::new(3, 0);
        assert!(w.run(Stepper::Simple, &StopCondition::default(), &mut rng).is_err());
    }

    #[test]
    fn target_x_fires() {
        let mut w = walker(1.0, 1);
        let mut rng = RngStream::new(3, 0);
        let stop = StopCondition::default().with_target_x(25);
        // ε = 1 in 1D only ever steps right from fresh sites
        assert_eq!(w.run(Stepper::Excited, &stop, &mut rng).unwrap(), StopReason::ReachedTargetX);
        assert_eq!(w.x(), 25);
        assert_eq!(w.steps(), 25);
    }

    #[test]
    fn replay_gives_same_endpoint() {
        let run = || {
            let mut w = walker(0.4, 3);
            let mut rng = RngStream::new(11, 4);
            w.run(Stepper::Excited, &StopCondition::steps(10_000), &mut rng).unwrap();
            (w.position().to_vec(), w.range_count())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn mismatched_start_dimension() {
        let start = LatticePoint::origin(3).unwrap();
        assert!(WalkState::new(start, BiasParams::new(0.1, 2).unwrap()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn zero_bias_erw_matches_srw(seed in any::<u64>(), dim in 1usize..=4) {
                let mut a = walker(0.0, dim).with_trace();
                let mut b = walker(0.0, dim).with_trace();
                let mut ra = RngStream::new(seed, 0);
                let mut rb = RngStream::new(seed, 0);
                for _ in 0..300 {
                    a.srw_step(&mut ra);
                    b.erw_step(&mut rb);
                }
                prop_assert_eq!(a.trace(), b.trace());
            }

            #[test]
            fn range_bounded_by_steps(seed in any::<u64>(), eps in 0.0f64..=1.0, dim in 1usize..=4) {
                let mut w = walker(eps, dim);
                let mut rng = RngStream::new(seed, 1);
                let mut distinct = std::collections::HashSet::new();
                distinct.insert(w.position().to_vec());
                let mut last = 1;
                for _ in 0..400 {
                    w.erw_step(&mut rng);
                    distinct.insert(w.position().to_vec());
                    prop_assert!(w.range_count() as u64 <= w.steps() + 1);
                    prop_assert!(w.range_count() >= last);
                    prop_assert_eq!(w.range_count(), distinct.len());
                    last = w.range_count();
                }
            }
        }
    }
}
