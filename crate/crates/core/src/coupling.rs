//! SRW and ERW on ℤ² driven by one source of randomness.
//!
//! The ERW copies every SRW move except a left move made from a site the
//! ERW is visiting for the first time; then it goes right with probability
//! ε. That gives right mass 1/4 + ε/4 = (1+ε)/4 and left mass (1−ε)/4 at
//! fresh sites, the excited law. The SRW consumes the direction lane only;
//! flips draw from a separate lane, and only when needed.
//!
//! Consequences checked here: the y coordinates agree, the x gap is even,
//! non-decreasing and grows by 2 exactly at flips, and whenever the SRW
//! reaches a new tan point the ERW stands on a fresh site.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{BiasParams, Direction};
use crate::parallel::map_trials;
use crate::rng::RngStream;
use crate::stats::{binned_homogeneity, ChiSquare};
use crate::tan::TanTracker;
use crate::walkers::WalkState;

pub const DIRECTION_LANE: u64 = 0;
pub const FLIP_LANE: u64 = 1;

/// Direction and flip streams of one coupled trial.
#[derive(Clone, Debug)]
pub struct CoupledStreams {
    pub direction: RngStream,
    pub flip: RngStream,
}

impl CoupledStreams {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let direction = RngStream::with_lane(master_seed, DIRECTION_LANE, stream_index);
        let flip = direction.sibling(FLIP_LANE);
        CoupledStreams { direction, flip }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoupledMove {
    pub srw: Direction,
    pub erw: Direction,
    /// Whether the ERW left a first-visit site.
    pub erw_fresh: bool,
    pub flipped: bool,
    /// Whether the SRW's new site is a new tan point.
    pub new_tan: bool,
}

#[derive(Clone, Debug)]
pub struct CoupledState {
    srw: WalkState,
    erw: WalkState,
    tracker: TanTracker,
    steps: u64,
}

impl CoupledState {
    /// Both walkers at the origin of ℤ²; the origin is the first tan point.
    pub fn new(bias: BiasParams) -> Result<Self> {
        if bias.dim() != 2 {
            return Err(Error::InvalidDimension(bias.dim()));
        }
        let mut tracker = TanTracker::new();
        tracker.observe(0, 0);
        Ok(CoupledState {
            srw: WalkState::at_origin(BiasParams::unbiased(2)?),
            erw: WalkState::at_origin(bias),
            tracker,
            steps: 0,
        })
    }

    pub fn srw(&self) -> &WalkState {
        &self.srw
    }

    pub fn erw(&self) -> &WalkState {
        &self.erw
    }

    pub fn tracker(&self) -> &TanTracker {
        &self.tracker
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `erw.x − srw.x`.
    pub fn gap(&self) -> i64 {
        self.erw.x() - self.srw.x()
    }

    /// Pointwise invariants: equal y, gap even and nonnegative.
    pub fn is_consistent(&self) -> bool {
        let g = self.gap();
        self.srw.position()[1] == self.erw.position()[1] && g >= 0 && g % 2 == 0
    }

    pub fn step(&mut self, streams: &mut CoupledStreams) -> CoupledMove {
        let erw_fresh = self.erw.is_at_first_visit();
        let srw = self.srw.srw_step(&mut streams.direction);
        let mut erw = srw;
        let mut flipped = false;
        if srw == Direction::LEFT && erw_fresh {
            if streams.flip.uniform() < self.erw.bias().epsilon() {
                erw = Direction::RIGHT;
                flipped = true;
            }
        }
        self.erw.apply(erw);
        self.steps += 1;
        let p = self.srw.position();
        let new_tan = self.tracker.observe(p[0], p[1]);
        CoupledMove {
            srw,
            erw,
            erw_fresh,
            flipped,
            new_tan,
        }
    }
}

pub fn coupled_step(cs: &mut CoupledState, streams: &mut CoupledStreams) -> CoupledMove {
    cs.step(streams)
}

/// True iff the ERW's current site is at its first visit. Meant to be
/// called right after a step that gave the SRW a new tan point.
pub fn tan_implies_fresh_check(cs: &CoupledState, tracker: &TanTracker) -> bool {
    debug_assert!(tracker.tan_count() >= 1);
    cs.erw.is_at_first_visit()
}

/// Per-step direction counts split by the departure site's status.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepTable {
    pub fresh: [u64; 4],
    pub revisit: [u64; 4],
}

impl StepTable {
    pub fn record(&mut self, fresh: bool, dir: Direction) {
        let row = if fresh { &mut self.fresh } else { &mut self.revisit };
        row[dir.index()] += 1;
    }

    pub fn fresh_total(&self) -> u64 {
        self.fresh.iter().sum()
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CouplingAudit {
    pub steps: u64,
    pub tan_events: u64,
    pub flips: u64,
    pub final_gap: i64,
    /// Steps after which y differed or the gap was odd or negative.
    pub inconsistent_steps: u64,
    /// Steps where the gap shrank, grew by other than 2, or grew without a flip.
    pub gap_violations: u64,
    /// Tan events at which the ERW was not on a fresh site.
    pub fresh_failures: u64,
    pub erw_table: StepTable,
}

impl CouplingAudit {
    pub fn passed(&self) -> bool {
        self.inconsistent_steps == 0 && self.gap_violations == 0 && self.fresh_failures == 0
    }
}

/// Runs one coupled trajectory of `steps` steps, checking every invariant
/// after every step.
pub fn audit_coupling(bias: BiasParams, steps: u64, streams: &mut CoupledStreams) -> Result<CouplingAudit> {
    let mut cs = CoupledState::new(bias)?;
    let mut audit = CouplingAudit::default();
    let mut gap = cs.gap();
    for _ in 0..steps {
        let mv = cs.step(streams);
        audit.erw_table.record(mv.erw_fresh, mv.erw);
        audit.flips += u64::from(mv.flipped);
        if !cs.is_consistent() {
            audit.inconsistent_steps += 1;
        }
        let next = cs.gap();
        let expected = if mv.flipped { gap + 2 } else { gap };
        if next != expected {
            audit.gap_violations += 1;
        }
        gap = next;
        if mv.new_tan {
            audit.tan_events += 1;
            if !tan_implies_fresh_check(&cs, cs.tracker()) {
                audit.fresh_failures += 1;
            }
        }
    }
    audit.steps = cs.steps();
    audit.final_gap = cs.gap();
    Ok(audit)
}

/// Step table of a directly simulated ERW trajectory.
pub fn direct_step_table(bias: BiasParams, steps: u64, rng: &mut RngStream) -> StepTable {
    let mut w = WalkState::at_origin(bias);
    let mut table = StepTable::default();
    for _ in 0..steps {
        let fresh = w.is_at_first_visit();
        let d = w.erw_step(rng);
        table.record(fresh, d);
    }
    table
}

fn bin(p: &[i64]) -> (i64, i64) {
    (p[0].div_euclid(ENDPOINT_BIN), p[1].div_euclid(ENDPOINT_BIN))
}

/// Width of the square bins used to compare endpoints.
pub const ENDPOINT_BIN: i64 = 4;

pub fn coupled_endpoint(bias: BiasParams, steps: u64, seed: u64, trial: u64) -> (i64, i64) {
    let mut cs = CoupledState::new(bias).expect("planar bias");
    let mut s = CoupledStreams::new(seed, trial);
    for _ in 0..steps {
        cs.step(&mut s);
    }
    bin(cs.erw().position())
}

/// Direct ERW endpoint; uses lane 2 of `seed` so it is independent of the
/// coupled trials.
pub fn direct_endpoint(bias: BiasParams, steps: u64, seed: u64, trial: u64) -> (i64, i64) {
    let mut w = WalkState::at_origin(bias);
    let mut rng = RngStream::with_lane(seed, 2, trial);
    for _ in 0..steps {
        w.erw_step(&mut rng);
    }
    bin(w.position())
}

/// Chi-square homogeneity of binned ERW endpoints after `steps` steps,
/// coupled versus direct, over `trials` trials each.
pub fn compare_final_positions(bias: BiasParams, trials: u64, steps: u64, seed: u64) -> Result<ChiSquare> {
    if bias.dim() != 2 {
        return Err(Error::InvalidDimension(bias.dim()));
    }
    let coupled = map_trials(0, trials, |i| coupled_endpoint(bias, steps, seed, i));
    let direct = map_trials(0, trials, |i| direct_endpoint(bias, steps, seed, i));
    binned_homogeneity(&coupled, &direct, 20)
}
