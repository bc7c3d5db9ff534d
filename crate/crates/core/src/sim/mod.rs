//! Discrete-event LCM simulator.
//!
//! Each robot runs activate → look → colour commit → move start → move
//! end, with phase delays chosen by a [`SchedulerPolicy`]. Looks see moving
//! robots at their interpolated positions. Every interval between two
//! events is checked for collisions exactly.

pub mod collision;
pub mod scheduler;
pub mod trace;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use collision::{collision_check, collision_in_interval, Motion};
pub use scheduler::{SchedulerKind, SchedulerPolicy, MENU};
pub use trace::{EventDetail, OutcomeRecord, Trace, TraceError, TraceEvent, TraceMeta};

use crate::algo::decide;
use crate::geom::{horizontal_symmetry_axis, RPoint, Rational};
use crate::model::{Activity, World};
use crate::scenario::Scenario;
use crate::verify::{classify, pattern_formed, ConfigClass, Unstable};
use scheduler::Scheduler;

pub const DEFAULT_MAX_EVENTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Activate,
    Look,
    ColorCommit,
    MoveStart,
    MoveEnd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Formed,
    QuiescentNotFormed,
    EventBudgetExhausted,
    Collision { time: Rational, pair: (usize, usize) },
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Formed => "formed",
            Status::QuiescentNotFormed => "quiescent_not_formed",
            Status::EventBudgetExhausted => "event_budget_exhausted",
            Status::Collision { .. } => "collision",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Collision { time, pair } => write!(f, "collision of robots {} and {} at t={}", pair.0, pair.1, time),
            s => f.write_str(s.as_str()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub final_world: World,
    pub event_count: usize,
    /// Classification of the final world if it is stable.
    pub final_class: Option<ConfigClass>,
}

impl Outcome {
    pub fn record(&self) -> OutcomeRecord {
        let (time, pair) = match &self.status {
            Status::Collision { time, pair } => (Some(time.clone()), Some([pair.0, pair.1])),
            _ => (None, None),
        };
        OutcomeRecord {
            status: self.status.as_str().to_string(),
            time,
            pair,
            event_count: self.event_count,
            final_class: self.final_class,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("max_events must be at least 1")]
    ZeroBudget,
    #[error("world has {robots} robots but the pattern has {points} points")]
    SizeMismatch { robots: usize, points: usize },
    #[error("initial world is not stable: robot {0} is mid-cycle")]
    NotStable(usize),
    #[error("robots {0} and {1} share a position")]
    Coincident(usize, usize),
    #[error("mirrored scheduler precondition fails: {0}")]
    NotMirrored(String),
    #[error("event {index}: replay diverged: {reason}")]
    ReplayDiverged { index: usize, reason: String },
}

/// Effect of one event on the world.
struct Applied {
    detail: EventDetail,
    /// Lights or resting positions changed.
    changed: bool,
}

/// Applies one LCM phase to `world`. Shared by the live loop and replay,
/// so a replayed trace goes through exactly the same transitions.
fn apply_event(
    world: &mut World,
    robot: usize,
    kind: EventKind,
    t: &Rational,
    t_end: Option<&Rational>,
) -> Result<Applied, String> {
    let mut detail = EventDetail::default();
    let mut changed = false;
    let activity = world.robots[robot].activity.clone();
    match (kind, activity) {
        (EventKind::Activate, Activity::Idle) => {}
        (EventKind::Look, Activity::Idle) => {
            let view = world.take_snapshot(robot, t).map_err(|e| e.to_string())?;
            let action = decide(&view, &world.pattern, world.mode);
            detail.action = Some(action.rule);
            let r = &mut world.robots[robot];
            if !action.is_null_for(r.light) {
                let new_color = action.new_color.filter(|c| *c != r.light);
                let destination = action
                    .destination
                    .filter(|d| !d.is_origin())
                    .map(|d| r.frame.to_global(&r.pos, &d));
                detail.color = new_color;
                detail.to = destination.clone();
                r.activity = Activity::Computed { new_color, destination };
            }
        }
        (EventKind::ColorCommit, Activity::Computed { new_color, destination }) => {
            let r = &mut world.robots[robot];
            if let Some(c) = new_color {
                r.light = c;
                detail.color = Some(c);
                changed = true;
            }
            r.activity = match destination {
                Some(d) => Activity::AwaitingMove { destination: d },
                None => Activity::Idle,
            };
        }
        (EventKind::MoveStart, Activity::AwaitingMove { destination }) => {
            let t_end = t_end.ok_or("move start without an end time")?.clone();
            if t_end <= *t {
                return Err("move must end after it starts".into());
            }
            let r = &mut world.robots[robot];
            detail.from = Some(r.pos.clone());
            detail.to = Some(destination.clone());
            detail.t_end = Some(t_end.clone());
            r.activity = Activity::Moving { from: r.pos.clone(), to: destination, t_start: t.clone(), t_end };
        }
        (EventKind::MoveEnd, Activity::Moving { to, t_end, .. }) => {
            if t_end != *t {
                return Err(format!("move end at {t} but the move ends at {t_end}"));
            }
            let r = &mut world.robots[robot];
            r.pos = to.clone();
            r.activity = Activity::Idle;
            detail.pos = Some(to);
            changed = true;
        }
        (kind, activity) => return Err(format!("robot {robot}: {kind:?} while {activity:?}")),
    }
    Ok(Applied { detail, changed })
}

/// True iff every robot, looking now, would neither move nor change colour.
pub fn quiescent_final(world: &World) -> Result<bool, Unstable> {
    if let Some(i) = world.robots.iter().position(|r| !r.is_stable()) {
        return Err(Unstable(i));
    }
    let t = Rational::zero();
    Ok((0..world.robots.len()).all(|i| {
        let view = world.take_snapshot(i, &t).expect("stable worlds have distinct positions");
        decide(&view, &world.pattern, world.mode).is_null_for(world.robots[i].light)
    }))
}

/// Mirror axis of a world that satisfies the mirrored scheduler's
/// precondition: symmetric about a robot-free horizontal line, with every
/// pair of specular partners sharing light and unit and having opposite
/// Y orientation.
pub fn mirrored_axis(world: &World) -> Result<Rational, String> {
    let pts: Vec<RPoint> = world.robots.iter().map(|r| r.pos.clone()).collect();
    let axis = match horizontal_symmetry_axis(&pts) {
        Some((axis, false)) => axis,
        Some((_, true)) => return Err("a robot lies on the symmetry axis".into()),
        None => return Err("configuration has no horizontal symmetry axis".into()),
    };
    let twice = &axis + &axis;
    for r in &world.robots {
        let image = RPoint::new(r.pos.x.clone(), &twice - &r.pos.y);
        let partner = world.robots.iter().find(|o| o.pos == image).expect("axis is a symmetry");
        if partner.frame.y_sign() == r.frame.y_sign() || partner.frame.unit() != r.frame.unit() {
            return Err(format!("robots {} and {} are not specular partners", r.id, partner.id));
        }
        if partner.light != r.light {
            return Err(format!("robots {} and {} show different lights", r.id, partner.id));
        }
    }
    Ok(axis)
}

fn check_initial(world: &World) -> Result<(), SimError> {
    if world.robots.len() != world.pattern.len() {
        return Err(SimError::SizeMismatch { robots: world.robots.len(), points: world.pattern.len() });
    }
    if let Some(i) = world.robots.iter().position(|r| !r.is_stable()) {
        return Err(SimError::NotStable(i));
    }
    let mut seen: HashSet<&RPoint> = HashSet::new();
    for (j, r) in world.robots.iter().enumerate() {
        if !seen.insert(&r.pos) {
            let i = world.robots.iter().position(|o| o.pos == r.pos).unwrap_or(j);
            return Err(SimError::Coincident(i, j));
        }
    }
    Ok(())
}

/// Event-by-event simulation. [`run`] drives it to completion; tests can
/// step it and inspect the world in between.
pub struct Simulation {
    world: World,
    sched: Scheduler,
    queue: BTreeMap<(Rational, u64), (usize, EventKind)>,
    seq: u64,
    clock: Rational,
    trace: Trace,
    max_events: usize,
    status: Option<Status>,
    version: u64,
    checked_version: Option<u64>,
    class_cache: Option<(u64, ConfigClass)>,
    moving: usize,
}

impl Simulation {
    pub fn new(world: World, policy: SchedulerPolicy, max_events: usize) -> Result<Self, SimError> {
        if max_events == 0 {
            return Err(SimError::ZeroBudget);
        }
        check_initial(&world)?;
        if policy.kind == SchedulerKind::Mirrored {
            mirrored_axis(&world).map_err(SimError::NotMirrored)?;
        }
        let meta = TraceMeta {
            seed: policy.seed,
            scheduler: policy.kind,
            mode: world.mode,
            max_phase_delay: policy.max_phase_delay.clone(),
            pattern_hash: trace::pattern_hash(&world.pattern),
            scenario: Scenario::from_world(&world),
        };
        let mut sim = Simulation {
            sched: Scheduler::new(policy),
            queue: BTreeMap::new(),
            seq: 0,
            clock: Rational::zero(),
            trace: Trace { meta, events: Vec::new(), outcome: None },
            max_events,
            status: None,
            version: 0,
            checked_version: None,
            class_cache: None,
            moving: 0,
            world,
        };
        let n = sim.world.robots.len();
        for i in 0..n {
            let t = sim.sched.next_activation(i, n, &Rational::zero());
            sim.push(t, i, EventKind::Activate);
        }
        sim.check_quiescence();
        Ok(sim)
    }

    fn push(&mut self, t: Rational, robot: usize, kind: EventKind) {
        self.queue.insert((t, self.seq), (robot, kind));
        self.seq += 1;
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn clock(&self) -> &Rational {
        &self.clock
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn status(&self) -> Option<&Status> {
        self.status.as_ref()
    }

    pub fn event_count(&self) -> usize {
        self.trace.events.len()
    }

    /// Time of the next pending event.
    pub fn next_time(&self) -> Option<&Rational> {
        self.queue.keys().next().map(|(t, _)| t)
    }

    fn check_quiescence(&mut self) {
        if !self.world.is_stable() || self.checked_version == Some(self.version) {
            return;
        }
        self.checked_version = Some(self.version);
        if quiescent_final(&self.world).expect("world is stable") {
            let formed = pattern_formed(&self.world, &self.world.pattern).expect("world is stable");
            self.status = Some(if formed { Status::Formed } else { Status::QuiescentNotFormed });
        }
    }

    fn stable_class(&mut self) -> Option<ConfigClass> {
        if !self.world.is_stable() {
            return None;
        }
        if let Some((v, c)) = self.class_cache {
            if v == self.version {
                return Some(c);
            }
        }
        let c = classify(&self.world, &self.world.pattern, self.world.mode).expect("world is stable");
        self.class_cache = Some((self.version, c));
        Some(c)
    }

    /// Processes one event. Returns `None` once the run has ended.
    pub fn step(&mut self) -> Option<&TraceEvent> {
        if self.status.is_some() {
            return None;
        }
        if self.trace.events.len() >= self.max_events {
            self.status = Some(Status::EventBudgetExhausted);
            return None;
        }
        let ((t, _), (robot, kind)) = self.queue.pop_first().expect("every robot always has a pending event");
        if self.moving > 0 && t > self.clock {
            let start = self.world.positions_at(&self.clock);
            let end = self.world.positions_at(&t);
            if let Some((time, pair)) = collision_in_interval(&start, &end, &self.clock, &t) {
                self.clock = time.clone();
                self.status = Some(Status::Collision { time, pair });
                return None;
            }
        }
        self.clock = t.clone();
        let t_end = (kind == EventKind::MoveStart).then(|| &t + self.sched.phase_delay());
        let applied = match apply_event(&mut self.world, robot, kind, &t, t_end.as_ref()) {
            Ok(a) => a,
            Err(e) => panic!("simulator invariant broken at t={t}: {e}"),
        };
        if applied.changed {
            self.version += 1;
        }
        let n = self.world.robots.len();
        match (kind, &self.world.robots[robot].activity) {
            (EventKind::Activate, _) => self.push(t.clone(), robot, EventKind::Look),
            (EventKind::Look, Activity::Computed { .. }) => {
                let d = &t + self.sched.phase_delay();
                self.push(d, robot, EventKind::ColorCommit);
            }
            (EventKind::ColorCommit, Activity::AwaitingMove { .. }) => {
                let d = &t + self.sched.phase_delay();
                self.push(d, robot, EventKind::MoveStart);
            }
            (EventKind::MoveStart, _) => {
                self.moving += 1;
                self.push(t_end.clone().expect("set for move start"), robot, EventKind::MoveEnd);
            }
            (EventKind::MoveEnd, _) => {
                self.moving -= 1;
                let next = self.sched.next_activation(robot, n, &t);
                self.push(next, robot, EventKind::Activate);
            }
            _ => {
                let next = self.sched.next_activation(robot, n, &t);
                self.push(next, robot, EventKind::Activate);
            }
        }
        let mut detail = applied.detail;
        detail.stable_class = self.stable_class();
        let event = TraceEvent { world_digest: trace::world_digest(&self.world, &t), t, robot, kind, detail };
        self.trace.events.push(event);
        self.check_quiescence();
        self.trace.events.last()
    }

    /// Processes every event scheduled strictly before `t`.
    pub fn run_until(&mut self, t: &Rational) {
        while self.status.is_none() && self.next_time().is_some_and(|nt| nt < t) {
            self.step();
        }
    }

    pub fn finish(mut self) -> (Trace, Outcome) {
        while self.step().is_some() {}
        let status = self.status.take().expect("run ended");
        let final_class = self.stable_class();
        let outcome = Outcome { status, event_count: self.trace.events.len(), final_class, final_world: self.world };
        self.trace.outcome = Some(outcome.record());
        (self.trace, outcome)
    }
}

/// Runs to formation, quiescence, collision or the event budget.
pub fn run(world: World, policy: SchedulerPolicy, max_events: usize) -> Result<(Trace, Outcome), SimError> {
    Ok(Simulation::new(world, policy, max_events)?.finish())
}

/// Re-applies every recorded event to the trace's initial world, checking
/// each recorded detail and digest. Returns the final world.
pub fn replay(trace: &Trace) -> Result<World, SimError> {
    replay_with(trace, |_, _, _| {})
}

/// [`replay`], calling `visit(index, world, event)` after each event.
pub fn replay_with(
    trace: &Trace,
    mut visit: impl FnMut(usize, &World, &TraceEvent),
) -> Result<World, SimError> {
    let mut world = trace.meta.scenario.to_world();
    for (index, ev) in trace.events.iter().enumerate() {
        let diverged = |reason: String| SimError::ReplayDiverged { index, reason };
        if ev.robot >= world.robots.len() {
            return Err(diverged(format!("no robot {}", ev.robot)));
        }
        let mut applied =
            apply_event(&mut world, ev.robot, ev.kind, &ev.t, ev.detail.t_end.as_ref()).map_err(diverged)?;
        if world.is_stable() {
            applied.detail.stable_class = Some(classify(&world, &world.pattern, world.mode).expect("world is stable"));
        }
        if applied.detail != ev.detail {
            return Err(diverged(format!("recorded {:?}, replayed {:?}", ev.detail, applied.detail)));
        }
        if trace::world_digest(&world, &ev.t) != ev.world_digest {
            return Err(diverged("world digest differs".into()));
        }
        visit(index, &world, ev);
    }
    Ok(world)
}
