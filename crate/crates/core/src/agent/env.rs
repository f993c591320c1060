use serde::{Deserialize, Serialize};

use super::{nav, observe, Action, AgentParams, AgentState, LowLevel, Observation};
use crate::error::{Error, Result};
use crate::geom::{angle_between, Vec3};
use crate::physics::{FrameEvents, HazardState, World};
use crate::world::{effective_value, Hand, Task};

/// Height above the agent origin at which a carried object rides.
const CARRY_HEIGHT: f64 = 1.0;
/// Target displacement, meters, that triggers re-targeting during a walk.
const RETARGET_DISTANCE: f64 = 0.5;
const MAX_RETARGETS: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    UnknownTarget,
    TargetLost,
    NotPickable,
    Blocked,
    NoPath,
    Unreachable,
    OutOfReach,
    HandsFull,
    NothingHeld,
    NoContainer,
}

impl FailureReason {
    pub fn name(self) -> &'static str {
        match self {
            FailureReason::UnknownTarget => "unknown_target",
            FailureReason::TargetLost => "target_lost",
            FailureReason::NotPickable => "not_pickable",
            FailureReason::Blocked => "blocked",
            FailureReason::NoPath => "no_path",
            FailureReason::Unreachable => "unreachable",
            FailureReason::OutOfReach => "out_of_reach",
            FailureReason::HandsFull => "hands_full",
            FailureReason::NothingHeld => "nothing_held",
            FailureReason::NoContainer => "no_container",
        }
    }
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum OutcomeStatus {
    Success,
    Failure(FailureReason),
    /// The frame limit was reached mid-action.
    Interrupted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionOutcome {
    pub status: OutcomeStatus,
    pub frames_consumed: u64,
    /// Observations made during the action (explore sweeps).
    pub observations: Vec<Observation>,
}

impl ActionOutcome {
    pub fn is_success(&self) -> bool {
        self.status == OutcomeStatus::Success
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub frame_start: u64,
    pub action: Action,
    pub outcome: OutcomeStatus,
    pub frames_consumed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescueEvent {
    pub object_id: u32,
    pub frame: u64,
    pub damaged: bool,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: u64,
    pub events: FrameEvents,
    pub agent_position: Vec3,
    pub agent_heading: f64,
    pub digest: String,
}

/// Full object state after a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub frame: u64,
    pub agent_position: Vec3,
    pub objects: Vec<crate::world::ObjectInstance>,
}

enum Stop {
    Interrupted,
    Fail(FailureReason),
    Sim(Error),
}

type Flow<T = ()> = std::result::Result<T, Stop>;

/// One agent acting in one world under a frame budget.
#[derive(Debug, Clone)]
pub struct Env {
    pub world: World,
    pub agent: AgentState,
    pub frame_limit: u64,
    pub record_frames: bool,
    /// Full object-state snapshot every this many frames; zero disables.
    pub snapshot_every: u64,
    pub frames: Vec<FrameRecord>,
    pub snapshots: Vec<StateSnapshot>,
    pub rescues: Vec<RescueEvent>,
    pub trace: Vec<ActionRecord>,
}

impl Env {
    pub fn new(world: World, params: AgentParams, frame_limit: u64) -> Self {
        let agent = AgentState::spawn(&world, params);
        Self {
            world,
            agent,
            frame_limit,
            record_frames: true,
            snapshot_every: 0,
            frames: Vec::new(),
            snapshots: Vec::new(),
            rescues: Vec::new(),
            trace: Vec::new(),
        }
    }

    pub fn frame(&self) -> u64 {
        self.world.frame
    }

    pub fn out_of_time(&self) -> bool {
        self.world.frame >= self.frame_limit
    }

    pub fn observe(&self) -> Observation {
        observe(&self.world, &self.agent)
    }

    fn tick(&mut self) -> Flow {
        if self.out_of_time() {
            return Err(Stop::Interrupted);
        }
        let events = self.world.step_frame().map_err(Stop::Sim)?;
        self.sync_carried();
        if self.record_frames {
            self.frames.push(FrameRecord {
                frame: events.frame,
                events,
                agent_position: self.agent.position,
                agent_heading: self.agent.heading,
                digest: self.world.state_digest(),
            });
        }
        if self.snapshot_every > 0 && self.world.frame.is_multiple_of(self.snapshot_every) {
            self.snapshots.push(StateSnapshot {
                frame: self.world.frame,
                agent_position: self.agent.position,
                objects: self.world.objects.clone(),
            });
        }
        Ok(())
    }

    /// Lets time pass without acting.
    pub fn wait(&mut self, frames: u64) -> Result<ActionOutcome> {
        let start = self.world.frame;
        let r = (0..frames.max(1)).try_for_each(|_| self.tick());
        self.finish(start, r, Vec::new())
    }

    fn sync_carried(&mut self) {
        if let Some(id) = self.agent.carried {
            let p = self.agent.position + Vec3::new(0.0, CARRY_HEIGHT, 0.0);
            let h = self.agent.heading;
            if let Some(o) = self.world.object_mut(id) {
                o.position = p;
                o.velocity = Vec3::ZERO;
                o.yaw_rate = 0.0;
                o.heading = h;
            }
        }
    }

    /// Multiplier on walking speed from hazards at the agent, when enabled.
    pub fn speed_factor(&self) -> f64 {
        if !self.world.params.physics.agent_effects_enabled {
            return 1.0;
        }
        let p = self.agent.position;
        match &self.world.hazard {
            HazardState::Fire(_) => {
                if self.world.temperature_at(p) > 60.0 {
                    0.5
                } else {
                    1.0
                }
            }
            HazardState::Flood { .. } => {
                if self.world.water_height(p) > 0.25 {
                    0.5
                } else {
                    1.0
                }
            }
            HazardState::Wind { velocity, .. } => match velocity.flat().normalized() {
                Some(w) => 1.0 - 0.3 * (-Vec3::from_heading(self.agent.heading).dot(w)).max(0.0),
                None => 1.0,
            },
        }
    }

    fn walkable(&self, p: Vec3) -> bool {
        let g = &self.world.static_grid;
        self.world.bounds().contains(p) && g.height_at(g.cell_of(p)) <= self.agent.params.nav_max_height
    }

    /// Active (not held, rescued or lost) object with this id.
    fn live(&self, id: u32) -> Option<&crate::world::ObjectInstance> {
        self.world.object(id).filter(|o| o.is_active())
    }

    pub fn in_reach(&self, id: u32) -> bool {
        self.live(id)
            .is_some_and(|o| o.position.flat_distance(self.agent.position) <= self.agent.params.reach_radius + 1e-9)
    }

    fn turn(&mut self, degrees: f64) -> Flow {
        let n = self.agent.params.turn_frames(degrees);
        let per = degrees / n as f64;
        for _ in 0..n {
            self.agent.heading = crate::geom::normalize_degrees(self.agent.heading + per);
            self.tick()?;
        }
        Ok(())
    }

    fn move_forward(&mut self, meters: f64) -> Flow {
        let mut remaining = meters.max(0.0);
        let mut moved = false;
        while remaining > 1e-12 {
            let step = (self.agent.params.speed * self.speed_factor()).min(remaining);
            let next = self.agent.position + Vec3::from_heading(self.agent.heading) * step;
            if !self.walkable(next) {
                if !moved {
                    self.tick()?;
                }
                return Err(Stop::Fail(FailureReason::Blocked));
            }
            self.agent.position = next;
            self.tick()?;
            moved = true;
            remaining -= step;
        }
        if !moved {
            self.tick()?;
        }
        Ok(())
    }

    fn face(&mut self, p: Vec3) -> Flow {
        let d = p.flat() - self.agent.position.flat();
        if d.length() < 1e-9 {
            return Ok(());
        }
        let ang = angle_between(self.agent.heading, d.heading());
        if ang.abs() > 1e-9 {
            self.turn(ang)?;
        }
        Ok(())
    }

    fn reach_for(&mut self, id: u32) -> Flow {
        if self.world.object(id).is_none() {
            self.tick()?;
            return Err(Stop::Fail(FailureReason::UnknownTarget));
        }
        if !self.in_reach(id) {
            self.tick()?;
            return Err(Stop::Fail(FailureReason::OutOfReach));
        }
        for _ in 0..self.agent.params.reach_frames {
            self.tick()?;
        }
        if !self.in_reach(id) {
            return Err(Stop::Fail(FailureReason::OutOfReach));
        }
        let o = self.world.object_mut(id).expect("checked");
        o.held_by = Some(Hand::Left);
        o.velocity = Vec3::ZERO;
        self.agent.carried = Some(id);
        self.sync_carried();
        Ok(())
    }

    fn finish(&mut self, start: u64, r: Flow, observations: Vec<Observation>) -> Result<ActionOutcome> {
        let status = match r {
            Ok(()) => OutcomeStatus::Success,
            Err(Stop::Interrupted) => OutcomeStatus::Interrupted,
            Err(Stop::Fail(reason)) => OutcomeStatus::Failure(reason),
            Err(Stop::Sim(e)) => return Err(e),
        };
        Ok(ActionOutcome { status, frames_consumed: self.world.frame - start, observations })
    }

    /// Executes one primitive action.
    pub fn execute_low_level(&mut self, action: LowLevel) -> Result<ActionOutcome> {
        let start = self.world.frame;
        let r = match action {
            LowLevel::MoveBy { meters } => self.move_forward(meters),
            LowLevel::TurnBy { degrees } => self.turn(degrees),
            LowLevel::TurnTo { id } => match self.world.object(id).map(|o| o.position) {
                Some(p) => {
                    let d = p.flat() - self.agent.position.flat();
                    let ang = if d.length() < 1e-9 { 0.0 } else { angle_between(self.agent.heading, d.heading()) };
                    self.turn(ang)
                }
                None => self.tick().and(Err(Stop::Fail(FailureReason::UnknownTarget))),
            },
            LowLevel::ReachFor { id } => self.reach_for(id),
            LowLevel::ResetArm => (0..self.agent.params.reset_arm_frames.max(1)).try_for_each(|_| self.tick()),
        };
        self.finish(start, r, Vec::new())
    }

    /// Executes one high-level action and appends it to the action trace.
    pub fn execute_high_level(&mut self, action: Action) -> Result<ActionOutcome> {
        let start = self.world.frame;
        let mut observations = Vec::new();
        let r = match action {
            Action::Explore => self.explore(&mut observations),
            Action::WalkTo(id) => self.walk_to(id, false),
            Action::WalkStep(id) => self.walk_to(id, true),
            Action::PickUp(id) => self.pick_up(id),
            Action::Drop => self.drop_carried(),
        };
        let out = self.finish(start, r, observations)?;
        self.trace.push(ActionRecord {
            frame_start: start,
            action,
            outcome: out.status,
            frames_consumed: out.frames_consumed,
        });
        Ok(out)
    }

    fn explore(&mut self, observations: &mut Vec<Observation>) -> Flow {
        for _ in 0..self.agent.params.explore_turns {
            self.turn(self.agent.params.explore_step)?;
            observations.push(self.observe());
        }
        Ok(())
    }

    fn walk_to(&mut self, id: u32, one_step: bool) -> Flow {
        if self.world.object(id).is_none() {
            self.tick()?;
            return Err(Stop::Fail(FailureReason::UnknownTarget));
        }
        let mut replans = 0;
        let mut retargets = 0;
        'plan: loop {
            let Some(goal) = self.live(id).map(|o| o.position) else {
                self.tick()?;
                return Err(Stop::Fail(FailureReason::TargetLost));
            };
            if self.in_reach(id) {
                // Already there; time still passes.
                return self.tick();
            }
            let max_h = self.agent.params.nav_max_height;
            let plan = match nav::plan_path(&self.world.static_grid, self.agent.position, goal, max_h, one_step) {
                Ok(p) => p,
                Err(_) => {
                    self.tick()?;
                    return Err(Stop::Fail(FailureReason::NoPath));
                }
            };
            if plan.waypoints.is_empty() {
                self.tick()?;
                return Err(Stop::Fail(FailureReason::Unreachable));
            }
            for wp in plan.waypoints {
                self.face(wp)?;
                loop {
                    let remaining = wp.flat_distance(self.agent.position);
                    if remaining < 1e-9 {
                        break;
                    }
                    let step = (self.agent.params.speed * self.speed_factor()).min(remaining);
                    let dir = (wp.flat() - self.agent.position.flat()).normalized().expect("nonzero");
                    let next = self.agent.position + dir * step;
                    if !self.walkable(next) {
                        replans += 1;
                        self.tick()?;
                        if replans > self.agent.params.max_replans {
                            return Err(Stop::Fail(FailureReason::Blocked));
                        }
                        continue 'plan;
                    }
                    self.agent.position = next;
                    self.tick()?;
                    let Some(now) = self.live(id).map(|o| o.position) else {
                        return Err(Stop::Fail(FailureReason::TargetLost));
                    };
                    if self.in_reach(id) {
                        return Ok(());
                    }
                    if now.flat_distance(goal) > RETARGET_DISTANCE {
                        retargets += 1;
                        if retargets > MAX_RETARGETS {
                            return Err(Stop::Fail(FailureReason::Unreachable));
                        }
                        continue 'plan;
                    }
                }
            }
            if one_step || self.in_reach(id) {
                return Ok(());
            }
            return Err(Stop::Fail(FailureReason::Unreachable));
        }
    }

    fn pick_up(&mut self, id: u32) -> Flow {
        let Some(o) = self.world.object(id) else {
            self.tick()?;
            return Err(Stop::Fail(FailureReason::UnknownTarget));
        };
        if o.is_container {
            self.tick()?;
            return Err(Stop::Fail(FailureReason::NotPickable));
        }
        if self.agent.hands_full() || o.held_by.is_some() {
            self.tick()?;
            return Err(Stop::Fail(FailureReason::HandsFull));
        }
        if !o.is_active() {
            self.tick()?;
            return Err(Stop::Fail(FailureReason::TargetLost));
        }
        let p = o.position;
        self.face(p)?;
        self.reach_for(id)?;
        for _ in 0..self.agent.params.reset_arm_frames {
            self.tick()?;
        }
        Ok(())
    }

    /// Nearest active container within reach.
    pub fn container_in_reach(&self) -> Option<u32> {
        let pos = self.agent.position;
        let r = self.agent.params.reach_radius + 1e-9;
        self.world
            .objects
            .iter()
            .filter(|o| o.is_container && o.is_active() && o.position.flat_distance(pos) <= r)
            .min_by(|a, b| a.position.flat_distance(pos).total_cmp(&b.position.flat_distance(pos)).then(a.id.cmp(&b.id)))
            .map(|o| o.id)
    }

    fn drop_carried(&mut self) -> Flow {
        let Some(id) = self.agent.carried else {
            self.tick()?;
            return Err(Stop::Fail(FailureReason::NothingHeld));
        };
        let container = if self.world.task() == Task::Wind {
            match self.container_in_reach() {
                Some(c) => Some(c),
                None => {
                    self.tick()?;
                    return Err(Stop::Fail(FailureReason::NoContainer));
                }
            }
        } else {
            None
        };
        for _ in 0..self.agent.params.drop_frames.max(1) {
            self.tick()?;
        }
        let at = match container.and_then(|c| self.world.object(c)) {
            Some(c) => c.position,
            None => self.agent.position,
        };
        let frame = self.world.frame;
        let o = self.world.object_mut(id).expect("carried object exists");
        o.held_by = None;
        o.rescued = true;
        o.position = at;
        o.velocity = Vec3::ZERO;
        let ev = RescueEvent { object_id: id, frame, damaged: o.damaged, value: effective_value(o) };
        self.agent.carried = None;
        if o.is_target {
            self.rescues.push(ev);
        }
        Ok(())
    }
}
