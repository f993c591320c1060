//! Frame-cost estimates of rescue plans with linear forecasts from memory.

use serde::{Deserialize, Serialize};

use super::memory::{AgentMemory, ObjectMemory};
use crate::agent::AgentParams;
use crate::geom::{angle_between, Vec3};
use crate::world::{value_with_damage, CategoryPool, Status, Task};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicCosts {
    pub grasp: f64,
    pub drop: f64,
    pub exploration: f64,
}

impl HeuristicCosts {
    pub fn from_params(p: &AgentParams) -> Self {
        Self {
            grasp: p.grasp_frames() as f64,
            drop: p.drop_frames as f64,
            exploration: (p.explore_turns as u64 * p.turn_frames(p.explore_step)) as f64,
        }
    }
}

/// Where the planner imagines the agent to be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerState {
    pub position: Vec3,
    pub heading: f64,
    pub frame: u64,
}

/// Linear forecast of one target, built from its last two sightings.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetForecast {
    pub id: u32,
    pub base_value: f64,
    pub last_position: Vec3,
    /// m/frame.
    pub velocity: Vec3,
    pub last_frame: u64,
    /// Frame at which the target is expected to be damaged, if ever.
    pub damage_frame: Option<u64>,
}

impl TargetForecast {
    pub fn position_at(&self, frame: u64) -> Vec3 {
        let dt = frame.saturating_sub(self.last_frame) as f64;
        self.last_position + self.velocity * dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicError {
    UnknownTarget(u32),
}

impl std::fmt::Display for HeuristicError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HeuristicError::UnknownTarget(id) => write!(f, "object {id} is not in memory"),
        }
    }
}

/// Linear extrapolation of a scalar sampled at `(f0, v0)` and `(f1, v1)` to
/// the first frame at which it reaches `threshold`.
pub fn crossing_frame(f0: u64, v0: f64, f1: u64, v1: f64, threshold: f64) -> Option<u64> {
    if v1 >= threshold {
        return Some(f1);
    }
    if f1 <= f0 {
        return None;
    }
    let slope = (v1 - v0) / (f1 - f0) as f64;
    if slope <= 0.0 {
        return None;
    }
    Some(f1 + ((threshold - v1) / slope).ceil() as u64)
}

/// Builds the forecast for one remembered object.
pub fn forecast(obj: &ObjectMemory, pool: &CategoryPool, task: Task) -> TargetForecast {
    let last = obj.last();
    let cat = pool.get(&obj.category);
    let base_value = cat.map(|c| c.value).unwrap_or(if last.damaged { 2.0 * last.value } else { last.value });
    let velocity = match obj.last_two() {
        Some((a, b)) if b.frame > a.frame => (b.position - a.position) * (1.0 / (b.frame - a.frame) as f64),
        _ => Vec3::ZERO,
    };
    let damage_frame = if last.damaged || last.status != Status::Normal {
        Some(last.frame)
    } else {
        let (f0, v0) = obj.last_two().map(|(a, _)| (a.frame, a.hazard)).unwrap_or((last.frame, last.hazard));
        match (task, cat) {
            (Task::Fire, Some(c)) => crossing_frame(f0, v0, last.frame, last.hazard, c.ignition_point),
            (Task::Flood, Some(c)) if !c.waterproof => {
                let top = last.position.y + obj.half_extents.y;
                crossing_frame(f0, v0, last.frame, last.hazard, top)
            }
            _ => None,
        }
    };
    TargetForecast { id: obj.id, base_value, last_position: last.position, velocity, last_frame: last.frame, damage_frame }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEstimate {
    pub navigation: f64,
    pub turn: f64,
    pub grasp: f64,
    /// Walk from the target to the container (wind).
    pub delivery: f64,
    pub drop: f64,
    pub total: f64,
    /// Frame at which the agent reaches the target.
    pub arrival_frame: u64,
    pub predicted_damaged: bool,
    pub value: f64,
    /// Where the agent ends up after the drop.
    pub end_position: Vec3,
}

/// Costs a rescue of `t` from `state`. `container` is the delivery point for
/// the wind task.
pub fn estimate(
    t: &TargetForecast,
    state: &PlannerState,
    container: Option<Vec3>,
    costs: &HeuristicCosts,
    params: &AgentParams,
) -> PlanEstimate {
    let mut target = t.position_at(state.frame);
    let mut dist = target.flat_distance(state.position);
    for _ in 0..3 {
        let arrive = state.frame + (dist / params.speed).ceil() as u64;
        target = t.position_at(arrive);
        dist = target.flat_distance(state.position);
    }
    let navigation = dist / params.speed;
    let d = target.flat() - state.position.flat();
    let turn = if d.length() < 1e-9 { 0.0 } else { angle_between(state.heading, d.heading()).abs() / params.turn_rate };
    let arrival_frame = state.frame + (navigation + turn).ceil() as u64;
    let predicted_damaged = t.damage_frame.is_some_and(|f| f <= arrival_frame + params.reach_frames);
    let (delivery, end_position) = match container {
        Some(c) => (target.flat_distance(c) / params.speed, c),
        None => (0.0, target),
    };
    let total = navigation + turn + costs.grasp + delivery + costs.drop;
    PlanEstimate {
        navigation,
        turn,
        grasp: costs.grasp,
        delivery,
        drop: costs.drop,
        total,
        arrival_frame,
        predicted_damaged,
        value: value_with_damage(t.base_value, predicted_damaged),
        end_position: Vec3::new(end_position.x, 0.0, end_position.z),
    }
}

/// Nearest remembered container to `p`.
pub fn nearest_container(memory: &AgentMemory, p: Vec3) -> Option<(u32, Vec3)> {
    memory
        .containers()
        .map(|c| (c.id, c.last().position))
        .min_by(|a, b| a.1.flat_distance(p).total_cmp(&b.1.flat_distance(p)).then(a.0.cmp(&b.0)))
}

/// Frame estimate of rescuing `target` (plus delivery to the nearest known
/// container in the wind task).
pub fn heuristic_cost(
    memory: &AgentMemory,
    state: &PlannerState,
    target: u32,
    task: Task,
    pool: &CategoryPool,
    params: &AgentParams,
) -> Result<PlanEstimate, HeuristicError> {
    let obj = memory.get(target).ok_or(HeuristicError::UnknownTarget(target))?;
    let f = forecast(obj, pool, task);
    let container = if task == Task::Wind {
        nearest_container(memory, f.position_at(state.frame)).map(|(_, p)| p)
    } else {
        None
    };
    Ok(estimate(&f, state, container, &HeuristicCosts::from_params(params), params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{HazardReading, Observation, VisibleObject};

    fn see(m: &mut AgentMemory, frame: u64, id: u32, pos: Vec3, temp: f64) {
        m.update(&Observation {
            frame,
            agent_position: Vec3::ZERO,
            agent_heading: 0.0,
            carried: None,
            visible: vec![VisibleObject {
                id,
                category: "book".into(),
                position: pos,
                half_extents: Vec3::new(0.11, 0.02, 0.15),
                distance: 0.0,
                status: Status::Normal,
                hazard: HazardReading::Temperature(temp),
                value: 10.0,
                damaged: false,
                is_target: true,
                is_container: false,
            }],
            burning_cells: vec![],
            swept: vec![],
        });
    }

    fn at_origin(frame: u64) -> PlannerState {
        PlannerState { position: Vec3::ZERO, heading: 0.0, frame }
    }

    #[test]
    fn static_object_five_meters_is_hundred_frames() {
        let mut m = AgentMemory::default();
        see(&mut m, 0, 1, Vec3::new(5.0, 0.0, 0.0), 20.0);
        let e = heuristic_cost(&m, &at_origin(0), 1, Task::Fire, &CategoryPool::builtin(), &AgentParams::default()).unwrap();
        assert!((e.navigation - 100.0).abs() < 1e-9);
        assert_eq!(e.turn, 0.0);
        assert!((e.total - 125.0).abs() < 1e-9);
    }

    #[test]
    fn moving_object_is_extrapolated() {
        let mut m = AgentMemory::default();
        see(&mut m, 0, 1, Vec3::new(2.0, 0.0, 0.0), 20.0);
        see(&mut m, 10, 1, Vec3::new(2.2, 0.0, 0.0), 20.0);
        let f = forecast(m.get(1).unwrap(), &CategoryPool::builtin(), Task::Wind);
        assert!((f.velocity.x - 0.02).abs() < 1e-12);
        assert!((f.position_at(60).x - 3.2).abs() < 1e-9);
    }

    #[test]
    fn empty_velocity_history_is_static_distance() {
        let mut m = AgentMemory::default();
        see(&mut m, 0, 1, Vec3::new(3.0, 0.0, 4.0), 20.0);
        see(&mut m, 10, 1, Vec3::new(3.0, 0.0, 4.0), 20.0);
        let e = heuristic_cost(&m, &at_origin(10), 1, Task::Fire, &CategoryPool::builtin(), &AgentParams::default()).unwrap();
        assert!((e.navigation - 100.0).abs() < 1e-9);
    }

    #[test]
    fn predicted_ignition_halves_value() {
        let mut m = AgentMemory::default();
        // Book ignites at 230 °C; +20 °C per 10 frames reaches it within 80 frames.
        see(&mut m, 0, 1, Vec3::new(5.0, 0.0, 0.0), 50.0);
        see(&mut m, 10, 1, Vec3::new(5.0, 0.0, 0.0), 70.0);
        let pool = CategoryPool::builtin();
        let e = heuristic_cost(&m, &at_origin(10), 1, Task::Fire, &pool, &AgentParams::default()).unwrap();
        assert!(e.predicted_damaged);
        assert_eq!(e.value, pool.get("book").unwrap().value / 2.0);
        // A cooling object is not predicted to ignite.
        let mut c = AgentMemory::default();
        see(&mut c, 0, 1, Vec3::new(5.0, 0.0, 0.0), 70.0);
        see(&mut c, 10, 1, Vec3::new(5.0, 0.0, 0.0), 50.0);
        let e = heuristic_cost(&c, &at_origin(10), 1, Task::Fire, &pool, &AgentParams::default()).unwrap();
        assert!(!e.predicted_damaged);
    }

    #[test]
    fn unknown_target_is_an_error() {
        let m = AgentMemory::default();
        let r = heuristic_cost(&m, &at_origin(0), 9, Task::Fire, &CategoryPool::builtin(), &AgentParams::default());
        assert_eq!(r.unwrap_err(), HeuristicError::UnknownTarget(9));
    }

    #[test]
    fn crossing_frame_cases() {
        assert_eq!(crossing_frame(0, 0.0, 10, 5.0, 10.0), Some(20));
        assert_eq!(crossing_frame(0, 5.0, 10, 5.0, 10.0), None);
        assert_eq!(crossing_frame(0, 0.0, 10, 12.0, 10.0), Some(10));
    }
}
