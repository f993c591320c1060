//! Embodied action layer: symbolic observation, navigation and actions that
//! consume frames while the world keeps evolving.

mod env;
pub mod nav;

use serde::{Deserialize, Serialize};

pub use env::{ActionOutcome, ActionRecord, Env, FailureReason, FrameRecord, OutcomeStatus, RescueEvent, StateSnapshot};
pub use nav::{plan_path, NavError, PathPlan};

use crate::fire::FloorCell;
use crate::geom::{angle_between, Vec3};
use crate::physics::{HazardState, World};
use crate::world::{effective_value, Cell, GridMap, Status, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentParams {
    /// m/frame.
    pub speed: f64,
    /// Degrees/frame.
    pub turn_rate: f64,
    /// Meters, horizontal.
    pub reach_radius: f64,
    /// Degrees, full cone.
    pub fov: f64,
    /// Meters.
    pub view_range: f64,
    /// Meters; grid cells taller than this occlude.
    pub eye_height: f64,
    pub reach_frames: u64,
    pub reset_arm_frames: u64,
    pub drop_frames: u64,
    pub max_replans: u32,
    /// Cells taller than this are not walkable.
    pub nav_max_height: f64,
    pub explore_turns: u32,
    pub explore_step: f64,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            speed: 0.05,
            turn_rate: 15.0,
            reach_radius: 1.0,
            fov: 90.0,
            view_range: 10.0,
            eye_height: 1.5,
            reach_frames: 10,
            reset_arm_frames: 10,
            drop_frames: 5,
            max_replans: 3,
            nav_max_height: 0.6,
            explore_turns: 8,
            explore_step: 45.0,
        }
    }
}

impl AgentParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.speed > 0.0 && self.turn_rate > 0.0 && self.reach_radius > 0.0) {
            return Err("agent speed, turn_rate and reach_radius must be > 0".into());
        }
        if !(self.fov > 0.0 && self.fov <= 360.0 && self.view_range > 0.0) {
            return Err("agent fov must lie in (0, 360] and view_range be > 0".into());
        }
        Ok(())
    }

    /// Frames for the grasp part of a pick-up.
    pub fn grasp_frames(&self) -> u64 {
        self.reach_frames + self.reset_arm_frames
    }

    /// Frames to rotate by `deg` degrees; never less than one.
    pub fn turn_frames(&self, deg: f64) -> u64 {
        ((deg.abs() / self.turn_rate) - 1e-9).ceil().max(1.0) as u64
    }
}

/// Pose and hands. In fire and flood the second hand always holds the bag,
/// so at most one target is carried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec3,
    /// Degrees.
    pub heading: f64,
    pub carried: Option<u32>,
    pub has_bag: bool,
    pub params: AgentParams,
}

impl AgentState {
    pub fn spawn(world: &World, params: AgentParams) -> Self {
        let s = world.scene.agent_spawn;
        Self {
            position: Vec3::new(s.position.x, 0.0, s.position.z),
            heading: crate::geom::normalize_degrees(s.heading),
            carried: None,
            has_bag: world.task() != Task::Wind,
            params,
        }
    }

    pub fn hands_full(&self) -> bool {
        self.carried.is_some()
    }
}

/// Hazard signal attached to a sighted object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardReading {
    /// °C of the object.
    Temperature(f64),
    /// Water surface height at the object, meters.
    WaterLevel(f64),
    None,
}

impl HazardReading {
    pub fn scalar(self) -> f64 {
        match self {
            HazardReading::Temperature(t) | HazardReading::WaterLevel(t) => t,
            HazardReading::None => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleObject {
    pub id: u32,
    pub category: String,
    pub position: Vec3,
    pub half_extents: Vec3,
    /// Horizontal distance from the agent, meters.
    pub distance: f64,
    pub status: Status,
    pub hazard: HazardReading,
    /// Current scoring value (halved once damaged).
    pub value: f64,
    pub damaged: bool,
    pub is_target: bool,
    pub is_container: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub frame: u64,
    pub agent_position: Vec3,
    pub agent_heading: f64,
    pub carried: Option<u32>,
    /// Sorted by id.
    pub visible: Vec<VisibleObject>,
    /// Burning floor cells in view (fire only).
    pub burning_cells: Vec<FloorCell>,
    /// Grid cells inside the view cone, for the explored map.
    pub swept: Vec<Cell>,
}

/// Whether a straight sight line from `from` (at eye height) to `to` is
/// free of cells taller than the eye. The end cells are not tested.
pub fn line_of_sight(grid: &GridMap, from: Vec3, to: Vec3, eye_height: f64) -> bool {
    let a = grid.cell_of(from);
    let b = grid.cell_of(to);
    let d = to.flat() - from.flat();
    let len = d.length();
    let step = grid.cell_size * 0.25;
    let n = (len / step).ceil() as usize;
    for k in 1..n {
        let p = from + d * (k as f64 / n as f64);
        let c = grid.cell_of(p);
        if c == a || c == b {
            continue;
        }
        if grid.height_at(c) > eye_height {
            return false;
        }
    }
    true
}

/// Whether `p` lies in the agent's view cone and range.
pub fn in_view(agent: &AgentState, p: Vec3) -> bool {
    let d = p.flat() - agent.position.flat();
    let dist = d.length();
    if dist > agent.params.view_range {
        return false;
    }
    if dist < 1e-9 {
        return true;
    }
    angle_between(agent.heading, d.heading()).abs() <= agent.params.fov / 2.0 + 1e-9
}

/// Symbolic observation of everything the agent can currently see.
pub fn observe(world: &World, agent: &AgentState) -> Observation {
    let grid = &world.static_grid;
    let eye = agent.params.eye_height;
    let sees = |p: Vec3| in_view(agent, p) && line_of_sight(grid, agent.position, p, eye);
    let visible = world
        .objects
        .iter()
        .filter(|o| !o.rescued && !o.lost && o.held_by.is_none())
        .filter(|o| sees(o.position))
        .map(|o| VisibleObject {
            id: o.id,
            category: o.category.name.clone(),
            position: o.position,
            half_extents: o.half_extents,
            distance: o.position.flat_distance(agent.position),
            status: o.status,
            hazard: match world.task() {
                Task::Fire => HazardReading::Temperature(o.temperature),
                Task::Flood => HazardReading::WaterLevel(world.water_height(o.position)),
                Task::Wind => HazardReading::None,
            },
            value: effective_value(o),
            damaged: o.damaged,
            is_target: o.is_target,
            is_container: o.is_container,
        })
        .collect();
    let burning_cells = match &world.hazard {
        HazardState::Fire(f) => f.field.burning.keys().copied().filter(|&c| sees(f.grid.center(c))).collect(),
        _ => Vec::new(),
    };
    let swept = grid.cells().filter(|&c| sees(grid.cell_center(c))).collect();
    Observation {
        frame: world.frame,
        agent_position: agent.position,
        agent_heading: agent.heading,
        carried: agent.carried,
        visible,
        burning_cells,
        swept,
    }
}

/// Executable high-level actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", content = "id", rename_all = "snake_case")]
pub enum Action {
    Explore,
    WalkTo(u32),
    /// Walk to the first waypoint of the path toward the object.
    WalkStep(u32),
    PickUp(u32),
    Drop,
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Action::Explore => write!(f, "explore"),
            Action::WalkTo(id) => write!(f, "walk_to({id})"),
            Action::WalkStep(id) => write!(f, "walk_step({id})"),
            Action::PickUp(id) => write!(f, "pick_up({id})"),
            Action::Drop => write!(f, "drop"),
        }
    }
}

/// Primitive actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum LowLevel {
    MoveBy { meters: f64 },
    TurnBy { degrees: f64 },
    TurnTo { id: u32 },
    ReachFor { id: u32 },
    ResetArm,
}
