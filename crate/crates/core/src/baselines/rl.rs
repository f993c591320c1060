//! Reward function and reset/step contract for external learners.

use serde::{Deserialize, Serialize};

use super::memory::AgentMemory;
use crate::agent::{Action, AgentParams, Env, OutcomeStatus};
use crate::error::Result;
use crate::physics::{SimParams, World};
use crate::world::{CategoryPool, Scene, Task};

pub const RESCUE_REWARD: f64 = 20.0;
pub const HOLDING_PENALTY: f64 = 10.0;
pub const STEP_PENALTY: f64 = 0.1;
/// Added on top of the step penalty, for a total of 5 per invalid action.
pub const INVALID_PENALTY: f64 = 4.9;
/// Object slots addressable by the discrete action space.
pub const SLOTS: usize = 32;

/// The parts of a decision-step state the reward looks at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardState {
    /// Targets rescued so far.
    pub rescued: u32,
    pub holding: bool,
    /// Meters to the nearest target (hands free) or container (holding).
    pub distance: f64,
}

/// Reward of one decision step. The holding penalty applies on every step
/// that ends with a target in hand.
pub fn rl_reward(prev: &RewardState, invalid: bool, next: &RewardState) -> f64 {
    let newly = next.rescued.saturating_sub(prev.rescued) as f64;
    RESCUE_REWARD * newly - if next.holding { HOLDING_PENALTY } else { 0.0 } - next.distance - STEP_PENALTY
        - if invalid { INVALID_PENALTY } else { 0.0 }
}

/// Channel-major grid observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsMap {
    pub width: usize,
    pub height: usize,
    /// `CHANNELS × height × width`.
    pub data: Vec<f32>,
}

impl ObsMap {
    pub const CHANNELS: usize = 5;
    pub const EXPLORED: usize = 0;
    pub const HEIGHT: usize = 1;
    /// Object id + 1 of the remembered object in the cell, 0 when empty.
    pub const OBJECT: usize = 2;
    pub const AGENT: usize = 3;
    /// Temperature (fire) or water height (flood) at explored cells.
    pub const HAZARD: usize = 4;

    fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; Self::CHANNELS * width * height] }
    }

    pub fn get(&self, channel: usize, col: usize, row: usize) -> f32 {
        self.data[(channel * self.height + row) * self.width + col]
    }

    fn set(&mut self, channel: usize, col: usize, row: usize, v: f32) {
        self.data[(channel * self.height + row) * self.width + col] = v;
    }
}

/// Discrete-action environment: index 0 explores, 1 drops, `2 + 2k` walks to
/// slot `k` and `3 + 2k` picks it up. Slots list remembered objects by id.
pub struct RlEnv {
    scene: Scene,
    pool: CategoryPool,
    sim: SimParams,
    agent: AgentParams,
    frame_limit: u64,
    env: Option<Env>,
    memory: AgentMemory,
    state: RewardState,
}

impl RlEnv {
    pub fn new(scene: Scene, pool: CategoryPool, sim: SimParams, agent: AgentParams, frame_limit: u64) -> Self {
        Self {
            scene,
            pool,
            sim,
            agent,
            frame_limit,
            env: None,
            memory: AgentMemory::default(),
            state: RewardState { rescued: 0, holding: false, distance: 0.0 },
        }
    }

    pub const fn action_count() -> usize {
        2 + 2 * SLOTS
    }

    /// Restarts the episode with the hazard realization of `seed`.
    pub fn reset(&mut self, seed: u64) -> Result<ObsMap> {
        let mut scene = self.scene.clone();
        scene.seed = seed;
        let world = World::new(&scene, &self.pool, &self.sim)?;
        let mut env = Env::new(world, self.agent.clone(), self.frame_limit);
        env.record_frames = false;
        self.memory = AgentMemory::default();
        self.memory.update(&env.observe());
        self.env = Some(env);
        self.state = self.reward_state();
        Ok(self.obs_map())
    }

    pub fn env(&self) -> Option<&Env> {
        self.env.as_ref()
    }

    pub fn memory(&self) -> &AgentMemory {
        &self.memory
    }

    /// Remembered objects addressable by slot, sorted by id.
    pub fn slots(&self) -> Vec<u32> {
        self.memory
            .objects
            .values()
            .filter(|o| (o.is_target && !o.rescued && !o.gone) || o.is_container)
            .map(|o| o.id)
            .take(SLOTS)
            .collect()
    }

    pub fn decode(&self, index: usize) -> Option<Action> {
        match index {
            0 => Some(Action::Explore),
            1 => Some(Action::Drop),
            i if i < Self::action_count() => {
                let id = *self.slots().get((i - 2) / 2)?;
                Some(if i % 2 == 0 { Action::WalkTo(id) } else { Action::PickUp(id) })
            }
            _ => None,
        }
    }

    pub fn done(&self) -> bool {
        self.env.as_ref().is_none_or(|e| {
            e.out_of_time() || e.world.objects.iter().filter(|o| o.is_target).all(|o| o.rescued || o.lost)
        })
    }

    /// Executes one action; returns `(map, reward, done)`. Undecodable
    /// indices consume one frame and count as invalid.
    pub fn step(&mut self, index: usize) -> Result<(ObsMap, f64, bool)> {
        let action = self.decode(index);
        let env = self.env.as_mut().expect("reset before step");
        let invalid = match action {
            Some(a) => {
                let out = env.execute_high_level(a)?;
                for o in &out.observations {
                    self.memory.update(o);
                }
                matches!(out.status, OutcomeStatus::Failure(_))
            }
            None => {
                env.wait(1)?;
                true
            }
        };
        let env = self.env.as_ref().expect("reset before step");
        for r in &env.rescues {
            self.memory.mark_rescued(r.object_id);
        }
        for o in env.world.objects.iter().filter(|o| o.lost) {
            self.memory.mark_gone(o.id);
        }
        let obs = env.observe();
        self.memory.update(&obs);
        let next = self.reward_state();
        let reward = rl_reward(&self.state, invalid, &next);
        self.state = next;
        Ok((self.obs_map(), reward, self.done()))
    }

    fn reward_state(&self) -> RewardState {
        let env = self.env.as_ref().expect("reset before use");
        let p = env.agent.position;
        let holding = env.agent.carried.is_some();
        let nearest = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
        let distance = if !holding {
            nearest(&mut self.memory.candidates().map(|o| o.last().position.flat_distance(p)))
        } else if env.world.task() == Task::Wind {
            nearest(&mut self.memory.containers().map(|o| o.last().position.flat_distance(p)))
        } else {
            // The bag is in the other hand.
            0.0
        };
        RewardState {
            rescued: env.rescues.len() as u32,
            holding,
            distance: if distance.is_finite() { distance } else { 0.0 },
        }
    }

    fn obs_map(&self) -> ObsMap {
        let env = self.env.as_ref().expect("reset before use");
        let g = &env.world.static_grid;
        let mut m = ObsMap::new(g.width, g.height);
        for c in g.cells() {
            m.set(ObsMap::HEIGHT, c.0, c.1, g.height_at(c) as f32);
        }
        for &c in &self.memory.explored {
            m.set(ObsMap::EXPLORED, c.0, c.1, 1.0);
            let at = g.cell_center(c);
            let h = match env.world.task() {
                Task::Fire => env.world.temperature_at(at),
                Task::Flood => env.world.water_height(at),
                Task::Wind => 0.0,
            };
            m.set(ObsMap::HAZARD, c.0, c.1, h as f32);
        }
        for o in self.memory.objects.values().filter(|o| !o.rescued && !o.gone) {
            let c = g.cell_of(o.last().position);
            m.set(ObsMap::OBJECT, c.0, c.1, (o.id + 1) as f32);
        }
        let a = g.cell_of(env.agent.position);
        m.set(ObsMap::AGENT, a.0, a.1, 1.0);
        m
    }
}
