//! Non-LLM decision makers: random, rule-based, greedy, MCTS, the RL
//! environment contract and the full-information oracle planner.

pub mod heuristic;
pub mod mcts;
pub mod memory;
pub mod oracle;
mod policies;
pub mod rl;

pub use heuristic::{heuristic_cost, HeuristicCosts, PlanEstimate, PlannerState};
pub use mcts::{exploration_coefficient, mcts_decide, MctsParams, MctsPolicy};
pub use memory::{AgentMemory, ObjectMemory, Snapshot};
pub use oracle::{hazard_timeline, oracle_plan, OraclePlan, Timeline};
pub use policies::{greedy_choice, greedy_policy, random_options, random_policy, GreedyPolicy, RandomOption, RandomPolicy, RulePolicy};
pub use rl::{rl_reward, ObsMap, RewardState, RlEnv};

use crate::agent::{Action, AgentState, Observation, OutcomeStatus};
use crate::physics::SimParams;
use crate::world::{Bounds, CategoryPool, Task};

/// Everything a policy may look at when deciding.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext<'a> {
    pub frame: u64,
    pub frame_limit: u64,
    pub task: Task,
    pub agent: &'a AgentState,
    pub memory: &'a AgentMemory,
    pub observation: &'a Observation,
    pub pool: &'a CategoryPool,
    pub sim: &'a SimParams,
    pub bounds: Bounds,
}

impl DecisionContext<'_> {
    pub fn planner_state(&self) -> PlannerState {
        PlannerState { position: self.agent.position, heading: self.agent.heading, frame: self.frame }
    }

    /// Whether the remembered position of `id` is within reach.
    pub fn in_reach(&self, id: u32) -> bool {
        self.memory
            .get(id)
            .is_some_and(|o| o.last().position.flat_distance(self.agent.position) <= self.agent.params.reach_radius)
    }
}

/// A decision maker driven by the episode loop.
pub trait Policy: Send {
    fn name(&self) -> &str;
    fn decide(&mut self, ctx: &DecisionContext) -> Action;
    /// Result of the last decided action.
    fn feedback(&mut self, _action: Action, _outcome: OutcomeStatus, _ctx: &DecisionContext) {}
    /// Decisions that fell back to greedy.
    fn fallbacks(&self) -> u32 {
        0
    }
    /// Pending NDJSON lines for `llm.log`.
    fn drain_log(&mut self) -> Vec<String> {
        Vec::new()
    }
}

/// Next step toward a safe zone while carrying a target: drop into the bag,
/// or walk to the nearest known cart and drop there.
pub fn deliver(ctx: &DecisionContext) -> Action {
    if ctx.task != Task::Wind {
        return Action::Drop;
    }
    match heuristic::nearest_container(ctx.memory, ctx.agent.position) {
        Some((id, _)) if ctx.in_reach(id) => Action::Drop,
        Some((id, _)) => Action::WalkTo(id),
        None => Action::Explore,
    }
}

/// Next step toward picking up `id`.
pub fn approach(ctx: &DecisionContext, id: u32) -> Action {
    if ctx.in_reach(id) {
        Action::PickUp(id)
    } else {
        Action::WalkTo(id)
    }
}
