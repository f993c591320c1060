//! Episode orchestration, metrics, aggregation, logs and the CLI.

pub mod cli;
mod logs;
mod metrics;
mod report;
mod run;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use logs::{
    collect_results, episode_dir, read_episode_log, read_result, render_episode_log, replay, write_episode_logs, LogRecord,
    ReplayReport,
};
pub use metrics::{compute_metrics, episode_metrics, EpisodeMetrics, Metrics};
pub use report::{aggregate, emit_report, render_csv, render_text, Table, TableRow};
pub use run::{oracle_demonstrations, run_dataset, RunConfig};

use crate::agent::{Action, ActionRecord, AgentParams, Env, FailureReason, FrameRecord, OutcomeStatus, RescueEvent, StateSnapshot};
use crate::baselines::{
    AgentMemory, DecisionContext, GreedyPolicy, MctsParams, MctsPolicy, Policy, RandomPolicy, RulePolicy,
};
use crate::error::{Error, Result};
use crate::llm::{Backend, HttpBackend, LlmConfig, LlmPolicy, ReferenceEcho, Scripted, ScriptedReply};
use crate::physics::{SimParams, World};
use crate::rng;
use crate::world::{CategoryPool, ObjectCategory, Scene, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Random,
    Rule,
    Greedy,
    Mcts,
    Llm,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [AgentKind::Random, AgentKind::Rule, AgentKind::Greedy, AgentKind::Mcts, AgentKind::Llm];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::Rule => "rule",
            AgentKind::Greedy => "greedy",
            AgentKind::Mcts => "mcts",
            AgentKind::Llm => "llm",
        }
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AgentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown agent `{s}` (expected random, rule, greedy, mcts or llm)")))
    }
}

/// Where LLM completions come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LlmBackendKind {
    Http,
    /// Offline mock that always answers with the greedy option.
    #[default]
    Echo,
    /// Replies read from a JSON array of `ScriptedReply`.
    Scripted { path: PathBuf },
}


/// Everything needed to run, and re-run, one episode. Written as the
/// header of `episode.log`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSpec {
    pub scene_id: String,
    pub scene: Scene,
    pub categories: Vec<ObjectCategory>,
    pub agent: AgentKind,
    pub run_seed: u64,
    pub frame_limit: u64,
    pub sim: SimParams,
    pub agent_params: AgentParams,
    pub mcts: MctsParams,
    pub memory_k: usize,
    pub llm: LlmConfig,
    pub llm_backend: LlmBackendKind,
    pub snapshot_every: u64,
}

impl EpisodeSpec {
    pub fn new(scene_id: impl Into<String>, scene: Scene, pool: &CategoryPool, agent: AgentKind, run_seed: u64) -> Self {
        Self {
            scene_id: scene_id.into(),
            frame_limit: scene.task.frame_limit(),
            scene,
            categories: pool.iter().cloned().collect(),
            agent,
            run_seed,
            sim: SimParams::default(),
            agent_params: AgentParams::default(),
            mcts: MctsParams::default(),
            memory_k: crate::baselines::memory::DEFAULT_HISTORY,
            llm: LlmConfig::default(),
            llm_backend: LlmBackendKind::Echo,
            snapshot_every: 0,
        }
    }

    pub fn pool(&self) -> Result<CategoryPool> {
        CategoryPool::from_categories(self.categories.clone())
    }

    /// Seed of the policy stream: a function of the run seed and the scene.
    pub fn policy_seed(&self) -> u64 {
        rng::derive_seed_indexed(self.run_seed, rng::labels::POLICY, &[self.scene.seed])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scene_id: String,
    pub task: Task,
    pub agent: AgentKind,
    pub run_seed: u64,
    pub rescues: Vec<RescueEvent>,
    /// Initial value of every target, the Value denominator.
    pub total_value: f64,
    pub frames_used: u64,
    pub frame_limit: u64,
    pub decisions: u64,
    pub fallbacks: u32,
    /// Set when the episode aborted on a simulation error.
    pub failed: Option<String>,
}

impl EpisodeResult {
    pub fn rescued_value(&self) -> f64 {
        self.rescues.iter().map(|r| r.value).sum()
    }
}

/// A finished episode with its logs.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutput {
    pub result: EpisodeResult,
    pub frames: Vec<FrameRecord>,
    pub snapshots: Vec<StateSnapshot>,
    pub actions: Vec<ActionRecord>,
    pub llm_lines: Vec<String>,
}

/// Builds the backend the episode asks for.
pub fn make_backend(spec: &EpisodeSpec) -> Result<Box<dyn Backend>> {
    Ok(match &spec.llm_backend {
        LlmBackendKind::Http => Box::new(HttpBackend::new(&spec.llm)),
        LlmBackendKind::Echo => Box::new(ReferenceEcho),
        LlmBackendKind::Scripted { path } => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.clone(), source })?;
            let replies: Vec<ScriptedReply> =
                serde_json::from_str(&text).map_err(|e| Error::schema("llm script", e.to_string()))?;
            Box::new(Scripted::new(replies))
        }
    })
}

/// The decision maker for `spec`. `backend` overrides the configured LLM backend.
pub fn make_policy(spec: &EpisodeSpec, backend: Option<Box<dyn Backend>>) -> Result<Box<dyn Policy>> {
    let stream = rng::stream_from(spec.policy_seed());
    Ok(match spec.agent {
        AgentKind::Random => Box::new(RandomPolicy::new(stream)),
        AgentKind::Rule => Box::new(RulePolicy::new(stream)),
        AgentKind::Greedy => Box::new(GreedyPolicy),
        AgentKind::Mcts => {
            spec.mcts.validate().map_err(Error::Config)?;
            Box::new(MctsPolicy::new(spec.mcts.clone(), stream))
        }
        AgentKind::Llm => {
            spec.llm.validate()?;
            let backend = match backend {
                Some(b) => b,
                None => make_backend(spec)?,
            };
            let pool = spec.pool()?;
            let targets = spec.scene.targets().filter_map(|o| pool.get(&o.category).cloned()).collect();
            Box::new(LlmPolicy::new(spec.llm.clone(), backend, targets))
        }
    })
}

fn all_settled(env: &Env) -> bool {
    env.world.objects.iter().filter(|o| o.is_target).all(|o| o.rescued || o.lost)
}

/// Observe, remember, decide, execute, until the frame budget is spent or
/// every target is rescued or out of reach.
pub fn run_episode(spec: &EpisodeSpec, backend: Option<Box<dyn Backend>>) -> Result<EpisodeOutput> {
    let pool = spec.pool()?;
    spec.agent_params.validate().map_err(Error::Config)?;
    let world = World::new(&spec.scene, &pool, &spec.sim)?;
    let total_value = world.total_target_value();
    let mut env = Env::new(world, spec.agent_params.clone(), spec.frame_limit);
    env.snapshot_every = spec.snapshot_every;
    let mut policy = make_policy(spec, backend)?;
    let mut memory = AgentMemory::new(spec.memory_k);
    let mut obs = env.observe();
    memory.update(&obs);
    let mut decisions = 0;
    let mut seen_rescues = 0;
    while !env.out_of_time() && !all_settled(&env) {
        let ctx = DecisionContext {
            frame: env.frame(),
            frame_limit: env.frame_limit,
            task: spec.scene.task,
            agent: &env.agent,
            memory: &memory,
            observation: &obs,
            pool: &pool,
            sim: &spec.sim,
            bounds: spec.scene.bounds,
        };
        let action = policy.decide(&ctx);
        decisions += 1;
        let outcome = env.execute_high_level(action)?;
        for o in &outcome.observations {
            memory.update(o);
        }
        for r in &env.rescues[seen_rescues..] {
            memory.mark_rescued(r.object_id);
        }
        seen_rescues = env.rescues.len();
        for o in env.world.objects.iter().filter(|o| o.lost) {
            memory.mark_gone(o.id);
        }
        if let OutcomeStatus::Failure(reason) = outcome.status {
            if let Action::WalkTo(id) | Action::WalkStep(id) | Action::PickUp(id) = action {
                match reason {
                    FailureReason::TargetLost | FailureReason::UnknownTarget => memory.mark_gone(id),
                    _ => memory.record_failure(id),
                }
            }
        }
        obs = env.observe();
        memory.update(&obs);
        let after = DecisionContext {
            frame: env.frame(),
            frame_limit: env.frame_limit,
            task: spec.scene.task,
            agent: &env.agent,
            memory: &memory,
            observation: &obs,
            pool: &pool,
            sim: &spec.sim,
            bounds: spec.scene.bounds,
        };
        policy.feedback(action, outcome.status, &after);
    }
    let result = EpisodeResult {
        scene_id: spec.scene_id.clone(),
        task: spec.scene.task,
        agent: spec.agent,
        run_seed: spec.run_seed,
        rescues: env.rescues.clone(),
        total_value,
        frames_used: env.frame(),
        frame_limit: spec.frame_limit,
        decisions,
        fallbacks: policy.fallbacks(),
        failed: None,
    };
    Ok(EpisodeOutput {
        result,
        frames: std::mem::take(&mut env.frames),
        snapshots: std::mem::take(&mut env.snapshots),
        actions: std::mem::take(&mut env.trace),
        llm_lines: policy.drain_log(),
    })
}

/// Result recorded for an episode that aborted.
pub fn failed_result(spec: &EpisodeSpec, err: &Error) -> EpisodeResult {
    let total_value = spec
        .scene
        .targets()
        .filter_map(|o| spec.categories.iter().find(|c| c.name == o.category))
        .map(|c| c.value)
        .sum();
    EpisodeResult {
        scene_id: spec.scene_id.clone(),
        task: spec.scene.task,
        agent: spec.agent,
        run_seed: spec.run_seed,
        rescues: Vec::new(),
        total_value,
        frames_used: 0,
        frame_limit: spec.frame_limit,
        decisions: 0,
        fallbacks: 0,
        failed: Some(err.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;

    fn spec(objects: Vec<(u32, &str, Vec3)>, agent: AgentKind) -> EpisodeSpec {
        let scene = crate::agent::tests::scene_with(objects, vec![], Task::Fire);
        let mut s = EpisodeSpec::new("t", scene, &CategoryPool::builtin(), agent, 0);
        s.frame_limit = 600;
        s
    }

    #[test]
    fn zero_targets_end_immediately() {
        let out = run_episode(&spec(vec![], AgentKind::Greedy), None).unwrap();
        assert!(out.result.rescues.is_empty());
        assert_eq!(out.result.frames_used, 0);
        assert_eq!(out.result.decisions, 0);
    }

    #[test]
    fn greedy_rescues_a_visible_book() {
        let out = run_episode(&spec(vec![(1, "book", Vec3::new(4.0, 0.02, 5.0))], AgentKind::Greedy), None).unwrap();
        assert_eq!(out.result.rescues.len(), 1);
        assert_eq!(out.result.rescues[0].value, 10.0);
        assert_eq!(out.frames.len() as u64, out.result.frames_used);
    }

    #[test]
    fn same_spec_same_result() {
        for agent in AgentKind::ALL {
            let s = spec(vec![(1, "book", Vec3::new(4.0, 0.02, 5.0)), (2, "laptop", Vec3::new(6.0, 0.015, 8.0))], agent);
            let a = run_episode(&s, None).unwrap();
            let b = run_episode(&s, None).unwrap();
            assert_eq!(a, b, "{agent}");
        }
    }

    #[test]
    fn frame_limit_interrupts() {
        let mut s = spec(vec![(1, "book", Vec3::new(9.0, 0.02, 5.0))], AgentKind::Greedy);
        s.frame_limit = 50;
        let out = run_episode(&s, None).unwrap();
        assert_eq!(out.result.frames_used, 50);
        assert!(out.result.rescues.is_empty());
        assert_eq!(out.actions.last().unwrap().outcome, OutcomeStatus::Interrupted);
    }
}
