//! Batch runs over a dataset manifest, and oracle demonstrations.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logs::write_episode_logs;
use super::{failed_result, run_episode, AgentKind, EpisodeOutput, EpisodeResult, EpisodeSpec, LlmBackendKind};
use crate::agent::AgentParams;
use crate::baselines::memory::DEFAULT_HISTORY;
use crate::baselines::oracle::{solve, Demonstration};
use crate::baselines::MctsParams;
use crate::error::{Error, Result};
use crate::llm::LlmConfig;
use crate::physics::SimParams;
use crate::procgen::{Manifest, ManifestEntry, Split};
use crate::world::{load_scene_with_pool, write_atomic, CategoryPool, Task};

/// A batch of episodes, read from TOML. Command-line flags override fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    /// Defaults to `<data>/<task>/manifest.json` in the CLI.
    pub manifest: Option<PathBuf>,
    /// Category pool file; the builtin pool when absent.
    pub categories: Option<PathBuf>,
    pub agents: Vec<AgentKind>,
    /// One episode per (scene, agent, seed).
    pub seeds: Vec<u64>,
    pub split: Split,
    /// Overrides the task's frame budget.
    pub frame_limit: Option<u64>,
    pub agent_effects: bool,
    pub out_dir: PathBuf,
    /// Uses only the first `limit` scenes of the split.
    pub limit: Option<usize>,
    pub snapshot_every: u64,
    pub memory_k: usize,
    pub sim: SimParams,
    pub agent: AgentParams,
    pub mcts: MctsParams,
    pub llm: LlmConfig,
    pub llm_backend: LlmBackendKind,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: Task::Fire,
            manifest: None,
            categories: None,
            agents: vec![AgentKind::Greedy],
            seeds: vec![0],
            split: Split::Test,
            frame_limit: None,
            agent_effects: false,
            out_dir: PathBuf::from("out"),
            limit: None,
            snapshot_every: 0,
            memory_k: DEFAULT_HISTORY,
            sim: SimParams::default(),
            agent: AgentParams::default(),
            mcts: MctsParams::default(),
            llm: LlmConfig::default(),
            llm_backend: LlmBackendKind::Echo,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::schema("run config", e.to_string()))
    }

    pub fn frame_limit(&self) -> u64 {
        self.frame_limit.unwrap_or(self.task.frame_limit())
    }

    pub fn pool(&self) -> Result<CategoryPool> {
        match &self.categories {
            Some(p) => CategoryPool::load(p),
            None => Ok(CategoryPool::builtin()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config("agents and seeds must be non-empty".into()));
        }
        if self.frame_limit == Some(0) {
            return Err(Error::Config("frame_limit must be > 0".into()));
        }
        if self.memory_k == 0 {
            return Err(Error::Config("memory_k must be >= 1".into()));
        }
        self.agent.validate().map_err(Error::Config)?;
        self.mcts.validate().map_err(Error::Config)?;
        self.llm.validate()?;
        Ok(())
    }

    fn spec(&self, scene_id: String, entry_scene: crate::world::Scene, pool: &CategoryPool, agent: AgentKind, seed: u64) -> EpisodeSpec {
        let mut spec = EpisodeSpec::new(scene_id, entry_scene, pool, agent, seed);
        spec.frame_limit = self.frame_limit();
        spec.sim = self.sim.clone();
        spec.sim.physics.agent_effects_enabled |= self.agent_effects;
        spec.agent_params = self.agent.clone();
        spec.mcts = self.mcts.clone();
        spec.memory_k = self.memory_k;
        spec.llm = self.llm.clone();
        spec.llm_backend = self.llm_backend.clone();
        spec.snapshot_every = self.snapshot_every;
        spec
    }
}

fn manifest_entries(manifest: &Manifest, split: Split, limit: Option<usize>) -> Vec<&ManifestEntry> {
    let mut entries: Vec<&ManifestEntry> = manifest.split(split).collect();
    entries.sort_by(|a, b| a.scene_path.cmp(&b.scene_path));
    entries.truncate(limit.unwrap_or(usize::MAX));
    entries
}

fn stem(path: &str) -> String {
    Path::new(path).file_stem().map_or_else(|| path.to_string(), |s| s.to_string_lossy().into_owned())
}

/// Runs every (scene, agent, seed) of the split in parallel and writes logs
/// under `out_dir`. An episode that errors is recorded as failed and the
/// batch continues. Results come back sorted by scene, agent and seed.
pub fn run_dataset(cfg: &RunConfig, manifest_path: &Path) -> Result<Vec<EpisodeResult>> {
    cfg.validate()?;
    let pool = cfg.pool()?;
    cfg.sim.validate(&pool)?;
    let manifest = Manifest::load(manifest_path)?;
    if manifest.task != cfg.task {
        return Err(Error::Config(format!("manifest is for task `{}`, config asks for `{}`", manifest.task, cfg.task)));
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut specs = Vec::new();
    for entry in manifest_entries(&manifest, cfg.split, cfg.limit) {
        let scene = load_scene_with_pool(&base.join(&entry.scene_path), &pool)?;
        for &agent in &cfg.agents {
            for &seed in &cfg.seeds {
                let id = format!("{}-seed{seed}", stem(&entry.scene_path));
                specs.push(cfg.spec(id, scene.clone(), &pool, agent, seed));
            }
        }
    }
    let mut results = specs
        .par_iter()
        .map(|spec| {
            let output = run_episode(spec, None).unwrap_or_else(|e| EpisodeOutput {
                result: failed_result(spec, &e),
                frames: Vec::new(),
                snapshots: Vec::new(),
                actions: Vec::new(),
                llm_lines: Vec::new(),
            });
            write_episode_logs(&cfg.out_dir, spec, &output)?;
            Ok(output.result)
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| (&a.scene_id, a.agent, a.run_seed).cmp(&(&b.scene_id, b.agent, b.run_seed)));
    Ok(results)
}

/// Solves every training scene with the oracle planner and writes one JSON
/// line per scene to `out`.
pub fn oracle_demonstrations(
    manifest_path: &Path,
    pool: &CategoryPool,
    sim: &SimParams,
    params: &AgentParams,
    frame_limit: Option<u64>,
    out: &Path,
) -> Result<Vec<Demonstration>> {
    let manifest = Manifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let limit = frame_limit.unwrap_or(manifest.task.frame_limit());
    let entries = manifest_entries(&manifest, Split::Train, None);
    let demos = entries
        .par_iter()
        .map(|entry| {
            let scene = load_scene_with_pool(&base.join(&entry.scene_path), pool)?;
            let plan = solve(&scene, pool, sim, params, limit)?;
            Ok(Demonstration { scene: entry.scene_path.clone(), plan: plan.order(), value: plan.value, frames: plan.frames })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    for d in &demos {
        text.push_str(&serde_json::to_string(d).expect("demonstration serializes"));
        text.push('\n');
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_path_buf(), source })?;
    }
    write_atomic(out, text.as_bytes())?;
    Ok(demos)
}
