//! The `hazard` command line. Exit codes: 0 success, 1 usage, 2 runtime.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use super::logs::{collect_results, EPISODE_LOG};
use super::{aggregate, emit_report, oracle_demonstrations, render_text, replay, run_dataset, AgentKind, RunConfig};
use crate::error::{Error, Result};
use crate::procgen::{generate_dataset, GenConfig, Manifest, TemplateSet};
use crate::world::{CategoryPool, Task};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "hazard", version, about = "Dynamic-disaster rescue simulator and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a scene dataset for one task.
    Gen(GenArgs),
    /// Run episodes and write logs and a results table.
    Run(RunArgs),
    /// Aggregate the logs under a run directory.
    Eval(EvalArgs),
    /// Run several agents on the same scenes and print one table.
    Compare(RunArgs),
    /// Write oracle demonstrations for the training split.
    Oracle(OracleArgs),
    /// Re-execute logged episodes and verify they match.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_task)]
    task: Task,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset root; scenes go to `<data>/<task>/`.
    #[arg(long, default_value = "data")]
    data: PathBuf,
    /// Generator settings (TOML); task defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Room templates (JSON); the builtin set when absent.
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    categories: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_task)]
    task: Option<Task>,
    /// Repeatable.
    #[arg(long = "agent", value_parser = parse_agent)]
    agents: Vec<AgentKind>,
    /// Repeatable.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Scenes of the split to use.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    frame_limit: Option<u64>,
    /// Let hazards slow the agent.
    #[arg(long)]
    agent_effects: bool,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Used to locate `<data>/<task>/manifest.json` when no manifest is given.
    #[arg(long, default_value = "data")]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run on the training split instead of the test split.
    #[arg(long)]
    train: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, value_parser = parse_task)]
    task: Task,
    #[arg(long, default_value = "data")]
    data: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Demonstrations file; `<data>/<task>/demonstrations.jsonl` by default.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    frame_limit: Option<u64>,
    #[arg(long)]
    categories: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// Episode directories, or run directories searched for episodes.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_agent(s: &str) -> std::result::Result<AgentKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs the CLI on `args` (program name first), writing to stdout/stderr.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run_cmd(a, false),
        Command::Compare(a) => run_cmd(a, true),
        Command::Eval(a) => eval(&a.out),
        Command::Oracle(a) => oracle(a),
        Command::Replay(a) => replay_cmd(&a.paths),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Read { path: p.clone(), source })?;
            toml::from_str::<GenConfig>(&text).map_err(|e| Error::schema("gen config", e.to_string()))?
        }
        None => GenConfig::for_task(a.task),
    };
    cfg.task = a.task;
    let templates = match &a.templates {
        Some(p) => TemplateSet::load(p)?,
        None => TemplateSet::builtin(),
    };
    let pool = match &a.categories {
        Some(p) => CategoryPool::load(p)?,
        None => CategoryPool::builtin(),
    };
    let dir = a.data.join(a.task.name());
    let m = generate_dataset(&cfg, &pool, &templates, a.seed, &dir)?;
    let train = m.entries.iter().filter(|e| e.split == crate::procgen::Split::Train).count();
    println!("{} scenes ({} train, {} test) in {}", m.entries.len(), train, m.entries.len() - train, dir.display());
    Ok(())
}

fn run_cmd(a: RunArgs, compare: bool) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = a.task {
        cfg.task = t;
    }
    if !a.agents.is_empty() {
        cfg.agents = a.agents.clone();
    } else if compare && a.config.is_none() {
        cfg.agents = AgentKind::ALL.to_vec();
    }
    if !a.seeds.is_empty() {
        cfg.seeds = a.seeds.clone();
    }
    if a.limit.is_some() {
        cfg.limit = a.limit;
    }
    if a.frame_limit.is_some() {
        cfg.frame_limit = a.frame_limit;
    }
    cfg.agent_effects |= a.agent_effects;
    if a.train {
        cfg.split = crate::procgen::Split::Train;
    }
    if let Some(o) = &a.out {
        cfg.out_dir = o.clone();
    }
    if a.manifest.is_some() {
        cfg.manifest = a.manifest.clone();
    }
    let manifest = cfg.manifest.clone().unwrap_or_else(|| a.data.join(cfg.task.name()).join(Manifest::FILE_NAME));
    let results = run_dataset(&cfg, &manifest)?;
    let failed = results.iter().filter(|r| r.failed.is_some()).count();
    let table = aggregate(&results);
    let (csv, _) = emit_report(&table, &cfg.out_dir)?;
    print!("{}", render_text(&table));
    println!("{} episodes ({} failed); table in {}", results.len(), failed, csv.display());
    Ok(())
}

fn eval(out: &Path) -> Result<()> {
    let results = collect_results(out)?;
    if results.is_empty() {
        return Err(Error::Config(format!("no episodes under {}", out.display())));
    }
    let table = aggregate(&results);
    emit_report(&table, out)?;
    print!("{}", render_text(&table));
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<()> {
    let dir = a.data.join(a.task.name());
    let manifest = a.manifest.unwrap_or_else(|| dir.join(Manifest::FILE_NAME));
    let out = a.out.unwrap_or_else(|| dir.join("demonstrations.jsonl"));
    let pool = match &a.categories {
        Some(p) => CategoryPool::load(p)?,
        None => CategoryPool::builtin(),
    };
    let demos = oracle_demonstrations(&manifest, &pool, &Default::default(), &Default::default(), a.frame_limit, &out)?;
    println!("{} demonstrations in {}", demos.len(), out.display());
    Ok(())
}

fn episode_dirs(path: &Path, acc: &mut Vec<PathBuf>) -> Result<()> {
    if path.join(EPISODE_LOG).is_file() {
        acc.push(path.to_path_buf());
        return Ok(());
    }
    let entries = std::fs::read_dir(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
    for e in entries {
        let p = e.map_err(|source| Error::Read { path: path.to_path_buf(), source })?.path();
        if p.is_dir() {
            episode_dirs(&p, acc)?;
        }
    }
    Ok(())
}

fn replay_cmd(paths: &[PathBuf]) -> Result<()> {
    let mut dirs = Vec::new();
    for p in paths {
        episode_dirs(p, &mut dirs)?;
    }
    dirs.sort();
    if dirs.is_empty() {
        return Err(Error::Config("no episode logs found".into()));
    }
    for d in &dirs {
        match replay(d) {
            Ok(r) => println!("ok {} ({} frames)", d.display(), r.frames),
            Err(e) => {
                eprintln!("diverged: {}", d.display());
                return Err(e);
            }
        }
    }
    println!("{} episodes replayed identically", dirs.len());
    Ok(())
}
