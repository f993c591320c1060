//! Episode logs and deterministic replay.
//!
//! Layout: `<out>/<task>/<agent>/<scene>/{episode.log, actions.log, llm.log}`,
//! each newline-delimited JSON. `episode.log` holds a header (the full
//! `EpisodeSpec`), one record per frame with snapshots interleaved, and the
//! result. Replay re-runs the header and compares line by line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{run_episode, AgentKind, EpisodeOutput, EpisodeResult, EpisodeSpec};
use crate::agent::{FrameRecord, StateSnapshot};
use crate::error::{Error, Result};
use crate::llm::{Exchange, LlmError, Scripted, ScriptedReply};
use crate::world::write_atomic;

pub const EPISODE_LOG: &str = "episode.log";
pub const ACTIONS_LOG: &str = "actions.log";
pub const LLM_LOG: &str = "llm.log";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Header(Box<EpisodeSpec>),
    Frame(FrameRecord),
    Snapshot(StateSnapshot),
    /// `header_sha256` binds the result to the exact header line.
    Result { result: EpisodeResult, header_sha256: String },
}

impl LogRecord {
    fn frame(&self) -> u64 {
        match self {
            LogRecord::Header(_) => 0,
            LogRecord::Frame(f) => f.frame,
            LogRecord::Snapshot(s) => s.frame,
            LogRecord::Result { result, .. } => result.frames_used,
        }
    }
}

fn line(r: &LogRecord) -> String {
    serde_json::to_string(r).expect("log record serializes")
}

pub fn episode_dir(out: &Path, spec: &EpisodeSpec) -> PathBuf {
    out.join(spec.scene.task.name()).join(spec.agent.name()).join(&spec.scene_id)
}

/// The lines of `episode.log`, without trailing newlines.
pub fn render_episode_log(spec: &EpisodeSpec, output: &EpisodeOutput) -> Vec<String> {
    let header = line(&LogRecord::Header(Box::new(spec.clone())));
    let digest = hex(&Sha256::digest(header.as_bytes()));
    let mut lines = vec![header];
    let mut snaps = output.snapshots.iter().peekable();
    for f in &output.frames {
        lines.push(line(&LogRecord::Frame(f.clone())));
        while let Some(s) = snaps.next_if(|s| s.frame <= f.frame) {
            lines.push(line(&LogRecord::Snapshot(s.clone())));
        }
    }
    lines.extend(snaps.map(|s| line(&LogRecord::Snapshot(s.clone()))));
    lines.push(line(&LogRecord::Result { result: output.result.clone(), header_sha256: digest }));
    lines
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn join_lines<S: AsRef<str>>(lines: &[S]) -> String {
    let mut s = String::new();
    for l in lines {
        s.push_str(l.as_ref());
        s.push('\n');
    }
    s
}

/// Writes the three logs and returns the episode directory.
pub fn write_episode_logs(out: &Path, spec: &EpisodeSpec, output: &EpisodeOutput) -> Result<PathBuf> {
    let dir = episode_dir(out, spec);
    std::fs::create_dir_all(&dir).map_err(|source| Error::Write { path: dir.clone(), source })?;
    write_atomic(&dir.join(EPISODE_LOG), join_lines(&render_episode_log(spec, output)).as_bytes())?;
    let actions: Vec<String> =
        output.actions.iter().map(|a| serde_json::to_string(a).expect("action serializes")).collect();
    write_atomic(&dir.join(ACTIONS_LOG), join_lines(&actions).as_bytes())?;
    write_atomic(&dir.join(LLM_LOG), join_lines(&output.llm_lines).as_bytes())?;
    Ok(dir)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })
}

/// The header and raw lines of an `episode.log`.
pub fn read_episode_log(path: &Path) -> Result<(EpisodeSpec, Vec<String>)> {
    let text = read(path)?;
    let lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let first = lines.first().ok_or_else(|| Error::schema("episode.log", "empty log"))?;
    match serde_json::from_str::<LogRecord>(first) {
        Ok(LogRecord::Header(spec)) => Ok((*spec, lines)),
        Ok(_) => Err(Error::schema("episode.log", "first record is not a header")),
        Err(e) => Err(Error::schema("episode.log header", e.to_string())),
    }
}

/// The result record of an `episode.log`.
pub fn read_result(path: &Path) -> Result<EpisodeResult> {
    let text = read(path)?;
    let last = text.lines().last().ok_or_else(|| Error::schema("episode.log", "empty log"))?;
    match serde_json::from_str::<LogRecord>(last) {
        Ok(LogRecord::Result { result, .. }) => Ok(result),
        Ok(_) => Err(Error::schema("episode.log", format!("{} has no result record", path.display()))),
        Err(e) => Err(Error::schema("episode.log result", e.to_string())),
    }
}

/// Every episode result under `out`, in path order.
pub fn collect_results(out: &Path) -> Result<Vec<EpisodeResult>> {
    let mut logs = Vec::new();
    find_logs(out, 0, &mut logs)?;
    logs.sort();
    logs.iter().map(|p| read_result(p)).collect()
}

fn find_logs(dir: &Path, depth: usize, acc: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Read { path: dir.to_path_buf(), source })?;
    for e in entries {
        let path = e.map_err(|source| Error::Read { path: dir.to_path_buf(), source })?.path();
        if depth == 3 && path.file_name().is_some_and(|n| n == EPISODE_LOG) {
            acc.push(path);
        } else if depth < 3 && path.is_dir() {
            find_logs(&path, depth + 1, acc)?;
        }
    }
    Ok(())
}

/// Rebuilds the reply sequence of a logged LLM episode.
fn scripted_from_log(text: &str) -> Result<Scripted> {
    let mut replies = Vec::new();
    for l in text.lines().filter(|l| !l.trim().is_empty()) {
        let ex: Exchange = serde_json::from_str(l).map_err(|e| Error::schema("llm.log", e.to_string()))?;
        replies.push(match (ex.completion, ex.error) {
            (Some(text), _) => ScriptedReply::Text(text),
            (None, Some(e)) if e == LlmError::Timeout.to_string() => ScriptedReply::Timeout,
            (None, Some(e)) if e == LlmError::RateLimited.to_string() => ScriptedReply::RateLimited,
            (None, Some(e)) => ScriptedReply::Transport(e),
            (None, None) => return Err(Error::schema("llm.log", "exchange with neither completion nor error")),
        });
    }
    Ok(Scripted::new(replies))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub dir: PathBuf,
    pub lines: usize,
    pub frames: u64,
}

/// Re-runs the logged episode in `dir` and checks every `episode.log` line.
/// LLM completions come from `llm.log`, so no backend is contacted.
pub fn replay(dir: &Path) -> Result<ReplayReport> {
    let (spec, logged) = read_episode_log(&dir.join(EPISODE_LOG))?;
    let backend: Option<Box<dyn crate::llm::Backend>> = if spec.agent == AgentKind::Llm {
        let text = std::fs::read_to_string(dir.join(LLM_LOG)).unwrap_or_default();
        Some(Box::new(scripted_from_log(&text)?))
    } else {
        None
    };
    // Delays only shape wall time; replies are already recorded.
    let mut run = spec.clone();
    run.llm.backoff_ms = 0;
    let output = run_episode(&run, backend)?;
    let fresh = render_episode_log(&spec, &output);
    for (i, (a, b)) in logged.iter().zip(&fresh).enumerate() {
        if a != b {
            let frame = serde_json::from_str::<LogRecord>(b).map(|r| r.frame()).unwrap_or(0);
            return Err(Error::ReplayDivergence { frame, detail: format!("line {} of {}", i + 1, EPISODE_LOG) });
        }
    }
    if logged.len() != fresh.len() {
        let i = logged.len().min(fresh.len());
        let frame = fresh
            .get(i)
            .or(fresh.last())
            .and_then(|b| serde_json::from_str::<LogRecord>(b).ok())
            .map_or(0, |r| r.frame());
        return Err(Error::ReplayDivergence {
            frame,
            detail: format!("{} has {} lines, replay produced {}", EPISODE_LOG, logged.len(), fresh.len()),
        });
    }
    Ok(ReplayReport { dir: dir.to_path_buf(), lines: fresh.len(), frames: output.result.frames_used })
}
