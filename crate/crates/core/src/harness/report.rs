//! Per-agent, per-task result tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, Metrics};
use super::{AgentKind, EpisodeResult};
use crate::error::{Error, Result};
use crate::world::{write_atomic, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub task: Task,
    pub agent: AgentKind,
    pub metrics: Metrics,
}

/// Rows sorted by task, then agent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub rows: Vec<TableRow>,
}

/// Means per (task, agent). Independent of the order of `results`.
pub fn aggregate(results: &[EpisodeResult]) -> Table {
    let mut groups: BTreeMap<(Task, AgentKind), Vec<EpisodeResult>> = BTreeMap::new();
    for r in results {
        groups.entry((r.task, r.agent)).or_default().push(r.clone());
    }
    let rows = groups
        .into_iter()
        .filter_map(|((task, agent), mut rs)| {
            rs.sort_by(|a, b| (&a.scene_id, a.run_seed).cmp(&(&b.scene_id, b.run_seed)));
            compute_metrics(&rs).map(|metrics| TableRow { task, agent, metrics })
        })
        .collect();
    Table { rows }
}

fn fmt1(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"))
}

/// Comma-separated; a missing value is an empty field.
pub fn render_csv(table: &Table) -> String {
    let mut out = String::from("task,agent,episodes,value,step,damage\n");
    for r in &table.rows {
        let opt = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:.1}"));
        let damage = if r.task == Task::Wind { String::new() } else { opt(r.metrics.damage) };
        let _ = writeln!(
            out,
            "{},{},{},{:.1},{},{}",
            r.task,
            r.agent,
            r.metrics.episodes,
            r.metrics.value,
            opt(r.metrics.step),
            damage
        );
    }
    out
}

/// One aligned block per task. Wind blocks have no Damage column.
pub fn render_text(table: &Table) -> String {
    let mut out = String::new();
    for task in Task::ALL {
        let rows: Vec<&TableRow> = table.rows.iter().filter(|r| r.task == task).collect();
        if rows.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "[{task}]");
        let damage = task != Task::Wind;
        let _ = write!(out, "{:<8} {:>8} {:>8}", "agent", "Value↑", "Step↓");
        if damage {
            let _ = write!(out, " {:>8}", "Damage↓");
        }
        out.push('\n');
        for r in rows {
            let _ = write!(out, "{:<8} {:>8} {:>8}", r.agent.name(), fmt1(Some(r.metrics.value)), fmt1(r.metrics.step));
            if damage {
                let _ = write!(out, " {:>8}", fmt1(r.metrics.damage));
            }
            out.push('\n');
        }
    }
    out
}

/// Writes `results.csv` and `results.txt` into `dir`.
pub fn emit_report(table: &Table, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_path_buf(), source })?;
    let csv = dir.join("results.csv");
    let txt = dir.join("results.txt");
    write_atomic(&csv, render_csv(table).as_bytes())?;
    write_atomic(&txt, render_text(table).as_bytes())?;
    Ok((csv, txt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::RescueEvent;

    fn result(task: Task, agent: AgentKind, scene: &str, value: f64, damaged: bool) -> EpisodeResult {
        EpisodeResult {
            scene_id: scene.into(),
            task,
            agent,
            run_seed: 0,
            rescues: vec![RescueEvent { object_id: 1, frame: 10, damaged, value }],
            total_value: 100.0,
            frames_used: 300,
            frame_limit: 1500,
            decisions: 1,
            fallbacks: 0,
            failed: None,
        }
    }

    #[test]
    fn single_episode_table_equals_its_metrics() {
        let t = aggregate(&[result(Task::Fire, AgentKind::Greedy, "a", 40.0, true)]);
        assert_eq!(t.rows.len(), 1);
        let m = t.rows[0].metrics;
        assert_eq!((m.value, m.step, m.damage), (40.0, Some(300.0), Some(100.0)));
        assert_eq!(render_csv(&t), "task,agent,episodes,value,step,damage\nfire,greedy,1,40.0,300.0,100.0\n");
    }

    #[test]
    fn wind_has_no_damage_column() {
        let t = aggregate(&[result(Task::Wind, AgentKind::Mcts, "a", 75.94, false)]);
        let text = render_text(&t);
        assert!(!text.contains("Damage"));
        assert!(text.contains("75.9"));
        assert!(text.contains("Value↑") && text.contains("Step↓"));
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(render_csv(&Table::default()), "task,agent,episodes,value,step,damage\n");
        assert_eq!(render_text(&Table::default()), "");
    }

    #[test]
    fn order_free() {
        let a = result(Task::Fire, AgentKind::Greedy, "a", 10.0, false);
        let b = result(Task::Fire, AgentKind::Greedy, "b", 30.0, false);
        assert_eq!(aggregate(&[a.clone(), b.clone()]), aggregate(&[b, a]));
    }
}
