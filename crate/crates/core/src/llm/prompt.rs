//! Prompt rendering and completion parsing.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::error::ParseError;
use crate::agent::{Action, ActionRecord, AgentState, HazardReading, Observation, OutcomeStatus};
use crate::baselines::AgentMemory;
use crate::world::{ObjectCategory, Task};

pub const SYSTEM_MESSAGE: &str =
    "You choose the next high-level action of a rescue robot. Reply with your reasoning, then a final line \"Answer: <letter>\".";

/// Section headers, in rendering order.
pub const SECTIONS: [&str; 6] = [
    "## Task description",
    "## Target information",
    "## Current state",
    "## Observation memory",
    "## Previous actions",
    "## Available actions",
];

/// Letters label options, so at most this many are offered.
pub const MAX_OPTIONS: usize = 26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionOption {
    pub label: String,
    pub text: String,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub task_description: String,
    pub target_information: String,
    pub current_state: String,
    pub observation_memory: String,
    pub previous_actions: String,
    /// Never empty; labels are distinct.
    pub available_actions: Vec<ActionOption>,
}

impl PromptBundle {
    /// The user message.
    pub fn render(&self) -> String {
        let mut actions = String::new();
        for o in &self.available_actions {
            let _ = writeln!(actions, "{}. {}", o.label, o.text);
        }
        actions.push_str("End your reply with a line of the form \"Answer: <letter>\".\n");
        let bodies = [
            &self.task_description,
            &self.target_information,
            &self.current_state,
            &self.observation_memory,
            &self.previous_actions,
            &actions,
        ];
        let mut out = String::new();
        for (h, b) in SECTIONS.iter().zip(bodies) {
            out.push_str(h);
            out.push('\n');
            out.push_str(b);
            if !b.ends_with('\n') {
                out.push('\n');
            }
            out.push('\n');
        }
        out.pop();
        out
    }
}

/// `A`, `B`, … for option index `i < MAX_OPTIONS`.
pub fn label(i: usize) -> String {
    assert!(i < MAX_OPTIONS, "option index {i} has no letter");
    ((b'A' + i as u8) as char).to_string()
}

/// Walk-to options for remembered candidates, sorted by id, then explore.
pub fn offer_options(memory: &AgentMemory) -> Vec<ActionOption> {
    let mut out: Vec<ActionOption> = memory
        .candidates()
        .take(MAX_OPTIONS - 1)
        .enumerate()
        .map(|(i, o)| ActionOption {
            label: label(i),
            text: format!("walk to {} (id {})", o.category, o.id),
            action: Action::WalkTo(o.id),
        })
        .collect();
    out.push(ActionOption { label: label(out.len()), text: "explore".into(), action: Action::Explore });
    out
}

/// Everything the prompt is built from.
#[derive(Debug, Clone, Copy)]
pub struct PromptInput<'a> {
    pub task: Task,
    pub frame: u64,
    pub frame_limit: u64,
    pub agent: &'a AgentState,
    pub observation: &'a Observation,
    pub memory: &'a AgentMemory,
    /// Target categories of the scene, sorted by name.
    pub targets: &'a [ObjectCategory],
    pub previous: &'a [ActionRecord],
}

fn task_description(task: Task) -> String {
    let hazard = match task {
        Task::Fire => {
            "A fire is spreading across the floor. Objects heat up near flames; a target that reaches its ignition \
             point starts burning and loses half its value."
        }
        Task::Flood => {
            "Water is entering the room and rising. A target that is not waterproof loses half its value once it is \
             fully under water."
        }
        Task::Wind => {
            "A strong wind pushes light objects around and can carry them out of reach. Carried targets must be \
             dropped into a shopping cart."
        }
    };
    format!(
        "{hazard}\nRescue as much target value as possible before time runs out. Every action takes time while the \
         scene keeps changing. You pick which object to walk to next; picking up and dropping happen automatically.\n\
         The sections below list the target categories, what you see now, what you saw before, your previous actions \
         and the actions you may take.\n"
    )
}

fn target_information(task: Task, targets: &[ObjectCategory]) -> String {
    let mut s = String::from("Target categories:\n");
    for c in targets {
        let prop = match task {
            Task::Fire => format!("ignition point {} °C", c.ignition_point),
            Task::Flood => format!("waterproof {}", if c.waterproof { "yes" } else { "no" }),
            Task::Wind => format!("moved by wind {}", if c.wind_susceptible { "yes" } else { "no" }),
        };
        let _ = writeln!(s, "- {}: value {}, {}", c.name, c.value, prop);
    }
    s
}

fn hazard_text(h: HazardReading) -> Option<String> {
    match h {
        HazardReading::Temperature(t) => Some(format!("temperature {t:.1} °C")),
        HazardReading::WaterLevel(w) => Some(format!("water level {w:.2} m")),
        HazardReading::None => None,
    }
}

fn hazard_scalar_text(task: Task, v: f64) -> Option<String> {
    match task {
        Task::Fire => hazard_text(HazardReading::Temperature(v)),
        Task::Flood => hazard_text(HazardReading::WaterLevel(v)),
        Task::Wind => None,
    }
}

fn current_state(i: &PromptInput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Frame: {} of {}", i.frame, i.frame_limit);
    let p = i.agent.position;
    let _ = writeln!(s, "Agent position: ({:.2}, {:.2}), heading {:.0}°", p.x, p.z, i.agent.heading);
    let held: Vec<String> = i
        .agent
        .carried
        .iter()
        .map(|id| {
            let name = i.memory.get(*id).map_or("object", |o| o.category.as_str());
            format!("{name} (id {id})")
        })
        .collect();
    let _ = writeln!(s, "Held objects: [{}]", held.join(", "));
    s.push_str("Target objects currently seen:\n");
    let seen: Vec<_> = i.observation.visible.iter().filter(|v| v.is_target).collect();
    if seen.is_empty() {
        s.push_str("(none)\n");
    }
    for v in seen {
        let _ = write!(
            s,
            "- {} (id {}): value {}, distance {:.2} m, position ({:.2}, {:.2})",
            v.category, v.id, v.value, v.distance, v.position.x, v.position.z
        );
        if let Some(h) = hazard_text(v.hazard) {
            let _ = write!(s, ", {h}");
        }
        let _ = writeln!(s, ", status {}", v.status.name());
    }
    s
}

fn observation_memory(i: &PromptInput) -> String {
    let mut s = String::from("Target objects previously seen:\n");
    let objs: Vec<_> = i.memory.objects.values().filter(|o| o.is_target && !o.rescued).collect();
    if objs.is_empty() {
        s.push_str("(none)\n");
    }
    for o in objs {
        let note = if o.gone { ", out of reach" } else { "" };
        let _ = writeln!(s, "- {} (id {}){note}:", o.category, o.id);
        for h in &o.history {
            let d = h.position.flat_distance(i.agent.position);
            let _ = write!(
                s,
                "  - frame {}: position ({:.2}, {:.2}), distance {:.2} m, value {}",
                h.frame, h.position.x, h.position.z, d, h.value
            );
            if let Some(t) = hazard_scalar_text(i.task, h.hazard) {
                let _ = write!(s, ", {t}");
            }
            let _ = writeln!(s, ", status {}", h.status.name());
        }
    }
    s
}

fn previous_actions(prev: &[ActionRecord]) -> String {
    if prev.is_empty() {
        return "(none)\n".into();
    }
    let mut s = String::new();
    for r in prev {
        let outcome = match r.outcome {
            OutcomeStatus::Success => "success".to_string(),
            OutcomeStatus::Interrupted => "interrupted".to_string(),
            OutcomeStatus::Failure(f) => format!("failed ({f})"),
        };
        let _ = writeln!(s, "- frame {}: {} -> {}", r.frame_start, r.action, outcome);
    }
    s
}

/// Builds the six-section prompt. Deterministic in its input.
pub fn build_prompt(i: &PromptInput, options: Vec<ActionOption>) -> PromptBundle {
    assert!(!options.is_empty(), "at least one action must be offered");
    PromptBundle {
        task_description: task_description(i.task),
        target_information: target_information(i.task, i.targets),
        current_state: current_state(i),
        observation_memory: observation_memory(i),
        previous_actions: previous_actions(i.previous),
        available_actions: options,
    }
}

fn normalize(s: &str) -> String {
    let mapped: String = s.chars().map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { ' ' }).collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Earliest option whose text occurs in `hay`, longest first on ties.
fn earliest_text(hay: &str, texts: impl Iterator<Item = (usize, String)>) -> Option<usize> {
    texts
        .filter(|(_, t)| !t.is_empty())
        .filter_map(|(i, t)| hay.find(&t).map(|pos| (pos, std::cmp::Reverse(t.len()), i)))
        .min()
        .map(|(_, _, i)| i)
}

/// Maps a completion to the index of an offered option. The part after the
/// last "answer" marker is read (or the last non-empty line when there is
/// none): a leading option letter wins, then verbatim option text, then
/// option text compared case- and punctuation-insensitively.
pub fn parse_decision(text: &str, options: &[ActionOption]) -> Result<usize, ParseError> {
    let lower = text.to_ascii_lowercase();
    let seg = match lower.rfind("answer") {
        Some(i) => &text[i + "answer".len()..],
        None => text.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or(""),
    };
    let head = seg.trim_start_matches(|c: char| c.is_whitespace() || ":*\"'(`[-".contains(c));
    let head = head.strip_prefix("is ").unwrap_or(head).trim_start_matches(|c: char| c.is_whitespace() || "\"'(*".contains(c));
    let token: String = head.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let rest = &head[token.len()..];
    let prose = rest.starts_with(|c: char| c.is_whitespace()) && rest.trim_start().starts_with(|c: char| c.is_lowercase());
    let standalone = rest.trim().trim_matches(|c: char| ".)]*\"'`".contains(c)).is_empty();
    let is_label = !token.is_empty()
        && token.len() <= 2
        && (token.chars().all(|c| c.is_ascii_uppercase()) || (token.len() == 1 && standalone));
    if is_label && !prose {
        let up = token.to_ascii_uppercase();
        return match options.iter().position(|o| o.label == up) {
            Some(i) => Ok(i),
            None => Err(ParseError::OutOfRange(up)),
        };
    }
    if let Some(i) = earliest_text(seg, options.iter().enumerate().map(|(i, o)| (i, o.text.clone()))) {
        return Ok(i);
    }
    let norm = normalize(seg);
    earliest_text(&norm, options.iter().enumerate().map(|(i, o)| (i, normalize(&o.text)))).ok_or(ParseError::NoMatch)
}
