//! Value, Step and Damage.

use serde::{Deserialize, Serialize};

use super::EpisodeResult;

/// Metrics of one episode. Step and Damage are undefined without rescues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    /// Rescued effective value over initial target value, percent.
    pub value: f64,
    /// Frames consumed per rescued object.
    pub step: Option<f64>,
    /// Damaged rescues over rescues, percent.
    pub damage: Option<f64>,
}

/// Means over episodes. Step and Damage average only episodes with rescues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub value: f64,
    pub step: Option<f64>,
    pub damage: Option<f64>,
    pub episodes: usize,
}

pub fn episode_metrics(r: &EpisodeResult) -> EpisodeMetrics {
    let value = if r.total_value > 0.0 { 100.0 * r.rescued_value() / r.total_value } else { 0.0 };
    let n = r.rescues.len();
    if n == 0 {
        return EpisodeMetrics { value, step: None, damage: None };
    }
    let damaged = r.rescues.iter().filter(|e| e.damaged).count();
    EpisodeMetrics {
        value,
        step: Some(r.frames_used as f64 / n as f64),
        damage: Some(100.0 * damaged as f64 / n as f64),
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// None for an empty slice.
pub fn compute_metrics(results: &[EpisodeResult]) -> Option<Metrics> {
    if results.is_empty() {
        return None;
    }
    let per: Vec<EpisodeMetrics> = results.iter().map(episode_metrics).collect();
    Some(Metrics {
        value: mean(per.iter().map(|m| m.value)).unwrap_or(0.0),
        step: mean(per.iter().filter_map(|m| m.step)),
        damage: mean(per.iter().filter_map(|m| m.damage)),
        episodes: results.len(),
    })
}
