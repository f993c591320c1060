use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::agent::Observation;
use crate::fire::FloorCell;
use crate::geom::Vec3;
use crate::world::{Cell, Status};

pub const DEFAULT_HISTORY: usize = 5;
/// Failed attempts after which an object is no longer pursued.
pub const MAX_FAILURES: u32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub frame: u64,
    pub position: Vec3,
    pub status: Status,
    /// Temperature (fire) or water level (flood) at sighting.
    pub hazard: f64,
    pub value: f64,
    pub damaged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectMemory {
    pub id: u32,
    pub category: String,
    pub half_extents: Vec3,
    pub is_target: bool,
    pub is_container: bool,
    /// Oldest first; frames strictly increasing.
    pub history: VecDeque<Snapshot>,
    pub failures: u32,
    pub rescued: bool,
    pub gone: bool,
}

impl ObjectMemory {
    pub fn last(&self) -> &Snapshot {
        self.history.back().expect("history is never empty")
    }

    /// The two most recent snapshots, when available.
    pub fn last_two(&self) -> Option<(&Snapshot, &Snapshot)> {
        let n = self.history.len();
        (n >= 2).then(|| (&self.history[n - 2], &self.history[n - 1]))
    }

    /// Still worth pursuing.
    pub fn is_candidate(&self) -> bool {
        self.is_target && !self.rescued && !self.gone && self.failures < MAX_FAILURES
    }
}

/// What the agent remembers about the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMemory {
    pub k: usize,
    pub objects: BTreeMap<u32, ObjectMemory>,
    /// Explored flags over the navigation grid, row-major.
    pub explored: BTreeSet<Cell>,
    /// Burning floor cells with the frame they were first seen.
    pub burning_cells: BTreeMap<FloorCell, u64>,
    pub last_frame: Option<u64>,
}

impl Default for AgentMemory {
    fn default() -> Self {
        Self::new(DEFAULT_HISTORY)
    }
}

impl AgentMemory {
    pub fn new(k: usize) -> Self {
        Self {
            k: k.max(1),
            objects: BTreeMap::new(),
            explored: BTreeSet::new(),
            burning_cells: BTreeMap::new(),
            last_frame: None,
        }
    }

    /// Appends one snapshot per sighted object, keeping the `k` most recent.
    pub fn update(&mut self, obs: &Observation) {
        for v in &obs.visible {
            let snap = Snapshot {
                frame: obs.frame,
                position: v.position,
                status: v.status,
                hazard: v.hazard.scalar(),
                value: v.value,
                damaged: v.damaged,
            };
            let entry = self.objects.entry(v.id).or_insert_with(|| ObjectMemory {
                id: v.id,
                category: v.category.clone(),
                half_extents: v.half_extents,
                is_target: v.is_target,
                is_container: v.is_container,
                history: VecDeque::new(),
                failures: 0,
                rescued: false,
                gone: false,
            });
            entry.gone = false;
            match entry.history.back_mut() {
                Some(last) if last.frame == snap.frame => *last = snap,
                _ => entry.history.push_back(snap),
            }
            while entry.history.len() > self.k {
                entry.history.pop_front();
            }
        }
        for &c in &obs.burning_cells {
            self.burning_cells.entry(c).or_insert(obs.frame);
        }
        self.explored.extend(obs.swept.iter().copied());
        self.last_frame = Some(obs.frame);
    }

    pub fn record_failure(&mut self, id: u32) {
        if let Some(o) = self.objects.get_mut(&id) {
            o.failures += 1;
        }
    }

    pub fn mark_gone(&mut self, id: u32) {
        if let Some(o) = self.objects.get_mut(&id) {
            o.gone = true;
        }
    }

    pub fn mark_rescued(&mut self, id: u32) {
        if let Some(o) = self.objects.get_mut(&id) {
            o.rescued = true;
        }
    }

    pub fn get(&self, id: u32) -> Option<&ObjectMemory> {
        self.objects.get(&id)
    }

    /// Targets still worth pursuing, by id.
    pub fn candidates(&self) -> impl Iterator<Item = &ObjectMemory> {
        self.objects.values().filter(|o| o.is_candidate())
    }

    pub fn containers(&self) -> impl Iterator<Item = &ObjectMemory> {
        self.objects.values().filter(|o| o.is_container && !o.gone)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{HazardReading, VisibleObject};

    pub(crate) fn sighting(frame: u64, id: u32, pos: Vec3) -> Observation {
        Observation {
            frame,
            agent_position: Vec3::ZERO,
            agent_heading: 0.0,
            carried: None,
            visible: vec![VisibleObject {
                id,
                category: "book".into(),
                position: pos,
                half_extents: Vec3::new(0.1, 0.1, 0.1),
                distance: pos.flat_distance(Vec3::ZERO),
                status: Status::Normal,
                hazard: HazardReading::Temperature(20.0),
                value: 10.0,
                damaged: false,
                is_target: true,
                is_container: false,
            }],
            burning_cells: vec![],
            swept: vec![(0, 0)],
        }
    }

    #[test]
    fn first_sighting_gives_one_entry() {
        let mut m = AgentMemory::default();
        m.update(&sighting(3, 1, Vec3::new(1.0, 0.0, 0.0)));
        assert_eq!(m.get(1).unwrap().history.len(), 1);
    }

    #[test]
    fn bounded_history_evicts_oldest() {
        let mut m = AgentMemory::new(5);
        for f in 0..7 {
            m.update(&sighting(f * 10, 1, Vec3::ZERO));
        }
        let h = &m.get(1).unwrap().history;
        assert_eq!(h.len(), 5);
        assert_eq!(h.front().unwrap().frame, 20);
    }

    #[test]
    fn same_frame_replaces() {
        let mut m = AgentMemory::default();
        m.update(&sighting(5, 1, Vec3::ZERO));
        m.update(&sighting(5, 1, Vec3::new(1.0, 0.0, 0.0)));
        let h = &m.get(1).unwrap().history;
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].position.x, 1.0);
    }

    #[test]
    fn failures_exclude_candidates() {
        let mut m = AgentMemory::default();
        m.update(&sighting(0, 1, Vec3::ZERO));
        m.record_failure(1);
        assert_eq!(m.candidates().count(), 1);
        m.record_failure(1);
        assert_eq!(m.candidates().count(), 0);
    }
}
