//! Full-information planner: replays the agentless hazard timeline and
//! searches every rescue ordering under idealized, unobstructed execution.

use serde::{Deserialize, Serialize};

use crate::agent::AgentParams;
use crate::error::Result;
use crate::geom::{angle_between, Vec3};
use crate::physics::{SimParams, World};
use crate::world::{value_with_damage, CategoryPool, Scene, Task};

/// Per-object history of an episode in which nobody intervenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub id: u32,
    pub base_value: f64,
    pub is_target: bool,
    pub is_container: bool,
    /// Position at frames `0..=frame_limit`.
    pub positions: Vec<Vec3>,
    /// First frame at which the object is damaged.
    pub damage_frame: Option<u64>,
    /// First frame at which the object is out of reach.
    pub lost_frame: Option<u64>,
}

impl Track {
    pub fn position_at(&self, frame: u64) -> Vec3 {
        let i = (frame as usize).min(self.positions.len() - 1);
        self.positions[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub frame_limit: u64,
    /// Sorted by id.
    pub tracks: Vec<Track>,
}

/// Runs the scene without an agent for `frame_limit` frames.
pub fn hazard_timeline(scene: &Scene, pool: &CategoryPool, sim: &SimParams, frame_limit: u64) -> Result<Timeline> {
    let mut world = World::new(scene, pool, sim)?;
    let mut tracks: Vec<Track> = world
        .objects
        .iter()
        .map(|o| Track {
            id: o.id,
            base_value: o.category.value,
            is_target: o.is_target,
            is_container: o.is_container,
            positions: Vec::with_capacity(frame_limit as usize + 1),
            damage_frame: None,
            lost_frame: None,
        })
        .collect();
    loop {
        let f = world.frame;
        for (t, o) in tracks.iter_mut().zip(&world.objects) {
            t.positions.push(o.position);
            if o.damaged && t.damage_frame.is_none() {
                t.damage_frame = Some(f);
            }
            if o.lost && t.lost_frame.is_none() {
                t.lost_frame = Some(f);
            }
        }
        if f >= frame_limit {
            break;
        }
        world.step_frame()?;
    }
    Ok(Timeline { frame_limit, tracks })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleStep {
    pub id: u32,
    /// Frame the grasp closes.
    pub grasp_frame: u64,
    /// Frame the drop completes.
    pub rescue_frame: u64,
    pub damaged: bool,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePlan {
    pub steps: Vec<OracleStep>,
    pub value: f64,
    /// Frame the last rescue completes; zero for the empty plan.
    pub frames: u64,
}

impl OraclePlan {
    pub fn order(&self) -> Vec<u32> {
        self.steps.iter().map(|s| s.id).collect()
    }
}

/// One demonstration record per training scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub scene: String,
    pub plan: Vec<u32>,
    pub value: f64,
    pub frames: u64,
}

#[derive(Debug, Clone, Copy)]
struct Pose {
    position: Vec3,
    heading: f64,
    frame: u64,
}

/// Frames to face `to` and walk until within reach of it; returns the new pose.
fn walk_within_reach(p: &AgentParams, from: Pose, to: Vec3) -> Pose {
    let d = to.flat() - from.position.flat();
    let dist = d.length();
    if dist <= p.reach_radius {
        return from;
    }
    let heading = d.heading();
    let ang = angle_between(from.heading, heading);
    let turn = if ang.abs() > 1e-9 { p.turn_frames(ang) } else { 0 };
    let walk = dist - p.reach_radius;
    let dir = d * (1.0 / dist);
    Pose {
        position: from.position + dir * walk,
        heading,
        frame: from.frame + turn + (walk / p.speed - 1e-9).ceil().max(0.0) as u64,
    }
}

struct Planner<'a> {
    tl: &'a Timeline,
    params: &'a AgentParams,
    wind: bool,
    targets: Vec<usize>,
    containers: Vec<usize>,
}

impl Planner<'_> {
    /// Idealized rescue of track `ti` from `pose`.
    fn rescue(&self, ti: usize, pose: Pose) -> Option<(OracleStep, Pose)> {
        let t = &self.tl.tracks[ti];
        let p = self.params;
        // Intercept: re-aim at where the target will be on arrival.
        let mut arrive = walk_within_reach(p, pose, t.position_at(pose.frame));
        for _ in 0..4 {
            arrive = walk_within_reach(p, pose, t.position_at(arrive.frame));
        }
        let mut at = arrive;
        let target_now = t.position_at(at.frame);
        if target_now.flat_distance(at.position) > p.reach_radius + 1e-9 {
            // The target moved on; close the remaining gap.
            at = walk_within_reach(p, at, target_now);
        }
        let grasp = at.frame + p.reach_frames;
        if t.lost_frame.is_some_and(|l| l <= grasp) {
            return None;
        }
        let damaged = t.damage_frame.is_some_and(|d| d <= grasp);
        let after = Pose { frame: grasp + p.reset_arm_frames, ..at };
        let end = if self.wind {
            let c = self
                .containers
                .iter()
                .map(|&ci| &self.tl.tracks[ci])
                .filter(|c| c.lost_frame.is_none_or(|l| l > after.frame))
                .min_by(|a, b| {
                    let (pa, pb) = (a.position_at(after.frame), b.position_at(after.frame));
                    pa.flat_distance(after.position).total_cmp(&pb.flat_distance(after.position))
                })?;
            walk_within_reach(p, after, c.position_at(after.frame))
        } else {
            after
        };
        let done = Pose { frame: end.frame + p.drop_frames.max(1), ..end };
        if done.frame > self.tl.frame_limit {
            return None;
        }
        let step = OracleStep {
            id: t.id,
            grasp_frame: grasp,
            rescue_frame: done.frame,
            damaged,
            value: value_with_damage(t.base_value, damaged),
        };
        Some((step, done))
    }

    fn better(a: (f64, u64), b: (f64, u64)) -> bool {
        a.0 > b.0 + 1e-9 || ((a.0 - b.0).abs() <= 1e-9 && a.1 < b.1)
    }

    fn dfs(&self, pose: Pose, remaining: &mut Vec<usize>, path: &mut Vec<OracleStep>, acc: f64, best: &mut OraclePlan) {
        let frames = path.last().map_or(0, |s| s.rescue_frame);
        if Self::better((acc, frames), (best.value, best.frames)) {
            *best = OraclePlan { steps: path.clone(), value: acc, frames };
        }
        let bound: f64 = remaining.iter().map(|&i| self.tl.tracks[i].base_value).sum();
        if acc + bound < best.value - 1e-9 {
            return;
        }
        for k in 0..remaining.len() {
            let ti = remaining[k];
            let Some((step, next)) = self.rescue(ti, pose) else { continue };
            let v = step.value;
            remaining.remove(k);
            path.push(step);
            self.dfs(next, remaining, path, acc + v, best);
            path.pop();
            remaining.insert(k, ti);
        }
    }
}

/// Best rescue ordering by value, then fewest frames, assuming every action
/// succeeds and walking is unobstructed.
pub fn oracle_plan(scene: &Scene, timeline: &Timeline, params: &AgentParams) -> OraclePlan {
    let idx = |pred: fn(&Track) -> bool| -> Vec<usize> {
        timeline.tracks.iter().enumerate().filter(|(_, t)| pred(t)).map(|(i, _)| i).collect()
    };
    let planner = Planner {
        tl: timeline,
        params,
        wind: scene.task == Task::Wind,
        targets: idx(|t| t.is_target),
        containers: idx(|t| t.is_container),
    };
    let start = Pose {
        position: Vec3::new(scene.agent_spawn.position.x, 0.0, scene.agent_spawn.position.z),
        heading: crate::geom::normalize_degrees(scene.agent_spawn.heading),
        frame: 0,
    };
    let mut best = OraclePlan { steps: Vec::new(), value: 0.0, frames: 0 };
    let mut remaining = planner.targets.clone();
    planner.dfs(start, &mut remaining, &mut Vec::new(), 0.0, &mut best);
    best
}

/// Timeline plus plan for one scene.
pub fn solve(scene: &Scene, pool: &CategoryPool, sim: &SimParams, params: &AgentParams, frame_limit: u64) -> Result<OraclePlan> {
    let tl = hazard_timeline(scene, pool, sim, frame_limit)?;
    Ok(oracle_plan(scene, &tl, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(id: u32, x: f64, value: f64, damage: Option<u64>) -> Track {
        Track {
            id,
            base_value: value,
            is_target: true,
            is_container: false,
            positions: vec![Vec3::new(x, 0.1, 5.0); 1501],
            damage_frame: damage,
            lost_frame: None,
        }
    }

    fn scene() -> Scene {
        crate::agent::tests::scene_with(vec![], vec![], Task::Fire)
    }

    #[test]
    fn single_target_is_the_one_step_plan() {
        let tl = Timeline { frame_limit: 1500, tracks: vec![track(1, 4.0, 10.0, None)] };
        let p = oracle_plan(&scene(), &tl, &AgentParams::default());
        assert_eq!(p.order(), vec![1]);
        assert_eq!(p.value, 10.0);
        // 2 m walk after reach: 40 frames, +10 reach, +10 reset, +5 drop.
        assert_eq!(p.frames, 65);
    }

    #[test]
    fn ties_prefer_fewer_frames() {
        // Equal value either way; nearest-first is shorter.
        let tl = Timeline { frame_limit: 1500, tracks: vec![track(1, 3.0, 10.0, None), track(2, 8.0, 10.0, None)] };
        let p = oracle_plan(&scene(), &tl, &AgentParams::default());
        assert_eq!(p.order(), vec![1, 2]);
        assert_eq!(p.value, 20.0);
    }

    #[test]
    fn far_target_first_when_it_burns_soon() {
        // Target 2 is damaged at frame 100: grasped at 90 when first, at 115 when second.
        let tl = Timeline {
            frame_limit: 1500,
            tracks: vec![track(1, 3.0, 10.0, None), track(2, 6.0, 10.0, Some(100))],
        };
        let p = oracle_plan(&scene(), &tl, &AgentParams::default());
        assert_eq!(p.order(), vec![2, 1]);
        assert_eq!(p.value, 20.0);
    }

    #[test]
    fn late_rescues_do_not_count() {
        let tl = Timeline { frame_limit: 30, tracks: vec![track(1, 8.0, 10.0, None)] };
        let p = oracle_plan(&scene(), &tl, &AgentParams::default());
        assert!(p.steps.is_empty());
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn timeline_has_one_position_per_frame() {
        let s = crate::agent::tests::scene_with(vec![(1, "book", Vec3::new(4.0, 0.02, 5.0))], vec![], Task::Fire);
        let tl = hazard_timeline(&s, &CategoryPool::builtin(), &SimParams::default(), 20).unwrap();
        assert_eq!(tl.tracks[0].positions.len(), 21);
    }
}
