//! Whole episodes on small handcrafted rooms.

mod common;

use common::{fire, flood, obj, room, wind};
use hazard_core::harness::{run_episode, AgentKind, EpisodeSpec};
use hazard_core::world::{CategoryPool, Task};

fn spec(scene: hazard_core::world::Scene, agent: AgentKind, frame_limit: u64) -> EpisodeSpec {
    let mut s = EpisodeSpec::new("room", scene, &CategoryPool::builtin(), agent, 1);
    s.frame_limit = frame_limit;
    s
}

#[test]
fn greedy_clears_a_calm_flood_room_without_damage() {
    let scene = room(Task::Flood, 2, (1.0, 5.0), &[obj(1, "book", 3.0, 5.0), obj(2, "laptop", 6.0, 2.0)], flood(0.0, 0.0));
    let r = run_episode(&spec(scene, AgentKind::Greedy, 1500), None).unwrap().result;
    assert_eq!(r.rescues.len(), 2);
    assert!(r.rescues.iter().all(|e| !e.damaged));
    assert_eq!(r.rescued_value(), r.total_value);
    assert!(r.frames_used < 1500, "stops once every target is rescued");
}

#[test]
fn rising_water_damages_what_is_left_behind() {
    // Fast rise: the far laptop is submerged before anyone reaches it.
    let scene = room(Task::Flood, 2, (9.0, 5.0), &[obj(1, "laptop", 0.5, 5.0)], flood(0.01, 0.05));
    let out = run_episode(&spec(scene, AgentKind::Greedy, 900), None).unwrap();
    let damaged = out.frames.iter().any(|f| f.events.damages.contains(&1));
    assert!(damaged);
    assert!(out.result.rescues.iter().all(|e| e.damaged && e.value < 50.0));
}

#[test]
fn wind_rescues_go_through_a_cart() {
    let objs = [obj(1, "shopping_cart", 2.0, 5.0), obj(2, "toolbox", 4.0, 5.0)];
    let scene = room(Task::Wind, 4, (1.0, 5.0), &objs, wind(0.0, 0.0));
    let out = run_episode(&spec(scene, AgentKind::Greedy, 3000), None).unwrap();
    assert_eq!(out.result.rescues.len(), 1);
    assert_eq!(out.result.rescues[0].object_id, 2);
    assert!(out.actions.iter().any(|a| serde_json::to_string(a).unwrap().contains("drop")), "delivered by a drop");
}

#[test]
fn fire_source_next_to_a_target_ignites_it() {
    let scene = room(Task::Fire, 3, (9.0, 9.0), &[obj(1, "book", 5.0, 5.0)], fire(&[[20, 20]]));
    let out = run_episode(&spec(scene, AgentKind::Random, 400), None).unwrap();
    assert!(out.frames.iter().any(|f| f.events.ignitions.contains(&1)));
}

#[test]
fn every_agent_finishes_every_task_within_budget() {
    let scenes = [
        room(Task::Fire, 5, (1.0, 1.0), &[obj(1, "book", 8.0, 8.0), obj(2, "wallet", 2.0, 8.0)], fire(&[[30, 5]])),
        room(Task::Flood, 5, (1.0, 1.0), &[obj(1, "book", 8.0, 8.0), obj(2, "wallet", 2.0, 8.0)], flood(0.0005, 0.01)),
        room(Task::Wind, 5, (1.0, 1.0), &[obj(1, "shopping_cart", 5.0, 5.0), obj(2, "kite", 8.0, 2.0)], wind(4.0, 0.0)),
    ];
    for scene in scenes {
        for agent in AgentKind::ALL {
            let mut s = spec(scene.clone(), agent, 400);
            s.mcts.simulations = 200;
            let r = run_episode(&s, None).unwrap().result;
            assert!(r.failed.is_none(), "{agent} on {}", scene.task);
            assert!(r.frames_used <= 400 + 60, "{agent} on {} ran to {}", scene.task, r.frames_used);
            assert!(r.rescued_value() <= r.total_value);
        }
    }
}
