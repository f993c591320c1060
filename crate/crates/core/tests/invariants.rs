//! Property tests for the invariants the simulator and harness rely on.

use proptest::prelude::*;

use hazard_core::agent::nav::{neighbors, path_cost, plan_cells};
use hazard_core::agent::RescueEvent;
use hazard_core::fire::{env_temperature, step_temperature, FireParams};
use hazard_core::flood::{flood_forces, submerged_volume, FloodParams};
use hazard_core::geom::Vec3;
use hazard_core::harness::{episode_metrics, AgentKind, EpisodeResult};
use hazard_core::llm::prompt::label;
use hazard_core::physics::{SimParams, World};
use hazard_core::procgen::{generate_scene, GenConfig, TemplateSet};
use hazard_core::rng::derive_seed_indexed;
use hazard_core::wind::{random_unit, turbulence};
use hazard_core::world::{parse_scene, Bounds, CategoryPool, GridMap, Task};

fn vec3(lo: f64, hi: f64) -> impl Strategy<Value = Vec3> {
    (lo..hi, lo..hi, lo..hi).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn task() -> impl Strategy<Value = Task> {
    prop_oneof![Just(Task::Fire), Just(Task::Flood), Just(Task::Wind)]
}

proptest! {
    #[test]
    fn temperature_step_stays_between_current_and_environment(t in -50.0..900.0f64, env in -50.0..900.0f64, d in 0.001..0.999f64) {
        let next = step_temperature(t, env, d);
        prop_assert!(next >= t.min(env) - 1e-9 && next <= t.max(env) + 1e-9);
        prop_assert!((next - env).abs() <= (t - env).abs() + 1e-9);
    }

    #[test]
    fn environment_temperature_is_a_convex_combination(
        sources in prop::collection::vec((vec3(-5.0, 5.0), 0.0..800.0f64), 0..12),
    ) {
        let p = FireParams::default();
        let t = env_temperature(Vec3::ZERO, sources.iter().copied(), &p);
        let lo = sources.iter().map(|s| s.1).fold(p.room_temperature, f64::min);
        let hi = sources.iter().map(|s| s.1).fold(p.room_temperature, f64::max);
        prop_assert!(t >= lo - 1e-9 && t <= hi + 1e-9);
    }

    #[test]
    fn spread_probability_is_monotone_and_certain_at_cap(a in 0u64..2000, b in 0u64..2000) {
        let p = FireParams::default();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(p.spread_probability(lo) <= p.spread_probability(hi));
        prop_assert!((0.0..=1.0).contains(&p.spread_probability(a)));
        if a >= p.spread_cap_frames {
            prop_assert_eq!(p.spread_probability(a), 1.0);
        }
    }

    #[test]
    fn submerged_fraction_is_bounded_and_monotone(y in -2.0..3.0f64, h in vec3(0.01, 1.0), w1 in 0.0..3.0f64, w2 in 0.0..3.0f64) {
        let p = Vec3::new(0.0, y, 0.0);
        let (v1, f1) = submerged_volume(p, h, w1.min(w2));
        let (v2, f2) = submerged_volume(p, h, w1.max(w2));
        prop_assert!((0.0..=1.0).contains(&f1) && (0.0..=1.0).contains(&f2));
        prop_assert!(f1 <= f2 && v1 <= v2);
    }

    #[test]
    fn drag_never_pushes_along_relative_velocity(
        h in vec3(0.01, 1.0), y in -1.0..2.0f64, v in vec3(-5.0, 5.0), fluid in vec3(-3.0, 3.0), water in 0.0..2.0f64, cd in 0.1..2.0f64,
    ) {
        let (buoy, drag) = flood_forces(Vec3::new(0.0, y, 0.0), h, v, cd, water, fluid, &FloodParams::default(), 9.81);
        prop_assert!(drag.dot(v - fluid) <= 1e-9);
        prop_assert!(buoy.y >= 0.0 && buoy.x == 0.0 && buoy.z == 0.0);
    }

    #[test]
    fn turbulence_is_orthogonal_with_fixed_length(f1 in vec3(-50.0, 50.0), seed in any::<u64>(), ratio in 0.0..1.0f64) {
        prop_assume!(f1.length() > 1e-6);
        let sample = random_unit(&mut hazard_core::rng::stream_from(seed));
        let f2 = turbulence(f1, sample, ratio);
        prop_assert!(f2.dot(f1).abs() <= 1e-9 * f1.length_squared().max(1.0));
        prop_assert!((f2.length() - ratio * f1.length()).abs() <= 1e-9 * f1.length().max(1.0));
    }

    #[test]
    fn astar_cost_matches_its_path_and_reachability_is_symmetric(
        heights in prop::collection::vec(prop_oneof![4 => 0.0..0.4f64, 1 => Just(2.0)], 64),
        s in (0usize..8, 0usize..8),
        g in (0usize..8, 0usize..8),
    ) {
        let mut grid = GridMap::empty(&Bounds::new(0.0, 0.0, 2.0, 2.0), 0.25);
        grid.height_of = heights;
        grid.height_of[s.1 * 8 + s.0] = 0.0;
        grid.height_of[g.1 * 8 + g.0] = 0.0;
        match plan_cells(&grid, s, g, 0.5) {
            Ok((cells, cost)) => {
                prop_assert_eq!(cells.first(), Some(&s));
                prop_assert_eq!(cells.last(), Some(&g));
                prop_assert!((path_cost(&grid, &cells) - cost).abs() < 1e-9);
                for w in cells.windows(2) {
                    prop_assert!(neighbors(&grid, w[0], 0.5).any(|(n, _)| n == w[1]));
                }
                // Passability is symmetric, so the way back exists too.
                prop_assert!(plan_cells(&grid, g, s, 0.5).is_ok());
            }
            Err(_) => prop_assert!(plan_cells(&grid, g, s, 0.5).is_err()),
        }
    }

    #[test]
    fn option_labels_are_distinct(i in 0usize..26, j in 0usize..26) {
        prop_assert_eq!(label(i) == label(j), i == j);
    }

    #[test]
    fn metrics_are_percentages(
        rescues in prop::collection::vec((1.0..60.0f64, any::<bool>()), 0..8),
        extra in 0.0..200.0f64,
        frames in 1u64..3000,
    ) {
        let total: f64 = rescues.iter().map(|r| r.0).sum::<f64>() + extra + 1.0;
        let r = EpisodeResult {
            scene_id: "p".into(),
            task: Task::Fire,
            agent: AgentKind::Greedy,
            run_seed: 0,
            rescues: rescues
                .iter()
                .enumerate()
                .map(|(i, &(v, damaged))| RescueEvent { object_id: i as u32, frame: 0, damaged, value: if damaged { v / 2.0 } else { v } })
                .collect(),
            total_value: total,
            frames_used: frames,
            frame_limit: 3000,
            decisions: 0,
            fallbacks: 0,
            failed: None,
        };
        let m = episode_metrics(&r);
        prop_assert!((0.0..=100.0).contains(&m.value));
        prop_assert_eq!(m.step.is_none(), rescues.is_empty());
        if let Some(d) = m.damage {
            prop_assert!((0.0..=100.0).contains(&d));
        }
    }

    #[test]
    fn derived_seeds_separate_indices(parent in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        prop_assert_eq!(derive_seed_indexed(parent, "x", &[a]), derive_seed_indexed(parent, "x", &[a]));
        prop_assert_ne!(derive_seed_indexed(parent, "x", &[a]), derive_seed_indexed(parent, "x", &[b]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generated_scenes_round_trip_and_evolve_deterministically(task in task(), room in 0usize..4, seed in any::<u64>()) {
        let pool = CategoryPool::builtin();
        let templates = TemplateSet::builtin();
        let scene = generate_scene(templates.for_task(task)[room], &GenConfig::for_task(task), &pool, seed).unwrap();
        let text = scene.to_canonical_string();
        prop_assert_eq!(parse_scene(&text, &pool).unwrap().to_canonical_string(), text);
        let run = || {
            let mut w = World::new(&scene, &pool, &SimParams::default()).unwrap();
            for _ in 0..60 {
                w.step_frame().unwrap();
            }
            w
        };
        let (a, b) = (run(), run());
        prop_assert_eq!(a.state_digest(), b.state_digest());
        for o in &a.objects {
            prop_assert!(o.position.is_finite());
            prop_assert!(o.temperature.is_finite());
            if o.rescued || o.lost {
                prop_assert!(o.is_target || task == Task::Wind);
            }
        }
    }
}
