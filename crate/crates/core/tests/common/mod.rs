//! Scene builders shared by the integration tests.
#![allow(dead_code)]

use hazard_core::geom::Vec3;
use hazard_core::world::{
    Bounds, CategoryPool, Edge, HazardSpec, ObjectSpec, Pool, Scene, Spawn, StaticBox, Task, SCENE_VERSION,
};

/// One object resting on the floor at `(x, z)`.
pub struct Obj {
    pub id: u32,
    pub category: &'static str,
    pub x: f64,
    pub z: f64,
}

pub fn obj(id: u32, category: &'static str, x: f64, z: f64) -> Obj {
    Obj { id, category, x, z }
}

/// A 10 m × 10 m room with the agent at `spawn` facing +x.
pub fn room(task: Task, seed: u64, spawn: (f64, f64), objects: &[Obj], hazard: HazardSpec) -> Scene {
    let pool = CategoryPool::builtin();
    Scene {
        version: SCENE_VERSION,
        task,
        seed,
        bounds: Bounds::new(0.0, 0.0, 10.0, 10.0),
        statics: Vec::<StaticBox>::new(),
        objects: objects
            .iter()
            .map(|o| {
                let c = pool.get(o.category).unwrap_or_else(|| panic!("unknown category {}", o.category));
                ObjectSpec {
                    id: o.id,
                    category: o.category.into(),
                    position: Vec3::new(o.x, c.half_extents.y, o.z),
                    heading: 0.0,
                    half_extents: c.half_extents,
                    is_target: c.pool != Pool::Container,
                    is_container: c.pool == Pool::Container,
                }
            })
            .collect(),
        agent_spawn: Spawn { position: Vec3::new(spawn.0, 0.0, spawn.1), heading: 0.0 },
        hazard,
    }
}

pub fn fire(cells: &[[i64; 2]]) -> HazardSpec {
    HazardSpec::Fire { cell_size: 0.25, cells: cells.to_vec() }
}

pub fn flood(rise_rate: f64, advance_rate: f64) -> HazardSpec {
    HazardSpec::Flood { origin_edge: Edge::MinX, rise_rate, advance_rate }
}

pub fn wind(vx: f64, vz: f64) -> HazardSpec {
    HazardSpec::Wind { velocity: Vec3::new(vx, 0.0, vz) }
}
