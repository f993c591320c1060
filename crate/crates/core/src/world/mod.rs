//! Shared world model: categories, objects, scenes, grids.

mod category;
mod grid;
mod object;
mod scene;

pub use category::{CategoryPool, ObjectCategory, Pool};
pub use grid::{rasterize_grid, Cell, GridMap, DEFAULT_CELL_SIZE};
pub use object::{effective_value, value_with_damage, Hand, ObjectInstance, Status};
pub use scene::{
    load_scene, load_scene_with_pool, parse_scene, save_scene, save_scene_with_pool, Bounds, Edge,
    HazardSpec, ObjectSpec, Scene, Spawn, StaticBox, Task, SCENE_VERSION, STATIC_OVERLAP_TOLERANCE,
};
pub(crate) use scene::write_atomic;
