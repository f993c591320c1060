//! Procedural scenes: box-furniture rooms from templates, populated with
//! targets, distractors, a spawn pose and hazard sources; and seeded datasets.

use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::nav::{nearest_passable, plan_cells};
use crate::agent::AgentParams;
use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};
use crate::rng::{self, Stream};
use crate::world::{
    save_scene_with_pool, write_atomic, Bounds, CategoryPool, Edge, GridMap, HazardSpec, ObjectCategory, ObjectSpec,
    Pool, Scene, Spawn, StaticBox, Task, DEFAULT_CELL_SIZE, SCENE_VERSION,
};

const TEMPLATES_JSON: &str = include_str!("../data/templates.json");
const WALL_THICKNESS: f64 = 0.1;
/// Gap kept between an item and the bounds.
const EDGE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Indoor,
    Outdoor,
}

impl Family {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Fire | Task::Flood => Family::Indoor,
            Task::Wind => Family::Outdoor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FurnitureSpec {
    pub name: String,
    pub half_extents: Vec3,
    /// Objects may be placed on top.
    pub surface: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomTemplate {
    pub name: String,
    pub family: Family,
    pub width: f64,
    pub depth: f64,
    /// Zero means no walls.
    pub wall_height: f64,
    pub furniture: Vec<FurnitureSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateSet {
    #[serde(default)]
    pub note: String,
    pub templates: Vec<RoomTemplate>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        Self::parse(TEMPLATES_JSON).expect("builtin templates are valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::schema("templates", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Templates usable for `task`, in file order.
    pub fn for_task(&self, task: Task) -> Vec<&RoomTemplate> {
        let fam = Family::for_task(task);
        self.templates.iter().filter(|t| t.family == fam).collect()
    }
}

/// Generation knobs. Ranges are inclusive `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub task: Task,
    pub target_category_count: usize,
    pub instances_per_category: [u32; 2],
    pub distractor_count: [u32; 2],
    pub fire_source_count: [u32; 2],
    pub cart_count: [u32; 2],
    /// Probability that a placed object goes on a furniture top when one exists.
    pub surface_fraction: f64,
    /// Free gap kept around each furniture piece, meters.
    pub furniture_clearance: f64,
    /// Fire sources are at least this far from the spawn, meters.
    pub fire_spawn_distance: f64,
    /// m/frame.
    pub flood_rise_rate: [f64; 2],
    /// m/frame.
    pub flood_advance_rate: [f64; 2],
    /// m/s.
    pub wind_speed: [f64; 2],
    pub fire_cell_size: f64,
    pub scenes_per_room: u32,
    /// Template index whose scenes form the test split.
    pub test_room: usize,
    pub max_attempts: u32,
    /// Whole-scene regenerations before giving up on reachability.
    pub reach_retries: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            task: Task::Fire,
            target_category_count: 4,
            instances_per_category: [1, 2],
            distractor_count: [4, 8],
            fire_source_count: [1, 2],
            cart_count: [1, 2],
            surface_fraction: 0.4,
            furniture_clearance: 0.6,
            fire_spawn_distance: 2.0,
            flood_rise_rate: [0.0003, 0.0008],
            flood_advance_rate: [0.005, 0.015],
            wind_speed: [4.0, 7.0],
            fire_cell_size: 0.25,
            scenes_per_room: 25,
            test_room: 3,
            max_attempts: 1000,
            reach_retries: 20,
        }
    }
}

impl GenConfig {
    pub fn for_task(task: Task) -> Self {
        Self { task, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("gen.{m}")));
        for (name, r) in [
            ("instances_per_category", self.instances_per_category),
            ("distractor_count", self.distractor_count),
            ("fire_source_count", self.fire_source_count),
            ("cart_count", self.cart_count),
        ] {
            if r[0] > r[1] {
                return bad(&format!("{name} must satisfy lo <= hi"));
            }
        }
        if self.instances_per_category[0] == 0 {
            return bad("instances_per_category must start at 1 or more");
        }
        if self.target_category_count == 0 {
            return bad("target_category_count must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.surface_fraction) {
            return bad("surface_fraction must lie in [0, 1]");
        }
        if !(self.fire_cell_size > 0.0) || self.max_attempts == 0 || self.reach_retries == 0 {
            return bad("fire_cell_size, max_attempts and reach_retries must be positive");
        }
        Ok(())
    }
}

fn range_u32(rng: &mut Stream, r: [u32; 2]) -> u32 {
    rng.random_range(r[0]..=r[1])
}

fn range_f64(rng: &mut Stream, r: [f64; 2]) -> f64 {
    if r[1] > r[0] {
        rng.random_range(r[0]..r[1])
    } else {
        r[0]
    }
}

/// Uniform point whose footprint of `half` stays inside `b` by `margin`.
fn sample_in(rng: &mut Stream, b: &Bounds, half: Vec3, margin: f64) -> Option<Vec3> {
    let (x0, x1) = (b.min_x + half.x + margin, b.max_x - half.x - margin);
    let (z0, z1) = (b.min_z + half.z + margin, b.max_z - half.z - margin);
    if x0 > x1 || z0 > z1 {
        return None;
    }
    let x = if x1 > x0 { rng.random_range(x0..x1) } else { x0 };
    let z = if z1 > z0 { rng.random_range(z0..z1) } else { z0 };
    Some(Vec3::new(x, 0.0, z))
}

fn footprints_overlap(a: &Aabb, b: &Aabb, gap: f64) -> bool {
    let (amin, amax, bmin, bmax) = (a.min(), a.max(), b.min(), b.max());
    amin.x < bmax.x + gap && bmin.x < amax.x + gap && amin.z < bmax.z + gap && bmin.z < amax.z + gap
}

fn boxes_overlap(a: &Aabb, b: &Aabb) -> bool {
    footprints_overlap(a, b, 0.0) && a.min().y < b.max().y && b.min().y < a.max().y
}

/// Walls (just outside the bounds) and furniture placed by rejection
/// sampling. The result has no objects and placeholder spawn and hazard.
pub fn generate_base_room(template: &RoomTemplate, task: Task, cfg: &GenConfig, rng: &mut Stream) -> Result<Scene> {
    let bounds = Bounds::new(0.0, 0.0, template.width, template.depth);
    let mut statics = Vec::new();
    if template.wall_height > 0.0 {
        let (w, d, h, t) = (template.width, template.depth, template.wall_height, WALL_THICKNESS);
        let wall = |name: &str, c: Vec3, he: Vec3| StaticBox { name: name.into(), center: c, half_extents: he, surface: false };
        statics.push(wall("wall_min_x", Vec3::new(-t / 2.0, h / 2.0, d / 2.0), Vec3::new(t / 2.0, h / 2.0, d / 2.0)));
        statics.push(wall("wall_max_x", Vec3::new(w + t / 2.0, h / 2.0, d / 2.0), Vec3::new(t / 2.0, h / 2.0, d / 2.0)));
        statics.push(wall("wall_min_z", Vec3::new(w / 2.0, h / 2.0, -t / 2.0), Vec3::new(w / 2.0 + t, h / 2.0, t / 2.0)));
        statics.push(wall("wall_max_z", Vec3::new(w / 2.0, h / 2.0, d + t / 2.0), Vec3::new(w / 2.0 + t, h / 2.0, t / 2.0)));
    }
    let mut placed: Vec<Aabb> = Vec::new();
    for (i, f) in template.furniture.iter().enumerate() {
        let mut half = f.half_extents;
        if rng.random_bool(0.5) {
            std::mem::swap(&mut half.x, &mut half.z);
        }
        let mut ok = None;
        for _ in 0..cfg.max_attempts {
            let Some(p) = sample_in(rng, &bounds, half, EDGE_MARGIN) else { break };
            let b = Aabb::new(Vec3::new(p.x, half.y, p.z), half);
            if placed.iter().all(|o| !footprints_overlap(o, &b, cfg.furniture_clearance)) {
                ok = Some(b);
                break;
            }
        }
        let b = ok.ok_or_else(|| {
            Error::Generation(format!("could not place furniture `{}` in `{}`", f.name, template.name))
        })?;
        placed.push(b);
        statics.push(StaticBox { name: format!("{}_{i}", f.name), center: b.center, half_extents: half, surface: f.surface });
    }
    Ok(Scene {
        version: SCENE_VERSION,
        task,
        seed: 0,
        bounds,
        statics,
        objects: Vec::new(),
        agent_spawn: Spawn { position: bounds.center(), heading: 0.0 },
        hazard: match task {
            Task::Fire => HazardSpec::Fire { cell_size: cfg.fire_cell_size, cells: vec![] },
            Task::Flood => HazardSpec::Flood { origin_edge: Edge::MinX, rise_rate: 0.0, advance_rate: 0.0 },
            Task::Wind => HazardSpec::Wind { velocity: Vec3::ZERO },
        },
    })
}

struct Placer<'a> {
    scene: &'a Scene,
    cfg: &'a GenConfig,
    objects: Vec<Aabb>,
}

impl Placer<'_> {
    fn free(&self, b: &Aabb) -> bool {
        self.objects.iter().all(|o| !boxes_overlap(o, b))
    }

    fn on_floor(&self, rng: &mut Stream, half: Vec3, what: &str) -> Result<Vec3> {
        for _ in 0..self.cfg.max_attempts {
            let Some(p) = sample_in(rng, &self.scene.bounds, half, EDGE_MARGIN) else { break };
            let b = Aabb::new(Vec3::new(p.x, half.y, p.z), half);
            if self.scene.statics.iter().all(|s| !footprints_overlap(&s.aabb(), &b, 0.02)) && self.free(&b) {
                return Ok(b.center);
            }
        }
        Err(Error::Generation(format!("could not place `{what}` on the floor")))
    }

    fn on_surface(&self, rng: &mut Stream, s: &StaticBox, half: Vec3) -> Option<Vec3> {
        let top = s.aabb();
        let b = Bounds::new(top.min().x, top.min().z, top.max().x, top.max().z);
        for _ in 0..self.cfg.max_attempts.min(50) {
            let p = sample_in(rng, &b, half, 0.0)?;
            let c = Aabb::new(Vec3::new(p.x, top.top() + half.y, p.z), half);
            if self.free(&c) {
                return Some(c.center);
            }
        }
        None
    }

    fn place(&mut self, rng: &mut Stream, half: Vec3, surfaces_ok: bool, what: &str) -> Result<Vec3> {
        let surfaces: Vec<&StaticBox> = self.scene.statics.iter().filter(|s| s.surface).collect();
        let mut at = None;
        if surfaces_ok && !surfaces.is_empty() && rng.random_bool(self.cfg.surface_fraction) {
            let s = *surfaces.choose(rng).expect("non-empty");
            at = self.on_surface(rng, s, half);
        }
        let p = match at {
            Some(p) => p,
            None => self.on_floor(rng, half, what)?,
        };
        self.objects.push(Aabb::new(p, half));
        Ok(p)
    }
}

/// Adds targets (every instance of the sampled categories), distractors,
/// carts for wind, the spawn pose and hazard sources.
pub fn populate_scene(skeleton: &Scene, cfg: &GenConfig, pool: &CategoryPool, rng: &mut Stream) -> Result<Scene> {
    let pool_kind = match cfg.task {
        Task::Fire | Task::Flood => Pool::FireFlood,
        Task::Wind => Pool::Wind,
    };
    let cats = pool.pool(pool_kind);
    if cats.len() < cfg.target_category_count {
        return Err(Error::Generation(format!(
            "pool has {} categories, fewer than the {} targets requested",
            cats.len(),
            cfg.target_category_count
        )));
    }
    let chosen: Vec<&ObjectCategory> = cats.choose_multiple(rng, cfg.target_category_count).copied().collect();
    let others: Vec<&ObjectCategory> = cats.iter().copied().filter(|c| !chosen.iter().any(|t| t.name == c.name)).collect();

    let mut scene = skeleton.clone();
    scene.task = cfg.task;
    let mut placer = Placer { scene: skeleton, cfg, objects: Vec::new() };
    let mut next_id = 1u32;
    let mut push = |scene: &mut Scene, cat: &ObjectCategory, p: Vec3, target: bool, container: bool| {
        scene.objects.push(ObjectSpec {
            id: next_id,
            category: cat.name.clone(),
            position: p,
            heading: 0.0,
            half_extents: cat.half_extents,
            is_target: target,
            is_container: container,
        });
        next_id += 1;
    };
    for cat in &chosen {
        for _ in 0..range_u32(rng, cfg.instances_per_category) {
            let p = placer.place(rng, cat.half_extents, true, &cat.name)?;
            push(&mut scene, cat, p, true, false);
        }
    }
    if !others.is_empty() {
        for _ in 0..range_u32(rng, cfg.distractor_count) {
            let cat = *others.choose(rng).expect("non-empty");
            let p = placer.place(rng, cat.half_extents, true, &cat.name)?;
            push(&mut scene, cat, p, false, false);
        }
    }
    if cfg.task == Task::Wind {
        let cart = pool
            .pool(Pool::Container)
            .first()
            .copied()
            .ok_or_else(|| Error::Generation("pool has no container category".into()))?;
        for _ in 0..range_u32(rng, cfg.cart_count).max(1) {
            let p = placer.place(rng, cart.half_extents, false, &cart.name)?;
            push(&mut scene, cart, p, false, true);
        }
    }

    let grid = static_grid(&scene);
    let spawn_half = Vec3::new(0.25, 0.5, 0.25);
    let mut spawn = None;
    for _ in 0..cfg.max_attempts {
        let Some(p) = sample_in(rng, &scene.bounds, spawn_half, 0.25) else { break };
        let cell = grid.cell_of(p);
        let clear = grid.height_at(cell) <= AgentParams::default().nav_max_height
            && scene.statics.iter().all(|s| !s.aabb().footprint_contains(p))
            && placer.objects.iter().all(|o| o.center.flat_distance(p) > 0.5);
        if clear {
            spawn = Some(p);
            break;
        }
    }
    let spawn = spawn.ok_or_else(|| Error::Generation("could not place the agent spawn".into()))?;
    scene.agent_spawn = Spawn { position: spawn, heading: rng.random_range(0.0..360.0) };

    scene.hazard = match cfg.task {
        Task::Fire => {
            let cs = cfg.fire_cell_size;
            let b = &scene.bounds;
            let (w, h) = ((b.width() / cs).ceil() as i64, (b.depth() / cs).ceil() as i64);
            let far: Vec<[i64; 2]> = (0..h)
                .flat_map(|r| (0..w).map(move |c| [c, r]))
                .filter(|c| {
                    let p = Vec3::new(b.min_x + (c[0] as f64 + 0.5) * cs, 0.0, b.min_z + (c[1] as f64 + 0.5) * cs);
                    p.flat_distance(spawn) >= cfg.fire_spawn_distance
                })
                .collect();
            let n = range_u32(rng, cfg.fire_source_count).max(1) as usize;
            let mut cells: Vec<[i64; 2]> = far.choose_multiple(rng, n).copied().collect();
            if cells.is_empty() {
                return Err(Error::Generation("no floor cell is far enough from the spawn for a fire source".into()));
            }
            cells.sort();
            HazardSpec::Fire { cell_size: cs, cells }
        }
        Task::Flood => HazardSpec::Flood {
            origin_edge: *Edge::ALL.choose(rng).expect("four edges"),
            rise_rate: range_f64(rng, cfg.flood_rise_rate),
            advance_rate: range_f64(rng, cfg.flood_advance_rate),
        },
        Task::Wind => {
            let dir = Vec3::from_heading(rng.random_range(0.0..360.0));
            HazardSpec::Wind { velocity: dir * range_f64(rng, cfg.wind_speed) }
        }
    };
    Ok(scene)
}

fn static_grid(scene: &Scene) -> GridMap {
    let boxes: Vec<Aabb> = scene.statics.iter().map(StaticBox::aabb).collect();
    GridMap::from_boxes(&scene.bounds, DEFAULT_CELL_SIZE, boxes.iter())
}

/// Whether every target and container can be walked to from the spawn and
/// grasped from the end of the path.
pub fn check_reachability(scene: &Scene, params: &AgentParams) -> bool {
    let grid = static_grid(scene);
    let start = grid.cell_of(scene.agent_spawn.position);
    if grid.height_at(start) > params.nav_max_height {
        return false;
    }
    scene.objects.iter().filter(|o| o.is_target || o.is_container).all(|o| {
        let Some(goal) = nearest_passable(&grid, o.position, params.nav_max_height) else { return false };
        grid.cell_center(goal).flat_distance(o.position) <= params.reach_radius
            && plan_cells(&grid, start, goal, params.nav_max_height).is_ok()
    })
}

/// One scene from `(template, seed)`. Each attempt draws from its own
/// sub-stream; unreachable layouts are regenerated, never edited.
pub fn generate_scene(template: &RoomTemplate, cfg: &GenConfig, pool: &CategoryPool, seed: u64) -> Result<Scene> {
    let params = AgentParams::default();
    let mut last = None;
    for attempt in 0..cfg.reach_retries {
        let mut rng = rng::stream_from(rng::derive_seed_indexed(seed, "attempt", &[attempt as u64]));
        let built = generate_base_room(template, cfg.task, cfg, &mut rng)
            .and_then(|s| populate_scene(&s, cfg, pool, &mut rng));
        match built {
            Ok(mut s) => {
                s.seed = seed;
                if s.validate(pool).is_ok() && check_reachability(&s, &params) {
                    return Ok(s);
                }
                last = Some(Error::Generation(format!("scene in `{}` failed the reachability check", template.name)));
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Generation("no attempts made".into())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory.
    pub scene_path: String,
    pub room: usize,
    pub seed: u64,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub task: Task,
    pub master_seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| Error::schema("manifest", e.to_string()))
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }
}

fn task_index(task: Task) -> u64 {
    match task {
        Task::Fire => 0,
        Task::Flood => 1,
        Task::Wind => 2,
    }
}

/// Seed of scene `idx` in room `room`.
pub fn scene_seed(master: u64, task: Task, room: usize, idx: u32) -> u64 {
    rng::derive_seed_indexed(master, "scene", &[task_index(task), room as u64, idx as u64])
}

/// Generates `scenes_per_room` scenes for each of the task's templates into
/// `out_dir`, plus `manifest.json`. Scenes of `test_room` form the test split.
pub fn generate_dataset(
    cfg: &GenConfig,
    pool: &CategoryPool,
    templates: &TemplateSet,
    master_seed: u64,
    out_dir: &Path,
) -> Result<Manifest> {
    cfg.validate()?;
    let rooms = templates.for_task(cfg.task);
    if rooms.is_empty() || cfg.test_room >= rooms.len() {
        return Err(Error::Config(format!(
            "task `{}` has {} room templates; test_room {} is out of range",
            cfg.task,
            rooms.len(),
            cfg.test_room
        )));
    }
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Write { path: out_dir.to_path_buf(), source })?;
    let jobs: Vec<(usize, u32)> =
        (0..rooms.len()).flat_map(|r| (0..cfg.scenes_per_room).map(move |i| (r, i))).collect();
    let entries = jobs
        .par_iter()
        .map(|&(room, idx)| {
            let seed = scene_seed(master_seed, cfg.task, room, idx);
            let scene = generate_scene(rooms[room], cfg, pool, seed)?;
            let name = format!("{}_{}_{idx:02}.json", cfg.task, rooms[room].name);
            save_scene_with_pool(&scene, &out_dir.join(&name), pool)?;
            Ok(ManifestEntry {
                scene_path: name,
                room,
                seed,
                split: if room == cfg.test_room { Split::Test } else { Split::Train },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest { task: cfg.task, master_seed, entries };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(&out_dir.join(Manifest::FILE_NAME), text.as_bytes())?;
    Ok(manifest)
}
