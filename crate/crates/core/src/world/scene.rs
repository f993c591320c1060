use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::category::CategoryPool;
use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};

pub const SCENE_VERSION: u32 = 1;

/// Allowed interpenetration between two static boxes, meters.
pub const STATIC_OVERLAP_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Fire,
    Flood,
    Wind,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Fire, Task::Flood, Task::Wind];

    pub fn name(self) -> &'static str {
        match self {
            Task::Fire => "fire",
            Task::Flood => "flood",
            Task::Wind => "wind",
        }
    }

    /// Default episode frame budget.
    pub fn frame_limit(self) -> u64 {
        match self {
            Task::Fire | Task::Flood => 1500,
            Task::Wind => 3000,
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fire" => Ok(Task::Fire),
            "flood" => Ok(Task::Flood),
            "wind" => Ok(Task::Wind),
            other => Err(Error::Config(format!("unknown task `{other}`"))),
        }
    }
}

/// Axis-aligned floor rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_x: f64,
    pub min_z: f64,
    pub max_x: f64,
    pub max_z: f64,
}

impl Bounds {
    pub fn new(min_x: f64, min_z: f64, max_x: f64, max_z: f64) -> Self {
        Self { min_x, min_z, max_x, max_z }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.z >= self.min_z && p.z <= self.max_z
    }

    pub fn contains_with_margin(&self, p: Vec3, margin: f64) -> bool {
        p.x >= self.min_x - margin
            && p.x <= self.max_x + margin
            && p.z >= self.min_z - margin
            && p.z <= self.max_z + margin
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn depth(&self) -> f64 {
        self.max_z - self.min_z
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new((self.min_x + self.max_x) / 2.0, 0.0, (self.min_z + self.max_z) / 2.0)
    }
}

/// Wall or furniture piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticBox {
    pub name: String,
    pub center: Vec3,
    pub half_extents: Vec3,
    /// Whether objects may be placed on its top face.
    #[serde(default)]
    pub surface: bool,
}

impl StaticBox {
    pub fn aabb(&self) -> Aabb {
        Aabb::new(self.center, self.half_extents)
    }
}

/// An object as stored in a scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub id: u32,
    pub category: String,
    pub position: Vec3,
    pub heading: f64,
    pub half_extents: Vec3,
    pub is_target: bool,
    pub is_container: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spawn {
    pub position: Vec3,
    pub heading: f64,
}

/// Scene edge a flood enters from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    MinX,
    MaxX,
    MinZ,
    MaxZ,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::MinX, Edge::MaxX, Edge::MinZ, Edge::MaxZ];

    /// Unit direction in which the flood advances.
    pub fn advance_direction(self) -> Vec3 {
        match self {
            Edge::MinX => Vec3::new(1.0, 0.0, 0.0),
            Edge::MaxX => Vec3::new(-1.0, 0.0, 0.0),
            Edge::MinZ => Vec3::new(0.0, 0.0, 1.0),
            Edge::MaxZ => Vec3::new(0.0, 0.0, -1.0),
        }
    }

    /// Distance of `p` from this edge, measured into the room.
    pub fn distance_from(self, bounds: &Bounds, p: Vec3) -> f64 {
        match self {
            Edge::MinX => p.x - bounds.min_x,
            Edge::MaxX => bounds.max_x - p.x,
            Edge::MinZ => p.z - bounds.min_z,
            Edge::MaxZ => bounds.max_z - p.z,
        }
    }
}

/// Task-specific hazard sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HazardSpec {
    Fire {
        /// Floor grid cell size the source cells are expressed in.
        cell_size: f64,
        /// `[column, row]` indices counted from the bounds' min corner.
        cells: Vec<[i64; 2]>,
    },
    Flood {
        origin_edge: Edge,
        /// m/frame.
        rise_rate: f64,
        /// m/frame.
        advance_rate: f64,
    },
    Wind {
        /// m/s; the same everywhere.
        velocity: Vec3,
    },
}

impl HazardSpec {
    pub fn task(&self) -> Task {
        match self {
            HazardSpec::Fire { .. } => Task::Fire,
            HazardSpec::Flood { .. } => Task::Flood,
            HazardSpec::Wind { .. } => Task::Wind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub version: u32,
    pub task: Task,
    pub seed: u64,
    pub bounds: Bounds,
    pub statics: Vec<StaticBox>,
    pub objects: Vec<ObjectSpec>,
    pub agent_spawn: Spawn,
    pub hazard: HazardSpec,
}

impl Scene {
    /// Checks every scene invariant against `pool`. Errors name the offending item.
    pub fn validate(&self, pool: &CategoryPool) -> Result<()> {
        if self.version != SCENE_VERSION {
            return Err(Error::schema("version", format!("unsupported version {}", self.version)));
        }
        if self.hazard.task() != self.task {
            return Err(Error::schema("hazard.kind", format!("does not match task `{}`", self.task)));
        }
        let b = &self.bounds;
        let bounds_ok = [b.min_x, b.min_z, b.max_x, b.max_z].iter().all(|v| v.is_finite())
            && b.max_x > b.min_x
            && b.max_z > b.min_z;
        if !bounds_ok {
            return Err(Error::schema("bounds", "must be a finite, non-empty rectangle"));
        }
        for (i, s) in self.statics.iter().enumerate() {
            check_box(&format!("statics[{i}]"), s.center, s.half_extents)?;
        }
        for (i, a) in self.statics.iter().enumerate() {
            for b in &self.statics[i + 1..] {
                let pen = a.aabb().penetration(&b.aabb());
                if pen > STATIC_OVERLAP_TOLERANCE {
                    return Err(Error::Invariant(format!(
                        "static boxes `{}` and `{}` interpenetrate by {pen:.3} m",
                        a.name, b.name
                    )));
                }
            }
        }
        let mut ids = BTreeSet::new();
        for o in &self.objects {
            check_box(&format!("objects[id={}]", o.id), o.position, o.half_extents)?;
            if !o.heading.is_finite() {
                return Err(Error::schema(format!("objects[id={}].heading", o.id), "not finite"));
            }
            if !ids.insert(o.id) {
                return Err(Error::Invariant(format!("duplicate object id {}", o.id)));
            }
            if pool.get(&o.category).is_none() {
                return Err(Error::schema(
                    format!("objects[id={}].category", o.id),
                    format!("unknown category `{}`", o.category),
                ));
            }
            if !b.contains(o.position) {
                return Err(Error::Invariant(format!("object {} lies outside the scene bounds", o.id)));
            }
        }
        let spawn = &self.agent_spawn;
        if !spawn.position.is_finite() || !spawn.heading.is_finite() {
            return Err(Error::schema("agent_spawn", "not finite"));
        }
        if !b.contains(spawn.position) {
            return Err(Error::Invariant("agent spawn lies outside the scene bounds".into()));
        }
        if let Some(s) = self.statics.iter().find(|s| s.aabb().footprint_contains(spawn.position)) {
            return Err(Error::Invariant(format!("agent spawn is inside static box `{}`", s.name)));
        }
        match &self.hazard {
            HazardSpec::Fire { cell_size, cells } => {
                if !(*cell_size > 0.0) {
                    return Err(Error::schema("hazard.cell_size", "must be > 0"));
                }
                let w = (b.width() / cell_size).ceil() as i64;
                let h = (b.depth() / cell_size).ceil() as i64;
                for c in cells {
                    if c[0] < 0 || c[1] < 0 || c[0] >= w || c[1] >= h {
                        return Err(Error::Invariant(format!(
                            "fire source cell [{}, {}] lies outside the floor grid",
                            c[0], c[1]
                        )));
                    }
                }
            }
            HazardSpec::Flood { rise_rate, advance_rate, .. } => {
                if !(*rise_rate >= 0.0 && *advance_rate >= 0.0) {
                    return Err(Error::schema("hazard", "flood rates must be >= 0"));
                }
            }
            HazardSpec::Wind { velocity } => {
                if !velocity.is_finite() {
                    return Err(Error::schema("hazard.velocity", "not finite"));
                }
            }
        }
        Ok(())
    }

    pub fn object(&self, id: u32) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn targets(&self) -> impl Iterator<Item = &ObjectSpec> {
        self.objects.iter().filter(|o| o.is_target)
    }

    /// Canonical text form. Field order is fixed, so equal scenes give equal bytes.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serializes");
        s.push('\n');
        s
    }
}

fn check_box(field: &str, center: Vec3, half: Vec3) -> Result<()> {
    if !center.is_finite() {
        return Err(Error::schema(format!("{field}.position"), "not finite"));
    }
    if !(half.is_finite() && half.x > 0.0 && half.y > 0.0 && half.z > 0.0) {
        return Err(Error::schema(format!("{field}.half_extents"), "must be strictly positive"));
    }
    Ok(())
}

/// Loads and validates a scene against the builtin category pool.
pub fn load_scene(path: &Path) -> Result<Scene> {
    load_scene_with_pool(path, &CategoryPool::builtin())
}

pub fn load_scene_with_pool(path: &Path, pool: &CategoryPool) -> Result<Scene> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
    parse_scene(&text, pool)
}

pub fn parse_scene(text: &str, pool: &CategoryPool) -> Result<Scene> {
    let scene: Scene = serde_json::from_str(text).map_err(|e| schema_error(&e))?;
    scene.validate(pool)?;
    Ok(scene)
}

fn schema_error(e: &serde_json::Error) -> Error {
    // serde_json reports "missing field `x`" / "unknown variant ..." with a position.
    let msg = e.to_string();
    let field = msg
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| format!("line {}", e.line()));
    Error::schema(field, msg)
}

/// Validates then writes the canonical form. The file is written to a
/// sibling temporary and renamed, so a failure leaves no partial file.
pub fn save_scene(scene: &Scene, path: &Path) -> Result<()> {
    save_scene_with_pool(scene, path, &CategoryPool::builtin())
}

pub fn save_scene_with_pool(scene: &Scene, path: &Path, pool: &CategoryPool) -> Result<()> {
    scene.validate(pool)?;
    write_atomic(path, scene.to_canonical_string().as_bytes())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let werr = |source| Error::Write { path: path.to_path_buf(), source };
    let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    let mut f = std::fs::File::create(&tmp).map_err(werr)?;
    f.write_all(bytes).map_err(werr)?;
    f.sync_all().map_err(werr)?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        werr(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn minimal_scene() -> Scene {
        Scene {
            version: SCENE_VERSION,
            task: Task::Fire,
            seed: 1,
            bounds: Bounds::new(-2.0, -2.0, 2.0, 2.0),
            statics: vec![],
            objects: vec![],
            agent_spawn: Spawn { position: Vec3::ZERO, heading: 0.0 },
            hazard: HazardSpec::Fire { cell_size: 0.25, cells: vec![] },
        }
    }

    fn obj(id: u32, pos: Vec3) -> ObjectSpec {
        ObjectSpec {
            id,
            category: "laptop".into(),
            position: pos,
            heading: 0.0,
            half_extents: Vec3::new(0.1, 0.1, 0.1),
            is_target: true,
            is_container: false,
        }
    }

    #[test]
    fn minimal_scene_loads_with_no_objects() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        save_scene(&minimal_scene(), &p).unwrap();
        let s = load_scene(&p).unwrap();
        assert!(s.objects.is_empty());
    }

    #[test]
    fn object_outside_bounds_is_rejected_by_id() {
        let mut s = minimal_scene();
        s.objects.push(obj(17, Vec3::new(5.0, 0.1, 0.0)));
        let err = parse_scene(&s.to_canonical_string(), &CategoryPool::builtin()).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
        assert!(err.to_string().contains("object 17"));
    }

    #[test]
    fn missing_field_names_the_field() {
        let text = r#"{"version":1,"task":"fire","seed":1}"#;
        let err = parse_scene(text, &CategoryPool::builtin()).unwrap_err();
        match err {
            Error::Schema { field, .. } => assert_eq!(field, "bounds"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_file_is_a_read_error() {
        let err = load_scene(Path::new("/nonexistent/scene.json")).unwrap_err();
        assert!(matches!(err, Error::Read { .. }));
    }

    #[test]
    fn invalid_scene_is_not_written() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        let mut s = minimal_scene();
        s.objects.push(obj(1, Vec3::new(9.0, 0.1, 0.0)));
        assert!(save_scene(&s, &p).is_err());
        assert!(!p.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn saves_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = minimal_scene();
        s.objects.push(obj(3, Vec3::new(1.0, 0.1, -1.0)));
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
        save_scene(&s, &a).unwrap();
        save_scene(&s, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn spawn_inside_static_is_rejected() {
        let mut s = minimal_scene();
        s.statics.push(StaticBox {
            name: "table".into(),
            center: Vec3::new(0.0, 0.4, 0.0),
            half_extents: Vec3::new(0.5, 0.4, 0.5),
            surface: true,
        });
        assert!(s.validate(&CategoryPool::builtin()).is_err());
    }

    #[test]
    fn overlapping_statics_are_rejected() {
        let mut s = minimal_scene();
        s.agent_spawn.position = Vec3::new(-1.8, 0.0, -1.8);
        for x in [0.0, 0.5] {
            s.statics.push(StaticBox {
                name: format!("box{x}"),
                center: Vec3::new(x, 0.4, 0.0),
                half_extents: Vec3::new(0.5, 0.4, 0.5),
                surface: false,
            });
        }
        assert!(matches!(s.validate(&CategoryPool::builtin()), Err(Error::Invariant(_))));
    }
}
