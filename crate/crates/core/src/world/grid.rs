use serde::{Deserialize, Serialize};

use super::scene::{Bounds, Scene};
use crate::geom::{Aabb, Vec3};

pub const DEFAULT_CELL_SIZE: f64 = 0.25;

/// Integer cell coordinate: column along x, row along z.
pub type Cell = (usize, usize);

/// Height map over the floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    pub cell_size: f64,
    /// Min corner of cell (0, 0).
    pub origin: Vec3,
    pub width: usize,
    pub height: usize,
    /// Tallest box top overlapping each cell, row-major.
    pub height_of: Vec<f64>,
    pub explored: Vec<bool>,
}

impl GridMap {
    pub fn empty(bounds: &Bounds, cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        let width = ((bounds.width() / cell_size) - 1e-9).ceil().max(1.0) as usize;
        let height = ((bounds.depth() / cell_size) - 1e-9).ceil().max(1.0) as usize;
        Self {
            cell_size,
            origin: Vec3::new(bounds.min_x, 0.0, bounds.min_z),
            width,
            height,
            height_of: vec![0.0; width * height],
            explored: vec![false; width * height],
        }
    }

    /// Rasterizes the given boxes; each cell takes the max top of overlapping boxes.
    pub fn from_boxes<'a>(bounds: &Bounds, cell_size: f64, boxes: impl IntoIterator<Item = &'a Aabb>) -> Self {
        let mut g = Self::empty(bounds, cell_size);
        for b in boxes {
            g.stamp(b);
        }
        g
    }

    pub fn stamp(&mut self, b: &Aabb) {
        let lo = b.min();
        let hi = b.max();
        let top = b.top().max(0.0);
        let cs = self.cell_size;
        let c0 = ((lo.x - self.origin.x) / cs).floor().max(0.0) as usize;
        let r0 = ((lo.z - self.origin.z) / cs).floor().max(0.0) as usize;
        let c1 = (((hi.x - self.origin.x) / cs).ceil().max(0.0) as usize).min(self.width);
        let r1 = (((hi.z - self.origin.z) / cs).ceil().max(0.0) as usize).min(self.height);
        for r in r0..r1 {
            for c in c0..c1 {
                let (x0, z0) = (self.origin.x + c as f64 * cs, self.origin.z + r as f64 * cs);
                if b.footprint_overlaps(x0, z0, x0 + cs, z0 + cs) {
                    let i = r * self.width + c;
                    if top > self.height_of[i] {
                        self.height_of[i] = top;
                    }
                }
            }
        }
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.1 * self.width + cell.0
    }

    pub fn height_at(&self, cell: Cell) -> f64 {
        self.height_of[self.index(cell)]
    }

    pub fn in_grid(&self, c: i64, r: i64) -> bool {
        c >= 0 && r >= 0 && (c as usize) < self.width && (r as usize) < self.height
    }

    /// Cell containing `p`, clamped to the grid.
    pub fn cell_of(&self, p: Vec3) -> Cell {
        let c = ((p.x - self.origin.x) / self.cell_size).floor();
        let r = ((p.z - self.origin.z) / self.cell_size).floor();
        (
            c.clamp(0.0, (self.width - 1) as f64) as usize,
            r.clamp(0.0, (self.height - 1) as f64) as usize,
        )
    }

    pub fn cell_center(&self, cell: Cell) -> Vec3 {
        Vec3::new(
            self.origin.x + (cell.0 as f64 + 0.5) * self.cell_size,
            0.0,
            self.origin.z + (cell.1 as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| (c, r)))
    }
}

/// Height map of statics and every non-held object in the scene file.
pub fn rasterize_grid(scene: &Scene, cell_size: f64) -> GridMap {
    let boxes: Vec<Aabb> = scene
        .statics
        .iter()
        .map(|s| s.aabb())
        .chain(scene.objects.iter().map(|o| Aabb::new(o.position, o.half_extents)))
        .collect();
    GridMap::from_boxes(&scene.bounds, cell_size, boxes.iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::scene::{HazardSpec, Spawn, StaticBox, Task, SCENE_VERSION};

    fn scene_with(statics: Vec<StaticBox>) -> Scene {
        Scene {
            version: SCENE_VERSION,
            task: Task::Fire,
            seed: 0,
            bounds: Bounds::new(-2.0, -2.0, 2.0, 2.0),
            statics,
            objects: vec![],
            agent_spawn: Spawn { position: Vec3::new(-1.9, 0.0, -1.9), heading: 0.0 },
            hazard: HazardSpec::Fire { cell_size: 0.25, cells: vec![] },
        }
    }

    #[test]
    fn empty_scene_is_flat() {
        let g = rasterize_grid(&scene_with(vec![]), DEFAULT_CELL_SIZE);
        assert_eq!((g.width, g.height), (16, 16));
        assert!(g.height_of.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn unit_box_covers_four_by_four_cells() {
        let s = scene_with(vec![StaticBox {
            name: "cube".into(),
            center: Vec3::new(0.0, 0.5, 0.0),
            half_extents: Vec3::new(0.5, 0.5, 0.5),
            surface: false,
        }]);
        let g = rasterize_grid(&s, 0.25);
        // Brute force: a cell is covered iff its open square intersects [-0.5, 0.5]^2.
        for cell in g.cells() {
            let x0 = g.origin.x + cell.0 as f64 * 0.25;
            let z0 = g.origin.z + cell.1 as f64 * 0.25;
            let covered = x0 < 0.5 && x0 + 0.25 > -0.5 && z0 < 0.5 && z0 + 0.25 > -0.5;
            assert_eq!(g.height_at(cell), if covered { 1.0 } else { 0.0 }, "{cell:?}");
        }
        assert_eq!(g.height_of.iter().filter(|&&h| h == 1.0).count(), 16);
    }

    #[test]
    fn rasterize_is_idempotent() {
        let s = scene_with(vec![StaticBox {
            name: "t".into(),
            center: Vec3::new(0.3, 0.4, -0.7),
            half_extents: Vec3::new(0.6, 0.4, 0.35),
            surface: true,
        }]);
        assert_eq!(rasterize_grid(&s, 0.25), rasterize_grid(&s, 0.25));
    }
}
