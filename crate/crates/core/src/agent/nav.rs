//! A* over the 8-connected floor grid. Entering a cell costs the step length
//! times `exp(height)` of that cell; cells taller than `max_height` are
//! impassable and diagonal moves may not cut their corners.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geom::Vec3;
use crate::world::{Cell, GridMap};

const NEIGHBORS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

#[derive(Debug, Clone, PartialEq)]
pub struct PathPlan {
    /// Cell centers to walk through, excluding the start cell.
    pub waypoints: Vec<Vec3>,
    /// Full cell sequence from start to goal, inclusive.
    pub cells: Vec<Cell>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavError {
    NoPath,
}

impl std::fmt::Display for NavError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("no finite-cost path")
    }
}

/// Cost of stepping from `from` into the neighbouring cell `to`.
pub fn step_cost(grid: &GridMap, from: Cell, to: Cell) -> f64 {
    let dc = (to.0 as f64 - from.0 as f64).abs();
    let dr = (to.1 as f64 - from.1 as f64).abs();
    let len = if dc + dr > 1.0 { std::f64::consts::SQRT_2 } else { 1.0 } * grid.cell_size;
    len * grid.height_at(to).exp()
}

pub fn passable(grid: &GridMap, c: Cell, max_height: f64) -> bool {
    grid.height_at(c) <= max_height
}

/// Passable neighbours of `c` with their entry costs.
pub fn neighbors(grid: &GridMap, c: Cell, max_height: f64) -> impl Iterator<Item = (Cell, f64)> + '_ {
    NEIGHBORS.iter().filter_map(move |&(dc, dr)| {
        let (nc, nr) = (c.0 as i64 + dc, c.1 as i64 + dr);
        if !grid.in_grid(nc, nr) {
            return None;
        }
        let n = (nc as usize, nr as usize);
        if !passable(grid, n, max_height) {
            return None;
        }
        if dc != 0 && dr != 0 {
            let a = (nc as usize, c.1);
            let b = (c.0, nr as usize);
            if !passable(grid, a, max_height) || !passable(grid, b, max_height) {
                return None;
            }
        }
        Some((n, step_cost(grid, c, n)))
    })
}

#[derive(PartialEq)]
struct Entry {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        // Min-heap on f, then on index for a stable order.
        o.f.total_cmp(&self.f).then_with(|| o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Octile distance times the cheapest entry factor; admissible because
/// `exp(height) >= 1` for non-negative heights.
fn heuristic(grid: &GridMap, a: Cell, b: Cell) -> f64 {
    let dx = (a.0 as f64 - b.0 as f64).abs();
    let dz = (a.1 as f64 - b.1 as f64).abs();
    let (lo, hi) = if dx < dz { (dx, dz) } else { (dz, dx) };
    (hi - lo + lo * std::f64::consts::SQRT_2) * grid.cell_size
}

/// Optimal cell path from `start` to `goal`.
pub fn plan_cells(grid: &GridMap, start: Cell, goal: Cell, max_height: f64) -> Result<(Vec<Cell>, f64), NavError> {
    if start == goal {
        return Ok((vec![start], 0.0));
    }
    let n = grid.width * grid.height;
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let si = grid.index(start);
    let gi = grid.index(goal);
    g[si] = 0.0;
    let mut open = BinaryHeap::new();
    open.push(Entry { f: heuristic(grid, start, goal), g: 0.0, idx: si });
    while let Some(Entry { g: gc, idx, .. }) = open.pop() {
        if closed[idx] || gc > g[idx] {
            continue;
        }
        if idx == gi {
            break;
        }
        closed[idx] = true;
        let c = (idx % grid.width, idx / grid.width);
        for (nb, w) in neighbors(grid, c, max_height) {
            let ni = grid.index(nb);
            let ng = gc + w;
            if ng < g[ni] {
                g[ni] = ng;
                parent[ni] = idx;
                open.push(Entry { f: ng + heuristic(grid, nb, goal), g: ng, idx: ni });
            }
        }
    }
    if !g[gi].is_finite() {
        return Err(NavError::NoPath);
    }
    let mut cells = vec![goal];
    let mut cur = gi;
    while cur != si {
        cur = parent[cur];
        cells.push((cur % grid.width, cur / grid.width));
    }
    cells.reverse();
    Ok((cells, g[gi]))
}

/// Passable cell nearest to `target` (ties broken by cell order).
pub fn nearest_passable(grid: &GridMap, target: Vec3, max_height: f64) -> Option<Cell> {
    let want = grid.cell_of(target);
    if passable(grid, want, max_height) {
        return Some(want);
    }
    grid.cells()
        .filter(|&c| passable(grid, c, max_height))
        .min_by(|&a, &b| {
            let da = grid.cell_center(a).flat_distance(target);
            let db = grid.cell_center(b).flat_distance(target);
            da.total_cmp(&db).then_with(|| (a.1, a.0).cmp(&(b.1, b.0)))
        })
}

/// Drops interior cells where the step direction does not change.
pub fn simplify(cells: &[Cell]) -> Vec<Cell> {
    if cells.len() <= 2 {
        return cells.iter().skip(1).copied().collect();
    }
    let dir = |a: Cell, b: Cell| (b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64);
    let mut out = Vec::new();
    for i in 1..cells.len() - 1 {
        if dir(cells[i - 1], cells[i]) != dir(cells[i], cells[i + 1]) {
            out.push(cells[i]);
        }
    }
    out.push(*cells.last().unwrap());
    out
}

/// Plans from world position `start` toward `goal`. A goal inside an
/// impassable cell is replaced by the nearest passable cell. With
/// `one_step`, only the first waypoint is returned.
pub fn plan_path(grid: &GridMap, start: Vec3, goal: Vec3, max_height: f64, one_step: bool) -> Result<PathPlan, NavError> {
    let s = grid.cell_of(start);
    let g = nearest_passable(grid, goal, max_height).ok_or(NavError::NoPath)?;
    let (cells, cost) = plan_cells(grid, s, g, max_height)?;
    let mut waypoints: Vec<Vec3> = simplify(&cells).into_iter().map(|c| grid.cell_center(c)).collect();
    if one_step {
        waypoints.truncate(1);
    }
    Ok(PathPlan { waypoints, cells, cost })
}

/// Cost of a given cell path under the same cost model.
pub fn path_cost(grid: &GridMap, cells: &[Cell]) -> f64 {
    cells.windows(2).map(|w| step_cost(grid, w[0], w[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Aabb;
    use crate::world::Bounds;

    fn empty(n: usize) -> GridMap {
        GridMap::empty(&Bounds::new(0.0, 0.0, n as f64 * 0.25, n as f64 * 0.25), 0.25)
    }

    #[test]
    fn diagonal_on_empty_grid() {
        let g = empty(4);
        let (cells, cost) = plan_cells(&g, (0, 0), (3, 3), f64::INFINITY).unwrap();
        assert_eq!(cells, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert!((cost - 3.0 * 0.25 * 2f64.sqrt()).abs() < 1e-12);
        assert!((cost - 1.0607).abs() < 1e-4);
    }

    #[test]
    fn start_equals_goal_is_empty() {
        let g = empty(4);
        let p = plan_path(&g, Vec3::new(0.1, 0.0, 0.1), Vec3::new(0.2, 0.0, 0.2), f64::INFINITY, false).unwrap();
        assert!(p.waypoints.is_empty());
        assert_eq!(p.cost, 0.0);
    }

    /// Exhaustive relaxation to a fixed point; independent of the heap search.
    fn bellman_ford(g: &GridMap, start: Cell, max_h: f64) -> Vec<f64> {
        let mut d = vec![f64::INFINITY; g.width * g.height];
        d[g.index(start)] = 0.0;
        loop {
            let mut changed = false;
            for c in g.cells() {
                let dc = d[g.index(c)];
                if !dc.is_finite() {
                    continue;
                }
                for (n, w) in neighbors(g, c, max_h) {
                    if dc + w < d[g.index(n)] - 1e-15 {
                        d[g.index(n)] = dc + w;
                        changed = true;
                    }
                }
            }
            if !changed {
                return d;
            }
        }
    }

    #[test]
    fn wall_strip_is_avoided() {
        let mut g = empty(8);
        // 2 m tall strip over columns 2..=4 of row 4.
        g.stamp(&Aabb::new(Vec3::new(0.875, 1.0, 1.125), Vec3::new(0.375, 1.0, 0.125)));
        let (cells, cost) = plan_cells(&g, (3, 0), (3, 7), f64::INFINITY).unwrap();
        assert!(cells.iter().all(|&c| g.height_at(c) < 2.0), "{cells:?}");
        let oracle = bellman_ford(&g, (3, 0), f64::INFINITY)[g.index((3, 7))];
        assert!((cost - oracle).abs() < 1e-9);
        assert!((path_cost(&g, &cells) - cost).abs() < 1e-12);
    }

    #[test]
    fn impassable_cells_block() {
        let mut g = empty(4);
        // Column 2 is a full-depth wall.
        g.stamp(&Aabb::new(Vec3::new(0.625, 1.0, 0.5), Vec3::new(0.1, 1.0, 0.5)));
        assert!(plan_cells(&g, (0, 0), (3, 3), 0.5).is_err());
        assert!(plan_cells(&g, (0, 0), (3, 3), f64::INFINITY).is_ok());
        assert!(plan_cells(&g, (0, 0), (1, 3), 0.5).is_ok());
    }

    #[test]
    fn one_step_returns_first_waypoint() {
        let g = empty(8);
        let full = plan_path(&g, Vec3::new(0.1, 0.0, 0.1), Vec3::new(1.9, 0.0, 0.6), f64::INFINITY, false).unwrap();
        let one = plan_path(&g, Vec3::new(0.1, 0.0, 0.1), Vec3::new(1.9, 0.0, 0.6), f64::INFINITY, true).unwrap();
        assert_eq!(one.waypoints, full.waypoints[..1]);
    }

    #[test]
    fn collinear_points_are_removed() {
        assert_eq!(simplify(&[(0, 0), (1, 0), (2, 0), (3, 1)]), vec![(2, 0), (3, 1)]);
    }
}
