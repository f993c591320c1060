//! Temperature system, burn status machine and floor-grid fire spread.
//!
//! Per frame: environment temperatures are computed for every active object
//! from the previous frame's temperatures (synchronous), each temperature is
//! relaxed toward its environment value, statuses are updated, burning objects
//! light the floor cell beneath them, and burning floor cells spread.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::Vec3;
use crate::world::{Bounds, ObjectInstance, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FireParams {
    /// °C.
    pub room_temperature: f64,
    /// Fraction in (0, 1) of the gap to the environment closed per frame.
    pub decay_rate: f64,
    pub room_weight: f64,
    /// Meters; neighbors closer than this all get weight `1 / D²`.
    pub distance_threshold: f64,
    /// °C contributed by burning objects and burning floor cells.
    pub flame_temperature: f64,
    pub floor_cell_size: f64,
    /// Slope of the per-frame spread probability, 1/frames.
    pub spread_slope: f64,
    /// Age in frames at which spreading becomes certain.
    pub spread_cap_frames: u64,
    /// Frames a burnt object keeps radiating at flame temperature.
    pub burnt_cooldown_frames: u64,
    /// Frames a floor cell burns before it is burnt out.
    pub floor_burn_frames: u64,
}

impl Default for FireParams {
    fn default() -> Self {
        Self {
            room_temperature: 20.0,
            decay_rate: 0.1,
            room_weight: 1.0,
            distance_threshold: 1.0,
            flame_temperature: 500.0,
            floor_cell_size: 0.25,
            spread_slope: 1.0 / 600.0,
            spread_cap_frames: 600,
            burnt_cooldown_frames: 0,
            floor_burn_frames: 1200,
        }
    }
}

impl FireParams {
    pub fn validate(&self, max_ignition_point: f64) -> Result<(), String> {
        if !(self.decay_rate > 0.0 && self.decay_rate < 1.0) {
            return Err("fire.decay_rate must lie in (0, 1)".into());
        }
        if !(self.room_weight > 0.0) {
            return Err("fire.room_weight must be > 0".into());
        }
        if !(self.distance_threshold > 0.0) {
            return Err("fire.distance_threshold must be > 0".into());
        }
        if !(self.flame_temperature > max_ignition_point) {
            return Err("fire.flame_temperature must exceed every ignition point".into());
        }
        if !(self.floor_cell_size > 0.0) {
            return Err("fire.floor_cell_size must be > 0".into());
        }
        if !(self.spread_slope > 0.0) || self.spread_slope * (self.spread_cap_frames as f64) < 1.0 - 1e-12 {
            return Err("fire.spread_slope * fire.spread_cap_frames must be >= 1".into());
        }
        Ok(())
    }

    /// Per-frame probability that a cell burning for `age` frames spreads
    /// to one eligible neighbor.
    pub fn spread_probability(&self, age: u64) -> f64 {
        if age >= self.spread_cap_frames {
            1.0
        } else {
            (self.spread_slope * age as f64).clamp(0.0, 1.0)
        }
    }

    /// Smallest age at which the cumulative chance of having spread to a
    /// given neighbor reaches one half.
    pub fn median_spread_delay(&self) -> u64 {
        let mut survive = 1.0;
        let mut t = 0;
        while survive > 0.5 {
            t += 1;
            survive *= 1.0 - self.spread_probability(t);
        }
        t
    }
}

/// Heat-exchange weight of a neighbor at `dist`.
pub fn neighbor_weight(dist: f64, params: &FireParams) -> f64 {
    let d2 = dist * dist;
    let cap = 1.0 / (params.distance_threshold * params.distance_threshold);
    if d2 <= 0.0 {
        cap
    } else {
        cap.min(1.0 / d2)
    }
}

/// Weighted average of room temperature and point sources `(position, °C)`
/// as seen from `at`.
pub fn env_temperature(at: Vec3, sources: impl IntoIterator<Item = (Vec3, f64)>, params: &FireParams) -> f64 {
    let mut num = params.room_weight * params.room_temperature;
    let mut den = params.room_weight;
    for (p, t) in sources {
        let w = neighbor_weight(at.distance(p), params);
        num += w * t;
        den += w;
    }
    num / den
}

/// One relaxation step toward the environment temperature.
pub fn step_temperature(t: f64, t_env: f64, decay: f64) -> f64 {
    t * (1.0 - decay) + decay * t_env
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BurnTransition {
    Ignited,
    BurntOut,
}

/// Advances the normal→burning→burnt machine for one object.
pub fn update_burn_status(obj: &mut ObjectInstance, frame: u64) -> Option<BurnTransition> {
    match obj.status {
        Status::Normal if obj.temperature >= obj.category.ignition_point => {
            obj.status = Status::Burning;
            obj.ignition_frame = Some(frame);
            obj.damaged = true;
            Some(BurnTransition::Ignited)
        }
        Status::Burning => {
            let start = obj.ignition_frame.unwrap_or(frame);
            if frame.saturating_sub(start) >= obj.category.burn_duration {
                obj.status = Status::Burnt;
                obj.burnt_frame = Some(frame);
                Some(BurnTransition::BurntOut)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Temperature an object presents to its neighbors.
pub fn source_temperature(obj: &ObjectInstance, frame: u64, params: &FireParams) -> f64 {
    match obj.status {
        Status::Burning => params.flame_temperature,
        Status::Burnt
            if obj
                .burnt_frame
                .is_some_and(|f| frame.saturating_sub(f) < params.burnt_cooldown_frames) =>
        {
            params.flame_temperature
        }
        _ => obj.temperature,
    }
}

pub type FloorCell = (i64, i64);

/// Burning and burnt floor cells.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FireField {
    /// Cell → frame it ignited.
    pub burning: BTreeMap<FloorCell, u64>,
    pub burnt: BTreeSet<FloorCell>,
}

impl FireField {
    pub fn is_eligible(&self, c: FloorCell) -> bool {
        !self.burning.contains_key(&c) && !self.burnt.contains(&c)
    }

    pub fn ignite(&mut self, c: FloorCell, frame: u64) -> bool {
        if self.is_eligible(c) {
            self.burning.insert(c, frame);
            true
        } else {
            false
        }
    }
}

/// Geometry of the floor grid the fire lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorGrid {
    pub origin_x: f64,
    pub origin_z: f64,
    pub cell_size: f64,
    pub width: i64,
    pub height: i64,
}

impl FloorGrid {
    pub fn new(bounds: &Bounds, cell_size: f64) -> Self {
        Self {
            origin_x: bounds.min_x,
            origin_z: bounds.min_z,
            cell_size,
            width: ((bounds.width() / cell_size) - 1e-9).ceil().max(1.0) as i64,
            height: ((bounds.depth() / cell_size) - 1e-9).ceil().max(1.0) as i64,
        }
    }

    pub fn contains(&self, c: FloorCell) -> bool {
        c.0 >= 0 && c.1 >= 0 && c.0 < self.width && c.1 < self.height
    }

    pub fn cell_of(&self, p: Vec3) -> FloorCell {
        let c = ((p.x - self.origin_x) / self.cell_size).floor() as i64;
        let r = ((p.z - self.origin_z) / self.cell_size).floor() as i64;
        (c.clamp(0, self.width - 1), r.clamp(0, self.height - 1))
    }

    pub fn center(&self, c: FloorCell) -> Vec3 {
        Vec3::new(
            self.origin_x + (c.0 as f64 + 0.5) * self.cell_size,
            0.0,
            self.origin_z + (c.1 as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn neighbors4(&self, c: FloorCell) -> impl Iterator<Item = FloorCell> + '_ {
        [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .into_iter()
            .map(move |(dc, dr)| (c.0 + dc, c.1 + dr))
            .filter(move |n| self.contains(*n))
    }
}

/// Spreads floor fire for one frame and returns newly ignited cells.
///
/// Burning cells are visited in cell order and each eligible 4-neighbor gets
/// one independent draw, so the stream is consumed deterministically.
pub fn spread_floor_fire<R: Rng + ?Sized>(
    field: &mut FireField,
    grid: &FloorGrid,
    frame: u64,
    params: &FireParams,
    rng: &mut R,
) -> Vec<FloorCell> {
    let mut fresh = BTreeSet::new();
    for (&cell, &ignited) in &field.burning {
        let p = params.spread_probability(frame.saturating_sub(ignited));
        for n in grid.neighbors4(cell) {
            if !field.is_eligible(n) {
                continue;
            }
            let draw: f64 = rng.random();
            if draw < p {
                fresh.insert(n);
            }
        }
    }
    for &c in &fresh {
        field.burning.insert(c, frame);
    }
    fresh.into_iter().collect()
}

/// Moves cells that have burned long enough to the burnt set.
pub fn age_floor_cells(field: &mut FireField, frame: u64, params: &FireParams) -> Vec<FloorCell> {
    let done: Vec<FloorCell> = field
        .burning
        .iter()
        .filter(|(_, &f)| frame.saturating_sub(f) >= params.floor_burn_frames)
        .map(|(&c, _)| c)
        .collect();
    for c in &done {
        field.burning.remove(c);
        field.burnt.insert(*c);
    }
    done
}

/// Fire hazard state for one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireState {
    pub params: FireParams,
    pub grid: FloorGrid,
    pub field: FireField,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct FireStepEvents {
    pub ignitions: Vec<u32>,
    pub burnouts: Vec<u32>,
    pub new_cells: Vec<FloorCell>,
}

impl FireState {
    pub fn new(params: FireParams, bounds: &Bounds, sources: &[FloorCell], frame: u64) -> Self {
        let grid = FloorGrid::new(bounds, params.floor_cell_size);
        let mut field = FireField::default();
        for &c in sources {
            if grid.contains(c) {
                field.ignite(c, frame);
            }
        }
        Self { params, grid, field }
    }

    /// Environment temperature at `at`, excluding the object with id `skip`.
    pub fn env_temperature_at(&self, at: Vec3, skip: Option<u32>, objects: &[ObjectInstance], frame: u64) -> f64 {
        let obj_sources = objects
            .iter()
            .filter(|o| o.is_active() && Some(o.id) != skip)
            .map(|o| (o.position, source_temperature(o, frame, &self.params)));
        let cell_sources = self
            .field
            .burning
            .keys()
            .map(|&c| (self.grid.center(c), self.params.flame_temperature));
        env_temperature(at, obj_sources.chain(cell_sources), &self.params)
    }

    /// Runs one frame of the thermal model over `objects`.
    pub fn step<R: Rng + ?Sized>(&mut self, objects: &mut [ObjectInstance], frame: u64, rng: &mut R) -> FireStepEvents {
        let mut ev = FireStepEvents::default();
        // Synchronous: all environment temperatures come from the previous frame.
        let envs: Vec<Option<f64>> = objects
            .iter()
            .map(|o| o.is_active().then(|| self.env_temperature_at(o.position, Some(o.id), objects, frame)))
            .collect();
        for (o, env) in objects.iter_mut().zip(envs) {
            let Some(env) = env else { continue };
            o.temperature = step_temperature(o.temperature, env, self.params.decay_rate);
            match update_burn_status(o, frame) {
                Some(BurnTransition::Ignited) => ev.ignitions.push(o.id),
                Some(BurnTransition::BurntOut) => ev.burnouts.push(o.id),
                None => {}
            }
        }
        for o in objects.iter().filter(|o| o.is_active() && o.status == Status::Burning) {
            let c = self.grid.cell_of(o.position);
            if self.field.ignite(c, frame) {
                ev.new_cells.push(c);
            }
        }
        ev.new_cells.extend(spread_floor_fire(&mut self.field, &self.grid, frame, &self.params, rng));
        age_floor_cells(&mut self.field, frame, &self.params);
        ev
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn params() -> FireParams {
        FireParams::default()
    }

    #[test]
    fn lone_object_sees_room_temperature() {
        let p = params();
        assert_eq!(env_temperature(Vec3::ZERO, std::iter::empty(), &p), p.room_temperature);
    }

    #[test]
    fn neighbor_at_room_temperature_changes_nothing() {
        let p = params();
        let t = env_temperature(Vec3::ZERO, [(Vec3::new(p.distance_threshold, 0.0, 0.0), p.room_temperature)], &p);
        assert!((t - p.room_temperature).abs() < 1e-12);
    }

    #[test]
    fn hand_evaluated_weighted_average() {
        let p = FireParams { room_weight: 1.0, room_temperature: 20.0, distance_threshold: 1.0, ..params() };
        let t = env_temperature(Vec3::ZERO, [(Vec3::new(2.0, 0.0, 0.0), 520.0)], &p);
        assert!((t - 120.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn close_neighbors_are_capped_at_threshold_weight() {
        let p = params();
        assert_eq!(neighbor_weight(0.0, &p), 1.0);
        assert_eq!(neighbor_weight(0.5, &p), 1.0);
        assert_eq!(neighbor_weight(2.0, &p), 0.25);
    }

    #[test]
    fn temperature_update_values() {
        assert_eq!(step_temperature(55.0, 55.0, 0.3), 55.0);
        assert!((step_temperature(100.0, 20.0, 0.1) - 92.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_convergence_matches_closed_form() {
        let (t0, env, d) = (300.0, 20.0, 0.1);
        let mut t = t0;
        for k in 1..=50 {
            t = step_temperature(t, env, d);
            let expect = (1.0f64 - d).powi(k) * (t0 - env);
            assert!(((t - env) - expect).abs() < 1e-9);
        }
    }

    fn burning_object(ignition: f64, temp: f64) -> ObjectInstance {
        let pool = crate::world::CategoryPool::builtin();
        let mut cat = pool.get("book").unwrap().clone();
        cat.ignition_point = ignition;
        cat.burn_duration = 200;
        let spec = crate::world::ObjectSpec {
            id: 4,
            category: cat.name.clone(),
            position: Vec3::ZERO,
            heading: 0.0,
            half_extents: Vec3::new(0.1, 0.1, 0.1),
            is_target: true,
            is_container: false,
        };
        ObjectInstance::from_spec(&spec, cat, temp)
    }

    #[test]
    fn just_below_ignition_point_stays_normal() {
        let mut o = burning_object(200.0, 200.0 - 1e-9);
        assert_eq!(update_burn_status(&mut o, 5), None);
        assert_eq!(o.status, Status::Normal);
        assert!(!o.damaged);
    }

    #[test]
    fn reaching_ignition_point_ignites_and_damages() {
        let mut o = burning_object(200.0, 200.0);
        assert_eq!(update_burn_status(&mut o, 100), Some(BurnTransition::Ignited));
        assert_eq!(o.status, Status::Burning);
        assert!(o.damaged);
        assert_eq!(o.ignition_frame, Some(100));
    }

    #[test]
    fn burns_out_after_duration() {
        let mut o = burning_object(200.0, 250.0);
        update_burn_status(&mut o, 100);
        assert_eq!(update_burn_status(&mut o, 299), None);
        assert_eq!(update_burn_status(&mut o, 300), Some(BurnTransition::BurntOut));
        assert_eq!(o.status, Status::Burnt);
        // Latched: cooling down never re-ignites.
        o.temperature = 1000.0;
        assert_eq!(update_burn_status(&mut o, 400), None);
        assert_eq!(o.status, Status::Burnt);
    }

    #[test]
    fn spread_probability_shape() {
        let p = params();
        assert_eq!(p.spread_probability(0), 0.0);
        assert!((p.spread_probability(300) - 0.5).abs() < 1e-12);
        assert_eq!(p.spread_probability(600), 1.0);
        assert_eq!(p.spread_probability(10_000), 1.0);
    }

    #[test]
    fn fresh_fire_cannot_spread() {
        let p = params();
        let grid = FloorGrid::new(&Bounds::new(0.0, 0.0, 2.0, 2.0), 0.25);
        let mut field = FireField::default();
        field.ignite((3, 3), 10);
        let mut r = rng::stream(1, "t");
        assert!(spread_floor_fire(&mut field, &grid, 10, &p, &mut r).is_empty());
    }

    #[test]
    fn old_fire_spreads_to_every_neighbor() {
        let p = params();
        let grid = FloorGrid::new(&Bounds::new(0.0, 0.0, 2.0, 2.0), 0.25);
        let mut field = FireField::default();
        field.ignite((3, 3), 0);
        let mut r = rng::stream(1, "t");
        let fresh = spread_floor_fire(&mut field, &grid, 600, &p, &mut r);
        assert_eq!(fresh, vec![(2, 3), (3, 2), (3, 4), (4, 3)]);
    }

    #[test]
    fn corner_cell_has_two_neighbors() {
        let grid = FloorGrid::new(&Bounds::new(0.0, 0.0, 1.0, 1.0), 0.25);
        assert_eq!(grid.neighbors4((0, 0)).count(), 2);
    }

    #[test]
    fn median_delay_for_default_slope() {
        // Survival after t frames is prod_{k<=t} (1 - k/600); crosses 1/2 between 28 and 29.
        let p = params();
        let mut s = 1.0;
        for k in 1..=28 {
            s *= 1.0 - k as f64 / 600.0;
        }
        assert!(s > 0.5);
        assert!(s * (1.0 - 29.0 / 600.0) <= 0.5);
        assert_eq!(p.median_spread_delay(), 29);
    }

    #[test]
    fn default_params_are_valid() {
        let pool = crate::world::CategoryPool::builtin();
        params().validate(pool.max_ignition_point()).unwrap();
        let bad = FireParams { spread_slope: 0.001, spread_cap_frames: 600, ..params() };
        assert!(bad.validate(pool.max_ignition_point()).is_err());
    }
}
