//! Frame loop: hazard update, forces, velocity-first Euler, contacts, damage.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fire::{FireParams, FireState};
use crate::flood::{self, FloodParams, FloodState};
use crate::geom::{Aabb, Vec3};
use crate::rng::{self, Stream};
use crate::wind::{self, WindParams};
use crate::world::{
    effective_value, Bounds, CategoryPool, GridMap, HazardSpec, ObjectInstance, Scene, StaticBox, Task,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsParams {
    /// m/s².
    pub gravity: f64,
    /// Seconds per frame.
    pub frame_dt: f64,
    pub ground_restitution: f64,
    /// Fraction of horizontal and yaw velocity lost per frame while resting on a support.
    pub friction_decay: f64,
    /// Whether hazards act on the agent.
    pub agent_effects_enabled: bool,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            gravity: 9.81,
            frame_dt: 1.0 / 30.0,
            ground_restitution: 0.0,
            friction_decay: 0.15,
            agent_effects_enabled: false,
        }
    }
}

/// All hazard and physics knobs for one episode.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub fire: FireParams,
    pub flood: FloodParams,
    pub wind: WindParams,
    pub physics: PhysicsParams,
}

impl SimParams {
    pub fn validate(&self, pool: &CategoryPool) -> Result<()> {
        self.fire.validate(pool.max_ignition_point()).map_err(Error::Config)?;
        self.flood.validate().map_err(Error::Config)?;
        self.wind.validate().map_err(Error::Config)?;
        if !(self.physics.frame_dt > 0.0) {
            return Err(Error::Config("physics.frame_dt must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.physics.friction_decay) {
            return Err(Error::Config("physics.friction_decay must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HazardState {
    Fire(FireState),
    Flood { params: FloodParams, state: FloodState },
    Wind { params: WindParams, velocity: Vec3 },
}

/// What happened during one frame.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameEvents {
    pub frame: u64,
    pub ignitions: Vec<u32>,
    pub burnouts: Vec<u32>,
    pub damages: Vec<u32>,
    pub blown_out: Vec<u32>,
    /// Objects that came to rest on a support this frame, with the support height.
    pub contacts: Vec<(u32, f64)>,
}

impl FrameEvents {
    pub fn is_empty(&self) -> bool {
        self.ignitions.is_empty()
            && self.burnouts.is_empty()
            && self.damages.is_empty()
            && self.blown_out.is_empty()
            && self.contacts.is_empty()
    }
}

/// Per-object force accumulation result.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Load {
    pub force: Vec3,
    pub torque: Vec3,
    /// Extra velocity damping fraction for this frame.
    pub damping: f64,
}

/// The evolving world of one episode.
#[derive(Debug, Clone)]
pub struct World {
    pub scene: Scene,
    pub objects: Vec<ObjectInstance>,
    pub hazard: HazardState,
    pub frame: u64,
    pub params: SimParams,
    /// Statics-only height map at the default cell size.
    pub static_grid: GridMap,
    spread_rng: Stream,
    wind_rng: Stream,
}

impl World {
    /// Builds the world for a validated scene. Hazard streams derive from the
    /// scene seed, so every agent faces the same hazard realization.
    pub fn new(scene: &Scene, pool: &CategoryPool, params: &SimParams) -> Result<Self> {
        scene.validate(pool)?;
        params.validate(pool)?;
        let mut objects: Vec<ObjectInstance> = scene
            .objects
            .iter()
            .map(|spec| {
                let cat = pool.get(&spec.category).expect("validated").clone();
                ObjectInstance::from_spec(spec, cat, params.fire.room_temperature)
            })
            .collect();
        objects.sort_by_key(|o| o.id);
        let hazard = match &scene.hazard {
            HazardSpec::Fire { cell_size, cells } => {
                let fire = params.fire.clone();
                // Source cells are re-expressed on the simulation floor grid.
                let src: Vec<(i64, i64)> = cells
                    .iter()
                    .map(|c| {
                        let p = Vec3::new(
                            scene.bounds.min_x + (c[0] as f64 + 0.5) * cell_size,
                            0.0,
                            scene.bounds.min_z + (c[1] as f64 + 0.5) * cell_size,
                        );
                        crate::fire::FloorGrid::new(&scene.bounds, fire.floor_cell_size).cell_of(p)
                    })
                    .collect();
                HazardState::Fire(FireState::new(fire, &scene.bounds, &src, 0))
            }
            HazardSpec::Flood { origin_edge, rise_rate, advance_rate } => HazardState::Flood {
                params: FloodParams {
                    origin_edge: *origin_edge,
                    rise_rate: *rise_rate,
                    advance_rate: *advance_rate,
                    ..params.flood.clone()
                },
                state: FloodState::default(),
            },
            HazardSpec::Wind { velocity } => HazardState::Wind { params: params.wind.clone(), velocity: *velocity },
        };
        let static_boxes: Vec<Aabb> = scene.statics.iter().map(StaticBox::aabb).collect();
        let static_grid = GridMap::from_boxes(&scene.bounds, crate::world::DEFAULT_CELL_SIZE, static_boxes.iter());
        Ok(Self {
            scene: scene.clone(),
            objects,
            hazard,
            frame: 0,
            params: params.clone(),
            static_grid,
            spread_rng: rng::stream(scene.seed, rng::labels::SPREAD),
            wind_rng: rng::stream(scene.seed, rng::labels::WIND),
        })
    }

    pub fn task(&self) -> Task {
        self.scene.task
    }

    pub fn bounds(&self) -> &Bounds {
        &self.scene.bounds
    }

    pub fn object(&self, id: u32) -> Option<&ObjectInstance> {
        self.objects.binary_search_by_key(&id, |o| o.id).ok().map(|i| &self.objects[i])
    }

    pub fn object_mut(&mut self, id: u32) -> Option<&mut ObjectInstance> {
        self.objects.binary_search_by_key(&id, |o| o.id).ok().map(move |i| &mut self.objects[i])
    }

    /// Water surface height at `p`, zero outside the flood task.
    pub fn water_height(&self, p: Vec3) -> f64 {
        match &self.hazard {
            HazardState::Flood { params, state } => flood::water_height_at(state, params, &self.scene.bounds, p),
            _ => 0.0,
        }
    }

    /// Ambient temperature at `p` (room temperature outside the fire task).
    pub fn temperature_at(&self, p: Vec3) -> f64 {
        match &self.hazard {
            HazardState::Fire(f) => f.env_temperature_at(p, None, &self.objects, self.frame),
            _ => self.params.fire.room_temperature,
        }
    }

    pub fn fluid_velocity(&self) -> Vec3 {
        match &self.hazard {
            HazardState::Flood { params, .. } => flood::fluid_velocity(params, self.params.physics.frame_dt),
            _ => Vec3::ZERO,
        }
    }

    /// Total value of all targets, the denominator of the Value metric.
    pub fn total_target_value(&self) -> f64 {
        self.objects.iter().filter(|o| o.is_target).map(|o| o.category.value).sum()
    }

    pub fn rescued_value(&self) -> f64 {
        self.objects.iter().filter(|o| o.is_target && o.rescued).map(effective_value).sum()
    }

    /// Advances one frame.
    pub fn step_frame(&mut self) -> Result<FrameEvents> {
        let frame = self.frame;
        let mut ev = FrameEvents { frame, ..Default::default() };
        let damaged_before: Vec<bool> = self.objects.iter().map(|o| o.damaged).collect();

        match &mut self.hazard {
            HazardState::Fire(fire) => {
                let fe = fire.step(&mut self.objects, frame, &mut self.spread_rng);
                ev.ignitions = fe.ignitions;
                ev.burnouts = fe.burnouts;
            }
            HazardState::Flood { params, state } => state.advance(params),
            HazardState::Wind { .. } => {}
        }

        let loads = accumulate_forces(&self.objects, &self.hazard, &self.scene.bounds, &self.params, &mut self.wind_rng);
        integrate_step(&mut self.objects, &loads, &self.scene.statics, &self.params.physics, frame)?;
        ev.contacts = resolve_contacts(&mut self.objects, &self.scene.statics, &self.params.physics);

        if let HazardState::Flood { params, state } = &self.hazard {
            for o in self.objects.iter_mut().filter(|o| o.is_active()) {
                let h = flood::water_height_at(state, params, &self.scene.bounds, o.position);
                let (_, frac) = flood::submerged_volume(o.position, o.half_extents, h);
                flood::apply_flood_damage(o, frac, params);
            }
        }
        if let HazardState::Wind { params, .. } = &self.hazard {
            ev.blown_out = wind::mark_out_of_reach(&self.objects, &self.scene.bounds, params);
            for id in &ev.blown_out {
                if let Some(o) = self.object_mut(*id) {
                    o.lost = true;
                    o.velocity = Vec3::ZERO;
                    o.yaw_rate = 0.0;
                }
            }
        }
        ev.damages = self
            .objects
            .iter()
            .zip(damaged_before)
            .filter(|(o, before)| o.damaged && !before)
            .map(|(o, _)| o.id)
            .collect();
        self.frame += 1;
        Ok(ev)
    }

    /// Short hex digest of the full dynamic state, used for replay checks.
    pub fn state_digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.frame.to_le_bytes());
        for o in &self.objects {
            h.update(o.id.to_le_bytes());
            for v in [
                o.position.x, o.position.y, o.position.z, o.velocity.x, o.velocity.y, o.velocity.z, o.heading,
                o.temperature,
            ] {
                h.update(v.to_bits().to_le_bytes());
            }
            h.update([o.status as u8, o.damaged as u8, o.held_by.is_some() as u8, o.rescued as u8, o.lost as u8]);
        }
        match &self.hazard {
            HazardState::Fire(f) => {
                for (c, t) in &f.field.burning {
                    h.update(c.0.to_le_bytes());
                    h.update(c.1.to_le_bytes());
                    h.update(t.to_le_bytes());
                }
                h.update((f.field.burnt.len() as u64).to_le_bytes());
            }
            HazardState::Flood { state, .. } => {
                h.update(state.front_position.to_bits().to_le_bytes());
                h.update(state.base_height.to_bits().to_le_bytes());
            }
            HazardState::Wind { .. } => {}
        }
        let out = h.finalize();
        out[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Computes gravity plus the task's hazard loads for every object.
/// Held, rescued and lost objects get no load. In the wind task every
/// susceptible object draws from the wind stream each frame, active or not,
/// so the stream does not depend on what the agent does.
pub fn accumulate_forces(
    objects: &[ObjectInstance],
    hazard: &HazardState,
    bounds: &Bounds,
    params: &SimParams,
    wind_rng: &mut Stream,
) -> Vec<Load> {
    let g = params.physics.gravity;
    let dt = params.physics.frame_dt;
    objects
        .iter()
        .map(|o| {
            let mut load = Load::default();
            let wind_draw = match hazard {
                HazardState::Wind { params: wp, velocity } if o.category.wind_susceptible => {
                    Some(wind::wind_load(o.velocity, o.half_extents, *velocity, wp, wind_rng))
                }
                _ => None,
            };
            if !o.is_active() {
                return load;
            }
            let m = o.mass();
            load.force = Vec3::new(0.0, -m * g, 0.0);
            match hazard {
                HazardState::Fire(_) => {}
                HazardState::Flood { params: fp, state } => {
                    let h = flood::water_height_at(state, fp, bounds, o.position);
                    let fluid_v = flood::fluid_velocity(fp, dt);
                    let (buoy, mut drag) = flood::flood_forces(
                        o.position,
                        o.half_extents,
                        o.velocity,
                        o.category.drag_coefficient,
                        h,
                        fluid_v,
                        fp,
                        g,
                    );
                    // Drag may stop relative motion within a frame but never reverse it.
                    let cap = m * (o.velocity - fluid_v).length() / dt;
                    let mag = drag.length();
                    if mag > cap && mag > 0.0 {
                        drag = drag * (cap / mag);
                    }
                    load.force += buoy + drag;
                    if buoy.y > 0.0 {
                        load.damping = fp.submerged_damping;
                    }
                }
                HazardState::Wind { .. } => {
                    if let Some((f, t)) = wind_draw {
                        load.force += f;
                        load.torque = t;
                    }
                }
            }
            load
        })
        .collect()
}

/// Velocity-first Euler over active objects; yaw-only rotation. A move whose
/// center would enter a static box taller than a small step is cancelled
/// horizontally.
pub fn integrate_step(
    objects: &mut [ObjectInstance],
    loads: &[Load],
    statics: &[StaticBox],
    params: &PhysicsParams,
    frame: u64,
) -> Result<()> {
    let dt = params.frame_dt;
    for (o, load) in objects.iter_mut().zip(loads) {
        if !o.is_active() {
            continue;
        }
        if !load.force.is_finite() || !load.torque.is_finite() {
            return Err(Error::NonFiniteForce { id: o.id, frame });
        }
        let m = o.mass();
        let before = o.velocity;
        o.velocity += load.force * (dt / m);
        if load.damping > 0.0 {
            o.velocity = o.velocity * (1.0 - load.damping);
        }
        // Average of old and new velocity: exact under constant force.
        let next = o.position + (before + o.velocity) * (0.5 * dt);
        let bottom = o.position.y - o.half_extents.y;
        let blocked = statics.iter().any(|s| {
            let b = s.aabb();
            b.footprint_contains(next) && !b.footprint_contains(o.position) && b.top() > bottom + 0.05
        });
        if blocked {
            o.position.y = next.y;
            o.velocity.x = 0.0;
            o.velocity.z = 0.0;
        } else {
            o.position = next;
        }
        let hx = o.half_extents.x;
        let hz = o.half_extents.z;
        let inertia = m * (hx * hx + hz * hz) / 3.0;
        if inertia > 0.0 {
            o.yaw_rate += (load.torque.y / inertia * dt).to_degrees();
        }
        o.heading = crate::geom::normalize_degrees(o.heading + o.yaw_rate * dt);
    }
    Ok(())
}

/// Height of the support under `p` for an object whose bottom is at `bottom`.
pub fn support_height(statics: &[StaticBox], p: Vec3, bottom: f64) -> f64 {
    statics
        .iter()
        .map(StaticBox::aabb)
        .filter(|b| b.footprint_contains(p) && b.top() <= bottom + 0.3)
        .map(|b| b.top())
        .fold(0.0, f64::max)
}

/// Clamps objects onto the floor or the static top beneath them. Returns
/// objects that newly came into contact.
pub fn resolve_contacts(objects: &mut [ObjectInstance], statics: &[StaticBox], params: &PhysicsParams) -> Vec<(u32, f64)> {
    let mut fresh = Vec::new();
    for o in objects.iter_mut().filter(|o| o.is_active()) {
        let bottom = o.position.y - o.half_extents.y;
        let support = support_height(statics, o.position, bottom);
        let was = o.in_contact;
        if bottom <= support + 1e-6 {
            o.position.y = support + o.half_extents.y;
            if o.velocity.y < 0.0 {
                o.velocity.y = -o.velocity.y * params.ground_restitution;
            }
            let keep = 1.0 - params.friction_decay;
            o.velocity.x *= keep;
            o.velocity.z *= keep;
            o.yaw_rate *= keep;
            o.in_contact = true;
            if !was {
                fresh.push((o.id, support));
            }
        } else {
            o.in_contact = false;
        }
    }
    fresh
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{ObjectSpec, Spawn, SCENE_VERSION};

    fn scene(task: Task, objects: Vec<ObjectSpec>, statics: Vec<StaticBox>) -> Scene {
        let hazard = match task {
            Task::Fire => HazardSpec::Fire { cell_size: 0.25, cells: vec![] },
            Task::Flood => HazardSpec::Flood { origin_edge: crate::world::Edge::MinX, rise_rate: 0.0, advance_rate: 0.0 },
            Task::Wind => HazardSpec::Wind { velocity: Vec3::new(5.0, 0.0, 0.0) },
        };
        Scene {
            version: SCENE_VERSION,
            task,
            seed: 42,
            bounds: Bounds::new(-5.0, -5.0, 5.0, 5.0),
            statics,
            objects,
            agent_spawn: Spawn { position: Vec3::new(-4.5, 0.0, -4.5), heading: 0.0 },
            hazard,
        }
    }

    fn spec(id: u32, cat: &str, pos: Vec3) -> ObjectSpec {
        let c = CategoryPool::builtin().get(cat).unwrap().clone();
        ObjectSpec {
            id,
            category: cat.into(),
            position: pos,
            heading: 0.0,
            half_extents: c.half_extents,
            is_target: true,
            is_container: false,
        }
    }

    #[test]
    fn fire_forces_are_gravity_only() {
        let s = scene(Task::Fire, vec![spec(1, "laptop", Vec3::new(0.0, 0.015, 0.0))], vec![]);
        let mut w = World::new(&s, &CategoryPool::builtin(), &SimParams::default()).unwrap();
        let loads = accumulate_forces(&w.objects, &w.hazard, &w.scene.bounds, &w.params, &mut w.wind_rng);
        let m = w.objects[0].mass();
        assert_eq!(loads[0].force, Vec3::new(0.0, -m * 9.81, 0.0));
        assert_eq!(loads[0].torque, Vec3::ZERO);
    }

    #[test]
    fn wind_skips_non_susceptible() {
        let s = scene(Task::Wind, vec![spec(1, "suitcase", Vec3::new(0.0, 0.35, 0.0))], vec![]);
        let mut w = World::new(&s, &CategoryPool::builtin(), &SimParams::default()).unwrap();
        let loads = accumulate_forces(&w.objects, &w.hazard, &w.scene.bounds, &w.params, &mut w.wind_rng);
        let m = w.objects[0].mass();
        assert_eq!(loads[0].force, Vec3::new(0.0, -m * 9.81, 0.0));
    }

    #[test]
    fn neutrally_buoyant_submerged_object_at_fluid_speed_is_in_balance() {
        let mut pool_cats: Vec<_> = CategoryPool::builtin().iter().cloned().collect();
        for c in &mut pool_cats {
            if c.name == "laptop" {
                c.density = 1000.0;
            }
        }
        let pool = CategoryPool::from_categories(pool_cats).unwrap();
        let mut s = scene(Task::Flood, vec![spec(1, "laptop", Vec3::new(0.0, 0.3, 0.0))], vec![]);
        s.hazard = HazardSpec::Flood { origin_edge: crate::world::Edge::MinX, rise_rate: 0.0, advance_rate: 0.01 };
        let mut w = World::new(&s, &pool, &SimParams::default()).unwrap();
        if let HazardState::Flood { state, .. } = &mut w.hazard {
            state.base_height = 2.0;
            state.front_position = 20.0;
        }
        w.objects[0].velocity = w.fluid_velocity();
        let loads = accumulate_forces(&w.objects, &w.hazard, &w.scene.bounds, &w.params, &mut w.wind_rng);
        assert!(loads[0].force.length() < 1e-9, "{:?}", loads[0].force);
    }

    #[test]
    fn rest_stays_at_rest() {
        let s = scene(Task::Fire, vec![spec(1, "vase", Vec3::new(1.0, 0.15, 1.0))], vec![]);
        let mut w = World::new(&s, &CategoryPool::builtin(), &SimParams::default()).unwrap();
        let before = w.objects[0].position;
        for _ in 0..30 {
            w.step_frame().unwrap();
        }
        assert!((w.objects[0].position - before).length() < 1e-12);
    }

    #[test]
    fn constant_force_velocity_closed_form() {
        let s = scene(Task::Fire, vec![spec(1, "vase", Vec3::new(0.0, 3.0, 0.0))], vec![]);
        let w = World::new(&s, &CategoryPool::builtin(), &SimParams::default()).unwrap();
        let mut objs = w.objects.clone();
        let m = objs[0].mass();
        let f = Vec3::new(2.0, 0.0, 0.0);
        let p = PhysicsParams::default();
        let load = Load { force: f, ..Default::default() };
        for _ in 0..10 {
            integrate_step(&mut objs, &[load], &[], &p, 0).unwrap();
        }
        let expect = 10.0 * (2.0 / m) * p.frame_dt;
        assert!((objs[0].velocity.x - expect).abs() < 1e-12);
    }

    #[test]
    fn non_finite_force_aborts() {
        let s = scene(Task::Fire, vec![spec(7, "vase", Vec3::new(0.0, 3.0, 0.0))], vec![]);
        let w = World::new(&s, &CategoryPool::builtin(), &SimParams::default()).unwrap();
        let mut objs = w.objects.clone();
        let load = Load { force: Vec3::new(f64::NAN, 0.0, 0.0), ..Default::default() };
        let err = integrate_step(&mut objs, &[load], &[], &PhysicsParams::default(), 3).unwrap_err();
        assert!(matches!(err, Error::NonFiniteForce { id: 7, frame: 3 }));
    }

    #[test]
    fn free_fall_time() {
        let mut sp = spec(1, "vase", Vec3::ZERO);
        sp.position = Vec3::new(0.0, 1.0 + sp.half_extents.y, 0.0);
        let s = scene(Task::Fire, vec![sp], vec![]);
        let mut w = World::new(&s, &CategoryPool::builtin(), &SimParams::default()).unwrap();
        let dt = w.params.physics.frame_dt;
        let mut frames = 0;
        let t;
        loop {
            let o = &w.objects[0];
            let (y0, vy0) = (o.position.y - o.half_extents.y, o.velocity.y);
            let ev = w.step_frame().unwrap();
            frames += 1;
            if !ev.contacts.is_empty() {
                // Crossing time inside the last frame from the unclamped trajectory.
                let a = -9.81;
                let vy1 = vy0 + a * dt;
                let drop = (vy0 + vy1) * 0.5 * dt;
                let frac = if drop < 0.0 { (y0 / -drop).min(1.0) } else { 1.0 };
                t = (frames - 1) as f64 * dt + frac * dt;
                break;
            }
        }
        let analytic = (2.0 * 1.0 / 9.81f64).sqrt();
        assert!((t - analytic).abs() / analytic < 0.03, "t={t} analytic={analytic}");
    }

    #[test]
    fn object_on_table_is_clamped_to_table_top() {
        let table = StaticBox {
            name: "table".into(),
            center: Vec3::new(0.0, 0.4, 0.0),
            half_extents: Vec3::new(0.6, 0.4, 0.4),
            surface: true,
        };
        let mut sp = spec(1, "vase", Vec3::ZERO);
        sp.position = Vec3::new(0.1, 0.8 + sp.half_extents.y - 0.01, 0.0);
        let s = scene(Task::Fire, vec![sp.clone()], vec![table]);
        let mut w = World::new(&s, &CategoryPool::builtin(), &SimParams::default()).unwrap();
        // Support oracle from the rasterized statics grid.
        let cell = w.static_grid.cell_of(sp.position);
        let support = w.static_grid.height_at(cell);
        assert_eq!(support, 0.8);
        w.step_frame().unwrap();
        assert!((w.objects[0].position.y - (support + sp.half_extents.y)).abs() < 1e-12);
    }

    #[test]
    fn floater_above_support_is_not_clamped() {
        let mut objs = World::new(
            &scene(Task::Fire, vec![spec(1, "vase", Vec3::new(0.0, 1.0, 0.0))], vec![]),
            &CategoryPool::builtin(),
            &SimParams::default(),
        )
        .unwrap()
        .objects;
        let y = objs[0].position.y;
        assert!(resolve_contacts(&mut objs, &[], &PhysicsParams::default()).is_empty());
        assert_eq!(objs[0].position.y, y);
    }

    #[test]
    fn source_free_fire_scene_is_quiet() {
        let s = scene(Task::Fire, vec![spec(1, "vase", Vec3::new(0.0, 0.15, 0.0))], vec![]);
        let mut w = World::new(&s, &CategoryPool::builtin(), &SimParams::default()).unwrap();
        w.objects[0].temperature = 80.0;
        w.step_frame().unwrap();
        for _ in 0..50 {
            let ev = w.step_frame().unwrap();
            assert!(ev.is_empty());
        }
        assert!(w.objects[0].temperature < 21.0);
    }
}
