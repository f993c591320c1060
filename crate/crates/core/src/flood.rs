//! Rising, advancing water surface with buoyancy, drag and submersion damage.

use serde::{Deserialize, Serialize};

use crate::geom::{Aabb, Vec3};
use crate::world::{Bounds, Edge, ObjectInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloodParams {
    /// kg/m³.
    pub fluid_density: f64,
    /// m/frame.
    pub rise_rate: f64,
    /// m/frame.
    pub advance_rate: f64,
    /// Drop in water height per meter ahead of the front.
    pub surface_slope: f64,
    pub origin_edge: Edge,
    /// Submerged fraction at which non-waterproof targets are damaged.
    pub damage_submersion_fraction: f64,
    /// Extra linear velocity damping per frame for objects in water. Not physical;
    /// keeps the explicit integrator from ringing.
    pub submerged_damping: f64,
}

impl Default for FloodParams {
    fn default() -> Self {
        Self {
            fluid_density: 1000.0,
            rise_rate: 0.0005,
            advance_rate: 0.01,
            surface_slope: 0.1,
            origin_edge: Edge::MinX,
            damage_submersion_fraction: 1.0,
            submerged_damping: 0.02,
        }
    }
}

impl FloodParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.fluid_density > 0.0) {
            return Err("flood.fluid_density must be > 0".into());
        }
        if !(self.rise_rate >= 0.0 && self.advance_rate >= 0.0) {
            return Err("flood rates must be >= 0".into());
        }
        if !(self.surface_slope >= 0.0) {
            return Err("flood.surface_slope must be >= 0".into());
        }
        if !(self.damage_submersion_fraction > 0.0 && self.damage_submersion_fraction <= 1.0) {
            return Err("flood.damage_submersion_fraction must lie in (0, 1]".into());
        }
        if !(0.0..1.0).contains(&self.submerged_damping) {
            return Err("flood.submerged_damping must lie in [0, 1)".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FloodState {
    /// Meters from the origin edge.
    pub front_position: f64,
    /// Meters.
    pub base_height: f64,
}

impl FloodState {
    pub fn advance(&mut self, params: &FloodParams) {
        self.front_position += params.advance_rate;
        self.base_height += params.rise_rate;
    }
}

/// Water surface height at `point`. Behind the front the surface sits at the
/// base height; ahead of it the surface slopes down to zero.
pub fn water_height_at(state: &FloodState, params: &FloodParams, bounds: &Bounds, point: Vec3) -> f64 {
    let past = params.origin_edge.distance_from(bounds, point) - state.front_position;
    (state.base_height - params.surface_slope * past.max(0.0)).max(0.0)
}

/// Submerged volume (m³) and fraction of a box under a flat surface.
pub fn submerged_volume(position: Vec3, half_extents: Vec3, water_height: f64) -> (f64, f64) {
    let full = 2.0 * half_extents.y;
    let bottom = position.y - half_extents.y;
    let depth = (water_height - bottom).clamp(0.0, full);
    let footprint = 4.0 * half_extents.x * half_extents.z;
    let volume = footprint * depth;
    (volume, depth / full)
}

/// Uniform current: the front's advance speed along its direction, m/s.
pub fn fluid_velocity(params: &FloodParams, frame_dt: f64) -> Vec3 {
    params.origin_edge.advance_direction() * (params.advance_rate / frame_dt)
}

/// Buoyancy and drag on an object. `velocity` and `fluid_velocity` are m/s.
#[allow(clippy::too_many_arguments)]
pub fn flood_forces(
    position: Vec3,
    half_extents: Vec3,
    velocity: Vec3,
    drag_coefficient: f64,
    water_height: f64,
    fluid_velocity: Vec3,
    params: &FloodParams,
    gravity: f64,
) -> (Vec3, Vec3) {
    let (v_sub, _) = submerged_volume(position, half_extents, water_height);
    if v_sub <= 0.0 {
        return (Vec3::ZERO, Vec3::ZERO);
    }
    let buoyancy = Vec3::new(0.0, params.fluid_density * v_sub * gravity, 0.0);
    let sub_height = v_sub / (4.0 * half_extents.x * half_extents.z);
    let v_rel = velocity - fluid_velocity;
    let drag = match v_rel.normalized() {
        Some(dir) => {
            let area = Aabb::projected_area(half_extents, sub_height, dir);
            let speed2 = v_rel.length_squared();
            dir * (-0.5 * params.fluid_density * speed2 * drag_coefficient * area)
        }
        None => Vec3::ZERO,
    };
    (buoyancy, drag)
}

/// Drag magnitude from the drag equation.
pub fn drag_magnitude(fluid_density: f64, speed: f64, drag_coefficient: f64, area: f64) -> f64 {
    0.5 * fluid_density * speed * speed * drag_coefficient * area
}

/// Latches submersion damage. Returns true when the object becomes damaged now.
pub fn apply_flood_damage(obj: &mut ObjectInstance, fraction: f64, params: &FloodParams) -> bool {
    if obj.damaged || obj.category.waterproof || !obj.is_target {
        return false;
    }
    if fraction >= params.damage_submersion_fraction - 1e-12 {
        obj.damaged = true;
        return true;
    }
    false
}
