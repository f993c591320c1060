//! Wind load: a steady pressure force, a turbulence component orthogonal to
//! it, and a random torque.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{Aabb, Vec3};
use crate::world::{Bounds, ObjectInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindParams {
    /// kg/m³.
    pub air_density: f64,
    /// m/s. Scenes carry their own wind velocity; this is the fallback.
    pub wind_velocity: Vec3,
    /// Length of the turbulence vector, i.e. |F2| / |F1|.
    pub turbulence_ratio: f64,
    /// N·m.
    pub torque_magnitude: f64,
    /// Meters beyond the bounds after which an object is out of reach.
    pub out_of_bounds_margin: f64,
}

impl Default for WindParams {
    fn default() -> Self {
        Self {
            air_density: 1.2,
            wind_velocity: Vec3::new(5.0, 0.0, 0.0),
            turbulence_ratio: 0.3,
            torque_magnitude: 0.02,
            out_of_bounds_margin: 2.0,
        }
    }
}

impl WindParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.air_density > 0.0) {
            return Err("wind.air_density must be > 0".into());
        }
        if !(self.turbulence_ratio >= 0.0) {
            return Err("wind.turbulence_ratio must be >= 0".into());
        }
        if !(self.torque_magnitude >= 0.0 && self.out_of_bounds_margin >= 0.0) {
            return Err("wind torque and margin must be >= 0".into());
        }
        Ok(())
    }
}

/// Uniform direction on the unit sphere.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), z, s * phi.sin())
}

/// Steady wind force `ρ_a |v|² A` along the relative wind.
pub fn steady_force(relative_wind: Vec3, half_extents: Vec3, air_density: f64) -> Vec3 {
    match relative_wind.normalized() {
        Some(dir) => {
            let area = Aabb::projected_area(half_extents, 2.0 * half_extents.y, dir);
            dir * (air_density * relative_wind.length_squared() * area)
        }
        None => Vec3::ZERO,
    }
}

/// Turbulence `r × F1` with `r` drawn uniformly, projected orthogonal to `F1`
/// and rescaled to `ratio`, so `|F2| = ratio · |F1|` and `F2 ⊥ F1`.
pub fn turbulence(f1: Vec3, sample: Vec3, ratio: f64) -> Vec3 {
    let Some(axis) = f1.normalized() else {
        return Vec3::ZERO;
    };
    let ortho = sample - axis * sample.dot(axis);
    let r = match ortho.normalized() {
        Some(u) => u,
        // Sample parallel to F1: any orthogonal direction works.
        None => axis.cross(if axis.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::UP }).normalized().unwrap_or(Vec3::UP),
    };
    (r * ratio).cross(f1)
}

/// Force and torque of the wind on one susceptible object. Always consumes
/// exactly four draws from `rng` (turbulence direction, torque direction).
pub fn wind_load<R: Rng + ?Sized>(
    velocity: Vec3,
    half_extents: Vec3,
    wind_velocity: Vec3,
    params: &WindParams,
    rng: &mut R,
) -> (Vec3, Vec3) {
    let r_sample = random_unit(rng);
    let torque = random_unit(rng) * params.torque_magnitude;
    let f1 = steady_force(wind_velocity - velocity, half_extents, params.air_density);
    let f2 = turbulence(f1, r_sample, params.turbulence_ratio);
    (f1 + f2, torque)
}

/// Ids of active objects now beyond the bounds plus margin.
pub fn mark_out_of_reach(objects: &[ObjectInstance], bounds: &Bounds, params: &WindParams) -> Vec<u32> {
    objects
        .iter()
        .filter(|o| o.is_active() && !bounds.contains_with_margin(o.position, params.out_of_bounds_margin))
        .map(|o| o.id)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::world::{CategoryPool, ObjectSpec};

    #[test]
    fn still_air_gives_no_force() {
        let mut r = rng::stream(3, "w");
        let (f, _) = wind_load(Vec3::ZERO, Vec3::new(0.2, 0.2, 0.2), Vec3::ZERO, &WindParams::default(), &mut r);
        assert_eq!(f, Vec3::ZERO);
    }

    #[test]
    fn steady_force_magnitude() {
        // A = 0.5 m² facing +x: half extents y*z = 0.5/4.
        let half = Vec3::new(0.1, 0.25, 0.5);
        let f = steady_force(Vec3::new(10.0, 0.0, 0.0), half, 1.2);
        assert!((f.length() - 60.0).abs() < 1e-9);
    }

    #[test]
    fn turbulence_is_orthogonal_with_fixed_ratio() {
        let mut r = rng::stream(11, "w");
        let f1 = Vec3::new(3.0, 0.0, 4.0);
        for _ in 0..100 {
            let f2 = turbulence(f1, random_unit(&mut r), 0.3);
            assert!(f2.dot(f1).abs() < 1e-9);
            assert!((f2.length() / f1.length() - 0.3).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_sample_still_orthogonal() {
        let f1 = Vec3::new(2.0, 0.0, 0.0);
        let f2 = turbulence(f1, Vec3::new(1.0, 0.0, 0.0), 0.5);
        assert!(f2.dot(f1).abs() < 1e-12);
        assert!((f2.length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_wind_still_consumes_the_stream() {
        let p = WindParams::default();
        let mut a = rng::stream(5, "w");
        let mut b = rng::stream(5, "w");
        let (_, ta) = wind_load(Vec3::ZERO, Vec3::new(0.1, 0.1, 0.1), Vec3::ZERO, &p, &mut a);
        let (_, tb) = wind_load(Vec3::ZERO, Vec3::new(0.1, 0.1, 0.1), Vec3::new(4.0, 0.0, 0.0), &p, &mut b);
        assert_eq!(ta, tb);
        assert!((ta.length() - p.torque_magnitude).abs() < 1e-12);
        let na: u64 = a.random();
        let nb: u64 = b.random();
        assert_eq!(na, nb);
    }

    fn at(id: u32, x: f64) -> ObjectInstance {
        let cat = CategoryPool::builtin().get("umbrella").unwrap().clone();
        let spec = ObjectSpec {
            id,
            category: cat.name.clone(),
            position: Vec3::new(x, 0.1, 0.0),
            heading: 0.0,
            half_extents: cat.half_extents,
            is_target: true,
            is_container: false,
        };
        ObjectInstance::from_spec(&spec, cat, 20.0)
    }

    #[test]
    fn out_of_reach_threshold() {
        let b = Bounds::new(-5.0, -5.0, 5.0, 5.0);
        let p = WindParams::default();
        let inside = [at(1, 0.0), at(2, 6.9)];
        assert!(mark_out_of_reach(&inside, &b, &p).is_empty());
        let out = [at(3, 5.0 + p.out_of_bounds_margin + 1e-6)];
        assert_eq!(mark_out_of_reach(&out, &b, &p), vec![3]);
    }
}
