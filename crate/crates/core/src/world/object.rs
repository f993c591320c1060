use serde::{Deserialize, Serialize};

use super::category::ObjectCategory;
use super::scene::ObjectSpec;
use crate::geom::{Aabb, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Normal,
    Burning,
    Burnt,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Normal => "normal",
            Status::Burning => "burning",
            Status::Burnt => "burnt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hand {
    Left,
    Right,
}

/// Runtime state of one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: u32,
    pub category: ObjectCategory,
    /// Box center.
    pub position: Vec3,
    /// m/s.
    pub velocity: Vec3,
    /// Degrees.
    pub heading: f64,
    /// Degrees per second about the vertical axis.
    pub yaw_rate: f64,
    pub half_extents: Vec3,
    pub status: Status,
    /// °C.
    pub temperature: f64,
    pub damaged: bool,
    pub is_target: bool,
    pub is_container: bool,
    pub held_by: Option<Hand>,
    pub ignition_frame: Option<u64>,
    pub burnt_frame: Option<u64>,
    /// Deposited into a safe zone; frozen from then on.
    pub rescued: bool,
    /// Blown beyond the reachable area; removed from simulation.
    pub lost: bool,
    pub in_contact: bool,
}

impl ObjectInstance {
    pub fn from_spec(spec: &ObjectSpec, category: ObjectCategory, temperature: f64) -> Self {
        Self {
            id: spec.id,
            category,
            position: spec.position,
            velocity: Vec3::ZERO,
            heading: spec.heading,
            yaw_rate: 0.0,
            half_extents: spec.half_extents,
            status: Status::Normal,
            temperature,
            damaged: false,
            is_target: spec.is_target,
            is_container: spec.is_container,
            held_by: None,
            ignition_frame: None,
            burnt_frame: None,
            rescued: false,
            lost: false,
            in_contact: false,
        }
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::new(self.position, self.half_extents)
    }

    pub fn volume(&self) -> f64 {
        self.aabb().volume()
    }

    pub fn mass(&self) -> f64 {
        self.category.density * self.volume()
    }

    /// Participates in hazard dynamics and physics.
    pub fn is_active(&self) -> bool {
        self.held_by.is_none() && !self.rescued && !self.lost
    }
}

/// Scoring value of a target: the category value, halved when damaged.
pub fn effective_value(obj: &ObjectInstance) -> f64 {
    value_with_damage(obj.category.value, obj.damaged)
}

pub fn value_with_damage(value: f64, damaged: bool) -> f64 {
    if damaged {
        value / 2.0
    } else {
        value
    }
}
