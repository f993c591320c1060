//! Embodied hazard-rescue benchmark: procedural scenes, fire/flood/wind
//! hazards, a small rigid-body stepper, agents and an evaluation harness.

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod agent;
pub mod baselines;
pub mod fire;
pub mod flood;
pub mod geom;
pub mod harness;
pub mod llm;
pub mod physics;
pub mod procgen;
pub mod rng;
pub mod wind;
pub mod world;

pub use error::{Error, Result};
