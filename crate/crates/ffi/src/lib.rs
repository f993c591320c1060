//! C ABI over `hazard-core`.
//!
//! Handles are opaque and owned by the caller until passed to the matching
//! `*_free`. Every fallible call returns a `HazardStatus`; on failure
//! `hazard_last_error` describes the cause for the calling thread. Panics
//! never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hazard_core::error::Error;
use hazard_core::harness::{run_episode, AgentKind, EpisodeSpec};
use hazard_core::physics::{SimParams, World};
use hazard_core::world::{parse_scene, CategoryPool, Status};

/// Return code of every fallible call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HazardStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed or invalid scene, or bad argument value.
    InvalidInput = 3,
    /// The simulation failed, e.g. a non-finite force.
    Simulation = 4,
    OutOfRange = 5,
    /// Output buffer too small; the required size is reported.
    BufferTooSmall = 6,
    Panic = 7,
}

/// A running simulation world.
pub struct HazardWorld {
    world: World,
}

/// Per-object state copied out of a world.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HazardObjectState {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub temperature: f64,
    /// 0 normal, 1 burning, 2 burnt.
    pub status: u32,
    pub damaged: bool,
    pub is_target: bool,
    pub rescued: bool,
    pub lost: bool,
}

/// Outcome of one full episode.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HazardEpisodeSummary {
    pub rescues: u32,
    pub damaged_rescues: u32,
    pub rescued_value: f64,
    pub total_value: f64,
    pub frames_used: u64,
    pub frame_limit: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: HazardStatus, msg: impl Into<String>) -> HazardStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> HazardStatus) -> HazardStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(HazardStatus::Panic, "internal panic"),
    }
}

fn core_status(e: &Error) -> HazardStatus {
    match e {
        Error::NonFiniteForce { .. } | Error::Invariant(_) => HazardStatus::Simulation,
        _ => HazardStatus::InvalidInput,
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, HazardStatus> {
    if p.is_null() {
        return Err(fail(HazardStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(HazardStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn hazard_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, NUL-terminated crate version.
#[no_mangle]
pub extern "C" fn hazard_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a world from scene JSON with default parameters and the builtin
/// category pool.
///
/// # Safety
/// `scene_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hazard_world_new(scene_json: *const c_char, out: *mut *mut HazardWorld) -> HazardStatus {
    guard(|| {
        if out.is_null() {
            return fail(HazardStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match str_arg(scene_json, "scene_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let pool = CategoryPool::builtin();
        let world = parse_scene(text, &pool).and_then(|scene| World::new(&scene, &pool, &SimParams::default()));
        match world {
            Ok(world) => {
                *out = Box::into_raw(Box::new(HazardWorld { world }));
                HazardStatus::Ok
            }
            Err(e) => fail(core_status(&e), e.to_string()),
        }
    })
}

/// Releases a world. Null is ignored.
///
/// # Safety
/// `world` must come from `hazard_world_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hazard_world_free(world: *mut HazardWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// Advances the world by `frames` frames.
///
/// # Safety
/// `world` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hazard_world_step(world: *mut HazardWorld, frames: u64) -> HazardStatus {
    guard(|| {
        let Some(w) = world.as_mut() else {
            return fail(HazardStatus::NullPointer, "world is null");
        };
        for _ in 0..frames {
            if let Err(e) = w.world.step_frame() {
                return fail(core_status(&e), e.to_string());
            }
        }
        HazardStatus::Ok
    })
}

/// Frames simulated so far.
///
/// # Safety
/// `world` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hazard_world_frame(world: *const HazardWorld, out: *mut u64) -> HazardStatus {
    guard(|| match (world.as_ref(), out.is_null()) {
        (Some(w), false) => {
            *out = w.world.frame;
            HazardStatus::Ok
        }
        _ => fail(HazardStatus::NullPointer, "world or out is null"),
    })
}

/// Number of objects in the world.
///
/// # Safety
/// `world` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hazard_world_object_count(world: *const HazardWorld, out: *mut usize) -> HazardStatus {
    guard(|| match (world.as_ref(), out.is_null()) {
        (Some(w), false) => {
            *out = w.world.objects.len();
            HazardStatus::Ok
        }
        _ => fail(HazardStatus::NullPointer, "world or out is null"),
    })
}

/// State of the object at `index` (scene order).
///
/// # Safety
/// `world` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hazard_world_object(
    world: *const HazardWorld,
    index: usize,
    out: *mut HazardObjectState,
) -> HazardStatus {
    guard(|| {
        let (Some(w), false) = (world.as_ref(), out.is_null()) else {
            return fail(HazardStatus::NullPointer, "world or out is null");
        };
        let Some(o) = w.world.objects.get(index) else {
            return fail(HazardStatus::OutOfRange, format!("object index {index} out of range"));
        };
        *out = HazardObjectState {
            id: o.id,
            x: o.position.x,
            y: o.position.y,
            z: o.position.z,
            temperature: o.temperature,
            status: match o.status {
                Status::Normal => 0,
                Status::Burning => 1,
                Status::Burnt => 2,
            },
            damaged: o.damaged,
            is_target: o.is_target,
            rescued: o.rescued,
            lost: o.lost,
        };
        HazardStatus::Ok
    })
}

/// Copies the world's state digest (hex, NUL-terminated) into `buf`. On
/// `BufferTooSmall`, `needed` holds the required size including the NUL.
///
/// # Safety
/// `world` must be a live handle; `buf` must hold `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn hazard_world_digest(
    world: *const HazardWorld,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HazardStatus {
    guard(|| {
        let Some(w) = world.as_ref() else {
            return fail(HazardStatus::NullPointer, "world is null");
        };
        let digest = w.world.state_digest();
        let size = digest.len() + 1;
        if !needed.is_null() {
            *needed = size;
        }
        if buf.is_null() || len < size {
            return fail(HazardStatus::BufferTooSmall, format!("digest needs {size} bytes"));
        }
        ptr::copy_nonoverlapping(digest.as_ptr(), buf.cast::<u8>(), digest.len());
        *buf.add(digest.len()) = 0;
        HazardStatus::Ok
    })
}

/// Runs one episode of `agent` ("random", "rule", "greedy", "mcts" or
/// "llm"; the LLM uses the offline greedy-echo backend) on the scene.
/// `frame_limit` zero selects the task default.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hazard_run_episode(
    scene_json: *const c_char,
    agent: *const c_char,
    seed: u64,
    frame_limit: u64,
    out: *mut HazardEpisodeSummary,
) -> HazardStatus {
    guard(|| {
        if out.is_null() {
            return fail(HazardStatus::NullPointer, "out is null");
        }
        let (text, agent) = match (str_arg(scene_json, "scene_json"), str_arg(agent, "agent")) {
            (Ok(t), Ok(a)) => (t, a),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let kind: AgentKind = match agent.parse() {
            Ok(k) => k,
            Err(e) => return fail(HazardStatus::InvalidInput, e.to_string()),
        };
        let pool = CategoryPool::builtin();
        let scene = match parse_scene(text, &pool) {
            Ok(s) => s,
            Err(e) => return fail(HazardStatus::InvalidInput, e.to_string()),
        };
        let mut spec = EpisodeSpec::new("ffi", scene, &pool, kind, seed);
        if frame_limit > 0 {
            spec.frame_limit = frame_limit;
        }
        match run_episode(&spec, None) {
            Ok(o) => {
                let r = &o.result;
                *out = HazardEpisodeSummary {
                    rescues: r.rescues.len() as u32,
                    damaged_rescues: r.rescues.iter().filter(|e| e.damaged).count() as u32,
                    rescued_value: r.rescued_value(),
                    total_value: r.total_value,
                    frames_used: r.frames_used,
                    frame_limit: r.frame_limit,
                };
                HazardStatus::Ok
            }
            Err(e) => fail(core_status(&e), e.to_string()),
        }
    })
}
