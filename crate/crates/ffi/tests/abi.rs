use std::ffi::{c_char, CStr, CString};
use std::ptr;

use hazard_core::procgen::{generate_scene, GenConfig, TemplateSet};
use hazard_core::world::{CategoryPool, Task};
use hazard_ffi::*;

fn scene_json(task: Task, seed: u64) -> CString {
    let t = TemplateSet::builtin();
    let scene = generate_scene(t.for_task(task)[0], &GenConfig::for_task(task), &CategoryPool::builtin(), seed).unwrap();
    CString::new(scene.to_canonical_string()).unwrap()
}

fn last_error() -> String {
    let p = hazard_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn digest(w: *const HazardWorld) -> String {
    let mut needed = 0usize;
    let s = unsafe { hazard_world_digest(w, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(s, HazardStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(unsafe { hazard_world_digest(w, buf.as_mut_ptr(), buf.len(), ptr::null_mut()) }, HazardStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn world_lifecycle_is_deterministic() {
    let json = scene_json(Task::Fire, 4);
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(hazard_world_new(json.as_ptr(), &mut a), HazardStatus::Ok);
        assert_eq!(hazard_world_new(json.as_ptr(), &mut b), HazardStatus::Ok);
        assert_eq!(hazard_world_step(a, 90), HazardStatus::Ok);
        assert_eq!(hazard_world_step(b, 90), HazardStatus::Ok);
        let mut frame = 0;
        assert_eq!(hazard_world_frame(a, &mut frame), HazardStatus::Ok);
        assert_eq!(frame, 90);
        assert_eq!(digest(a), digest(b));
        let mut n = 0;
        assert_eq!(hazard_world_object_count(a, &mut n), HazardStatus::Ok);
        assert!(n > 0);
        let mut o = HazardObjectState::default();
        assert_eq!(hazard_world_object(a, 0, &mut o), HazardStatus::Ok);
        assert!(o.temperature.is_finite() && o.status <= 2);
        assert_eq!(hazard_world_object(a, n, &mut o), HazardStatus::OutOfRange);
        assert!(last_error().contains("out of range"));
        hazard_world_free(a);
        hazard_world_free(b);
        hazard_world_free(ptr::null_mut());
    }
}

#[test]
fn bad_inputs_map_to_codes() {
    let mut w = ptr::null_mut();
    unsafe {
        assert_eq!(hazard_world_new(ptr::null(), &mut w), HazardStatus::NullPointer);
        let junk = CString::new("{not json").unwrap();
        assert_eq!(hazard_world_new(junk.as_ptr(), &mut w), HazardStatus::InvalidInput);
        assert!(w.is_null());
        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(hazard_world_new(bad.as_ptr().cast(), &mut w), HazardStatus::InvalidUtf8);
        assert_eq!(hazard_world_step(ptr::null_mut(), 1), HazardStatus::NullPointer);
    }
}

#[test]
fn episode_summary() {
    let json = scene_json(Task::Flood, 2);
    let agent = CString::new("greedy").unwrap();
    let mut s = HazardEpisodeSummary::default();
    unsafe {
        assert_eq!(hazard_run_episode(json.as_ptr(), agent.as_ptr(), 1, 300, &mut s), HazardStatus::Ok);
    }
    assert_eq!(s.frame_limit, 300);
    assert!(s.frames_used <= 300);
    assert!(s.rescued_value <= s.total_value);
    let bogus = CString::new("ppo").unwrap();
    unsafe {
        assert_eq!(hazard_run_episode(json.as_ptr(), bogus.as_ptr(), 1, 300, &mut s), HazardStatus::InvalidInput);
    }
    assert!(last_error().contains("ppo"));
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(hazard_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// The generated header compiles as C when a C compiler is present.
#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/hazard.h");
    let dir = std::env::temp_dir().join(format!("hazard-h-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("probe.c");
    std::fs::write(&src, format!("#include \"{header}\"\nint main(void) {{ HazardWorld *w = 0; hazard_world_free(w); return HAZARD_STATUS_OK; }}\n")).unwrap();
    let Ok(out) = std::process::Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).output() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
