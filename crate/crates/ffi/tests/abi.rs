use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use semplan_ffi::*;

fn fixture(rel: &str) -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(rel);
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn last_error() -> String {
    let p = semplan_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let text = CStr::from_ptr(s).to_string_lossy().into_owned();
    semplan_string_free(s);
    text
}

unsafe fn load(rel: &str) -> *mut SemplanMap {
    let mut map = ptr::null_mut();
    assert_eq!(semplan_map_from_json(fixture(rel).as_ptr(), &mut map), SemplanStatus::Ok);
    map
}

#[test]
fn map_lifecycle_and_locate() {
    unsafe {
        let map = load("maps/home.json");
        let mut out = ptr::null_mut();
        assert_eq!(semplan_map_locate(map, 2.0, 1.5, &mut out), SemplanStatus::Ok);
        assert_eq!(take(out), "kitchen/kitchen_table");
        assert_eq!(semplan_map_locate(map, -5.0, 1.0, &mut out), SemplanStatus::OutsideArena);
        assert!(out.is_null());

        assert_eq!(semplan_map_to_json(map, &mut out), SemplanStatus::Ok);
        let canonical = take(out);
        let c = CString::new(canonical.clone()).unwrap();
        let mut again = ptr::null_mut();
        assert_eq!(semplan_map_from_json(c.as_ptr(), &mut again), SemplanStatus::Ok);
        assert_eq!(semplan_map_to_json(again, &mut out), SemplanStatus::Ok);
        assert_eq!(take(out), canonical);
        semplan_map_free(again);
        semplan_map_free(map);
    }
}

#[test]
fn invalid_maps_report_status_and_message() {
    unsafe {
        let mut map = ptr::null_mut();
        let status = semplan_map_from_json(fixture("invalid_maps/dangling_room.json").as_ptr(), &mut map);
        assert_eq!(status, SemplanStatus::ValidationError);
        assert!(map.is_null());
        assert!(last_error().contains("kitchen_table"));
        let status = semplan_map_from_json(fixture("invalid_maps/not_json.json").as_ptr(), &mut map);
        assert_eq!(status, SemplanStatus::ParseError);
        assert_eq!(semplan_map_from_json(ptr::null(), &mut map), SemplanStatus::NullArgument);
        let bad = [0xffu8, 0];
        assert_eq!(semplan_map_from_json(bad.as_ptr().cast(), &mut map), SemplanStatus::InvalidUtf8);
    }
}

#[test]
fn paths_and_door_closing() {
    unsafe {
        let map = load("maps/parallel_doors.json");
        let mut path = ptr::null_mut();
        assert_eq!(semplan_plan_path(map, 2.0, 2.0, 8.0, 2.0, &mut path), SemplanStatus::Ok);
        assert!((semplan_path_length(path) - 6.0).abs() < 1e-12);
        assert_eq!(semplan_path_waypoint_count(path), 3);
        let (mut x, mut y) = (0.0, 0.0);
        assert_eq!(semplan_path_waypoint(path, 1, &mut x, &mut y), SemplanStatus::Ok);
        assert_eq!((x, y), (5.0, 2.0));
        assert_eq!(semplan_path_waypoint(path, 3, &mut x, &mut y), SemplanStatus::IndexOutOfRange);
        let mut json = ptr::null_mut();
        assert_eq!(semplan_path_to_json(path, &mut json), SemplanStatus::Ok);
        assert!(take(json).contains("near_door"));
        semplan_path_free(path);

        let near = CString::new("near_door").unwrap();
        assert_eq!(semplan_map_set_door_passable(map, near.as_ptr(), false), SemplanStatus::Ok);
        assert_eq!(semplan_plan_path(map, 2.0, 2.0, 8.0, 2.0, &mut path), SemplanStatus::Ok);
        assert!((semplan_path_length(path) - 2.0 * 45f64.sqrt()).abs() < 1e-12);
        semplan_path_free(path);

        let far = CString::new("far_door").unwrap();
        assert_eq!(semplan_map_set_door_passable(map, far.as_ptr(), false), SemplanStatus::Ok);
        assert_eq!(semplan_plan_path(map, 2.0, 2.0, 8.0, 2.0, &mut path), SemplanStatus::NoPath);
        assert!(path.is_null());
        let ghost = CString::new("ghost").unwrap();
        assert_eq!(semplan_map_set_door_passable(map, ghost.as_ptr(), true), SemplanStatus::UnknownDoor);
        assert_eq!(semplan_plan_path(map, 50.0, 2.0, 8.0, 2.0, &mut path), SemplanStatus::OutsideArena);
        assert_eq!(semplan_plan_path(map, f64::NAN, 2.0, 8.0, 2.0, &mut path), SemplanStatus::ParseError);
        semplan_map_free(map);

        assert!(semplan_path_length(ptr::null()).is_nan());
        assert_eq!(semplan_path_waypoint_count(ptr::null()), 0);
        semplan_path_free(ptr::null_mut());
        semplan_map_free(ptr::null_mut());
        semplan_string_free(ptr::null_mut());
    }
}

#[test]
fn furniture_goals() {
    unsafe {
        let map = load("maps/home.json");
        let mut path = ptr::null_mut();
        let table = CString::new("kitchen_table").unwrap();
        assert_eq!(semplan_plan_path_to_furniture(map, 10.0, 2.0, table.as_ptr(), &mut path), SemplanStatus::Ok);
        assert_eq!(semplan_path_waypoint_count(path), 4);
        semplan_path_free(path);
        let sofa = CString::new("sofa").unwrap();
        assert_eq!(
            semplan_plan_path_to_furniture(map, 10.0, 2.0, sofa.as_ptr(), &mut path),
            SemplanStatus::UnknownFurniture
        );
        semplan_map_free(map);
    }
}

#[test]
fn scripted_task_planning() {
    unsafe {
        let map = load("maps/home.json");
        let world = fixture("worlds/home.json");
        let mut out = ptr::null_mut();
        let scenario = fixture("scenarios/bring_apple.json");
        let status =
            semplan_plan_task_scripted(map, world.as_ptr(), scenario.as_ptr(), ptr::null(), ptr::null(), 20, &mut out);
        assert_eq!(status, SemplanStatus::Ok, "{}", last_error());
        let report: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        let steps = report["plan"]["steps"].as_array().unwrap();
        assert_eq!(steps.len(), 6);
        assert_eq!(steps[5]["skill"], "done");
        assert!(report["execution"]["steps"].as_array().unwrap().iter().all(|s| s["outcome"]["status"] == "ok"));

        let ambiguous = fixture("scenarios/put_it_on_the_thing.json");
        let status =
            semplan_plan_task_scripted(map, world.as_ptr(), ambiguous.as_ptr(), ptr::null(), ptr::null(), 20, &mut out);
        assert_eq!(status, SemplanStatus::UnresolvedAmbiguity);
        let answers = CString::new("cup\nkitchen table\n").unwrap();
        let status =
            semplan_plan_task_scripted(map, world.as_ptr(), ambiguous.as_ptr(), ptr::null(), answers.as_ptr(), 20, &mut out);
        assert_eq!(status, SemplanStatus::Ok, "{}", last_error());
        let report: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(report["command"]["resolved"], "Put the cup on the kitchen table");

        let long = fixture("long_scenarios/never_done.json");
        let status = semplan_plan_task_scripted(map, world.as_ptr(), long.as_ptr(), ptr::null(), ptr::null(), 20, &mut out);
        assert_eq!(status, SemplanStatus::PlanningFailed);
        assert!(out.is_null());
        semplan_map_free(map);
    }
}
