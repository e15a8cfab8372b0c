use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vine_nav::kinematics::{deploy_with, KinematicsConfig, Termination, TraceEvent};
use vine_nav::scenarios::{course, maze, pivot_shift};
use vine_nav::{MapModel, Polygon, RobotDesign, Vec2};
use vine_nav_cli::commands::{grid, EVALUATE_HEADER, START_ANGLE_HEADER};
use vine_nav_cli::files::{DesignFile, MapFile, TraceDocument};
use vine_nav_reference::{integrate, ReferenceConfig};

fn vine_nav(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vine-nav"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run vine-nav")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn open_map() -> MapModel {
    MapModel {
        start_angle: Some(0.0),
        goal: Vec2::new(1.0, 0.0),
        success_radius: 0.05,
        ..MapModel::open(vec![])
    }
}

#[test]
fn map_files_round_trip() {
    for map in [maze(), course().map, pivot_shift().0, open_map()] {
        let text = serde_json::to_string(&MapFile::from_model(&map)).unwrap();
        let back = MapFile::parse(&text).unwrap().to_model().unwrap();
        assert_eq!(back, map);
    }
}

#[test]
fn design_files_round_trip() {
    let (_, design) = pivot_shift();
    for angle in [None, Some(-1.25)] {
        let text = serde_json::to_string(&DesignFile::from_design(&design, angle)).unwrap();
        let (back, back_angle) = DesignFile::parse(&text).unwrap().to_design().unwrap();
        assert_eq!(back.segments().len(), design.segments().len());
        for (a, b) in back.segments().iter().zip(design.segments()) {
            assert!((a.length - b.length).abs() < 1e-12);
            assert!((a.turn - b.turn).abs() < 1e-12);
        }
        assert_eq!(back_angle.is_some(), angle.is_some());
        if let (Some(a), Some(b)) = (back_angle, angle) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn map_errors_name_the_field() {
    let two_vertices = r#"{"version":1,"obstacles":[[[0,0],[1,1]]],"start":{"x":0,"y":0,"angle_deg":"free"},
        "goal":{"x":1,"y":0},"success_radius_m":0.1}"#;
    let e = MapFile::parse(two_vertices).unwrap().to_model().unwrap_err();
    assert_eq!(e.path, "obstacles[0]");

    let bad_angle = r#"{"version":1,"obstacles":[],"start":{"x":0,"y":0,"angle_deg":"up"},
        "goal":{"x":1,"y":0},"success_radius_m":0.1}"#;
    let e = MapFile::parse(bad_angle).unwrap_err();
    assert_eq!(e.path, "start.angle_deg");

    let syntax = "{\n  \"version\": 1,\n  \"obstacles\": [,]\n}";
    let e = MapFile::parse(syntax).unwrap_err();
    assert_eq!(e.line, Some(3));

    let e = MapFile::parse(r#"{"version":2,"obstacles":[],"start":{"x":0,"y":0,"angle_deg":0},"goal":{"x":1,"y":0},"success_radius_m":0.1}"#)
        .unwrap()
        .to_model()
        .unwrap_err();
    assert_eq!(e.path, "version");
}

#[test]
fn design_errors_name_the_segment() {
    let e = DesignFile::parse(r#"{"version":1,"segments":[{"length_m":1,"turn_deg":0},{"length_m":-1,"turn_deg":10}],"theta_max_deg":90}"#)
        .unwrap()
        .to_design()
        .unwrap_err();
    assert_eq!(e.path, "segments[1].length_m");
}

#[test]
fn straight_design_in_empty_map() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_json(dir.path(), "map.json", &MapFile::from_model(&open_map()));
    let design = write_json(dir.path(), "d.json", &DesignFile::from_design(&RobotDesign::straight(1.0).unwrap(), None));
    let o = vine_nav(
        &["simulate", "--map", "map.json", "--design", "d.json", "--out-svg", "o.svg", "--out-trace", "o.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let _ = (map, design);
    let doc = TraceDocument::parse(&std::fs::read_to_string(dir.path().join("o.json")).unwrap()).unwrap();
    assert_eq!(doc.trace.events.len(), 2);
    assert!(matches!(doc.trace.events[0], TraceEvent::FreeGrowth { .. }));
    assert!(matches!(
        doc.trace.events[1],
        TraceEvent::Terminated {
            reason: Termination::LengthReached,
            ..
        }
    ));
    let svg = std::fs::read_to_string(dir.path().join("o.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<path").count(), 2);
    assert!(svg.contains(r#"<path class="free_growth" d="M0.000000,-0.000000 L1.000000,-0.000000""#));
}

#[test]
fn svg_has_one_path_per_event_kind() {
    let dir = tempfile::tempdir().unwrap();
    let (map, design) = pivot_shift();
    write_json(dir.path(), "map.json", &MapFile::from_model(&map));
    write_json(dir.path(), "d.json", &DesignFile::from_design(&design, None));
    let o = vine_nav(
        &["simulate", "--map", "map.json", "--design", "d.json", "--out-svg", "o.svg", "--out-trace", "o.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = TraceDocument::parse(&std::fs::read_to_string(dir.path().join("o.json")).unwrap()).unwrap();
    let mut kinds: Vec<&str> = doc.trace.events.iter().map(|e| e.kind()).collect();
    kinds.sort_unstable();
    kinds.dedup();
    assert!(kinds.len() >= 4, "{kinds:?}");
    let svg = std::fs::read_to_string(dir.path().join("o.svg")).unwrap();
    assert_eq!(svg.matches("<path").count(), kinds.len());
    for k in kinds {
        assert_eq!(svg.matches(&format!(r#"<path class="{k}""#)).count(), 1, "{k}");
    }
}

#[test]
fn trace_document_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (map, design) = pivot_shift();
    write_json(dir.path(), "map.json", &MapFile::from_model(&map));
    write_json(dir.path(), "d.json", &DesignFile::from_design(&design, None));
    let o = vine_nav(
        &["simulate", "--map", "map.json", "--design", "d.json", "--out-svg", "o.svg", "--out-trace", "o.json"],
        dir.path(),
    );
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("o.json")).unwrap();
    let doc = TraceDocument::parse(&text).unwrap();
    let direct = deploy_with(design.segments(), &map, map.start, 0.0, &KinematicsConfig::default()).unwrap();
    assert_eq!(doc.trace, direct);
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap() + "\n", text);
}

#[test]
fn course_tip_ends_in_the_oracle_exit() {
    let dir = tempfile::tempdir().unwrap();
    let c = course();
    write_json(dir.path(), "map.json", &MapFile::from_model(&c.map));
    write_json(dir.path(), "d.json", &DesignFile::from_design(&c.design, None));
    for deg in [-150.25, -100.25, -30.25] {
        let o = vine_nav(
            &[
                "simulate",
                "--map",
                "map.json",
                "--design",
                "d.json",
                "--start-angle-deg",
                &deg.to_string(),
                "--out-svg",
                "o.svg",
                "--out-trace",
                "o.json",
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let doc = TraceDocument::parse(&std::fs::read_to_string(dir.path().join("o.json")).unwrap()).unwrap();
        let run = integrate(c.design.segments(), &c.map, c.map.start, f64::to_radians(deg), &ReferenceConfig::default())
            .unwrap();
        let exit = c.exit_of(&doc.trace.tip_points());
        assert!(exit.is_some(), "{deg}");
        assert_eq!(exit, c.exit_of(&run.tip_path), "{deg}");
    }
}

#[test]
fn malformed_map_exits_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"version":1,"obstacles":[[[0,0],[1,1]]],"start":{"x":0,"y":0,"angle_deg":0},"goal":{"x":1,"y":0},"success_radius_m":0.1}"#,
    )
    .unwrap();
    write_json(dir.path(), "d.json", &DesignFile::from_design(&RobotDesign::straight(1.0).unwrap(), None));
    let o = vine_nav(
        &["simulate", "--map", "bad.json", "--design", "d.json", "--out-svg", "o.svg", "--out-trace", "o.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("obstacles[0]"), "{}", stderr(&o));
}

#[test]
fn free_start_without_angle_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write_json(dir.path(), "map.json", &MapFile::from_model(&course().map));
    write_json(dir.path(), "d.json", &DesignFile::from_design(&RobotDesign::straight(1.0).unwrap(), None));
    let o = vine_nav(
        &["simulate", "--map", "map.json", "--design", "d.json", "--out-svg", "o.svg", "--out-trace", "o.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("free"));
}

#[test]
fn head_on_contact_exits_3_naming_the_event() {
    let dir = tempfile::tempdir().unwrap();
    let wall = Polygon::rectangle(Vec2::new(1.0, -1.0), Vec2::new(1.1, 1.0)).unwrap();
    let map = MapModel {
        start_angle: Some(0.0),
        goal: Vec2::new(0.5, 0.5),
        success_radius: 0.05,
        ..MapModel::open(vec![wall])
    };
    write_json(dir.path(), "map.json", &MapFile::from_model(&map));
    write_json(dir.path(), "d.json", &DesignFile::from_design(&RobotDesign::straight(2.0).unwrap(), None));
    let o = vine_nav(
        &["simulate", "--map", "map.json", "--design", "d.json", "--out-svg", "o.svg", "--out-trace", "o.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    let msg = stderr(&o);
    assert!(msg.contains("head-on") && msg.contains("free_growth"), "{msg}");
}

fn boxed_in_map() -> MapModel {
    let pocket = Polygon::new(vec![
        Vec2::new(3.0, 2.0),
        Vec2::new(3.0, 1.0),
        Vec2::new(4.0, 1.0),
        Vec2::new(4.0, 1.1),
        Vec2::new(3.1, 1.1),
        Vec2::new(3.1, 2.0),
    ])
    .unwrap();
    MapModel::new(
        Some(vine_nav::Bounds::new(Vec2::new(-1.0, -2.0), Vec2::new(4.0, 2.0)).unwrap()),
        vec![pocket],
        Vec2::ZERO,
        None,
        Vec2::new(3.5, 1.5),
        0.05,
    )
    .unwrap()
}

#[test]
fn boxed_in_goal_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    write_json(dir.path(), "map.json", &MapFile::from_model(&boxed_in_map()));
    let o = vine_nav(
        &[
            "plan", "--map", "map.json", "--sigma-theta-deg", "2", "--sigma-l-m", "0.01", "--bins", "36",
            "--out-design", "d.json", "--out-report", "r.json",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("unreachable"));
}

#[test]
fn goal_in_sight_plans_no_turn_and_evaluates_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let map = MapModel {
        start_angle: None,
        goal: Vec2::new(1.0, 0.6),
        success_radius: 0.05,
        ..MapModel::open(vec![Polygon::rectangle(Vec2::new(2.0, -1.0), Vec2::new(2.2, 1.0)).unwrap()])
    };
    write_json(dir.path(), "map.json", &MapFile::from_model(&map));
    let o = vine_nav(
        &[
            "plan", "--map", "map.json", "--sigma-theta-deg", "0", "--sigma-l-m", "0", "--samples", "8", "--trials",
            "50", "--out-design", "d.json", "--out-report", "r.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["turn_count"], 0);
    assert_eq!(report["estimate"]["probability"], 1.0);

    let o = vine_nav(
        &[
            "evaluate", "--map", "map.json", "--design", "d.json", "--sigma-theta-deg", "0", "--sigma-l-m", "0",
            "--trials", "100", "--seed", "4", "--out-csv", "e.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(EVALUATE_HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[3], "100");
    assert_eq!(row[4], "100");
    assert_eq!(row[5], "1.0");
    assert_eq!(lines.next(), None);
}

fn parse_row(csv: &str) -> (f64, f64, f64) {
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    (row[5], row[6], row[7])
}

#[test]
fn evaluate_is_reproducible_and_seeds_agree_statistically() {
    let dir = tempfile::tempdir().unwrap();
    let (design, heading) = vine_nav::scenarios::maze_avoidance_design();
    write_json(dir.path(), "map.json", &MapFile::from_model(&maze()));
    write_json(dir.path(), "d.json", &DesignFile::from_design(&design, Some(heading)));
    let run = |seed: &str, out: &str, threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_vine-nav"))
            .current_dir(dir.path())
            .env("VINE_NAV_THREADS", threads)
            .args([
                "evaluate", "--map", "map.json", "--design", "d.json", "--sigma-theta-deg", "6", "--sigma-l-m",
                "0.011", "--map-noise-m", "0.01", "--trials", "1500", "--seed", seed, "--out-csv", out,
            ])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let a = run("1", "a.csv", "1");
    assert_eq!(a, run("1", "b.csv", "2"));
    let c = run("2", "c.csv", "1");
    assert_ne!(a, c);
    let (pa, loa, hia) = parse_row(std::str::from_utf8(&a).unwrap());
    let (pc, loc, hic) = parse_row(std::str::from_utf8(&c).unwrap());
    assert!(pa != pc);
    assert!(loa <= hic && loc <= hia, "disjoint intervals [{loa}, {hia}] [{loc}, {hic}]");
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_vine-nav"))
        .current_dir(dir.path())
        .env("VINE_NAV_THREADS", "many")
        .args(["export", "--scenario", "wall", "--out-map", "m.json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("VINE_NAV_THREADS"));
}

#[test]
fn start_angle_sweep_on_the_hole_map() {
    let dir = tempfile::tempdir().unwrap();
    let o = vine_nav(
        &["export", "--scenario", "hole", "--hole-ratio", "1", "--out-map", "m.json", "--out-design", "d.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = vine_nav(
        &[
            "sweep", "--map", "m.json", "--design", "d.json", "--param", "start_angle", "--range", "30", "100",
            "--steps", "71", "--out-csv", "s.csv", "--out-svg", "s.svg",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(START_ANGLE_HEADER));
    let ok: Vec<f64> = lines
        .filter(|l| l.split(',').nth(1) == Some("success"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    // headings from the hole direction (45 deg) up to just short of perpendicular
    let (lo, hi) = (ok[0], ok[ok.len() - 1]);
    assert!((lo - 45.0).abs() <= 2.0 && (hi - 89.0).abs() <= 2.0, "{lo}..{hi}");
    assert_eq!(ok.len() as f64, hi - lo + 1.0);
    let svg = std::fs::read_to_string(dir.path().join("s.svg")).unwrap();
    assert!(svg.contains("<polyline class=\"curve\""));
}

#[test]
fn sigma_sweep_rows_follow_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = vine_nav(&["export", "--scenario", "maze", "--out-map", "m.json", "--out-design", "d.json"], dir.path());
    assert!(o.status.success());
    let o = vine_nav(
        &[
            "sweep", "--map", "m.json", "--design", "d.json", "--param", "sigma_theta", "--range", "0", "8",
            "--steps", "3", "--trials", "300", "--out-csv", "s.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let sigmas: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(sigmas, ["0.0", "4.0", "8.0"]);
    let p: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    assert_eq!(p[0], 1.0);
    assert!(p[2] < p[0]);
}

#[test]
fn grid_includes_both_ends() {
    assert_eq!(grid(1.0, 2.0, 3), vec![1.0, 1.5, 2.0]);
    assert_eq!(grid(4.0, 9.0, 1), vec![4.0]);
    assert!(grid(0.0, 1.0, 0).is_empty());
}

#[test]
fn oversized_turn_names_the_segment() {
    let e = DesignFile::parse(r#"{"version":1,"segments":[{"length_m":1,"turn_deg":0},{"length_m":1,"turn_deg":95}],"theta_max_deg":90}"#)
        .unwrap()
        .to_design()
        .unwrap_err();
    assert_eq!(e.path, "segments[1].turn_deg");
}
