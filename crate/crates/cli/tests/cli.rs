use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use isoflat::io;
use isoflat::{
    align, make_cylinder_patch, rms_distance, AlignOptions, Grid, Point3, ReportDocument,
};
use isoflat_cli::{execute, RunConfig, Source, EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_PASS};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isoflat"))
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn report(dir: &Path) -> ReportDocument {
    io::read_json(&dir.join("report.json")).unwrap()
}

fn run(args: &[&str]) -> i32 {
    bin().args(args).output().unwrap().status.code().unwrap()
}

const CYLINDER: &str = r#"{"source": {"kind": "cylinder", "radius": 1.0},
    "grid": {"nx": 33, "ny": 17, "hx": 0.19634954084936207, "hy": 0.0625}, "lambda": [0, 1]}"#;

const WAVY_THETA: &str = r#"{"kind": "sine", "base": 1.5707963267948966, "amplitude": 0.3}"#;

fn cylinder_config(out: &Path) -> RunConfig {
    let mut cfg: RunConfig = serde_json::from_str(CYLINDER).unwrap();
    cfg.out = Some(out.to_path_buf());
    cfg
}

#[test]
fn cylinder_check_passes_with_each_check_once() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", CYLINDER);
    let out = dir.path().join("out");
    assert_eq!(run(&["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_PASS);
    let r = report(&out);
    assert!(r.passed);
    assert_eq!(r.command, "check");
    let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "gauss_codazzi",
            "algebra_defect[lambda=0]",
            "zero_curvature[lambda=0]",
            "curved_flat[lambda=0]",
            "algebra_defect[lambda=1]",
            "zero_curvature[lambda=1]",
            "curved_flat[lambda=1]",
        ]
    );
    assert!(out.join("timing.json").exists());
}

#[test]
fn bilinear_k_fails_the_calapso_check() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "k.json",
        r#"{"source": {"kind": "k_bilinear", "a": 1, "d": 0.1}, "grid": {"nx": 17, "ny": 17, "hx": 0.0625, "hy": 0.0625}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_CHECK_FAILED);
    let c = report(&out).get("calapso_residual").unwrap().clone();
    assert!(!c.passed);
    assert!(c.value > 0.0);
    // The surface route refuses such a potential outright.
    assert_eq!(run(&["calapso", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_INPUT_ERROR);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let empty = write_config(
        dir.path(),
        "e.json",
        r#"{"source": {"kind": "plane"}, "grid": {"nx": 0, "ny": 0, "hx": 0.1, "hy": 0.1}}"#,
    );
    assert_eq!(run(&["check", "--config", empty.to_str().unwrap(), "--out", out]), EXIT_INPUT_ERROR);
    let cyl = write_config(dir.path(), "c.json", CYLINDER);
    let cyl = cyl.to_str().unwrap();
    assert_eq!(run(&["build", "--config", cyl, "--out", out, "--lambda", "0,x"]), EXIT_INPUT_ERROR);
    assert_eq!(run(&["build", "--config", cyl, "--out", out, "--grid", "9,9"]), EXIT_INPUT_ERROR);
    assert_eq!(run(&["build", "--config", "/nonexistent/config.json", "--out", out]), EXIT_INPUT_ERROR);
    let bad_field = write_config(dir.path(), "b.json", r#"{"source": {"kind": "cylinder", "radius": 1}, "lambda": "1"}"#);
    assert_eq!(run(&["check", "--config", bad_field.to_str().unwrap(), "--out", out]), EXIT_INPUT_ERROR);
    let no_grid = write_config(dir.path(), "g.json", r#"{"source": {"kind": "cylinder", "radius": 1}}"#);
    let o = bin().args(["check", "--config", no_grid.to_str().unwrap(), "--out", out]).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INPUT_ERROR));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid"));
}

#[test]
fn k_floor_violation_is_reported() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "k.json",
        r#"{"source": {"kind": "k_bilinear", "a": 0, "b": 1}, "grid": {"nx": 9, "ny": 9, "hx": 0.125, "hy": 0.125}}"#,
    );
    let out = dir.path().join("out");
    let o = bin().args(["calapso", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INPUT_ERROR));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("floor") && msg.contains("(0, 0)"), "{msg}");
}

#[test]
fn cylinder_build_writes_snapshots() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let outcome = execute("build", &cylinder_config(&out)).unwrap();
    assert!(outcome.report.passed);
    for f in ["frames_0.json", "frames_1.json", "triple_0.csv", "triple_1.csv", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    // At λ = 0 the f and f^ columns never move.
    let text = fs::read_to_string(out.join("triple_0.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let header = rows.headers().unwrap().clone();
    let cols: Vec<usize> = header.iter().enumerate().filter(|(_, h)| h.starts_with('f')).map(|(k, _)| k).collect();
    assert_eq!(cols.len(), 10);
    for rec in rows.records() {
        let rec = rec.unwrap();
        let vals: Vec<f64> = cols.iter().map(|&k| rec[k].parse().unwrap()).collect();
        assert_eq!(vals, [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }
    let frames: isoflat::frame::FrameJson = io::read_json(&out.join("frames_1.json")).unwrap();
    assert_eq!(frames.frames.len(), 33 * 17);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        execute("build", &cylinder_config(out)).unwrap();
        execute("surfaces", &cylinder_config(out)).unwrap();
    }
    for f in ["frames_0.json", "frames_1.json", "triple_1.csv", "f.obj", "fhat.obj", "f.csv", "report.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

fn obj_vertices(path: &Path) -> Vec<Point3> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.strip_prefix("v "))
        .map(|l| {
            let v: Vec<f64> = l.split(' ').map(|x| x.parse().unwrap()).collect();
            Point3::new(v[0], v[1], v[2])
        })
        .collect()
}

#[test]
fn cylinder_surfaces_and_reflected_dual() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let mut cfg = cylinder_config(&out);
    cfg.grid = Some(Grid::spanning(33, 17, (0.0, 2.0 * PI), (0.0, 1.0)).unwrap());
    cfg.lambda = Some(vec![1.0]);
    let outcome = execute("surfaces", &cfg).unwrap();
    assert!(outcome.report.passed, "{:#?}", outcome.report.failed().collect::<Vec<_>>());
    let f = obj_vertices(&out.join("f.obj"));
    let fhat = obj_vertices(&out.join("fhat.obj"));
    assert_eq!(f.len(), 33 * 17);
    let obj = fs::read_to_string(out.join("f.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("vn ")).count(), 33 * 17);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2 * 32 * 16);
    // The dual is the cylinder reflected in its axis: a half turn about
    // the direction of the rulings.
    let a = align(&fhat, &f, AlignOptions::rigid()).unwrap();
    assert!(a.rms < 1e-2, "{}", a.rms);
    assert!((a.rotation.trace() + 1.0).abs() < 1e-6);
    let axis = (f[33] - f[0]).normalize();
    assert!((a.rotation * axis - axis).norm() < 1e-6);
}

#[test]
fn plane_surfaces() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let mut cfg = RunConfig::new(Source::Plane);
    cfg.grid = Some(Grid::new(9, 9, 0.25, 0.25, 0.0, 0.0).unwrap());
    cfg.out = Some(out.clone());
    assert!(execute("surfaces", &cfg).unwrap().report.passed);
    let f = obj_vertices(&out.join("f.obj"));
    let fhat = obj_vertices(&out.join("fhat.obj"));
    let flat = |pts: &[Point3]| pts.iter().map(|p| (p - pts[0]).dot(&Point3::z())).fold(0.0f64, |a, b| a.max(b.abs()));
    assert!(flat(&f) < 1e-12 && flat(&fhat) < 1e-12);
    // f^ is f reflected in a line of the plane, up to translation.
    let reflected: Vec<Point3> = f.iter().map(|p| Point3::new(-p.x, p.y, p.z)).collect();
    let a = align(&fhat, &reflected, AlignOptions { scale: false, reflection: false }).unwrap();
    assert!(a.rms < 1e-12);
    assert!((a.rotation - nalgebra::Matrix3::identity()).abs().max() < 1e-12);
    assert!(rms_distance(&f, &reflected) > 0.1);
}

#[test]
fn meridian_build_and_surfaces_pass() {
    let dir = TempDir::new().unwrap();
    let json = format!(
        r#"{{"source": {{"kind": "meridian", "theta": {WAVY_THETA}}},
            "grid": {{"nx": 33, "ny": 33, "hx": 0.19634954084936207, "hy": 0.19634954084936207}},
            "lambda": [0.5, 1]}}"#
    );
    let cfg = write_config(dir.path(), "m.json", &json);
    let out = dir.path().join("out");
    let (c, o) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    assert_eq!(run(&["build", "--config", c, "--out", o]), EXIT_PASS);
    let r = report(&out);
    assert!(r.get("cross_route[lambda=1]").unwrap().passed);
    assert_eq!(run(&["surfaces", "--config", c, "--out", o]), EXIT_PASS);
    let r = report(&out);
    assert!(r.get("envelope[lambda=1]").is_some() && r.get("diagonality[lambda=0.5]").is_some());
    // Tightening every tolerance a thousandfold makes the same run fail.
    assert_eq!(run(&["surfaces", "--config", c, "--out", o, "--tol-scale", "1e-3"]), EXIT_CHECK_FAILED);
}

#[test]
fn calapso_reproduces_revolution_data() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let json = format!(
        r#"{{"source": {{"kind": "k_meridian", "theta": {WAVY_THETA}}},
            "grid": {{"nx": 17, "ny": 17, "hx": 0.125, "hy": 0.39269908169872414}}}}"#
    );
    let mut cfg: RunConfig = serde_json::from_str(&json).unwrap();
    cfg.out = Some(out.clone());
    let outcome = execute("calapso", &cfg).unwrap();
    assert!(outcome.report.passed, "{:#?}", outcome.report.failed().collect::<Vec<_>>());
    assert!(outcome.report.get("u_closed_form").unwrap().value < 1e-12);
    assert!(outcome.report.get("revolution_match").is_some());
    let u = io::read_scalar_field(&out.join("u.csv")).unwrap();
    assert_eq!(u.grid().nx, 17);
    assert!(out.join("surface.obj").exists() && out.join("triple.csv").exists());
}

#[test]
fn constant_half_k_gives_the_cylinder() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let mut cfg = RunConfig::new(Source::KMeridian { theta: isoflat::TurningAngle::cylinder(), r_init: 1.0 });
    let g = Grid::spanning(17, 17, (0.0, 1.0), (0.0, 2.0 * PI)).unwrap();
    cfg.grid = Some(g);
    cfg.out = Some(out.clone());
    let outcome = execute("calapso", &cfg).unwrap();
    let r = &outcome.report;
    assert!(r.passed);
    // Exact up to roundoff: k is constant, so every integration step is exact.
    assert!(r.get("revolution_match").unwrap().value < 1e-12);
    assert_eq!(r.info["lambda"], serde_json::json!(isoflat::SURFACE_LAMBDA));
}

#[test]
fn patch_file_and_k_file_sources() {
    let dir = TempDir::new().unwrap();
    let g = Grid::spanning(17, 9, (0.0, 2.0 * PI), (0.0, 1.0)).unwrap();
    io::write_patch(&dir.path().join("p.json"), &make_cylinder_patch(2.0, g).unwrap()).unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"source": {"kind": "patch_file", "path": "p.json"}}"#);
    let out = dir.path().join("out");
    assert_eq!(run(&["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_PASS);
    assert_eq!(report(&out).grid, Some(g));
    // A conflicting --grid is rejected rather than silently ignored.
    let code = run(&["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--grid", "9,9,0.1,0.1"]);
    assert_eq!(code, EXIT_INPUT_ERROR);

    io::write_scalar_field(&dir.path().join("k.csv"), &isoflat::ScalarField::sample(g, |x, _| 0.5 + 0.1 * x)).unwrap();
    let cfg = write_config(dir.path(), "k.json", r#"{"source": {"kind": "k_file", "path": "k.csv"}, "lambda": [1]}"#);
    assert_eq!(run(&["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_PASS);
    fs::write(dir.path().join("k.csv"), "nx,ny,hx,hy,x0,y0\n5,5,0.1,0.1,0,0\n1,2,3\n").unwrap();
    let o = bin().args(["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INPUT_ERROR));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}
