use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kirchhoff_dirac::apertures::load_mask;
use kirchhoff_dirac::fgrid::FieldFile;
use tempfile::TempDir;

fn kdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdiff")).args(args).output().expect("kdiff runs")
}

fn ok(args: &[&str]) -> HashMap<String, String> {
    let out = kdiff(args);
    assert!(out.status.success(), "kdiff {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(report: &HashMap<String, String>, key: &str) -> f64 {
    report[key].parse().unwrap_or_else(|_| panic!("{key}={} is not a number", report[key]))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Writes a config whose `[output]` points inside the temp dir.
    fn config(&self, name: &str, body: &str) -> PathBuf {
        let out = self.path(&format!("{name}.fgrid"));
        let text = format!("{body}\n[output]\nfield = {}\n", out.display());
        let path = self.path(&format!("{name}.cfg"));
        fs::write(&path, text).unwrap();
        path
    }

    fn propagate(&self, name: &str, body: &str) -> (PathBuf, HashMap<String, String>) {
        let cfg = self.config(name, body);
        let report = ok(&["propagate", path_str(&cfg)]);
        (self.path(&format!("{name}.fgrid")), report)
    }
}

const AIRY: &str = "\
[wave]
k = 50

[source]
type = plane

[aperture]
kind = circular
grid = 64
extent = 2.0
radius = 0.5

[propagation]
method = fraunhofer

[detector]
mode = angular
distance = 1e9
grid = 21
dx = 0.5
";

#[test]
fn circular_open_fraction_matches_area() {
    let run = Run::new();
    let out = run.path("disc.fgrid");
    let r = ok(&["aperture", "--kind", "circular", "--radius", "1.0", "--grid", "512", "--extent", "4.0", "-o", path_str(&out)]);
    let expect = PI * 1.0 / (4.0 * 4.0);
    assert!((num(&r, "open_fraction") - expect).abs() < 1e-3, "{}", r["open_fraction"]);
    let mask = load_mask(&out).unwrap();
    assert_eq!(mask.grid().nx, 512);
    assert_eq!(mask.open_count() as f64, num(&r, "open_pixels"));
}

fn rising_edges(mask: &kirchhoff_dirac::RealGrid, iy: usize, ix0: usize, ix1: usize) -> usize {
    (ix0..ix1).filter(|&ix| *mask.get(ix, iy) == 0.0 && *mask.get(ix + 1, iy) > 0.0).count()
}

/// Upward crossings of `φ = −π/2 (mod 2π)` between two phases on a
/// monotone path, i.e. the number of dark-to-open transitions.
fn crossings(phi0: f64, phi1: f64) -> usize {
    let first = ((phi0 + PI / 2.0) / TAU).floor() as i64 + 1;
    let last = ((phi1 + PI / 2.0) / TAU).floor() as i64;
    (last - first + 1).max(0) as usize
}

#[test]
fn fork_mask_has_one_dislocation() {
    let run = Run::new();
    let out = run.path("fork.fgrid");
    let period = 0.25;
    let r = ok(&["aperture", "--kind", "fork", "--charge", "1", "--period", "0.25", "-o", path_str(&out)]);
    assert!(num(&r, "open_fraction") > 0.0);
    let mask = load_mask(&out).unwrap();
    let g = *mask.grid();
    // Rows a quarter unit above and below the centre, over a chord inside the
    // default radius. Along these rows the grating phase is monotone in x.
    let ix0 = (0..g.nx).find(|&i| g.x(i) >= -1.5).unwrap();
    let ix1 = (0..g.nx).rev().find(|&i| g.x(i) <= 1.5).unwrap();
    let phase = |x: f64, y: f64| TAU * x / period + y.atan2(x);
    let mut counts = Vec::new();
    for target in [0.25, -0.25] {
        let iy = (0..g.ny).min_by(|&a, &b| (g.y(a) - target).abs().total_cmp(&(g.y(b) - target).abs())).unwrap();
        let y = g.y(iy);
        let measured = rising_edges(mask.field(), iy, ix0, ix1);
        assert_eq!(measured, crossings(phase(g.x(ix0), y), phase(g.x(ix1), y)), "row y={y}");
        counts.push(measured);
    }
    assert_eq!(counts[1], counts[0] + 1, "{counts:?}");
}

#[test]
fn invalid_kind_is_a_usage_error() {
    let out = kdiff(&["aperture", "--kind", "hexagon", "--radius", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("possible values"));
    let out = kdiff(&["aperture", "--kind", "circular"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("radius"));
}

#[test]
fn fraunhofer_airy_peak_at_centre() {
    let run = Run::new();
    let (field, r) = run.propagate("airy", AIRY);
    assert_eq!(r["method"], "fraunhofer");
    assert_eq!((r["peak_ix"].as_str(), r["peak_iy"].as_str()), ("10", "10"));
    // On axis the far field is the lit area.
    let area = PI * 0.25;
    assert!((num(&r, "peak_intensity").sqrt() - area).abs() / area < 0.02);
    let file = FieldFile::read(&field).unwrap();
    assert_eq!(file.components(), 1);
    assert_eq!(file.k, 50.0);
    let a = ok(&["analyze", path_str(&field), "--analysis", "intensity"]);
    assert_eq!(a["peak_ix"], "10");
}

#[test]
fn spinor_fraunhofer_conserves_spin() {
    let run = Run::new();
    for (state, target) in [("up", 1.0), ("down", -1.0)] {
        let body = AIRY.replace("method = fraunhofer", "method = spinor-fraunhofer").replace("k = 50", "k = 50\nkappa = 0.4");
        let (field, r) = run.propagate(state, &format!("{body}\n[spin]\nstate = {state}\n"));
        assert_eq!(r["components"], "4");
        let spin_out = run.path(&format!("{state}-spin.fgrid"));
        let s = ok(&["analyze", path_str(&field), "--analysis", "spin", "-o", path_str(&spin_out)]);
        assert!(num(&s, "lit_pixels") > 0.0);
        assert!((num(&s, "min_spin") - target).abs() < 1e-12, "{s:?}");
        assert!((num(&s, "max_spin") - target).abs() < 1e-12, "{s:?}");
        assert_eq!(FieldFile::read(&spin_out).unwrap().components(), 1);
    }
}

#[test]
fn missing_key_exits_two_and_names_it() {
    let run = Run::new();
    let cfg = run.config("bad", &AIRY.replace("distance = 1e9\n", ""));
    let out = kdiff(&["propagate", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("detector.distance"));
}

#[test]
fn config_errors_carry_line_numbers() {
    let run = Run::new();
    let cfg = run.config("typo", &AIRY.replace("radius = 0.5", "raduis = 0.5"));
    let out = kdiff(&["propagate", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 11") && err.contains("aperture.raduis"), "{err}");

    let cfg = run.config("scalar-spin", &format!("{AIRY}\n[spin]\nstate = up\n"));
    let out = kdiff(&["propagate", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_mask_file_is_reported() {
    let run = Run::new();
    let missing = run.path("nowhere.fgrid");
    let body = AIRY.replace(
        "kind = circular\ngrid = 64\nextent = 2.0\nradius = 0.5",
        &format!("kind = file\npath = {}", missing.display()),
    );
    let cfg = run.config("nomask", &body);
    let out = kdiff(&["propagate", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.fgrid"));
}

#[test]
fn spin_on_scalar_file_is_rejected() {
    let run = Run::new();
    let (field, _) = run.propagate("scalar", AIRY);
    let out = kdiff(&["analyze", path_str(&field), "--analysis", "spin"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("4-component"));
}

#[test]
fn fork_far_field_first_order_winds_once() {
    let run = Run::new();
    let period = 0.125;
    let mask = run.path("fork-mask.fgrid");
    ok(&["aperture", "--kind", "fork", "--grid", "256", "--extent", "2.5", "--radius", "1.0", "--period", "0.125", "-o", path_str(&mask)]);
    let body = format!(
        "[wave]\nk = 100\n[source]\ntype = plane\n[aperture]\nkind = file\npath = {}\n[propagation]\nmethod = fraunhofer\n\
         [detector]\nmode = angular\ndistance = 1e9\ngrid = 65\ndx = 0.25\ncenter = {}, 0\n",
        mask.display(),
        TAU / period
    );
    let (field, _) = run.propagate("vortex", &body);
    for radius in ["5", "6"] {
        let w = ok(&["analyze", path_str(&field), "--analysis", "winding", "--radius", radius]);
        assert_eq!(w["winding"], "1", "{w:?}");
        assert!(num(&w, "residual").abs() < 0.1);
    }
    let w = ok(&["analyze", path_str(&field), "--analysis", "winding", "--center", "32,32", "--radius", "5"]);
    assert_eq!(w["winding"], "1");
}

const NEAR: &str = "\
[wave]
k = 40

[source]
type = point
position = 0.05, 0, -12

[aperture]
kind = slit
grid = 48
extent = 1.2
width = 0.6
height = 0.3

[propagation]
method = kirchhoff

[detector]
mode = real
distance = 20
grid = 15
extent = 12
";

#[test]
fn kirchhoff_is_average_of_rayleigh_sommerfeld() {
    let run = Run::new();
    let (kf, _) = run.propagate("kf", NEAR);
    let (rs1, _) = run.propagate("rs1", &NEAR.replace("method = kirchhoff", "method = rs1"));
    let (rs2, _) = run.propagate("rs2", &NEAR.replace("method = kirchhoff", "method = rs2"));
    let c = ok(&["analyze", path_str(&kf), "--analysis", "compare", "--with", path_str(&rs1), "--with", path_str(&rs2)]);
    assert_eq!(c["references"], "2");
    assert!(num(&c, "l2_relative") < 1e-12, "{c:?}");
    // The two Rayleigh-Sommerfeld results differ on their own.
    let d = ok(&["analyze", path_str(&rs1), "--analysis", "compare", "--with", path_str(&rs2)]);
    assert!(num(&d, "l2_relative") > 1e-6);
}

#[test]
fn identical_configs_give_identical_files() {
    let run = Run::new();
    let body = NEAR.replace("method = kirchhoff", "method = spinor-kirchhoff") + "\n[spin]\nstate = up\n";
    let (a, _) = run.propagate("first", &body);
    let (b, _) = run.propagate("second", &body);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn written_files_read_back_unchanged() {
    let run = Run::new();
    let mask = run.path("saved-mask.fgrid");
    let field = run.path("rt.fgrid");
    let cfg = run.path("rt.cfg");
    fs::write(&cfg, format!("{NEAR}\n[output]\nfield = {}\nmask = {}\n", field.display(), mask.display())).unwrap();
    ok(&["propagate", path_str(&cfg)]);
    let phase_out = run.path("phase.fgrid");
    ok(&["analyze", path_str(&field), "--analysis", "phase", "-o", path_str(&phase_out)]);
    for p in [&mask, &field, &phase_out] {
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(FieldFile::parse(&text).unwrap().to_text(), text, "{}", p.display());
    }
    let direct = ok(&["aperture", "--kind", "slit", "--grid", "48", "--extent", "1.2", "--width", "0.6", "--height", "0.3", "-o", path_str(&run.path("direct.fgrid"))]);
    assert_eq!(fs::read(run.path("direct.fgrid")).unwrap(), fs::read(&mask).unwrap());
    assert_eq!(direct["open_pixels"], load_mask(&mask).unwrap().open_count().to_string());
}

#[test]
fn helmholtz_kirchhoff_reconstructs_source_wave() {
    let run = Run::new();
    let body = "\
[wave]
k = 6.283185307179586
[source]
type = point
position = 0.3, 0, -4
[propagation]
method = helmholtz-kirchhoff
[detector]
mode = real
distance = 0.2
grid = 5
extent = 1
[surface]
radius = 2
n_theta = 96
n_phi = 192
";
    let (field, r) = run.propagate("hk", body);
    assert!(num(&r, "max_abs_error") < 1e-3, "{r:?}");
    assert_eq!(FieldFile::read(field).unwrap().grid().nx, 5);
}
