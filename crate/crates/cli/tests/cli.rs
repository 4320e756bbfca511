use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::json;
use sphere_edit::geometry::MobiusTransform;
use sphere_edit::pattern::generate_test_pattern;
use sphere_edit::raster::{BitDepth, Raster, SphericalImage};
use sphere_edit::rational::{rational_equiv, Equivalence, RationalMap};
use sphere_edit::C64;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sphere-edit"));
    c.env_remove("SPHERE_EDIT_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
    pattern: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let pattern = dir.path().join("pattern.png");
        generate_test_pattern(128).unwrap().save(&pattern).unwrap();
        Fixture { dir, pattern }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write_json(&self, name: &str, v: &serde_json::Value) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
        p
    }
}

fn load(p: &Path) -> SphericalImage {
    SphericalImage::load(p).unwrap()
}

#[test]
fn test_pattern_is_two_to_one() {
    let f = Fixture::new();
    let out = f.path("tp.png");
    let o = run(&["test-pattern", "--height", "96", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let img = load(&out);
    assert_eq!((img.width(), img.height()), (192, 96));
    assert_eq!(code(&run(&["test-pattern", "--height", "10", s(&out)])), 2);
}

#[test]
fn pole_rotation_shifts_columns() {
    let f = Fixture::new();
    let out = f.path("rot.png");
    let angle = format!("{}", 2.0 * PI * 16.0 / 256.0);
    let o = run(&["mobius", "--fix", "0", "--fix", "inf", "--angle", &angle, "--filter", "nearest", s(&f.pattern), s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (a, b) = (load(&f.pattern), load(&out));
    for y in 0..128 {
        for x in 0..256 {
            assert_eq!(b.pixel(x, y), a.pixel((x + 16) % 256, y));
        }
    }
}

#[test]
fn render_subcommands_succeed() {
    let f = Fixture::new();
    let p = s(&f.pattern);
    let cases: Vec<Vec<&str>> = vec![
        vec!["power", "--n", "2"],
        vec!["exp-strip", "--lambda", "2"],
        vec!["droste", "--lambda", "4", "--twist", "1", "--inner-radius", "0.5"],
        vec!["droste", "--p", "0.5+0.5i", "--q", "-1", "--lambda", "3"],
        vec!["mobius", "--fix", "-1", "--fix", "1", "--angle", "-0.5", "--scale", "2"],
        vec!["twist", "--lattice", "square", "--multiplier", "-1-1i", "--normalization", "scaled:-0.5"],
        vec!["twist", "--lattice", "hexagonal", "--multiplier", "2", "--supersample", "2"],
        vec!["rational", "--numerator", "-1i,0,1i", "--denominator", "0,2,0"],
        vec!["schottky", "--pair", "-1.5,0.8,1.5,0.8", "--pair", "-1.5i,0.8,1.5i,0.8"],
        vec!["mobius", "--from", "0,1,inf", "--to", "1,inf,0"],
        vec!["mobius", "--matrix", "1,1i,0,1", "--invert"],
    ];
    for (k, args) in cases.iter().enumerate() {
        let out = f.path(&format!("out{k}.png"));
        let mut all = args.clone();
        all.extend([p, s(&out)]);
        let o = run(&all);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        assert_eq!(load(&out).height(), 128);
    }
}

#[test]
fn fit_rational_emits_the_published_map() {
    let f = Fixture::new();
    let coeffs = f.path("coeffs.json");
    let o = run(&["fit-rational", "--multiplier", "1+1i", "--lattice", "square", "--degree", "2", "--emit", s(&coeffs)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let fitted: RationalMap = serde_json::from_str(&std::fs::read_to_string(&coeffs).unwrap()).unwrap();
    let c = |re, im| C64::new(re, im);
    let published = RationalMap::new(vec![c(0.0, -1.0), c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert!(rational_equiv(&fitted, &published, 1e-6, Equivalence::Strict));

    // the emitted file drives the rational subcommand
    let out = f.path("r.png");
    let o = run(&["rational", "--coeffs", s(&coeffs), s(&f.pattern), s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = run(&["fit-rational", "--multiplier", "2+1i", "--lattice", "square", "--degree", "4"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("degree 4"), "{}", stderr(&o));
    let o = run(&["fit-rational", "--multiplier", "1+1i", "--lattice", "hexagonal", "--degree", "2"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    let out = f.path("o.png");
    // missing input
    assert_eq!(code(&run(&["power", "--n", "2", s(&f.path("nope.png")), s(&out)])), 3);
    // bad flag value
    assert_eq!(code(&run(&["power", "--n", "x", s(&f.pattern), s(&out)])), 2);
    assert_eq!(code(&run(&["twist", "--lattice", "square", "--multiplier", "1+", s(&f.pattern), s(&out)])), 2);
    // power with n = 1
    let o = run(&["power", "--n", "1", s(&f.pattern), s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("stage 1 (power)"), "{}", stderr(&o));
    // config that is not JSON
    let cfg = f.path("bad.json");
    std::fs::write(&cfg, "{").unwrap();
    assert_eq!(code(&run(&["run", s(&cfg)])), 2);
}

#[test]
fn nonstandard_aspect_needs_the_flag() {
    let f = Fixture::new();
    let odd = f.path("odd.png");
    Raster::filled(100, 80, BitDepth::Eight, [10, 20, 30]).unwrap().save(&odd).unwrap();
    let out = f.path("o.png");
    let o = run(&["power", "--n", "2", s(&odd), s(&out)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("--allow-nonstandard"));
    let o = run(&["power", "--n", "2", "--allow-nonstandard", s(&odd), s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let img = load(&out);
    assert_eq!(img.width(), 2 * img.height());
}

#[test]
fn unknown_keys_are_config_errors() {
    let f = Fixture::new();
    let cfg = f.write_json(
        "c.json",
        &json!({"input": "pattern.png", "output": "o.png", "stages": [{"type": "power", "n": 2}, {"type": "mobius", "angel": 1}]}),
    );
    let o = run(&["run", s(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("stage 2") && stderr(&o).contains("angel"), "{}", stderr(&o));
    let cfg = f.write_json("d.json", &json!({"input": "pattern.png", "output": "o.png", "stages": [], "verbose": true}));
    assert_eq!(code(&run(&["run", s(&cfg)])), 2);
}

#[test]
fn validate_reports() {
    let f = Fixture::new();
    let valid = f.write_json(
        "valid.json",
        &json!({
            "input": "pattern.png",
            "output": "o.png",
            "stages": [
                {"type": "mobius", "fix": [0, "inf"], "angle": 0.3},
                {"type": "rational", "fit": {"lattice": "square", "multiplier": "2+1i", "degree": 5}},
                {"type": "schottky", "pairs": [{"from": {"center": -2, "radius": 0.5}, "to": {"center": 2, "radius": 0.5}}]}
            ]
        }),
    );
    let o = run(&["validate", s(&valid)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(!f.path("o.png").exists());

    let overlap = f.write_json(
        "overlap.json",
        &json!({"stages": [{"type": "schottky", "pairs": [
            {"from": {"center": -1, "radius": 0.8}, "to": {"center": 1, "radius": 0.8}},
            {"from": {"center": "-0.5i", "radius": 0.8}, "to": {"center": "1.5i", "radius": 0.8}}
        ]}]}),
    );
    let o = run(&["validate", s(&overlap)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("overlap"), "{}", String::from_utf8_lossy(&o.stdout));

    let low = f.write_json(
        "low.json",
        &json!({"stages": [{"type": "rational", "fit": {"lattice": "square", "multiplier": "2", "degree": 3}}]}),
    );
    let o = run(&["validate", s(&low)]);
    assert_eq!(code(&o), 4);
    let report = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(report.contains("stage 1 (rational)") && report.contains("degree 3"), "{report}");
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let f = Fixture::new();
    let mut outputs = Vec::new();
    for jobs in ["1", "2", "8"] {
        let out = f.path(&format!("j{jobs}.png"));
        let o = run(&["--jobs", jobs, "twist", "--lattice", "square", "--multiplier", "2+1i", "--supersample", "2", s(&f.pattern), s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        outputs.push(std::fs::read(&out).unwrap());
    }
    let out = f.path("env.png");
    let o = bin()
        .env("SPHERE_EDIT_JOBS", "3")
        .args(["twist", "--lattice", "square", "--multiplier", "2+1i", "--supersample", "2", s(&f.pattern), s(&out)])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    outputs.push(std::fs::read(&out).unwrap());
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn consecutive_mobius_stages_fuse() {
    let f = Fixture::new();
    let a = MobiusTransform::two_point(
        sphere_edit::geometry::ProjectivePoint::real(0.5),
        sphere_edit::geometry::ProjectivePoint::real(-2.0),
        0.4,
        1.7,
    )
    .unwrap();
    let b = MobiusTransform::new(C64::new(1.0, 0.0), C64::new(0.2, 0.3), C64::new(0.0, 0.0), C64::new(1.0, 0.0)).unwrap();
    let m = |t: &MobiusTransform| json!({"type": "mobius", "matrix": [[t.a.re, t.a.im], [t.b.re, t.b.im], [t.c.re, t.c.im], [t.d.re, t.d.im]]});
    let staged = f.write_json("staged.json", &json!({"input": "pattern.png", "output": "staged.png", "stages": [m(&a), m(&b)]}));
    let fused = f.write_json("fused.json", &json!({"input": "pattern.png", "output": "fused.png", "stages": [m(&a.compose(&b))]}));
    for cfg in [&staged, &fused] {
        let o = run(&["run", s(cfg)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(f.path("staged.png")).unwrap(), std::fs::read(f.path("fused.png")).unwrap());
}

#[test]
fn frames_with_animation() {
    let f = Fixture::new();
    let frames = f.path("frames");
    std::fs::create_dir(&frames).unwrap();
    for name in ["b.png", "a.png", "c.png"] {
        std::fs::copy(&f.pattern, frames.join(name)).unwrap();
    }
    std::fs::write(frames.join("notes.txt"), "not a frame").unwrap();
    let out = f.path("out");
    let cfg = f.write_json(
        "anim.json",
        &json!({
            "frames": "frames",
            "output": "out",
            "sampling": {"filter": "nearest"},
            "stages": [{"type": "mobius", "angle": 0.0, "animate": {"param": "angle", "from": 0.0, "to": 2.0 * PI * 32.0 / 256.0}}]
        }),
    );
    let o = run(&["run", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stderr(&o).matches("frame ").count(), 3);
    let input = load(&f.pattern);
    for (name, shift) in [("a.png", 0), ("b.png", 16), ("c.png", 32)] {
        let img = load(&out.join(name));
        for y in 0..128 {
            for x in 0..256 {
                assert_eq!(img.pixel(x, y), input.pixel((x + shift) % 256, y), "{name}");
            }
        }
    }

    // flags override the config
    let single = f.path("single.png");
    let o = run(&["run", s(&cfg), "--input", s(&f.pattern), "--output", s(&single)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(load(&single), input);
}

#[test]
fn composite_and_schottky_mask() {
    let f = Fixture::new();
    let sources = f.write_json(
        "sources.json",
        &json!({"sources": [
            {"region": {"kind": "disk", "center": 0, "radius": 1}, "stages": [{"type": "power", "n": 2}]},
            {"region": {"kind": "all"}, "input": "pattern.png", "stages": [{"type": "mobius", "angle": 1.0}, {"type": "mobius", "scale": 2.0}]}
        ]}),
    );
    let out = f.path("comp.png");
    let o = run(&["composite", s(&sources), s(&f.pattern), s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let bad = f.write_json("bad_sources.json", &json!({"sources": [{"region": {"kind": "all"}, "stages": [{"type": "schottky"}]}]}));
    assert_eq!(code(&run(&["composite", s(&bad), s(&f.pattern), s(&out)])), 2);

    // a red/green mask is completed from the generators
    let mask = f.path("mask.png");
    let disk_a = sphere_edit::schottky::Disk::planar(C64::new(-1.5, 0.0), 0.8);
    let disk_b = sphere_edit::schottky::Disk::planar(C64::new(0.0, -1.5), 0.8);
    sphere_edit::schottky::paint_disks(128, &disk_a, Some(&disk_b)).unwrap().save(&mask).unwrap();
    let pair = |c1: C64, c2: C64| sphere_edit::schottky::circle_pairing(c1, 0.8, c2, 0.8).unwrap();
    let mat = |t: MobiusTransform| format!("{}{:+}i,{}{:+}i,{}{:+}i,{}{:+}i", t.a.re, t.a.im, t.b.re, t.b.im, t.c.re, t.c.im, t.d.re, t.d.im);
    let a = mat(pair(C64::new(-1.5, 0.0), C64::new(1.5, 0.0)));
    let b = mat(pair(C64::new(0.0, -1.5), C64::new(0.0, 1.5)));
    let out = f.path("schottky.png");
    let o = run(&["schottky", "--a", &a, "--b", &b, "--mask", s(&mask), s(&f.pattern), s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}
