use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_stackguide");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stderr),
        String::from_utf8_lossy(&out.stdout)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn pgm(side: usize, seed: u8) -> Vec<u8> {
    let mut bytes = format!("P5\n{side} {side}\n255\n").into_bytes();
    bytes.extend((0..side * side).map(|i| (i as u8).wrapping_mul(31).wrapping_add(seed)));
    bytes
}

/// Two 64x64 images, 10 m pixels, target at world (500320, 4799680).
fn two_image_stack(dir: &Path, with_second_world_file: bool, target_easting: f64) {
    for (name, seed) in [("a", 1), ("b", 2)] {
        fs::write(dir.join(format!("{name}.pgm")), pgm(64, seed)).unwrap();
    }
    let world = "10\n0\n0\n-10\n500000\n4800000\n";
    fs::write(dir.join("a.pgw"), world).unwrap();
    if with_second_world_file {
        fs::write(dir.join("b.pgw"), world).unwrap();
    }
    let manifest = format!(
        "[target]\neasting = {target_easting}\nnorthing = 4799680.0\n\n\
         [[image]]\nid = \"a\"\nraster = \"a.pgm\"\nworld_file = \"a.pgw\"\n\n\
         [[image]]\nid = \"b\"\nraster = \"b.pgm\"\nworld_file = \"b.pgw\"\n"
    );
    fs::write(dir.join("stack.toml"), manifest).unwrap();
}

#[test]
fn ingest_lists_every_image() {
    let dir = tempfile::tempdir().unwrap();
    two_image_stack(dir.path(), true, 500_320.0);
    let out = ok(dir.path(), &["ingest", "--stack", "stack.toml"]);
    assert!(out.contains("(2 images)"), "{out}");
    assert!(out.contains("target (32.00, 32.00)"), "{out}");
}

#[test]
fn missing_world_file_exits_with_data_error() {
    let dir = tempfile::tempdir().unwrap();
    two_image_stack(dir.path(), false, 500_320.0);
    let out = run(dir.path(), &["ingest", "--stack", "stack.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("malformed world file") && err.contains("b.pgw"), "{err}");
}

#[test]
fn target_outside_an_image_names_it() {
    let dir = tempfile::tempdir().unwrap();
    two_image_stack(dir.path(), true, 499_000.0);
    let out = run(dir.path(), &["ingest", "--stack", "stack.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("target annotation error for image a"), "{err}");
}

#[test]
fn bad_config_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "seed = \"three\"\n").unwrap();
    let out = run(dir.path(), &["--config", "bad.toml", "synth"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(dir.path(), &["--config", "missing.toml", "synth"]);
    assert_eq!(out.status.code(), Some(3));
}

const SMALL: &str = r#"
seed = 4
[scene]
size = 320
parcel_spacing = 32.0
roads = 4
buildings = 60
[sampler]
view_size = 64
zoom_min = 0.8
zoom_max = 1.2
jitter_translation = 16.0
target_in_view_margin = 8.0
focal_px = 64.0
[net]
stage_widths = [4, 8]
blocks_per_stage = [1, 1]
[train]
batch_size = 2
[train.head_only]
steps = 2
[train.sgd_warm]
steps = 2
[train.adaptive]
steps = 4
warmup_steps = 1
[eval]
overlays = 2
[trajectory]
frames = 8
lateral_offset_start = 12.0
zoom_start = 1.2
zoom_end = 0.9
focal_px = 64.0
[protocol]
count = 4
train_count = 3
"#;

fn small_pipeline(dir: &Path) {
    fs::write(dir.join("small.toml"), SMALL).unwrap();
    let c = ["--config", "small.toml", "--threads", "1"];
    let with = |rest: &[&'static str]| -> Vec<&'static str> { [&c[..], rest].concat() };
    ok(dir, &with(&["--out", "stack", "synth", "--recipe", "strong"]));
    ok(
        dir,
        &with(&["--out", "data", "generate", "--stack", "stack/stack.toml", "--train", "6", "--test", "4", "--train-images", "A,A_snow", "--test-images", "B,B_snow"]),
    );
    ok(dir, &with(&["--out", "model", "train", "--data", "data"]));
    ok(dir, &with(&["--out", "eval", "eval", "--data", "data", "--weights", "model/weights.bin", "--stack", "stack/stack.toml", "--reference", "A"]));
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn small_pipeline_produces_side_by_side_report_and_reruns_identically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_pipeline(a.path());
    small_pipeline(b.path());

    let report = fs::read_to_string(a.path().join("eval/report.txt")).unwrap();
    assert!(report.contains("SIFT baseline") && report.contains("Learned (stack)"), "{report}");
    assert!(report.contains("frames with error < 10px"));
    for f in ["config.toml", "frames.tsv", "report.json", "provenance.txt", "report_snow.json", "report_no-snow.json"] {
        assert!(a.path().join("eval").join(f).exists(), "missing eval/{f}");
    }
    assert!(a.path().join("model/loss_curve.tsv").exists());
    let overlays = fs::read_dir(a.path().join("eval/overlays")).unwrap().count();
    assert_eq!(overlays, 2);

    // only views of the allowed images on each side of the split
    let manifest = fs::read_to_string(a.path().join("data/manifest.txt")).unwrap();
    let mut seen = 0;
    for line in manifest.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 3 || !(f[1] == "train" || f[1] == "test") {
            continue;
        }
        let allowed: &[&str] = if f[1] == "train" { &["A", "A_snow"] } else { &["B", "B_snow"] };
        assert!(allowed.contains(&f[2]), "{line}");
        seen += 1;
    }
    assert_eq!(seen, 10);

    assert_eq!(read_tree(a.path()), read_tree(b.path()));

    let shown = ok(a.path(), &["report", "eval/report.json"]);
    assert!(shown.contains("Learned (stack)"));
}

#[test]
fn trajectory_protocol_prints_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    ok(dir.path(), &["--config", "small.toml", "--out", "stack", "synth"]);
    let out = ok(dir.path(), &["--config", "small.toml", "--out", "traj", "trajectory", "--stack", "stack/stack.toml", "--reference", "A"]);
    assert!(out.contains("Learned (stack): ") && out.contains("/1 trajectories successful"), "{out}");
    assert!(out.contains("SIFT baseline: "), "{out}");
    assert_eq!(fs::read_dir(dir.path().join("traj/trajectories")).unwrap().count(), 4);
    assert!(dir.path().join("traj/weights.bin").exists());
}
