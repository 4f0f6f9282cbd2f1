use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn socdist(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socdist"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn pgm(w: usize, h: usize, px: impl Fn(usize, usize) -> u8) -> Vec<u8> {
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    for y in 0..h {
        for x in 0..w {
            bytes.push(px(x, y));
        }
    }
    bytes
}

#[test]
fn empty_detections_give_empty_tracks() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("dets.txt"), "").unwrap();
    let out = socdist(dir.path(), &["track", "--set", "detections=dets.txt", "--set", "output_dir=out"]);
    ok(&out);
    assert_eq!(fs::read_to_string(dir.path().join("out/tracks.txt")).unwrap(), "");
}

#[test]
fn out_of_order_frames_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("dets.txt"),
        "2,-1,10,10,15,30,0.9,1,1\n1,-1,40,10,15,30,0.9,1,1\n",
    )
    .unwrap();
    let out = socdist(dir.path(), &["track", "--set", "detections=dets.txt", "--set", "output_dir=out"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("frame 1 appears after frame 2"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(socdist(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn unknown_keys_and_missing_fps_fail() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t.txt"), "").unwrap();
    let out = socdist(dir.path(), &["analyze", "--set", "tracks=t.txt", "--set", "output_dir=o"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fps"));

    let out = socdist(dir.path(), &["analyze", "--set", "fsp=15"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_empty_tracks() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t.txt"), "").unwrap();
    let out = socdist(
        dir.path(),
        &["analyze", "--set", "tracks=t.txt", "--set", "output_dir=o", "--set", "fps=15"],
    );
    ok(&out);
    assert_eq!(fs::read_to_string(dir.path().join("o/events.jsonl")).unwrap(), "");
    let r = json(&dir.path().join("o/report.json"));
    assert_eq!(r["event_count"], 0);
    assert_eq!(r["trajectory_count"], 0);
}

fn synth_scene(dir: &Path, extra: &str) {
    fs::write(
        dir.join("scene.conf"),
        format!("output_dir = out\ngt = out/gt.txt\ngroups = out/groundtruth.json\nfps = 15\n{extra}"),
    )
    .unwrap();
    ok(&socdist(dir, &["synth", "--config", "scene.conf"]));
}

#[test]
fn synth_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [a.path(), b.path()] {
        synth_scene(d, "seed = 4\npedestrians = 8\ngroup_count = 2\njitter_sigma = 1\nmiss_rate = 0.1\n");
    }
    for f in ["detections.txt", "gt.txt", "labelled_tracks.txt", "groundtruth.json"] {
        assert_eq!(
            fs::read(a.path().join("out").join(f)).unwrap(),
            fs::read(b.path().join("out").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn ground_truth_scores_perfectly_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), "seed = 9\npedestrians = 10\ngroup_count = 3\n");
    let d = dir.path();
    ok(&socdist(d, &["eval-mot", "--config", "scene.conf", "--set", "tracks=out/gt.txt"]));
    let m = json(&d.join("out/mot_metrics.json"));
    assert_eq!(m["mota"], 1.0);
    assert_eq!(m["idsw"], 0);

    // the same truth as predictions: every removed pair is a true group pair
    ok(&socdist(d, &["eval-groups", "--config", "scene.conf", "--set", "tracks=out/gt.txt"]));
    let g = json(&d.join("out/group_metrics.json"));
    assert_eq!(g["recall"], 1.0);
    assert!(g["precision"].as_f64().unwrap() > 0.8, "{g}");
}

#[test]
fn lone_groups_raise_no_events() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path(), "seed = 2\npedestrians = 2\ngroup_count = 1\n");
    let d = dir.path();
    ok(&socdist(d, &["analyze", "--config", "scene.conf", "--set", "tracks=out/gt.txt"]));
    let r = json(&d.join("out/report.json"));
    assert!(r["close_pair_frames"].as_u64().unwrap() > 0);
    assert_eq!(r["event_count"], 0);
}

#[test]
fn parallel_configs_match_serial_runs() {
    let root = tempfile::tempdir().unwrap();
    for k in 0..3 {
        let d = root.path().join(format!("v{k}"));
        fs::create_dir(&d).unwrap();
        synth_scene(&d, &format!("seed = {k}\npedestrians = 12\njitter_sigma = 1\n"));
        fs::write(d.join("track.conf"), "detections = out/detections.txt\noutput_dir = par\n").unwrap();
    }
    let configs: Vec<String> = (0..3).flat_map(|k| ["--config".into(), format!("v{k}/track.conf")]).collect();
    let mut args = vec!["track", "--jobs", "3"];
    args.extend(configs.iter().map(String::as_str));
    ok(&socdist(root.path(), &args));
    for k in 0..3 {
        let d = root.path().join(format!("v{k}"));
        ok(&socdist(&d, &["track", "--set", "detections=out/detections.txt", "--set", "output_dir=ser"]));
        assert_eq!(
            fs::read(d.join("par/tracks.txt")).unwrap(),
            fs::read(d.join("ser/tracks.txt")).unwrap()
        );
    }
}

#[test]
fn identity_preprocess_keeps_frames() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::create_dir(d.join("img")).unwrap();
    let frames: Vec<Vec<u8>> = (0..3)
        .map(|k| pgm(8, 6, |x, y| ((x * 30 + y * 7 + k * 11) % 256) as u8))
        .collect();
    for (k, f) in frames.iter().enumerate() {
        fs::write(d.join(format!("img/f{k}.pgm")), f).unwrap();
    }
    ok(&socdist(
        d,
        &["preprocess", "--set", "images_dir=img", "--set", "output_dir=o", "--set", "alpha=0"],
    ));
    for (k, f) in frames.iter().enumerate() {
        assert_eq!(&fs::read(d.join(format!("o/frames/{:06}.pgm", k + 1))).unwrap(), f);
    }
}

#[test]
fn constant_video_subtracts_to_black() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::create_dir(d.join("img")).unwrap();
    for k in 0..4 {
        fs::write(d.join(format!("img/{k}.pgm")), pgm(5, 5, |x, _| 40 + x as u8)).unwrap();
    }
    ok(&socdist(
        d,
        &["preprocess", "--set", "images_dir=img", "--set", "output_dir=o", "--set", "alpha=1"],
    ));
    for k in 1..=4 {
        assert_eq!(
            fs::read(d.join(format!("o/frames/{k:06}.pgm"))).unwrap(),
            pgm(5, 5, |_, _| 0)
        );
    }
}
