use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evtaug::repr::decode_raster_binary;
use evtaug::{canonicalize, decode, encode, event_count, Event, EventStream, FormatTag, RasterKind, SensorGeometry};
use serde_json::Value;
use tempfile::TempDir;

fn evtaug(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evtaug"))
        .args(args)
        .env_remove("EVT_THREADS")
        .output()
        .expect("run evtaug")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}):\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

/// A small deterministic stream with a spread of positions and times.
fn sample_stream(seed: u64, n: usize) -> EventStream {
    let g = SensorGeometry::new(32, 24).unwrap();
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let events = (0..n)
        .map(|_| {
            let r = next();
            Event::new(
                (r % 24) as u16,
                ((r >> 8) % 32) as u16,
                (r >> 16) % 200_000,
                if (r >> 40) & 1 == 0 { 1 } else { -1 },
            )
        })
        .collect();
    canonicalize(events, g).unwrap()
}

fn write_stream(dir: &Path, name: &str, stream: &EventStream) -> PathBuf {
    let path = dir.join(name);
    let format = FormatTag::from_path(&path).unwrap();
    std::fs::write(&path, encode(stream, format).unwrap()).unwrap();
    path
}

fn inputs(dir: &TempDir, n: usize) -> Vec<PathBuf> {
    (0..n)
        .map(|i| write_stream(dir.path(), &format!("rec{i}.evt"), &sample_stream(i as u64 + 1, 2000)))
        .collect()
}

#[test]
fn strategy_none_copies_bytes() {
    let dir = TempDir::new().unwrap();
    let files = inputs(&dir, 3);
    let out = dir.path().join("out");
    let mut args = vec!["augment", "--strategy", "none", "--out", s(&out)];
    args.extend(files.iter().map(|p| s(p)));
    let run = evtaug(&args);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    for f in &files {
        let copy = out.join(f.file_name().unwrap());
        assert_eq!(std::fs::read(f).unwrap(), std::fs::read(copy).unwrap());
    }
    let report = json(&run);
    assert_eq!(report["failed"], 0);
    assert_eq!(report["files"].as_array().unwrap().len(), 3);
}

#[test]
fn theta_max_zero_is_identity() {
    let dir = TempDir::new().unwrap();
    let files = inputs(&dir, 2);
    let out = dir.path().join("out");
    let mut args = vec!["augment", "--strategy", "vpt", "--theta-max", "0", "--out", s(&out)];
    args.extend(files.iter().map(|p| s(p)));
    let run = evtaug(&args);
    assert_eq!(run.status.code(), Some(0));
    for f in &files {
        assert_eq!(std::fs::read(f).unwrap(), std::fs::read(out.join(f.file_name().unwrap())).unwrap());
    }
    for entry in json(&run)["files"].as_array().unwrap() {
        assert_eq!(entry["stats"]["input_count"], entry["stats"]["retained_count"]);
    }
}

#[test]
fn same_seed_same_bytes_any_thread_count() {
    let dir = TempDir::new().unwrap();
    let files = inputs(&dir, 6);
    let run = |out: &Path, threads: &str| {
        let mut args = vec!["augment", "--seed", "11", "--threads", threads, "--out", s(out)];
        args.extend(files.iter().map(|p| s(p)));
        let o = evtaug(&args);
        assert_eq!(o.status.code(), Some(0));
        let mut report = json(&o);
        report.as_object_mut().unwrap().remove("wall_time_ms");
        for f in report["files"].as_array_mut().unwrap() {
            f.as_object_mut().unwrap().remove("wall_time_ms");
            f.as_object_mut().unwrap().remove("output");
        }
        let bytes: Vec<Vec<u8>> = files
            .iter()
            .map(|f| std::fs::read(out.join(f.file_name().unwrap())).unwrap())
            .collect();
        (report, bytes)
    };
    let a = run(&dir.path().join("a"), "1");
    let b = run(&dir.path().join("b"), "4");
    assert_eq!(a, b);

    // a different seed moves at least one file
    let c_dir = dir.path().join("c");
    let mut args = vec!["augment", "--seed", "12", "--out", s(&c_dir)];
    args.extend(files.iter().map(|p| s(p)));
    assert_eq!(evtaug(&args).status.code(), Some(0));
    let c: Vec<Vec<u8>> = files
        .iter()
        .map(|f| std::fs::read(c_dir.join(f.file_name().unwrap())).unwrap())
        .collect();
    assert_ne!(a.1, c);
}

#[test]
fn corrupt_file_fails_alone() {
    let dir = TempDir::new().unwrap();
    let good = inputs(&dir, 2);
    let bad = dir.path().join("broken.evt");
    std::fs::write(&bad, b"EVT1 nope").unwrap();
    let out = dir.path().join("out");
    let report_path = dir.path().join("report.json");
    let run = evtaug(&[
        "augment",
        "--report",
        s(&report_path),
        "--out",
        s(&out),
        s(&good[0]),
        s(&bad),
        s(&good[1]),
    ]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("broken.evt"));
    let report: Value = serde_json::from_slice(&std::fs::read(&report_path).unwrap()).unwrap();
    assert_eq!(report["failed"], 1);
    let files = report["files"].as_array().unwrap();
    assert!(files[1]["error"].is_string());
    assert!(files[0]["error"].is_null() && files[2]["error"].is_null());
    assert!(out.join("rec0.evt").exists() && out.join("rec1.evt").exists());
    assert!(!out.join("broken.evt").exists());
}

#[test]
fn bad_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let files = inputs(&dir, 1);
    let out = dir.path().join("out");
    for args in [
        vec!["augment", "--prob", "1.5", "--out", s(&out), s(&files[0])],
        vec!["augment", "--theta-max", "-0.1", "--out", s(&out), s(&files[0])],
        vec!["augment", "--plane", "zt", "--out", s(&out), s(&files[0])],
        vec!["sweep", "--thetas", "2.0", s(&files[0])],
    ] {
        let run = evtaug(&args);
        assert_eq!(run.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&run.stderr));
    }
}

#[test]
fn csv_with_geometry_flag_round_trips() {
    let dir = TempDir::new().unwrap();
    let stream = sample_stream(5, 300);
    let csv = write_stream(dir.path(), "rec.csv", &stream);
    let out = dir.path().join("out");
    let run = evtaug(&[
        "--geometry",
        "32x24",
        "augment",
        "--strategy",
        "none",
        "--out",
        s(&out),
        s(&csv),
    ]);
    assert_eq!(run.status.code(), Some(0));
    let back = decode(&std::fs::read(out.join("rec.csv")).unwrap(), FormatTag::Csv, Some(stream.geometry())).unwrap();
    assert_eq!(back, stream);
}

#[test]
fn perturb_grid_reports_matrix() {
    let dir = TempDir::new().unwrap();
    let input = write_stream(dir.path(), "rec.evt", &sample_stream(3, 3000));
    let grid = dir.path().join("grid.txt");
    std::fs::write(&grid, "# plane theta [strategy]\nyt 0\nyt 0.1\nyt 0.4\nxt 0\nxt 0.1 vpt\nxt 0.4\n").unwrap();
    let run = evtaug(&["perturb", "--grid", s(&grid), "--repr", "count", s(&input)]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report = json(&run);
    let d = report["distances"].as_array().unwrap();
    assert_eq!(d.len(), 2);
    for row in d {
        let row: Vec<f64> = row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        assert_eq!(row.len(), 3);
        assert_eq!(row[0], 0.0);
        assert!(row[2] >= row[1] && row[1] > 0.0, "{row:?}");
    }
    // the text grid goes to stderr when the report is on stdout
    assert!(String::from_utf8_lossy(&run.stderr).starts_with("plane"));
}

#[test]
fn sweep_sts_keeps_everything_vpt_discards_more_with_angle() {
    let dir = TempDir::new().unwrap();
    let files = inputs(&dir, 3);
    let mut args = vec!["sweep", "--strategy", "sts", "--thetas", "0,0.2,0.6,1.0"];
    args.extend(files.iter().map(|p| s(p)));
    let run = evtaug(&args);
    assert_eq!(run.status.code(), Some(0));
    for row in json(&run)["rows"].as_array().unwrap() {
        assert_eq!(row["mean_discard_fraction"], 0.0);
        assert_eq!(row["files"], 3);
    }

    let mut args = vec!["sweep", "--strategy", "vpt", "--plane", "xt", "--thetas", "0,0.2,0.6,1.0"];
    args.extend(files.iter().map(|p| s(p)));
    let run = evtaug(&args);
    assert_eq!(run.status.code(), Some(0));
    let fractions: Vec<f64> = json(&run)["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["mean_discard_fraction"].as_f64().unwrap())
        .collect();
    assert_eq!(fractions[0], 0.0);
    assert!(fractions.windows(2).all(|w| w[1] >= w[0]), "{fractions:?}");
    assert!(fractions[3] > 0.0);
}

#[test]
fn synth_writes_closed_form_ramp() {
    let dir = TempDir::new().unwrap();
    let scene = dir.path().join("scene.toml");
    std::fs::write(
        &scene,
        "kind = \"uniform_ramp\"\nwidth = 2\nheight = 2\nduration_us = 1000000\nrate = 2.0\nthreshold = 0.5\n",
    )
    .unwrap();
    let out = dir.path().join("ramp.evt");
    let run = evtaug(&["synth", "--scene", s(&scene), "--out", s(&out)]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(json(&run)["events"], 16);
    let stream = decode(&std::fs::read(&out).unwrap(), FormatTag::Native, None).unwrap();
    assert_eq!(stream.len(), 16);
    let mut times: Vec<u64> = stream.events().iter().map(|e| e.t).collect();
    times.dedup();
    assert_eq!(times, vec![250_000, 500_000, 750_000, 1_000_000]);

    std::fs::write(&scene, "kind = \"spiral\"\nwidth = 2\nheight = 2\nduration_us = 10\nthreshold = 0.5\n").unwrap();
    assert_ne!(evtaug(&["synth", "--scene", s(&scene), "--out", s(&out)]).status.code(), Some(0));
}

#[test]
fn repr_binary_matches_library_raster() {
    let dir = TempDir::new().unwrap();
    let stream = sample_stream(9, 1500);
    let input = write_stream(dir.path(), "rec.evt", &stream);
    let out = dir.path().join("count.ras");
    let run = evtaug(&["repr", "--kind", "count", "--out", s(&out), s(&input)]);
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(json(&run)["dims"], serde_json::json!([2, 24, 32]));
    let raster = decode_raster_binary(&std::fs::read(&out).unwrap(), RasterKind::Count).unwrap();
    assert_eq!(raster.values, event_count(&stream).values);

    let txt = dir.path().join("voxel.txt");
    let run = evtaug(&["repr", "--repr", "voxel", "--bins", "3", "--out", s(&txt), s(&input)]);
    assert_eq!(run.status.code(), Some(0));
    let text = std::fs::read_to_string(&txt).unwrap();
    assert!(text.starts_with("# raster kind=voxel channels=3 height=24 width=32"), "{}", &text[..60]);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(evtaug(&["--help"]).status.code(), Some(0));
    assert_eq!(evtaug(&["--version"]).status.code(), Some(0));
    assert_eq!(evtaug(&[]).status.code(), Some(2));
}
