//! End-to-end tests of the `iem` binary: batch segmentation contracts,
//! skip policy, manifest reproduction, and corpus determinism.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iem"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("iem-pipeline-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Recursively collects file bytes keyed by relative path.
fn dir_snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                files.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn write_test_pngs(dir: &Path, count: usize) {
    for i in 0..count {
        let mut buf = image::RgbImage::new(48, 48);
        for r in 0..48u32 {
            for c in 0..48u32 {
                let fg = (14..34).contains(&r) && (14..34).contains(&c);
                let px = if fg {
                    [210u8, 80, 60 + 20 * i as u8]
                } else {
                    [40, 100 + 10 * i as u8, 170]
                };
                buf.put_pixel(c, r, image::Rgb(px));
            }
        }
        buf.save(dir.join(format!("img_{i}.png"))).unwrap();
    }
}

const FAST_FLAGS: &[&str] = &[
    "--target-size", "48",
    "--init-sizes", "12,24",
    "--iterations", "40",
];

#[test]
fn segment_writes_mask_csv_and_manifest_per_image() {
    let dir = workdir("segment");
    let input = dir.join("in");
    std::fs::create_dir_all(&input).unwrap();
    write_test_pngs(&input, 3);
    let output = dir.join("out");

    let out = bin()
        .args(["segment", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(&output)
        .args(FAST_FLAGS)
        .output()
        .unwrap();
    assert_success(&out, "segment");

    for i in 0..3 {
        assert!(output.join(format!("img_{i}_mask.png")).exists());
    }
    let csv = std::fs::read_to_string(output.join("results.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4, "header plus one row per image:\n{csv}");
    assert!(rows[0].starts_with("image_id,init_size,accuracy"));
    assert!(output.join("run_manifest.txt").exists());
}

#[test]
fn corrupt_file_is_skipped_with_zero_exit() {
    let dir = workdir("skip");
    let input = dir.join("in");
    std::fs::create_dir_all(&input).unwrap();
    write_test_pngs(&input, 2);
    std::fs::write(input.join("broken.png"), b"not a png at all").unwrap();
    let output = dir.join("out");

    let out = bin()
        .args(["segment", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(&output)
        .args(FAST_FLAGS)
        .output()
        .unwrap();
    assert_success(&out, "segment with corrupt input");
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipping"));

    let csv = std::fs::read_to_string(output.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "header plus two surviving rows");
    let manifest = std::fs::read_to_string(output.join("run_manifest.txt")).unwrap();
    assert!(manifest.contains("images_skipped = 1"));
    assert!(!output.join("broken_mask.png").exists());
}

#[test]
fn default_flags_reproduce_reference_configuration_in_manifest() {
    let dir = workdir("manifest");
    let input = dir.join("in");
    std::fs::create_dir_all(&input).unwrap();
    write_test_pngs(&input, 1);
    let output = dir.join("out");

    let out = bin()
        .args(["segment", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(&output)
        .args([
            "--iterations", "150",
            "--lambda", "0.001",
            "--kernel-size", "21",
            "--sigma", "5",
            "--init-sizes", "44,78,92",
        ])
        .output()
        .unwrap();
    assert_success(&out, "segment with reference flags");

    let manifest = std::fs::read_to_string(output.join("run_manifest.txt")).unwrap();
    for expect in [
        "iterations = 150",
        "lambda = 0.001",
        "kernel_size = 21",
        "sigma = 5",
        "stacked = true",
        "init_sizes = 44,78,92",
        "target_size = 128",
        "objective = l1-mask",
    ] {
        assert!(manifest.contains(expect), "manifest missing '{expect}':\n{manifest}");
    }
}

#[test]
fn rerun_from_manifest_reproduces_masks_byte_for_byte() {
    let dir = workdir("from-manifest");
    let input = dir.join("in");
    std::fs::create_dir_all(&input).unwrap();
    write_test_pngs(&input, 2);

    let out_a = dir.join("a");
    let run = bin()
        .args(["segment", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(&out_a)
        .args(FAST_FLAGS)
        .args(["--jobs", "1"])
        .output()
        .unwrap();
    assert_success(&run, "first segment");

    let out_b = dir.join("b");
    let rerun = bin()
        .args(["segment", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(&out_b)
        .arg("--from-manifest")
        .arg(out_a.join("run_manifest.txt"))
        .args(["--jobs", "4"])
        .output()
        .unwrap();
    assert_success(&rerun, "rerun from manifest");

    for i in 0..2 {
        let name = format!("img_{i}_mask.png");
        assert_eq!(
            std::fs::read(out_a.join(&name)).unwrap(),
            std::fs::read(out_b.join(&name)).unwrap(),
            "mask {name} differs"
        );
    }
    assert_eq!(
        std::fs::read(out_a.join("results.csv")).unwrap(),
        std::fs::read(out_b.join("results.csv")).unwrap()
    );
}

#[test]
fn synth_is_deterministic_in_seed() {
    let dir = workdir("synth");
    for sub in ["a", "b"] {
        let out = bin()
            .args(["synth", "--count", "6", "--seed", "7", "--side", "48", "--output"])
            .arg(dir.join(sub))
            .output()
            .unwrap();
        assert_success(&out, "synth");
    }
    assert_eq!(dir_snapshot(&dir.join("a")), dir_snapshot(&dir.join("b")));

    let out = bin()
        .args(["synth", "--count", "6", "--seed", "8", "--side", "48", "--output"])
        .arg(dir.join("c"))
        .output()
        .unwrap();
    assert_success(&out, "synth with other seed");
    assert_ne!(dir_snapshot(&dir.join("a")), dir_snapshot(&dir.join("c")));
}

#[test]
fn ground_truth_evaluates_perfectly_against_itself() {
    let dir = workdir("self-eval");
    let out = bin()
        .args(["synth", "--count", "4", "--seed", "3", "--side", "48", "--output"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_success(&out, "synth");

    let report = dir.join("metrics.csv");
    let out = bin()
        .args(["evaluate", "--input"])
        .arg(dir.join("gt"))
        .arg("--gt")
        .arg(dir.join("gt"))
        .arg("--output")
        .arg(&report)
        .output()
        .unwrap();
    assert_success(&out, "evaluate gt vs gt");
    let csv = std::fs::read_to_string(&report).unwrap();
    let mean = csv.lines().last().unwrap();
    assert!(mean.starts_with("mean,"));
    assert!(mean.contains(",1,"), "expected perfect scores, got {mean}");
}

#[test]
fn evaluate_without_matching_stems_fails() {
    let dir = workdir("no-match");
    let preds = dir.join("preds");
    let gt = dir.join("gt");
    std::fs::create_dir_all(&preds).unwrap();
    std::fs::create_dir_all(&gt).unwrap();
    image::GrayImage::from_pixel(4, 4, image::Luma([255]))
        .save(preds.join("a_mask.png"))
        .unwrap();
    image::GrayImage::from_pixel(4, 4, image::Luma([255]))
        .save(gt.join("b.png"))
        .unwrap();

    let out = bin()
        .args(["evaluate", "--input"])
        .arg(&preds)
        .arg("--gt")
        .arg(&gt)
        .output()
        .unwrap();
    assert!(!out.status.success(), "expected nonzero exit");
}

#[test]
fn env_variables_override_defaults() {
    let dir = workdir("env");
    let input = dir.join("in");
    std::fs::create_dir_all(&input).unwrap();
    write_test_pngs(&input, 1);
    let output = dir.join("out");

    let out = bin()
        .args(["segment", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(&output)
        .env("IEM_TARGET_SIZE", "48")
        .env("IEM_INIT_SIZES", "12,24")
        .env("IEM_ITERATIONS", "25")
        .env("IEM_NO_SMOOTHING", "true")
        .output()
        .unwrap();
    assert_success(&out, "segment with env overrides");
    let manifest = std::fs::read_to_string(output.join("run_manifest.txt")).unwrap();
    assert!(manifest.contains("iterations = 25"), "{manifest}");
    assert!(manifest.contains("target_size = 48"), "{manifest}");
    assert!(manifest.contains("smoothing = false"), "{manifest}");
}
