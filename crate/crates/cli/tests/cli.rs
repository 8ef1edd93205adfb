use std::path::Path;
use std::process::{Command, Output};

use msiq_core::testset::standard_image;
use msiq_core::{resize, save_image, GrayImage, ResizeMethod};

fn msiq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msiq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_png(dir: &Path, name: &str, img: &GrayImage) -> String {
    let p = dir.join(name);
    save_image(img, &p).unwrap();
    p.to_string_lossy().into_owned()
}

fn value(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} line in:\n{out}"))
        .to_string()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(msiq(&["--help"]).status.code(), Some(0));
    assert_eq!(msiq(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(msiq(&[]).status.code(), Some(1));
    assert_eq!(msiq(&["compute"]).status.code(), Some(1));
    assert_eq!(msiq(&["experiment", "nonsense"]).status.code(), Some(1));
    assert_eq!(msiq(&["experiment", "benchmark"]).status.code(), Some(1));
    assert_eq!(msiq(&["experiment", "exp2", "--scheme", "bogus"]).status.code(), Some(1));
}

#[test]
fn missing_file_exits_two() {
    let o = msiq(&["compute", "/no/such/a.png", "/no/such/b.png"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/a.png"));
}

#[test]
fn undecodable_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("junk.png");
    std::fs::write(&p, b"not an image").unwrap();
    let p = p.to_string_lossy();
    assert_eq!(msiq(&["compute", &p, &p]).status.code(), Some(2));
}

#[test]
fn black_image_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let black = write_png(dir.path(), "black.png", &GrayImage::constant(8, 8, 0.0));
    let o = msiq(&["compute", &black, &black]);
    assert_eq!(o.status.code(), Some(3));
    let o = msiq(&["descriptor", &black]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn compute_same_size_reports_all_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let img = standard_image("disk", 64).unwrap();
    let a = write_png(dir.path(), "a.png", &img);
    let o = msiq(&["compute", &a, &a]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(value(&out, "msiq_rmse").parse::<f64>().unwrap(), 0.0);
    assert_eq!(value(&out, "msiq_w").parse::<f64>().unwrap(), 0.0);
    assert_eq!(value(&out, "psnr"), "inf");
    assert!(value(&out, "ssim").starts_with("1.0000"));
    assert!(out.contains("weights: w_pq = 1/(1+p+q)"));
}

#[test]
fn compute_across_sizes_marks_pixel_metrics_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    let img = standard_image("disk", 64).unwrap();
    let a = write_png(dir.path(), "a.png", &img);
    let b = write_png(dir.path(), "b.png", &resize(&img, 1.5, ResizeMethod::Bicubic).unwrap());
    let o = msiq(&["compute", &a, &b, "--variant", "rmse"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let d: f64 = value(&out, "msiq_rmse").parse().unwrap();
    assert!(d < 5e-3, "{d}");
    assert!(!out.contains("msiq_w"));
    assert_eq!(value(&out, "psnr"), "n/a (size mismatch; MSIQ is resizing-free)");
    assert_eq!(value(&out, "ssim"), "n/a (size mismatch; MSIQ is resizing-free)");
}

#[test]
fn descriptor_prints_parseable_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_png(dir.path(), "a.png", &standard_image("blobs", 32).unwrap());
    let o = msiq(&["descriptor", &a, "--order", "4", "--scheme", "pixel_center_delta"]);
    assert_eq!(o.status.code(), Some(0));
    let d = msiq_core::MomentDescriptor::from_json(&stdout(&o)).unwrap();
    assert_eq!(d.len(), 12);
    assert_eq!(d.scheme(), msiq_core::MomentScheme::PixelCenterDelta);
}

#[test]
fn degrade_writes_image_and_prints_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_png(dir.path(), "a.png", &standard_image("texture", 32).unwrap());
    let out = dir.path().join("rot.png");
    let o = msiq(&[
        "degrade",
        &a,
        "--kind",
        "rotation",
        "--lambda",
        "0.1",
        "--out",
        &out.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("rotation: theta = 1 rad per unit lambda"));
    assert!(text.contains("border: warps fill with 0"));
    let img = msiq_core::load_image(&out).unwrap();
    assert_eq!(img.dims(), (32, 40));
}

#[test]
fn degrade_rejects_bad_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_png(dir.path(), "a.png", &standard_image("texture", 32).unwrap());
    let out = dir.path().join("x.png");
    let o = msiq(&["degrade", &a, "--kind", "jpeg", "--lambda", "1.5", "--out", &out.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn experiment_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let o = msiq(&[
        "experiment",
        "exp2",
        "--size",
        "48",
        "--lambdas",
        "0.1,0.2",
        "--jobs",
        "2",
        "--out",
        &out.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("lambdas: 0, 0.1, 0.2"));
    assert!(text.contains("R_M(0.20)"));
    let csv = std::fs::read_to_string(out.join("exp2.csv")).unwrap();
    assert!(csv.starts_with("image_id,sr_method,scale,degradation,lambda,metric,value"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("exp2.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["experiment"], "exp2");
    assert_eq!(json["config"]["lambdas"], serde_json::json!([0.1, 0.2]));
    // 6 images x 5 kinds x 3 lambdas x 4 metrics
    assert_eq!(json["records"].as_array().unwrap().len(), 360);
}

#[test]
fn experiment_format_selects_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = msiq(&[
        "experiment",
        "sanity",
        "--size",
        "32",
        "--format",
        "json",
        "--out",
        &dir.path().to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("sanity.json").exists());
    assert!(!dir.path().join("sanity.csv").exists());
    assert!(stdout(&o).contains("24 checks, 0 failed"));
}

#[test]
fn sanity_on_directory_with_black_image_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    write_png(dir.path(), "disk.png", &standard_image("disk", 32).unwrap());
    write_png(dir.path(), "black.png", &GrayImage::constant(16, 16, 0.0));
    let out = dir.path().join("out");
    let o = msiq(&[
        "experiment",
        "sanity",
        "--images",
        &dir.path().to_string_lossy(),
        "--out",
        &out.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.contains("black"), "{text}");
    assert!(text.contains("degenerate"));
}

#[test]
fn benchmark_on_directory() {
    let dir = tempfile::tempdir().unwrap();
    write_png(dir.path(), "disk.png", &standard_image("disk", 48).unwrap());
    let out = dir.path().join("out");
    let o = msiq(&[
        "experiment",
        "benchmark",
        "--images",
        &dir.path().to_string_lossy(),
        "--scales",
        "2",
        "--methods",
        "bicubic,bilinear",
        "--lambdas",
        "0.2",
        "--out",
        &out.to_string_lossy(),
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("benchmark.csv")).unwrap();
    // 2 methods x 5 kinds x 2 lambdas x 4 metrics, plus header
    assert_eq!(csv.lines().count(), 81);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("disk,")));
}

#[test]
fn vectors_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("v.json");
    let p = p.to_string_lossy();
    assert_eq!(msiq(&["vectors", "export", "--out", &p]).status.code(), Some(0));
    let o = msiq(&["vectors", "verify", &p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 mismatches"));
}

#[test]
fn shipped_vectors_verify() {
    let p = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/test_vectors.json");
    let o = msiq(&["vectors", "verify", p]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn rotation_outscores_jpeg_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let img = standard_image("blobs", 128).unwrap();
    let a = write_png(dir.path(), "a.png", &img);
    let score = |kind: &str| {
        let out = dir.path().join(format!("{kind}.png"));
        let o = msiq(&["degrade", &a, "--kind", kind, "--lambda", "0.2", "--out", &out.to_string_lossy()]);
        assert_eq!(o.status.code(), Some(0));
        let o = msiq(&["compute", &a, &out.to_string_lossy(), "--variant", "rmse"]);
        value(&stdout(&o), "msiq_rmse").parse::<f64>().unwrap()
    };
    let (rot, jpeg) = (score("rotation"), score("jpeg"));
    assert!(rot >= 10.0 * jpeg, "{rot:e} vs {jpeg:e}");
}

#[test]
fn degrade_jpeg_is_quality_84_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let img = standard_image("texture", 48).unwrap();
    let a = write_png(dir.path(), "a.png", &img);
    let out = dir.path().join("j.png");
    let o = msiq(&["degrade", &a, "--kind", "jpeg", "--lambda", "0.2", "--out", &out.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0));
    let expect = msiq_core::transforms::jpeg_round_trip(&msiq_core::load_image(&a).unwrap(), 84).unwrap();
    assert_eq!(msiq_core::load_image(&out).unwrap(), expect);
}

#[test]
fn degrade_unknown_kind_prints_usage() {
    let o = msiq(&["degrade", "x.png", "--kind", "warp", "--lambda", "0.1", "--out", "y.png"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Usage"), "{err}");
    assert!(err.contains("anisotropic"), "{err}");
}

#[test]
fn summaries_have_expected_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = msiq(&["experiment", "exp2", "--size", "48", "--out", &out]);
    let text = stdout(&o);
    for m in ["msiq_rmse", "msiq_w", "psnr", "ssim"] {
        for row in ["R_M(0.05)", "R_M(0.20)"] {
            assert!(
                text.lines().any(|l| l.starts_with(m) && l.contains(row)),
                "{m} {row} missing:\n{text}"
            );
        }
    }
    let o = msiq(&["experiment", "exp1", "--size", "48", "--out", &out, "--scales", "0.5,2"]);
    let text = stdout(&o);
    assert!(text.contains("inf_psnr"), "{text}");
    assert!(text.contains("infinite PSNR cases:"));
}
