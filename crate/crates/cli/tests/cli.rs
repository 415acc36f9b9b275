use std::path::Path;
use std::process::{Command, Output};

fn wlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wlab")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&wlab(&["--help"])), 0);
    let v = wlab(&["--version"]);
    assert_eq!(code(&v), 0);
    assert!(stdout(&v).starts_with("wlab "));
}

#[test]
fn usage_errors_exit_with_one() {
    let out = wlab(&["frobnicate"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(code(&wlab(&["groundstate", "--potential", "harmonic omega=1", "--bogus"])), 1);
    assert_eq!(code(&wlab(&["groundstate", "--potential", "pendulum"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(code(&wlab(&["scenario", "free_packet", "--param", "warp=9", "--out", path(&out)])), 1);
}

#[test]
fn domain_errors_exit_with_two() {
    let out = wlab(&["groundstate", "--potential", "harmonic omega=-1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("omega"));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.wlab");
    assert_eq!(code(&wlab(&["wigner", path(&missing), "--out", path(&dir.path().join("w.wlab"))])), 2);
}

#[test]
fn harmonic_ground_state_energy() {
    let out = wlab(&["groundstate", "--potential", "harmonic omega=1", "--n", "256", "--x-min", "-8", "--x-max", "8"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let e: f64 = stdout(&out).trim().parse().unwrap();
    assert!((e - 0.5).abs() < 1e-4, "{e}");
}

#[test]
fn ground_state_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("grid.conf");
    std::fs::write(&conf, "# wide grid\nn = 256\nx_min = -12\nx_max = 12\n").unwrap();
    let out = wlab(&["groundstate", "--potential", "harmonic omega=2", "--config", path(&conf)]);
    assert_eq!(code(&out), 0);
    let e: f64 = stdout(&out).trim().parse().unwrap();
    assert!((e - 1.0).abs() < 1e-4, "{e}");
    std::fs::write(&conf, "depth = 3\n").unwrap();
    assert_eq!(code(&wlab(&["groundstate", "--potential", "harmonic omega=1", "--config", path(&conf)])), 1);
}

#[test]
fn scenario_manifest_lists_wigner_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("free");
    let run = wlab(&["scenario", "free_packet", "--param", "image_size=128", "--out", path(&out)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let mut times: Vec<f64> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["kind"] == "wigner")
        .map(|a| a["t"].as_f64().unwrap())
        .collect();
    times.sort_by(f64::total_cmp);
    assert_eq!(times, vec![0.0, 1.0]);
}

#[test]
fn state_to_image_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name);
    let gs = wlab(&["groundstate", "--potential", "quartic omega=0.5 alpha=0.25", "--n", "256", "--x-min", "-12", "--x-max", "12", "--out", path(&d("psi.wlab"))]);
    assert_eq!(code(&gs), 0, "{}", String::from_utf8_lossy(&gs.stderr));
    assert_eq!(code(&wlab(&["wigner", path(&d("psi.wlab")), "--out", path(&d("w.wlab"))])), 0);
    let flow = wlab(&["flow", path(&d("w.wlab")), "--potential", "quartic omega=0.5 alpha=0.25", "--lmax", "exact", "--out", path(&d("j.wlab"))]);
    assert_eq!(code(&flow), 0);
    assert!(stdout(&flow).contains("l_max = -1"));
    let render = wlab(&[
        "render",
        path(&d("w.wlab")),
        "--style",
        "wigner_flow",
        "--flow",
        path(&d("j.wlab")),
        "--width",
        "128",
        "--height",
        "128",
        "--out",
        path(&d("w.png")),
    ]);
    assert_eq!(code(&render), 0, "{}", String::from_utf8_lossy(&render.stderr));
    assert!(d("w.png").exists() && d("w.png.json").exists());
    for refine in ["1", "4"] {
        let zoom = wlab(&[
            "render",
            path(&d("w.wlab")),
            "--style",
            "wigner_flow",
            "--flow",
            path(&d("j.wlab")),
            "--x-range",
            "-5,5",
            "--p-range",
            "-3,3",
            "--p-refine",
            refine,
            "--width",
            "128",
            "--height",
            "128",
            "--out",
            path(&d("zoom.ppm")),
        ]);
        assert_eq!(code(&zoom), 0, "{}", String::from_utf8_lossy(&zoom.stderr));
    }
    let psi_img = wlab(&["render", path(&d("psi.wlab")), "--style", "phasor", "--width", "128", "--height", "64", "--out", path(&d("psi.ppm"))]);
    assert_eq!(code(&psi_img), 0);
    assert!(std::fs::read(d("psi.ppm")).unwrap().starts_with(b"P6\n128 64\n255\n"));
    assert_eq!(code(&wlab(&["render", path(&d("w.wlab")), "--style", "sepia", "--out", path(&d("x.ppm"))])), 1);
}

#[test]
fn tomography_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name);
    assert_eq!(code(&wlab(&["groundstate", "--potential", "harmonic omega=1", "--n", "128", "--out", path(&d("psi.wlab"))])), 0);
    assert_eq!(code(&wlab(&["wigner", path(&d("psi.wlab")), "--out", path(&d("w.wlab"))])), 0);
    let project = wlab(&["tomo", "project", path(&d("w.wlab")), "--angles", "90", "--offsets", "256", "--half", "8", "--out", path(&d("s.wlab"))]);
    assert_eq!(code(&project), 0, "{}", String::from_utf8_lossy(&project.stderr));
    let rec = wlab(&["tomo", "reconstruct", path(&d("s.wlab")), "--n", "64", "--half", "6", "--out", path(&d("r.wlab"))]);
    assert_eq!(code(&rec), 0, "{}", String::from_utf8_lossy(&rec.stderr));
    assert!(d("r.wlab").exists() && d("r.wlab.json").exists());
    let sparse = wlab(&["tomo", "project", path(&d("w.wlab")), "--angles", "8", "--out", path(&d("s8.wlab"))]);
    assert_eq!(code(&sparse), 0);
    assert_eq!(code(&wlab(&["tomo", "reconstruct", path(&d("s8.wlab")), "--out", path(&d("r8.wlab"))])), 2);
}
