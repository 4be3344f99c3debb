use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpsim"))
        .args(args)
        .env_remove("LPSIM_THREADS")
        .output()
        .expect("run lpsim")
}

fn ok(args: &[&str]) -> Output {
    let out = lpsim(args);
    assert!(
        out.status.success(),
        "lpsim {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn version_reports_toolkit_and_schema() {
    let out = ok(&["--version"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("lpsim 0.1.0"), "{text}");
    assert!(text.contains("config schema 1"), "{text}");
}

#[test]
fn zero_layer_psf_is_a_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("psf");
    ok(&["psf", "synth", "--layers", "0", "--kernel-size", "5", "--out", s(&out)]);
    let (psf, meta) = lpsim::optics::load_psf(&out).unwrap();
    assert_eq!(meta.kernel_size, 5);
    assert_eq!(psf.transmittance(), 1.0);
    assert_eq!(psf.kernel().weights()[12], 1.0);
    assert_eq!(psf.kernel().sum(), 1.0);
}

#[test]
fn rerunning_overwrites_with_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("psf");
    ok(&[
        "--seed",
        "3",
        "psf",
        "synth",
        "--layers",
        "4",
        "--kernel-size",
        "31",
        "--out",
        s(&out),
    ]);
    let first = std::fs::read(out.join("psf.bin")).unwrap();
    ok(&[
        "--seed",
        "3",
        "psf",
        "synth",
        "--layers",
        "4",
        "--kernel-size",
        "31",
        "--out",
        s(&out),
    ]);
    assert_eq!(std::fs::read(out.join("psf.bin")).unwrap(), first);
    ok(&[
        "--seed",
        "4",
        "psf",
        "synth",
        "--layers",
        "4",
        "--kernel-size",
        "31",
        "--out",
        s(&out),
    ]);
    assert_ne!(std::fs::read(out.join("psf.bin")).unwrap(), first);
}

#[test]
fn report_on_an_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpsim(&["report", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no results"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(lpsim(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lpsim(&["psf", "synth"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_lpsim"))
        .args(["report", "."])
        .env("LPSIM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_names_the_json_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"attack": {"wiener_k": [0.1, "big"]}}"#).unwrap();
    let out = lpsim(&["--config", s(&cfg), "psf", "synth", "--out", s(&dir.path().join("p"))]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`/attack/wiener_k/1`"), "{err}");

    std::fs::write(&cfg, r#"{"bench": {"identity_stride": 0}}"#).unwrap();
    let out = lpsim(&["--config", s(&cfg), "psf", "synth", "--out", s(&dir.path().join("p"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`/bench/identity_stride`"));
}

#[test]
fn missing_inputs_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere");
    let out = lpsim(&["ifns", "--input", s(&missing), "--out", s(&dir.path().join("m"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains(s(&missing)));
}

#[test]
fn full_pipeline_regenerates_the_golden_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = golden("config.json");
    let c = s(&cfg);
    ok(&["--config", c, "psf", "synth", "--out", s(&d.join("psf"))]);
    ok(&["--config", c, "bench", "generate", "--out", s(&d.join("data"))]);
    let clip = d.join("data/clips/clip_0000");
    assert!(clip.join("clip.json").is_file());
    assert!(clip.join("frame_0001.png").is_file());
    ok(&[
        "--config",
        c,
        "degrade",
        "--input",
        s(&clip),
        "--psf",
        s(&d.join("psf")),
        "--out",
        s(&d.join("deg")),
    ]);
    ok(&[
        "--config",
        c,
        "ifns",
        "--input",
        s(&d.join("deg")),
        "--out",
        s(&d.join("motion")),
    ]);
    assert!(d.join("motion/motion.json").is_file());
    ok(&[
        "--config",
        c,
        "bench",
        "sweep",
        "--data",
        s(&d.join("data")),
        "--out",
        s(&d.join("results")),
    ]);
    let produced = std::fs::read_to_string(d.join("results/sweep.csv")).unwrap();
    let expected = std::fs::read_to_string(golden("sweep.csv")).unwrap();
    assert_eq!(produced, expected);

    let pareto = std::fs::read_to_string(d.join("results/pareto.csv")).unwrap();
    assert!(pareto.lines().next().unwrap().ends_with(",pareto_optimal"));
    assert!(d.join("results/pareto.dat").is_file());

    let out = ok(&["report", s(&d.join("results"))]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Privacy-utility sweep"));
    assert!(d.join("results/report.md").is_file());
}

#[test]
fn bench_train_and_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = golden("config.json");
    let c = s(&cfg);
    ok(&["--config", c, "bench", "generate", "--out", s(&d.join("data"))]);
    ok(&[
        "--config",
        c,
        "bench",
        "train",
        "--data",
        s(&d.join("data")),
        "--layers",
        "6",
        "--out",
        s(&d.join("m")),
    ]);
    ok(&[
        "--config",
        c,
        "bench",
        "eval",
        "--data",
        s(&d.join("data")),
        "--layers",
        "6",
        "--models",
        s(&d.join("m/models.json")),
        "--out",
        s(&d.join("e")),
    ]);
    let eval: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("e/eval.json")).unwrap()).unwrap();
    assert_eq!(eval["layers"], 6);
    assert_eq!(eval["ifns_enabled"], true);
    let acc = eval["acc_act"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));

    // a dataset made with another seed is refused
    let out = lpsim(&[
        "--config",
        c,
        "--seed",
        "1",
        "bench",
        "sweep",
        "--data",
        s(&d.join("data")),
        "--out",
        s(&d.join("r")),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn single_clip_attacks_write_restored_clips() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = golden("config.json");
    let c = s(&cfg);
    ok(&[
        "--config",
        c,
        "psf",
        "synth",
        "--kernel-size",
        "63",
        "--out",
        s(&d.join("psf")),
    ]);
    ok(&["--config", c, "bench", "generate", "--out", s(&d.join("data"))]);
    let clean = d.join("data/clips/clip_0003");
    ok(&[
        "--config",
        c,
        "degrade",
        "--input",
        s(&clean),
        "--psf",
        s(&d.join("psf")),
        "--out",
        s(&d.join("deg")),
    ]);
    ok(&[
        "--config",
        c,
        "attack",
        "wiener",
        "--input",
        s(&d.join("deg")),
        "--psf",
        s(&d.join("psf")),
        "--k",
        "0.01",
        "--clean",
        s(&clean),
        "--out",
        s(&d.join("w")),
    ]);
    assert!(d.join("w/frame_0016.png").is_file());
    let q: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("w/quality.json")).unwrap()).unwrap();
    assert!(q["ssim"].as_f64().unwrap() > 0.0);
    let out = lpsim(&[
        "--config",
        c,
        "attack",
        "rl",
        "--input",
        s(&d.join("deg")),
        "--out",
        s(&d.join("r")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = lpsim(&[
        "--config",
        c,
        "attack",
        "all",
        "--input",
        s(&d.join("deg")),
        "--out",
        s(&d.join("a")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
