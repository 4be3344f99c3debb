use lpsim::attacks::*;
use lpsim::bench::*;

fn small_bench() -> (BenchConfig, BenchDataset) {
    let cfg = BenchConfig {
        clips_per_action: 6,
        frames: 16,
        ..Default::default()
    };
    let data = generate_dataset(&cfg).unwrap();
    (cfg, data)
}

#[test]
fn perfect_attack_matches_clean_accuracy() {
    let (cfg, data) = small_bench();
    let stride = 4;
    let clean: Vec<_> = data.clips.iter().map(|c| subsample(c, stride).unwrap()).collect();
    let models = clean_attack_models(&data, stride, &cfg).unwrap();
    let rep = evaluate_attack("perfect", &data, &clean, stride, &models, &cfg).unwrap();
    assert_eq!(rep.ssim, 1.0);
    assert!(rep.psnr.is_infinite());
    let (act, s) = evaluate_models(&models, &data.records, &attack_features(&clean, stride, &cfg).unwrap()).unwrap();
    assert_eq!(rep.identity_accuracy, s);
    assert_eq!(rep.action_accuracy, act);
}

#[test]
fn no_op_attack_reproduces_the_degraded_row() {
    let (cfg, data) = small_bench();
    let suite = AttackSuiteConfig {
        wiener_k: vec![1e-2],
        rl_iterations: vec![5],
        ..Default::default()
    };
    let reports = run_attack_suite(&data, &cfg, &suite).unwrap();
    let methods: Vec<&str> = reports.iter().map(|r| r.method.as_str()).collect();
    assert_eq!(
        methods,
        [
            "Clean (Baseline)",
            "LPS 10-Layer (No Attack)",
            "Wiener (Estimated Kernel)",
            "Wiener (Calibrated PSF, K=1e-2)",
            "Richardson-Lucy (5 iterations)",
            "Ridge (10-Layer Test)",
            "Ridge (12-Layer Test)",
        ]
    );
    assert_eq!(reports[0].ssim, 1.0);

    let psf = bench_psf(&cfg, 10).unwrap();
    let degraded = degrade_subsampled(&data, &psf, suite.frame_stride, &cfg).unwrap();
    let models = clean_attack_models(&data, suite.frame_stride, &cfg).unwrap();
    let rep = evaluate_attack(
        "LPS 10-Layer (No Attack)",
        &data,
        &degraded,
        suite.frame_stride,
        &models,
        &cfg,
    )
    .unwrap();
    assert_eq!(rep, reports[1]);
}

#[test]
fn mismatched_clip_sets_are_rejected() {
    let (cfg, data) = small_bench();
    let clean: Vec<_> = data.clips.iter().map(|c| subsample(c, 4).unwrap()).collect();
    let models = clean_attack_models(&data, 4, &cfg).unwrap();
    assert!(evaluate_attack("short", &data, &clean[1..], 4, &models, &cfg).is_err());
    assert!(evaluate_attack("stride", &data, &clean, 2, &models, &cfg).is_err());
}

#[test]
fn subsample_keeps_every_nth_frame() {
    let (_, data) = small_bench();
    let s = subsample(&data.clips[0], 4).unwrap();
    assert_eq!(s.len(), 4);
    assert_eq!(s.frame(1), data.clips[0].frame(4));
    assert!(subsample(&data.clips[0], 0).is_err());
}
