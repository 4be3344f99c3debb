use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use lpsim::attacks::{
    attack_table_csv, blind_attack, ridge_apply, ridge_train, rl_attack, wiener_attack, AttackContext, AttackMethod,
    AttackReport,
};
use lpsim::bench::{
    bench_psf, degrade_dataset, evaluate_models, extract_features, generate_dataset, load_clips, load_dataset_index,
    pareto_report, run_sweep, save_dataset, train_models, BenchConfig, BenchDataset, BenchModels, SweepResult, View,
    CLIPS_DIR, PARETO_CSV, SWEEP_CSV,
};
use lpsim::characterize::{characterize_psf, CharacterizationRow, QualityReport, CHARACTERIZATION_HEADER};
use lpsim::config::ExperimentConfig;
use lpsim::io::{load_clip, load_image, read_json, save_clip, save_image, write_atomic, write_json};
use lpsim::motion::{process_clip, save_motion, ProjectionKernels};
use lpsim::optics::{
    degrade_clip, degrade_frame, degrade_frame_labeled, load_psf, noise_label, save_psf, synthesize_psf, Psf,
};
use lpsim::testset::standard_test_set;
use lpsim::{Error, Image, VideoClip};

use crate::{
    AttackArgs, AttackKind, BenchCellArgs, BenchCommand, CharacterizeArgs, Cli, Command, DegradeArgs, IfnsArgs,
    PsfCommand, PsfSynthArgs, ReportArgs, Switch, EXIT_INPUT, EXIT_NUMERICAL, EXIT_USAGE,
};

pub const ATTACK_REPORT_JSON: &str = "attack_report.json";
pub const ATTACK_REPORT_CSV: &str = "attack_report.csv";
pub const MODELS_JSON: &str = "models.json";
pub const EVAL_JSON: &str = "eval.json";
pub const QUALITY_JSON: &str = "quality.json";
pub const REPORT_MD: &str = "report.md";
pub const THREADS_ENV: &str = "LPSIM_THREADS";

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Lib(Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Input(_) => EXIT_INPUT,
            Failure::Lib(Error::Numerical(_)) => EXIT_NUMERICAL,
            Failure::Lib(Error::InvalidParameter { .. }) => EXIT_USAGE,
            Failure::Lib(_) => EXIT_INPUT,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Input(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

pub fn run(cli: Cli) -> Outcome {
    init_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default().resolved(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    match cli.command {
        Command::Psf {
            action: PsfCommand::Synth(args),
        } => psf_synth(&cfg, args),
        Command::Degrade(args) => degrade(&cfg, args),
        Command::Characterize(args) => characterize(&cfg, args),
        Command::Ifns(args) => ifns(&cfg, args),
        Command::Attack(args) => attack(&cfg, args),
        Command::Bench { stage } => bench(&cfg, stage),
        Command::Report(args) => report(args),
        Command::Config => {
            println!("{}", cfg.to_json_string());
            Ok(())
        }
    }
}

fn init_threads() -> Outcome {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a nonnegative integer, got `{raw}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn require_exists(path: &Path) -> Outcome {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::Input(format!("input not found: {}", path.display())))
    }
}

fn psf_synth(cfg: &ExperimentConfig, args: PsfSynthArgs) -> Outcome {
    let mut scatter = cfg.scatter.clone();
    if let Some(l) = args.layers {
        scatter.layers = l;
    }
    if let Some(a) = args.age_days {
        scatter.age_days = a;
    }
    if let Some(k) = args.kernel_size {
        scatter.kernel_size = k;
    }
    scatter.validate()?;
    let psf = synthesize_psf(&scatter)?;
    save_psf(&psf, &args.out, Some(&scatter))?;
    eprintln!(
        "wrote {} (layers {}, {}x{} kernel, transmittance {:.4})",
        args.out.display(),
        scatter.layers,
        scatter.kernel_size,
        scatter.kernel_size,
        psf.transmittance()
    );
    Ok(())
}

fn load_psf_arg(path: &Path) -> Outcome<Psf> {
    require_exists(path)?;
    Ok(load_psf(path)?.0)
}

fn degrade(cfg: &ExperimentConfig, args: DegradeArgs) -> Outcome {
    require_exists(&args.input)?;
    let psf = load_psf_arg(&args.psf)?;
    let sigma = args.noise.unwrap_or(cfg.scatter.noise_sigma);
    if args.input.is_dir() {
        let clip = load_clip(&args.input)?;
        save_clip(&degrade_clip(&clip, &psf, sigma, &cfg.seed)?, &args.out)?;
    } else {
        let img = load_image(&args.input)?;
        save_image(&degrade_frame(&img, &psf, sigma, &cfg.seed)?, &args.out)?;
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn mean_quality(reports: &[QualityReport]) -> QualityReport {
    let n = reports.len() as f64;
    QualityReport {
        ssim: reports.iter().map(|r| r.ssim).sum::<f64>() / n,
        psnr: reports.iter().map(|r| r.psnr).sum::<f64>() / n,
        mse: reports.iter().map(|r| r.mse).sum::<f64>() / n,
    }
}

fn characterize(cfg: &ExperimentConfig, args: CharacterizeArgs) -> Outcome {
    require_exists(&args.psf)?;
    let (psf, meta) = load_psf(&args.psf)?;
    let radius = args.core_radius.unwrap_or(cfg.scatter.glare_core_radius);
    let optical = characterize_psf(&psf, radius)?;
    let quality = if args.testset {
        let reports = standard_test_set()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let y = degrade_frame_labeled(x, &psf, cfg.scatter.noise_sigma, &cfg.seed, &noise_label(i))?;
                QualityReport::measure(x, &y)
            })
            .collect::<lpsim::Result<Vec<_>>>()?;
        Some(mean_quality(&reports))
    } else {
        match (&args.clean, &args.degraded) {
            (Some(c), Some(d)) => {
                require_exists(c)?;
                require_exists(d)?;
                Some(QualityReport::measure(&load_image(c)?, &load_image(d)?)?)
            }
            _ => None,
        }
    };
    let config_id = args.config_id.unwrap_or_else(|| {
        let dir = if args.psf.is_dir() {
            args.psf.clone()
        } else {
            args.psf.parent().map(Path::to_path_buf).unwrap_or_default()
        };
        dir.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "psf".into())
    });
    let source = meta.source.as_ref();
    let row = CharacterizationRow {
        config_id,
        layers: source.map_or(0, |s| s.layers),
        age_days: source.map_or(0.0, |s| s.age_days),
        optical,
        quality,
    };
    append_csv_row(&args.out, &CHARACTERIZATION_HEADER, &row.fields())?;
    println!("{}", row.fields().join(","));
    Ok(())
}

fn csv_line(fields: &[impl AsRef<[u8]>]) -> Outcome<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields)
        .map_err(|e| Failure::Lib(Error::Numerical(format!("csv encoding: {e}"))))?;
    w.into_inner()
        .map_err(|e| Failure::Lib(Error::Numerical(format!("csv encoding: {e}"))))
}

/// Appends one row, writing the header first for a new file; the whole file is replaced atomically.
fn append_csv_row(path: &Path, header: &[&str], fields: &[String]) -> Outcome {
    let header_line = csv_line(header)?;
    let mut bytes = match std::fs::read(path) {
        Ok(existing) => {
            if !existing.starts_with(&header_line) {
                return Err(Failure::Input(format!(
                    "{}: existing file does not start with the header {}",
                    path.display(),
                    header.join(",")
                )));
            }
            existing
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => header_line,
        Err(e) => return Err(Failure::Input(format!("{}: {e}", path.display()))),
    };
    bytes.extend(csv_line(fields)?);
    write_atomic(path, &bytes)?;
    Ok(())
}

fn ifns(cfg: &ExperimentConfig, args: IfnsArgs) -> Outcome {
    require_exists(&args.input)?;
    let mut ifns = cfg.ifns.clone();
    if let Some(step) = args.step {
        ifns.step = step;
    }
    ifns.validate()?;
    let k3 = match &args.kernels {
        Some(p) => {
            require_exists(p)?;
            ProjectionKernels::load(p)?
        }
        None => ProjectionKernels::identity(),
    };
    let clip = load_clip(&args.input)?;
    let seq = process_clip(&clip, &ifns, &k3)?;
    save_motion(&seq, &ifns, &args.out)?;
    eprintln!("wrote {} motion maps to {}", seq.len(), args.out.display());
    Ok(())
}

fn attack(cfg: &ExperimentConfig, args: AttackArgs) -> Outcome {
    match (&args.input, &args.data) {
        (Some(input), None) => attack_clip(cfg, input.clone(), &args),
        (None, Some(data)) => attack_bench(cfg, data.clone(), &args),
        _ => Err(Failure::Usage("pass exactly one of --input or --data".into())),
    }
}

fn wiener_k(cfg: &ExperimentConfig, args: &AttackArgs) -> Outcome<f64> {
    args.k
        .or_else(|| cfg.attack.wiener_k.first().copied())
        .ok_or_else(|| Failure::Usage("no Wiener K given (--k) and none configured".into()))
}

fn rl_iters(cfg: &ExperimentConfig, args: &AttackArgs) -> Outcome<usize> {
    args.iters
        .or_else(|| cfg.attack.rl_iterations.iter().copied().max())
        .ok_or_else(|| Failure::Usage("no iteration count given (--iters) and none configured".into()))
}

fn named_clips(dir: &Path) -> Outcome<Vec<(String, VideoClip)>> {
    require_exists(dir)?;
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| Ok((n.clone(), load_clip(&dir.join(&n))?)))
        .collect()
}

fn ridge_pairs(dir: &Path) -> Outcome<Vec<(Image, Image)>> {
    let clean = named_clips(&dir.join("clean"))?;
    let degraded = named_clips(&dir.join("degraded"))?;
    let mut pairs = Vec::new();
    for (name, c) in &clean {
        let Some((_, d)) = degraded.iter().find(|(n, _)| n == name) else {
            return Err(Failure::Input(format!(
                "{}: no degraded clip matching clean/{name}",
                dir.join("degraded").display()
            )));
        };
        pairs.extend(c.frames().iter().cloned().zip(d.frames().iter().cloned()));
    }
    if pairs.is_empty() {
        return Err(Failure::Input(format!("{}: no training pairs", dir.display())));
    }
    Ok(pairs)
}

fn attack_clip(cfg: &ExperimentConfig, input: PathBuf, args: &AttackArgs) -> Outcome {
    require_exists(&input)?;
    let clip = load_clip(&input)?;
    let need_psf = || {
        args.psf
            .as_deref()
            .ok_or_else(|| Failure::Usage("this attack needs the calibrated PSF (--psf)".into()))
            .and_then(load_psf_arg)
    };
    let single = std::slice::from_ref(&clip);
    let (label, restored) = match args.method {
        AttackKind::Wiener => {
            let k = wiener_k(cfg, args)?;
            (
                format!("Wiener (Calibrated PSF, K={k:e})"),
                wiener_attack(single, &need_psf()?, k)?.remove(0),
            )
        }
        AttackKind::Rl => {
            let n = rl_iters(cfg, args)?;
            (
                format!("Richardson-Lucy ({n} iterations)"),
                rl_attack(single, &need_psf()?, &[n])?.remove(0).remove(0),
            )
        }
        AttackKind::Blind => ("Wiener (Estimated Kernel)".into(), blind_attack(single)?.remove(0)),
        AttackKind::Ridge => {
            let dir = args
                .train_pairs
                .as_deref()
                .ok_or_else(|| Failure::Usage("ridge on a single clip needs --train-pairs".into()))?;
            let restorer = ridge_train(&ridge_pairs(dir)?, &cfg.attack.ridge)?;
            let frames = clip
                .frames()
                .iter()
                .map(|f| ridge_apply(&restorer, f))
                .collect::<lpsim::Result<Vec<_>>>()?;
            ("Ridge".into(), VideoClip::new(frames, clip.frame_rate())?)
        }
        AttackKind::All => return Err(Failure::Usage("`attack all` needs a benchmark dataset (--data)".into())),
    };
    save_clip(&restored, &args.out)?;
    if let Some(clean_dir) = &args.clean {
        require_exists(clean_dir)?;
        let clean = load_clip(clean_dir)?;
        if clean.len() != restored.len() {
            return Err(Failure::Input(format!(
                "{}: {} frames, restored clip has {}",
                clean_dir.display(),
                clean.len(),
                restored.len()
            )));
        }
        let reports = clean
            .frames()
            .iter()
            .zip(restored.frames())
            .map(|(c, r)| QualityReport::measure(c, r))
            .collect::<lpsim::Result<Vec<_>>>()?;
        #[derive(Serialize)]
        struct Quality {
            method: String,
            #[serde(flatten)]
            mean: QualityReport,
        }
        write_json(
            &args.out.join(QUALITY_JSON),
            &Quality {
                method: label.clone(),
                mean: mean_quality(&reports),
            },
        )?;
    }
    eprintln!("{label}: wrote {}", args.out.display());
    Ok(())
}

fn slug(label: &str) -> String {
    let mut s = String::new();
    for ch in label.chars() {
        if ch.is_ascii_alphanumeric() {
            s.push(ch.to_ascii_lowercase());
        } else if !s.ends_with('_') {
            s.push('_');
        }
    }
    s.trim_matches('_').to_string()
}

fn attack_bench(cfg: &ExperimentConfig, dir: PathBuf, args: &AttackArgs) -> Outcome {
    let data = load_bench(&dir, &cfg.bench)?;
    let mut suite = cfg.attack.clone();
    if let Some(k) = args.k {
        suite.wiener_k = vec![k];
    }
    if let Some(n) = args.iters {
        suite.rl_iterations = vec![n];
    }
    let methods: Vec<AttackMethod> = match args.method {
        AttackKind::Wiener => vec![AttackMethod::Wiener],
        AttackKind::Rl => vec![AttackMethod::Rl],
        AttackKind::Blind => vec![AttackMethod::Blind],
        AttackKind::Ridge => vec![AttackMethod::Ridge],
        AttackKind::All => AttackMethod::ALL.to_vec(),
    };
    let ctx = AttackContext::new(&data, &cfg.bench, &suite)?;
    let mut reports = ctx.baseline_reports()?;
    for m in methods {
        let rows = ctx.run(m, |label, restored| {
            if args.no_clips {
                return Ok(());
            }
            let root = args.out.join("restored").join(slug(label));
            for (r, clip) in data.records.iter().zip(restored) {
                if r.held_out() {
                    save_clip(clip, &root.join(&r.clip_id))?;
                }
            }
            Ok(())
        })?;
        reports.extend(rows);
    }
    write_json(&args.out.join(ATTACK_REPORT_JSON), &reports)?;
    write_atomic(&args.out.join(ATTACK_REPORT_CSV), &attack_table_csv(&reports)?)?;
    print!("{}", String::from_utf8_lossy(&attack_table_csv(&reports)?));
    Ok(())
}

/// Loads a saved dataset, checking that it was generated with the same data-defining settings.
fn load_bench(dir: &Path, cfg: &BenchConfig) -> Outcome<BenchDataset> {
    require_exists(dir)?;
    let (stored, records) = load_dataset_index(dir)?;
    let mismatch = [
        ("clips_per_action", stored.clips_per_action != cfg.clips_per_action),
        ("frames", stored.frames != cfg.frames),
        ("seed", stored.seed != cfg.seed),
    ];
    if let Some((field, _)) = mismatch.iter().find(|(_, differs)| *differs) {
        return Err(Failure::Input(format!(
            "{}: dataset was generated with a different bench.{field}; use the same config and --seed",
            dir.display()
        )));
    }
    let clips = load_clips(&records, &dir.join(CLIPS_DIR))?;
    Ok(BenchDataset { records, clips })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelsFile {
    layers: u32,
    ifns_enabled: bool,
    models: BenchModels,
}

#[derive(Debug, Serialize)]
struct EvalFile {
    layers: u32,
    ifns_enabled: bool,
    acc_act: f64,
    acc_s: f64,
}

fn cell_features(cfg: &BenchConfig, data: &BenchDataset, cell: &BenchCellArgs) -> Outcome<lpsim::bench::Features> {
    let psf = bench_psf(cfg, cell.layers)?;
    let degraded = degrade_dataset(data, &psf, cfg)?;
    let view = if cell.ifns == Switch::On {
        View::Motion
    } else {
        View::Frames
    };
    Ok(extract_features(&degraded, view, cfg.identity_stride, cfg)?)
}

fn bench(cfg: &ExperimentConfig, stage: BenchCommand) -> Outcome {
    let bcfg = &cfg.bench;
    match stage {
        BenchCommand::Generate { out } => {
            let data = generate_dataset(bcfg)?;
            save_dataset(&data, bcfg, &out)?;
            eprintln!("wrote {} clips to {}", data.records.len(), out.display());
        }
        BenchCommand::Train(cell) => {
            let data = load_bench(&cell.data, bcfg)?;
            let feats = cell_features(bcfg, &data, &cell)?;
            let models = train_models(&data.records, &feats, bcfg)?;
            write_json(
                &cell.out.join(MODELS_JSON),
                &ModelsFile {
                    layers: cell.layers,
                    ifns_enabled: cell.ifns == Switch::On,
                    models,
                },
            )?;
            eprintln!("wrote {}", cell.out.join(MODELS_JSON).display());
        }
        BenchCommand::Eval { cell, models } => {
            require_exists(&models)?;
            let file: ModelsFile = read_json(&models)?;
            let data = load_bench(&cell.data, bcfg)?;
            let feats = cell_features(bcfg, &data, &cell)?;
            let (acc_act, acc_s) = evaluate_models(&file.models, &data.records, &feats)?;
            let eval = EvalFile {
                layers: cell.layers,
                ifns_enabled: cell.ifns == Switch::On,
                acc_act,
                acc_s,
            };
            write_json(&cell.out.join(EVAL_JSON), &eval)?;
            println!("acc_act {acc_act:.6} acc_s {acc_s:.6}");
        }
        BenchCommand::Sweep { data, layers, out } => {
            let mut sweep_cfg = bcfg.clone();
            if let Some(l) = layers {
                sweep_cfg.layers = l;
            }
            let dataset = load_bench(&data, bcfg)?;
            let result = run_sweep(&dataset, &sweep_cfg)?;
            let csv = result.to_csv()?;
            write_atomic(&out.join(SWEEP_CSV), &csv)?;
            pareto_report(&result).write(&out)?;
            print!("{}", String::from_utf8_lossy(&csv));
        }
    }
    Ok(())
}

fn markdown_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
    for r in rows {
        s.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    s
}

fn read_csv_rows(path: &Path) -> Outcome<(Vec<String>, Vec<Vec<String>>)> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let header = rd
        .headers()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        .iter()
        .map(String::from)
        .collect();
    let rows = rd
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((header, rows))
}

fn report(args: ReportArgs) -> Outcome {
    let dir = args.dir;
    if !dir.is_dir() {
        return Err(Failure::Input(format!(
            "results directory not found: {}",
            dir.display()
        )));
    }
    let mut sections = Vec::new();

    let sweep_path = dir.join(SWEEP_CSV);
    if sweep_path.is_file() {
        let result = SweepResult::from_csv_path(&sweep_path)?;
        let pareto = pareto_report(&result);
        let rows: Vec<Vec<String>> = pareto
            .rows
            .iter()
            .map(|p| {
                let mut f = p.row.fields();
                f.push(if p.pareto_optimal { "yes".into() } else { "no".into() });
                f
            })
            .collect();
        let mut header: Vec<&str> = lpsim::bench::SWEEP_HEADER.to_vec();
        header.push("pareto_optimal");
        sections.push(format!(
            "## Privacy-utility sweep\n\n{}",
            markdown_table(&header, &rows)
        ));
    } else if dir.join(PARETO_CSV).is_file() {
        let (header, rows) = read_csv_rows(&dir.join(PARETO_CSV))?;
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        sections.push(format!("## Pareto report\n\n{}", markdown_table(&header, &rows)));
    }

    let attack_path = dir.join(ATTACK_REPORT_JSON);
    if attack_path.is_file() {
        let reports: Vec<AttackReport> = read_json(&attack_path)?;
        let rows: Vec<Vec<String>> = reports.iter().map(AttackReport::fields).collect();
        sections.push(format!(
            "## Reconstruction attacks\n\n{}",
            markdown_table(&lpsim::attacks::ATTACK_HEADER, &rows)
        ));
    }

    let mut csvs: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    csvs.sort();
    for path in csvs {
        let (header, rows) = read_csv_rows(&path)?;
        if header.iter().map(String::as_str).eq(CHARACTERIZATION_HEADER) {
            let name = path.file_name().unwrap_or_default().to_string_lossy();
            sections.push(format!(
                "## Optical characterization ({name})\n\n{}",
                markdown_table(&CHARACTERIZATION_HEADER, &rows)
            ));
        }
    }

    if sections.is_empty() {
        return Err(Failure::Input(format!(
            "no results in {} (expected {SWEEP_CSV}, {ATTACK_REPORT_JSON} or a characterization CSV)",
            dir.display()
        )));
    }
    let text = format!("# lpsim report\n\n{}", sections.join("\n"));
    write_atomic(&dir.join(REPORT_MD), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_filesystem_safe() {
        assert_eq!(slug("Wiener (Calibrated PSF, K=1e-3)"), "wiener_calibrated_psf_k_1e_3");
        assert_eq!(slug("Ridge (12-Layer Test)"), "ridge_12_layer_test");
    }

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(Failure::Usage(String::new()).exit_code(), 2);
        assert_eq!(Failure::Input(String::new()).exit_code(), 3);
        assert_eq!(Failure::Lib(Error::Numerical("nan".into())).exit_code(), 4);
        assert_eq!(
            Failure::Lib(Error::Parse {
                path: "c.json".into(),
                reason: String::new()
            })
            .exit_code(),
            3
        );
    }

    #[test]
    fn rows_append_under_one_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        append_csv_row(&p, &["a", "b"], &["1".into(), "2".into()]).unwrap();
        append_csv_row(&p, &["a", "b"], &["3".into(), "4".into()]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\n1,2\n3,4\n");
        assert!(append_csv_row(&p, &["x"], &["1".into()]).is_err());
    }
}
