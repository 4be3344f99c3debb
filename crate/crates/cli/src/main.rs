//! `lpsim`: synthesize PSFs, degrade footage, extract motion maps, run
//! reconstruction attacks and the privacy-utility benchmark.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Toolkit version plus the config-schema version it reads.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (config schema 1)");

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "lpsim", version = VERSION, about = "Scattering-camera simulation and privacy benchmarking")]
pub struct Cli {
    /// Experiment config (JSON). Built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PSF operations.
    Psf {
        #[command(subcommand)]
        action: PsfCommand,
    },
    /// Degrade a clip directory or a single image through a stored PSF.
    Degrade(DegradeArgs),
    /// Measure MTF50, VGI and transmittance of a PSF and append a CSV row.
    Characterize(CharacterizeArgs),
    /// Compute IFNS/CFSA motion maps of a clip.
    Ifns(IfnsArgs),
    /// Run a reconstruction attack.
    Attack(AttackArgs),
    /// Synthetic benchmark stages.
    Bench {
        #[command(subcommand)]
        stage: BenchCommand,
    },
    /// Summarize the results found in a directory.
    Report(ReportArgs),
    /// Print the effective config as JSON.
    Config,
}

#[derive(Debug, Subcommand)]
pub enum PsfCommand {
    /// Synthesize a PSF and write psf.json + psf.bin.
    Synth(PsfSynthArgs),
}

#[derive(Debug, Args)]
pub struct PsfSynthArgs {
    #[arg(long)]
    pub layers: Option<u32>,
    #[arg(long)]
    pub age_days: Option<f64>,
    #[arg(long)]
    pub kernel_size: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DegradeArgs {
    /// Clip directory or image file (.png, .pgm, .ppm).
    #[arg(long)]
    pub input: PathBuf,
    /// PSF directory or psf.json.
    #[arg(long)]
    pub psf: PathBuf,
    /// Noise standard deviation; defaults to the config's.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Output clip directory, or image file for image input.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CharacterizeArgs {
    #[arg(long)]
    pub psf: PathBuf,
    /// Also degrade the bundled test images and report mean SSIM/PSNR/MSE.
    #[arg(long, conflicts_with_all = ["clean", "degraded"])]
    pub testset: bool,
    /// Reference image for quality columns.
    #[arg(long, requires = "degraded")]
    pub clean: Option<PathBuf>,
    #[arg(long, requires = "clean")]
    pub degraded: Option<PathBuf>,
    /// Label of the row; defaults to the PSF directory name.
    #[arg(long)]
    pub config_id: Option<String>,
    #[arg(long)]
    pub core_radius: Option<f64>,
    /// CSV file the row is appended to.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IfnsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub step: Option<usize>,
    /// JSON file with the three projection kernels; identity when omitted.
    #[arg(long)]
    pub kernels: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackKind {
    Wiener,
    Rl,
    Blind,
    Ridge,
    /// Every attack, as one table.
    All,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(value_enum)]
    pub method: AttackKind,
    /// Single clip directory to restore.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    pub input: Option<PathBuf>,
    /// Benchmark dataset directory; runs the attack on the held-out clips and scores it.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Calibrated PSF (single-clip wiener and rl).
    #[arg(long)]
    pub psf: Option<PathBuf>,
    /// Wiener regularization constant.
    #[arg(long)]
    pub k: Option<f64>,
    /// Richardson-Lucy iteration count.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Directory with `clean/` and `degraded/` clip directories of matching names (single-clip ridge).
    #[arg(long)]
    pub train_pairs: Option<PathBuf>,
    /// Clean reference clip; adds quality.json in single-clip mode.
    #[arg(long)]
    pub clean: Option<PathBuf>,
    /// Skip writing restored clips in benchmark mode.
    #[arg(long)]
    pub no_clips: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Render the dataset: clips/, labels.csv, dataset.json.
    Generate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Train both classifiers on one condition and write models.json.
    Train(BenchCellArgs),
    /// Score stored models on one condition and write eval.json.
    Eval {
        #[command(flatten)]
        cell: BenchCellArgs,
        #[arg(long)]
        models: PathBuf,
    },
    /// Layer sweep: sweep.csv, pareto.csv and pareto.dat.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated layer counts; defaults to the config's.
        #[arg(long, value_delimiter = ',')]
        layers: Option<Vec<u32>>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct BenchCellArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub layers: u32,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub ifns: Switch,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory holding sweep.csv, pareto.csv, attack_report.json or characterization CSVs.
    pub dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
