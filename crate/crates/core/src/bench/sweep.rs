use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{extract_features, score, BenchConfig, BenchDataset, View};
use crate::characterize::{mtf50, ssim, vgi, DEFAULT_VGI_RADIUS};
use crate::error::{Error, Result};
use crate::image::VideoClip;
use crate::io::write_atomic;
use crate::optics::{synthesize_psf, Degrader, Psf, ScatterConfig};
use crate::seed::SeedSpec;

pub const SWEEP_CSV: &str = "sweep.csv";
pub const PARETO_CSV: &str = "pareto.csv";
pub const PARETO_DAT: &str = "pareto.dat";
pub const SWEEP_HEADER: [&str; 7] = ["layers", "ifns_enabled", "acc_act", "acc_s", "ssim", "mtf50", "vgi"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub layers: u32,
    pub ifns_enabled: bool,
    pub acc_act: f64,
    pub acc_s: f64,
    pub ssim: f64,
    pub mtf50: f64,
    pub vgi: f64,
}

impl SweepRow {
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.layers.to_string(),
            self.ifns_enabled.to_string(),
            format!("{:.6}", self.acc_act),
            format!("{:.6}", self.acc_s),
            format!("{:.6}", self.ssim),
            format!("{:.6}", self.mtf50),
            format!("{:.6}", self.vgi),
        ]
    }

    /// At least as good on both axes and strictly better on one.
    pub fn dominates(&self, other: &SweepRow) -> bool {
        self.acc_act >= other.acc_act
            && self.acc_s <= other.acc_s
            && (self.acc_act > other.acc_act || self.acc_s < other.acc_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, layers: u32, ifns_enabled: bool) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.layers == layers && r.ifns_enabled == ifns_enabled)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SWEEP_HEADER).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r.fields()).map_err(csv_err)?;
        }
        w.into_inner()
            .map_err(|e| Error::Numerical(format!("csv encoding: {e}")))
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let parse_err = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            reason,
        };
        let mut rd = csv::Reader::from_path(path).map_err(|e| parse_err(e.to_string()))?;
        let header = rd.headers().map_err(|e| parse_err(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != SWEEP_HEADER {
            return Err(parse_err(format!("expected header {}", SWEEP_HEADER.join(","))));
        }
        let rows = rd
            .deserialize::<SweepRow>()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(e.to_string()))?;
        Ok(Self { rows })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Numerical(format!("csv encoding: {e}"))
}

/// The PSF the bench uses at `layers`.
pub fn bench_psf(cfg: &BenchConfig, layers: u32) -> Result<Psf> {
    synthesize_psf(&ScatterConfig {
        layers,
        age_days: cfg.age_days,
        noise_sigma: cfg.noise_sigma,
        kernel_size: cfg.kernel_size,
        glare_core_radius: DEFAULT_VGI_RADIUS,
        seed: cfg.seed,
    })
}

/// Noise seed of one clip; the same at every layer count.
pub fn clip_noise_seed(cfg: &BenchConfig, clip_id: &str) -> SeedSpec {
    cfg.seed.derive(&format!("bench/noise/{clip_id}"))
}

/// Degrades every clip through `psf` with per-clip noise streams.
pub fn degrade_dataset(data: &BenchDataset, psf: &Psf, cfg: &BenchConfig) -> Result<Vec<VideoClip>> {
    let (h, w) = (data.clips[0].height(), data.clips[0].width());
    let degrader = Degrader::new(psf, h, w)?;
    data.records
        .par_iter()
        .zip(&data.clips)
        .map(|(r, clip)| degrader.degrade_clip(clip, cfg.noise_sigma, &clip_noise_seed(cfg, &r.clip_id)))
        .collect()
}

/// Mean SSIM against the clean clips over the held-out clips' identity frames.
///
/// `stride` is the spacing of the frames present in `observed` relative to
/// the clean clips.
pub fn held_out_ssim(data: &BenchDataset, observed: &[VideoClip], stride: usize, cfg: &BenchConfig) -> Result<f64> {
    let step = (cfg.identity_stride / stride).max(1);
    let scores = data
        .records
        .par_iter()
        .zip(&data.clips)
        .zip(observed)
        .filter(|((r, _), _)| r.held_out())
        .map(|((_, clean), obs)| {
            (0..obs.len())
                .step_by(step)
                .map(|t| ssim(clean.frame(t * stride), obs.frame(t)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<f64> = scores.into_iter().flatten().collect();
    if all.is_empty() {
        return Err(Error::Degenerate("no held-out frames".into()));
    }
    Ok(all.iter().sum::<f64>() / all.len() as f64)
}

/// Rows for one layer count, IFNS off then on.
pub fn sweep_cell(data: &BenchDataset, cfg: &BenchConfig, layers: u32) -> Result<[SweepRow; 2]> {
    let psf = bench_psf(cfg, layers)?;
    let degraded = degrade_dataset(data, &psf, cfg)?;
    let ssim = held_out_ssim(data, &degraded, 1, cfg)?;
    let mtf = mtf50(&psf).frequency;
    let glare = vgi(&psf, DEFAULT_VGI_RADIUS)?;
    let mut rows = Vec::with_capacity(2);
    for view in [View::Frames, View::Motion] {
        let feats = extract_features(&degraded, view, cfg.identity_stride, cfg)?;
        let (acc_act, acc_s) = score(&data.records, &feats, cfg)?;
        rows.push(SweepRow {
            layers,
            ifns_enabled: view == View::Motion,
            acc_act,
            acc_s,
            ssim,
            mtf50: mtf,
            vgi: glare,
        });
    }
    Ok([rows[0].clone(), rows[1].clone()])
}

/// Runs every configured layer count; rows are ordered by layers, IFNS off first.
pub fn run_sweep(data: &BenchDataset, cfg: &BenchConfig) -> Result<SweepResult> {
    if cfg.layers.is_empty() {
        return Err(Error::Degenerate("sweep has no layer counts".into()));
    }
    let mut rows = Vec::with_capacity(2 * cfg.layers.len());
    for &l in &cfg.layers {
        rows.extend(sweep_cell(data, cfg, l)?);
    }
    Ok(SweepResult { rows })
}

/// A sweep row with its Pareto flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    pub row: SweepRow,
    pub pareto_optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoReport {
    pub rows: Vec<ParetoRow>,
}

/// Marks rows for which no other row has both higher `acc_act` and lower `acc_s`.
pub fn pareto_report(result: &SweepResult) -> ParetoReport {
    let rows = result
        .rows
        .iter()
        .map(|r| ParetoRow {
            row: r.clone(),
            pareto_optimal: !result.rows.iter().any(|o| o.acc_act > r.acc_act && o.acc_s < r.acc_s),
        })
        .collect();
    ParetoReport { rows }
}

impl ParetoReport {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = SWEEP_HEADER.to_vec();
        header.push("pareto_optimal");
        w.write_record(&header).map_err(csv_err)?;
        for p in &self.rows {
            let mut f = p.row.fields();
            f.push(p.pareto_optimal.to_string());
            w.write_record(&f).map_err(csv_err)?;
        }
        w.into_inner()
            .map_err(|e| Error::Numerical(format!("csv encoding: {e}")))
    }

    /// Whitespace-separated columns for gnuplot, one block per IFNS setting.
    pub fn to_gnuplot(&self) -> String {
        let mut s = String::from("# acc_s acc_act layers pareto_optimal\n");
        for (i, ifns) in [false, true].into_iter().enumerate() {
            if i > 0 {
                s.push_str("\n\n");
            }
            s.push_str(&format!("# ifns_enabled={ifns}\n"));
            for p in self.rows.iter().filter(|p| p.row.ifns_enabled == ifns) {
                s.push_str(&format!(
                    "{:.6} {:.6} {} {}\n",
                    p.row.acc_s,
                    p.row.acc_act,
                    p.row.layers,
                    u8::from(p.pareto_optimal)
                ));
            }
        }
        s
    }

    /// Writes `pareto.csv` and `pareto.dat` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(PARETO_CSV), &self.to_csv()?)?;
        write_atomic(&dir.join(PARETO_DAT), self.to_gnuplot().as_bytes())
    }
}
