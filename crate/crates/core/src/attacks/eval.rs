use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blind::blind_search;
use super::deconv::{RichardsonLucy, RlConfig, WienerConfig, WienerFilter, RL_ITERATION_SWEEP, WIENER_K_SWEEP};
use super::ridge::{ridge_apply, ridge_train, RidgeConfig};
use super::{AttackReport, BLIND_K};
use crate::bench::{
    bench_psf, clip_noise_seed, evaluate_models, extract_features, train_models, BenchConfig, BenchDataset,
    BenchModels, Split, View,
};
use crate::characterize::{psnr, ssim};
use crate::error::{Error, Result};
use crate::image::{Image, VideoClip};
use crate::optics::{noise_label, Degrader, Psf};

/// Which attacks to run and on which frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackSuiteConfig {
    /// Layer count the attacker targets.
    pub layers: u32,
    /// Layer count of the cross-configuration ridge test.
    pub cross_layers: u32,
    /// Only every `frame_stride`-th frame is degraded and restored.
    pub frame_stride: usize,
    pub wiener_k: Vec<f64>,
    pub rl_iterations: Vec<usize>,
    pub ridge: RidgeConfig,
}

impl Default for AttackSuiteConfig {
    fn default() -> Self {
        Self {
            layers: 10,
            cross_layers: 12,
            frame_stride: crate::bench::DEFAULT_IDENTITY_STRIDE,
            wiener_k: WIENER_K_SWEEP.to_vec(),
            rl_iterations: RL_ITERATION_SWEEP.to_vec(),
            ridge: RidgeConfig::default(),
        }
    }
}

/// Every `stride`-th frame of a clip.
pub fn subsample(clip: &VideoClip, stride: usize) -> Result<VideoClip> {
    if stride == 0 {
        return Err(Error::param("frame_stride", "must be positive"));
    }
    VideoClip::new(
        clip.frames().iter().step_by(stride).cloned().collect(),
        clip.frame_rate() / stride as f64,
    )
}

/// Degrades every `stride`-th frame with the same noise the sweep uses.
pub fn degrade_subsampled(data: &BenchDataset, psf: &Psf, stride: usize, cfg: &BenchConfig) -> Result<Vec<VideoClip>> {
    let (h, w) = (data.clips[0].height(), data.clips[0].width());
    let deg = Degrader::new(psf, h, w)?;
    data.records
        .par_iter()
        .zip(&data.clips)
        .map(|(r, clip)| {
            let seed = clip_noise_seed(cfg, &r.clip_id);
            let frames = (0..clip.len())
                .step_by(stride)
                .map(|t| deg.degrade(clip.frame(t), cfg.noise_sigma, &seed, &noise_label(t)))
                .collect::<Result<Vec<_>>>()?;
            VideoClip::new(frames, clip.frame_rate() / stride as f64)
        })
        .collect()
}

/// Features of clips that hold every `stride`-th frame, as the attack classifiers see them.
pub fn attack_features(clips: &[VideoClip], stride: usize, cfg: &BenchConfig) -> Result<crate::bench::Features> {
    extract_features(clips, View::Frames, (cfg.identity_stride / stride).max(1), cfg)
}

/// Bench classifiers trained on the clean, subsampled clips.
pub fn clean_attack_models(data: &BenchDataset, stride: usize, cfg: &BenchConfig) -> Result<BenchModels> {
    let clean: Vec<VideoClip> = data.clips.iter().map(|c| subsample(c, stride)).collect::<Result<_>>()?;
    train_models(&data.records, &attack_features(&clean, stride, cfg)?, cfg)
}

/// Scores restored clips against the clean ones.
///
/// `restored[i]` holds every `stride`-th frame of `data.clips[i]`. SSIM and
/// PSNR are averaged over the frames of held-out clips; the accuracies come
/// from feeding the held-out restored clips through `models`.
pub fn evaluate_attack(
    method: &str,
    data: &BenchDataset,
    restored: &[VideoClip],
    stride: usize,
    models: &BenchModels,
    cfg: &BenchConfig,
) -> Result<AttackReport> {
    if restored.len() != data.clips.len() {
        return Err(Error::Dimension(format!(
            "{} restored clips for {} clean clips",
            restored.len(),
            data.clips.len()
        )));
    }
    let per_clip = data
        .records
        .par_iter()
        .zip(&data.clips)
        .zip(restored)
        .filter(|((r, _), _)| r.held_out())
        .map(|((_, clean), obs)| {
            if obs.len() != clean.len().div_ceil(stride) {
                return Err(Error::Dimension(format!(
                    "restored clip has {} frames, expected {}",
                    obs.len(),
                    clean.len().div_ceil(stride)
                )));
            }
            (0..obs.len())
                .map(|t| {
                    Ok((
                        ssim(clean.frame(t * stride), obs.frame(t))?,
                        psnr(clean.frame(t * stride), obs.frame(t))?,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = per_clip.into_iter().flatten().collect();
    if pairs.is_empty() {
        return Err(Error::Degenerate("no held-out frames to score".into()));
    }
    let n = pairs.len() as f64;
    let ssim_mean = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let psnr_mean = pairs.iter().map(|p| p.1).sum::<f64>() / n;

    let feats = attack_features(restored, stride, cfg)?;
    let (acc_act, acc_s) = evaluate_models(models, &data.records, &feats)?;
    Ok(AttackReport {
        method: method.to_string(),
        ssim: ssim_mean,
        psnr: psnr_mean,
        identity_accuracy: acc_s,
        action_accuracy: acc_act,
    })
}

fn map_clips(clips: &[VideoClip], f: impl Fn(&VideoClip) -> Result<VideoClip> + Sync + Send) -> Result<Vec<VideoClip>> {
    clips.par_iter().map(f).collect()
}

fn map_frames(clip: &VideoClip, f: impl Fn(&Image) -> Result<Image>) -> Result<VideoClip> {
    let frames = clip.frames().iter().map(f).collect::<Result<Vec<_>>>()?;
    VideoClip::new(frames, clip.frame_rate())
}

/// Blind Wiener: one Gaussian estimate per clip from its first frame.
pub fn blind_attack(degraded: &[VideoClip]) -> Result<Vec<VideoClip>> {
    let cfg = WienerConfig::new(BLIND_K)?;
    map_clips(degraded, |clip| {
        let (psf, _) = blind_search(clip.frame(0))?;
        let wf = WienerFilter::new(&psf, &cfg, clip.height(), clip.width())?;
        map_frames(clip, |f| wf.apply(f))
    })
}

pub fn wiener_attack(degraded: &[VideoClip], psf: &Psf, k: f64) -> Result<Vec<VideoClip>> {
    let first = &degraded[0];
    let wf = WienerFilter::new(psf, &WienerConfig::new(k)?, first.height(), first.width())?;
    map_clips(degraded, |clip| map_frames(clip, |f| wf.apply(f)))
}

/// Clamped Richardson-Lucy restorations at every count in `iterations` (ascending).
pub fn rl_attack(degraded: &[VideoClip], psf: &Psf, iterations: &[usize]) -> Result<Vec<Vec<VideoClip>>> {
    let first = &degraded[0];
    let rl = RichardsonLucy::new(psf, RlConfig::default().epsilon, first.height(), first.width())?;
    let per_clip = degraded
        .par_iter()
        .map(|clip| {
            clip.frames()
                .iter()
                .map(|f| rl.run(f, iterations))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    (0..iterations.len())
        .map(|j| {
            per_clip
                .iter()
                .zip(degraded)
                .map(|(frames, clip)| {
                    VideoClip::new(
                        frames.iter().map(|snaps| snaps[j].clone().clamped()).collect(),
                        clip.frame_rate(),
                    )
                })
                .collect()
        })
        .collect()
}

/// The attacker levels, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackMethod {
    /// Gaussian kernel estimated from the footage, then Wiener.
    Blind,
    /// Wiener with the calibrated PSF, one row per K.
    Wiener,
    /// Richardson-Lucy with the calibrated PSF, one row per iteration count.
    Rl,
    /// Paired-data ridge restorer, tested on its own and on the cross layer count.
    Ridge,
}

impl AttackMethod {
    pub const ALL: [AttackMethod; 4] = [
        AttackMethod::Blind,
        AttackMethod::Wiener,
        AttackMethod::Rl,
        AttackMethod::Ridge,
    ];
}

/// Degraded footage, clean references and fixed classifiers shared by every attack.
pub struct AttackContext<'a> {
    pub data: &'a BenchDataset,
    pub cfg: &'a BenchConfig,
    pub suite: &'a AttackSuiteConfig,
    pub psf: Psf,
    pub clean: Vec<VideoClip>,
    pub degraded: Vec<VideoClip>,
    pub models: BenchModels,
}

impl<'a> AttackContext<'a> {
    pub fn new(data: &'a BenchDataset, cfg: &'a BenchConfig, suite: &'a AttackSuiteConfig) -> Result<Self> {
        let stride = suite.frame_stride;
        let psf = bench_psf(cfg, suite.layers)?;
        let clean = data.clips.iter().map(|c| subsample(c, stride)).collect::<Result<_>>()?;
        let degraded = degrade_subsampled(data, &psf, stride, cfg)?;
        let models = clean_attack_models(data, stride, cfg)?;
        Ok(Self {
            data,
            cfg,
            suite,
            psf,
            clean,
            degraded,
            models,
        })
    }

    fn evaluate(&self, method: &str, restored: &[VideoClip]) -> Result<AttackReport> {
        evaluate_attack(
            method,
            self.data,
            restored,
            self.suite.frame_stride,
            &self.models,
            self.cfg,
        )
    }

    /// The clean upper bound and the unattacked degraded footage.
    pub fn baseline_reports(&self) -> Result<Vec<AttackReport>> {
        Ok(vec![
            self.evaluate("Clean (Baseline)", &self.clean)?,
            self.evaluate(&format!("LPS {}-Layer (No Attack)", self.suite.layers), &self.degraded)?,
        ])
    }

    /// Runs one attacker level. `sink` receives each row's label and restored clips.
    pub fn run(
        &self,
        method: AttackMethod,
        mut sink: impl FnMut(&str, &[VideoClip]) -> Result<()>,
    ) -> Result<Vec<AttackReport>> {
        let mut reports = Vec::new();
        let mut emit = |label: String, restored: Vec<VideoClip>| -> Result<()> {
            reports.push(self.evaluate(&label, &restored)?);
            sink(&label, &restored)
        };
        match method {
            AttackMethod::Blind => emit("Wiener (Estimated Kernel)".into(), blind_attack(&self.degraded)?)?,
            AttackMethod::Wiener => {
                for &k in &self.suite.wiener_k {
                    emit(
                        format!("Wiener (Calibrated PSF, K={k:e})"),
                        wiener_attack(&self.degraded, &self.psf, k)?,
                    )?;
                }
            }
            AttackMethod::Rl => {
                let mut iters = self.suite.rl_iterations.clone();
                iters.sort_unstable();
                iters.dedup();
                for (n, restored) in iters.iter().zip(rl_attack(&self.degraded, &self.psf, &iters)?) {
                    emit(format!("Richardson-Lucy ({n} iterations)"), restored)?;
                }
            }
            AttackMethod::Ridge => {
                let l = self.suite.layers;
                let pairs: Vec<(Image, Image)> = self
                    .data
                    .records
                    .iter()
                    .zip(self.clean.iter().zip(&self.degraded))
                    .filter(|(r, _)| r.identity_split == Split::Train && r.split == Split::Train)
                    .flat_map(|(_, (c, d))| c.frames().iter().cloned().zip(d.frames().iter().cloned()))
                    .collect();
                let ridge_cfg = RidgeConfig {
                    seed: self.cfg.seed,
                    config_id: format!("layers={l}"),
                    ..self.suite.ridge.clone()
                };
                let restorer = ridge_train(&pairs, &ridge_cfg)?;
                let apply =
                    |clips: &[VideoClip]| map_clips(clips, |clip| map_frames(clip, |f| ridge_apply(&restorer, f)));
                emit(format!("Ridge ({l}-Layer Test)"), apply(&self.degraded)?)?;
                let cross_psf = bench_psf(self.cfg, self.suite.cross_layers)?;
                let cross = degrade_subsampled(self.data, &cross_psf, self.suite.frame_stride, self.cfg)?;
                emit(
                    format!("Ridge ({}-Layer Test)", self.suite.cross_layers),
                    apply(&cross)?,
                )?;
            }
        }
        Ok(reports)
    }
}

/// Runs the black-box, calibrated and paired-data attacks at `suite.layers`.
///
/// Rows, in order: clean upper bound, unattacked degraded footage, blind
/// Wiener, calibrated Wiener per K, Richardson-Lucy per iteration count,
/// then the ridge restorer on its own layer count and on `cross_layers`.
pub fn run_attack_suite(
    data: &BenchDataset,
    cfg: &BenchConfig,
    suite: &AttackSuiteConfig,
) -> Result<Vec<AttackReport>> {
    let ctx = AttackContext::new(data, cfg, suite)?;
    let mut reports = ctx.baseline_reports()?;
    for m in AttackMethod::ALL {
        reports.extend(ctx.run(m, |_, _| Ok(()))?);
    }
    Ok(reports)
}
