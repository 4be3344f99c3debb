//! Synthetic action/identity benchmark and the privacy-utility sweep.
//!
//! Clips show one striped sprite moving over a static textured scene. The
//! action label is the trajectory family; the identity label is the sprite's
//! stripe palette, stripe orientation and a faint luminance-neutral hue.
//! Stripes vanish first under scattering, the hue later, while coarse motion
//! survives.
//!
//! Utility is the held-out accuracy of a prototype-contrastive classifier on
//! pooled motion energy, trained on subjects disjoint from the test
//! subjects. Privacy risk is the accuracy of a nearest-centroid adversary on
//! appearance histograms of the sprite, trained on the same condition it
//! attacks. With IFNS on, the adversary sees the motion maps that would be
//! transmitted instead of the frames.

mod classifier;
mod dataset;
mod descriptors;
mod scene;
mod sweep;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use classifier::{
    accuracy, classify, contrastive_loss, train_contrastive, ContrastiveConfig, Gradients, NearestCentroid,
    PrototypeClassifier,
};
pub use dataset::{
    generate_dataset, labels_csv, load_clips, load_dataset_index, plan_dataset, read_labels, save_dataset,
    BenchDataset, ClipRecord, LabelTuple, Split, CLIPS_DIR, DATASET_JSON, LABELS_CSV, TRAIN_IDENTITIES,
};
pub use descriptors::{
    action_descriptor, cosine, identity_descriptor, sprite_masks, PoolingConfig, DEFAULT_GRID, DEFAULT_TIME_BINS,
    INTENSITY_BINS, MIN_SPRITE_PIXELS, ORIENTATION_BINS, SPRITE_RELATIVE_THRESHOLD, SPRITE_THRESHOLD,
};
pub use scene::{
    background, generate_clip, identity_mean_color, trajectory, ActionFamily, SceneSpec, CANVAS, CLIP_FRAMES,
    FRAME_RATE, HUE_OFFSET, NUM_ACTIONS, NUM_IDENTITIES, NUM_SCENES, SPRITE_SIZE, STRIPE_PERIOD,
};
pub use sweep::{
    bench_psf, clip_noise_seed, degrade_dataset, held_out_ssim, pareto_report, run_sweep, sweep_cell, ParetoReport,
    ParetoRow, SweepResult, SweepRow, PARETO_CSV, PARETO_DAT, SWEEP_CSV, SWEEP_HEADER,
};

use crate::error::{Error, Result};
use crate::image::{to_grayscale, Image, VideoClip};
use crate::motion::{process_clip, IfnsConfig, ProjectionKernels, DEFAULT_STEP};
use crate::seed::SeedSpec;

/// Frame spacing of the identity adversary's samples.
pub const DEFAULT_IDENTITY_STRIDE: usize = 4;

/// Every knob of the bench; the defaults are the frozen reference setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub clips_per_action: usize,
    pub frames: usize,
    pub pooling: PoolingConfig,
    pub identity_stride: usize,
    pub classifier: ContrastiveConfig,
    pub ifns_step: usize,
    pub noise_sigma: f64,
    pub kernel_size: usize,
    pub age_days: f64,
    pub layers: Vec<u32>,
    pub seed: SeedSpec,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            clips_per_action: 20,
            frames: CLIP_FRAMES,
            pooling: PoolingConfig::default(),
            identity_stride: DEFAULT_IDENTITY_STRIDE,
            classifier: ContrastiveConfig::default(),
            ifns_step: DEFAULT_STEP,
            noise_sigma: 0.01,
            kernel_size: 127,
            age_days: 0.0,
            layers: vec![0, 2, 4, 6, 8, 10, 12],
            seed: SeedSpec::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clips_per_action < 3 {
            return Err(Error::param("clips_per_action", "need at least 3 clips per action"));
        }
        if self.frames < 2 {
            return Err(Error::param("frames", "clips need at least 2 frames"));
        }
        if self.identity_stride == 0 {
            return Err(Error::param("identity_stride", "must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::param("noise_sigma", "must be finite and >= 0"));
        }
        IfnsConfig::new(self.ifns_step)?;
        self.classifier.validate()
    }

    pub fn ifns(&self) -> IfnsConfig {
        IfnsConfig { step: self.ifns_step }
    }
}

/// What the classifiers observe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    /// The (degraded) frames themselves.
    Frames,
    /// The IFNS/CFSA motion maps computed from them.
    Motion,
}

/// Per-clip descriptors for both tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub action: Vec<Vec<f64>>,
    pub identity: Vec<Vec<f64>>,
}

/// Descriptors of every clip under `view`; identity uses every
/// `identity_stride`-th frame of the given clips.
pub fn extract_features(
    clips: &[VideoClip],
    view: View,
    identity_stride: usize,
    cfg: &BenchConfig,
) -> Result<Features> {
    if identity_stride == 0 {
        return Err(Error::param("identity_stride", "must be positive"));
    }
    let ifns = cfg.ifns();
    let k3 = ProjectionKernels::identity();
    let pairs = clips
        .par_iter()
        .map(|clip| {
            let seq: Vec<Image> = match view {
                View::Frames => clip.frames().to_vec(),
                View::Motion => process_clip(clip, &ifns, &k3)?.into_iter().map(|m| m.psi).collect(),
            };
            let gray: Vec<Image> = match view {
                View::Frames => seq.iter().map(to_grayscale).collect(),
                View::Motion => seq.clone(),
            };
            let act = action_descriptor(&gray, &cfg.pooling)?;
            let sampled: Vec<Image> = seq.into_iter().step_by(identity_stride).collect();
            Ok((act, identity_descriptor(&sampled)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (action, identity) = pairs.into_iter().unzip();
    Ok(Features { action, identity })
}

/// The two trained classifiers of one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchModels {
    pub action: PrototypeClassifier,
    pub identity: NearestCentroid,
}

fn select<'a, T>(items: &'a [T], records: &'a [ClipRecord], keep: impl Fn(&ClipRecord) -> bool + 'a) -> Vec<&'a T> {
    items
        .iter()
        .zip(records)
        .filter(|(_, r)| keep(r))
        .map(|(x, _)| x)
        .collect()
}

/// Fits both classifiers on their training splits.
pub fn train_models(records: &[ClipRecord], feats: &Features, cfg: &BenchConfig) -> Result<BenchModels> {
    check_len(records, feats)?;
    let act_x: Vec<Vec<f64>> = select(&feats.action, records, |r| r.split == Split::Train)
        .into_iter()
        .cloned()
        .collect();
    let act_y: Vec<usize> = records
        .iter()
        .filter(|r| r.split == Split::Train)
        .map(|r| r.action_id)
        .collect();
    let id_x: Vec<Vec<f64>> = select(&feats.identity, records, |r| r.identity_split == Split::Train)
        .into_iter()
        .cloned()
        .collect();
    let id_y: Vec<usize> = records
        .iter()
        .filter(|r| r.identity_split == Split::Train)
        .map(|r| r.identity_id)
        .collect();
    Ok(BenchModels {
        action: train_contrastive(&act_x, &act_y, &cfg.classifier)?,
        identity: NearestCentroid::fit(&id_x, &id_y)?,
    })
}

fn check_len(records: &[ClipRecord], feats: &Features) -> Result<()> {
    if records.len() != feats.action.len() || records.len() != feats.identity.len() {
        return Err(Error::Dimension(format!(
            "{} records but {} action and {} identity descriptors",
            records.len(),
            feats.action.len(),
            feats.identity.len()
        )));
    }
    Ok(())
}

/// Held-out `(acc_act, acc_s)` of trained models.
pub fn evaluate_models(models: &BenchModels, records: &[ClipRecord], feats: &Features) -> Result<(f64, f64)> {
    check_len(records, feats)?;
    let mut act_pred = Vec::new();
    let mut act_true = Vec::new();
    let mut id_pred = Vec::new();
    let mut id_true = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if r.split == Split::Test {
            act_pred.push(classify(&models.action, &feats.action[i])?.0);
            act_true.push(r.action_id);
        }
        if r.identity_split == Split::Test {
            id_pred.push(models.identity.predict(&feats.identity[i])?);
            id_true.push(r.identity_id);
        }
    }
    if act_true.is_empty() || id_true.is_empty() {
        return Err(Error::Degenerate("a test split is empty".into()));
    }
    Ok((accuracy(&act_pred, &act_true), accuracy(&id_pred, &id_true)))
}

/// Trains on the training splits of `feats` and scores the test splits.
pub fn score(records: &[ClipRecord], feats: &Features, cfg: &BenchConfig) -> Result<(f64, f64)> {
    let models = train_models(records, feats, cfg)?;
    evaluate_models(&models, records, feats)
}

/// `(acc_act, acc_s)` of the undegraded pipeline under `view`.
pub fn clean_baseline(data: &BenchDataset, view: View, cfg: &BenchConfig) -> Result<(f64, f64)> {
    let feats = extract_features(&data.clips, view, cfg.identity_stride, cfg)?;
    score(&data.records, &feats, cfg)
}
