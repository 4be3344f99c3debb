use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scene::{generate_clip, SceneSpec, NUM_ACTIONS, NUM_IDENTITIES, NUM_SCENES};
use super::BenchConfig;
use crate::error::{Error, Result};
use crate::image::VideoClip;
use crate::io::{load_clip, read_json, save_clip, write_atomic, write_json};

pub const LABELS_CSV: &str = "labels.csv";
pub const DATASET_JSON: &str = "dataset.json";
pub const CLIPS_DIR: &str = "clips";
/// Identities `0..TRAIN_IDENTITIES` form the action-training subjects.
pub const TRAIN_IDENTITIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

/// Labels and scene parameters of one clip.
///
/// `split` is the subject-disjoint action split; `identity_split` the
/// clip-disjoint split used by the identity adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipRecord {
    pub clip_id: String,
    pub identity_id: usize,
    pub action_id: usize,
    pub split: Split,
    pub identity_split: Split,
    pub scene: SceneSpec,
}

impl ClipRecord {
    /// True when the clip is held out by either task.
    pub fn held_out(&self) -> bool {
        self.split == Split::Test || self.identity_split == Split::Test
    }
}

#[derive(Debug, Clone)]
pub struct BenchDataset {
    pub records: Vec<ClipRecord>,
    pub clips: Vec<VideoClip>,
}

/// Clip parameters and splits for the configured bench; no rendering.
pub fn plan_dataset(cfg: &BenchConfig) -> Result<Vec<ClipRecord>> {
    cfg.validate()?;
    let mut rng = cfg.seed.stream("bench/dataset");
    let mut records = Vec::with_capacity(NUM_ACTIONS * cfg.clips_per_action);
    let mut per_identity = [0usize; NUM_IDENTITIES];
    for action in 0..NUM_ACTIONS {
        for k in 0..cfg.clips_per_action {
            let idx = action * cfg.clips_per_action + k;
            let identity = idx % NUM_IDENTITIES;
            let scene_id = rng.random_range(0..NUM_SCENES);
            let mut scene = SceneSpec::random(identity, action, scene_id, &mut rng);
            scene.frames = cfg.frames;
            scene.seed = cfg.seed;
            let nth = per_identity[identity];
            per_identity[identity] += 1;
            records.push(ClipRecord {
                clip_id: format!("clip_{idx:04}"),
                identity_id: identity,
                action_id: action,
                split: if identity < TRAIN_IDENTITIES {
                    Split::Train
                } else {
                    Split::Test
                },
                identity_split: if nth % 3 == 2 { Split::Test } else { Split::Train },
                scene,
            });
        }
    }
    Ok(records)
}

/// Renders every planned clip, in parallel over clips.
pub fn generate_dataset(cfg: &BenchConfig) -> Result<BenchDataset> {
    let records = plan_dataset(cfg)?;
    let clips = records
        .par_iter()
        .map(|r| generate_clip(&r.scene))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchDataset { records, clips })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    config: BenchConfig,
    records: Vec<ClipRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    clip_id: String,
    identity_id: usize,
    action_id: usize,
    split: String,
    identity_split: String,
}

pub fn labels_csv(records: &[ClipRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(LabelRow {
            clip_id: r.clip_id.clone(),
            identity_id: r.identity_id,
            action_id: r.action_id,
            split: r.split.to_string(),
            identity_split: r.identity_split.to_string(),
        })
        .map_err(|e| Error::Numerical(format!("csv encoding: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| Error::Numerical(format!("csv encoding: {e}")))
}

/// Writes `clips/<clip_id>/`, `labels.csv` and `dataset.json` under `dir`.
pub fn save_dataset(data: &BenchDataset, cfg: &BenchConfig, dir: &Path) -> Result<()> {
    let clips_dir = dir.join(CLIPS_DIR);
    data.records
        .par_iter()
        .zip(&data.clips)
        .try_for_each(|(r, clip)| save_clip(clip, &clips_dir.join(&r.clip_id)))?;
    write_atomic(&dir.join(LABELS_CSV), &labels_csv(&data.records)?)?;
    write_json(
        &dir.join(DATASET_JSON),
        &DatasetFile {
            config: cfg.clone(),
            records: data.records.clone(),
        },
    )
}

/// Reads the config and records of a saved dataset.
pub fn load_dataset_index(dir: &Path) -> Result<(BenchConfig, Vec<ClipRecord>)> {
    let file: DatasetFile = read_json(&dir.join(DATASET_JSON))?;
    Ok((file.config, file.records))
}

/// Loads the clips from `clip_root/<clip_id>/` for every record.
pub fn load_clips(records: &[ClipRecord], clip_root: &Path) -> Result<Vec<VideoClip>> {
    records
        .par_iter()
        .map(|r| load_clip(&clip_root.join(&r.clip_id)))
        .collect()
}

/// `(clip_id, identity_id, action_id, split, identity_split)`.
pub type LabelTuple = (String, usize, usize, Split, Split);

/// Reads `labels.csv` and checks that it agrees with the records.
pub fn read_labels(path: &Path) -> Result<Vec<LabelTuple>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut out = Vec::new();
    for row in rd.deserialize::<LabelRow>() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let parse = |s: &str| {
            s.parse::<Split>().map_err(|reason| Error::Parse {
                path: path.to_path_buf(),
                reason,
            })
        };
        out.push((
            row.clip_id,
            row.identity_id,
            row.action_id,
            parse(&row.split)?,
            parse(&row.identity_split)?,
        ));
    }
    Ok(out)
}
