//! Experiment configuration shared by the command-line tool.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attacks::AttackSuiteConfig;
use crate::bench::BenchConfig;
use crate::error::{Error, Result};
use crate::io::{parse_json, write_json};
use crate::motion::IfnsConfig;
use crate::optics::ScatterConfig;
use crate::seed::SeedSpec;

/// Version of the configuration layout; bumped on incompatible changes.
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// One reproducible experiment. Unknown keys are rejected at every level.
///
/// `seed` is the master seed: [`ExperimentConfig::resolved`] copies it into
/// every block, so the seeds inside `scatter`, `bench` and `attack.ridge`
/// never need to be written by hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: SeedSpec,
    pub output_dir: PathBuf,
    pub scatter: ScatterConfig,
    pub ifns: IfnsConfig,
    pub bench: BenchConfig,
    pub attack: AttackSuiteConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: SeedSpec::default(),
            output_dir: PathBuf::from("results"),
            scatter: ScatterConfig::default(),
            ifns: IfnsConfig::default(),
            bench: BenchConfig::default(),
            attack: AttackSuiteConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates; `path` only labels errors.
    pub fn from_json_str(text: &str, path: &Path) -> Result<Self> {
        let cfg: Self = parse_json(text, path)?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                reason: format!(
                    "at `/schema_version`: unsupported version {}, expected {CONFIG_SCHEMA_VERSION}",
                    cfg.schema_version
                ),
            });
        }
        cfg.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::Parse {
                path: path.to_path_buf(),
                reason: format!("at `/{}`: {reason}", name.replace('.', "/")),
            },
            other => other,
        })?;
        Ok(cfg.resolved())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable config")
    }

    /// Checks every block; parameter errors are named `block.field`.
    pub fn validate(&self) -> Result<()> {
        fn within(block: &str, r: Result<()>) -> Result<()> {
            r.map_err(|e| match e {
                Error::InvalidParameter { name, reason } => Error::InvalidParameter {
                    name: format!("{block}.{name}"),
                    reason,
                },
                other => other,
            })
        }
        within("scatter", self.scatter.validate())?;
        within("ifns", self.ifns.validate())?;
        within("bench", self.bench.validate())?;
        within("attack.ridge", self.attack.ridge.validate())?;
        if self.attack.frame_stride == 0 {
            return Err(Error::param("attack.frame_stride", "must be positive"));
        }
        Ok(())
    }

    /// Same config with the master seed copied into every block.
    pub fn resolved(mut self) -> Self {
        self.scatter.seed = self.seed;
        self.bench.seed = self.seed;
        self.attack.ridge.seed = self.seed;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = SeedSpec::new(seed);
        self.resolved()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let cfg = ExperimentConfig::default().with_seed(99);
        let back = ExperimentConfig::from_json_str(&cfg.to_json_string(), Path::new("c.json")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn empty_object_is_the_default() {
        let cfg = ExperimentConfig::from_json_str("{}", Path::new("c.json")).unwrap();
        assert_eq!(cfg, ExperimentConfig::default().resolved());
    }

    #[test]
    fn errors_carry_a_json_pointer() {
        let err = ExperimentConfig::from_json_str(r#"{"bench": {"layers": [0, "x"]}}"#, Path::new("c.json"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("`/bench/layers/1`"), "{err}");
        let err = ExperimentConfig::from_json_str(r#"{"scatter": {"layerz": 3}}"#, Path::new("c.json"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("/scatter") && err.contains("layerz"), "{err}");
    }

    #[test]
    fn invalid_values_point_into_the_document() {
        let err = ExperimentConfig::from_json_str(r#"{"ifns": {"step": 0}}"#, Path::new("c.json"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("`/ifns/step`"), "{err}");
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        assert!(ExperimentConfig::from_json_str(r#"{"schema_version": 7}"#, Path::new("c.json")).is_err());
    }
}
