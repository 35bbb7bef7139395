//! Experiment configuration, read from TOML.
//!
//! ```toml
//! name = "uniform-sweep"
//! root_seed = 2024
//! trials = 50
//! n = [100, 400, 1600, 6400]
//! m = 10
//!
//! [source]
//! type = "generator"
//! family = "uniform"
//!
//! [[algorithms]]
//! kind = "soa"
//! schedule = "sqrt_n"
//!
//! [output]
//! csv = "uniform.csv"
//! summary = "uniform.json"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmConfig, AlgorithmKind, RepairConfig};
use crate::dual::StepSchedule;
use crate::error::{Error, Result};
use crate::generators::{Family, GeneratorSpec, DEFAULT_D_RANGE};
use crate::simplex::SimplexOptions;

pub const PARALLELISM_ENV: &str = "ONLINELP_THREADS";

fn default_d_range() -> (f64, f64) {
    DEFAULT_D_RANGE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Source {
    Generator {
        #[serde(flatten)]
        family: Family,
        #[serde(default = "default_d_range")]
        d_range: (f64, f64),
        /// Present the columns in a seeded uniformly random order.
        #[serde(default)]
        permute: bool,
    },
    /// Every problem of an OR-Library multi-knapsack file; trials draw
    /// random arrival orders when `permute` is set.
    Mknap {
        path: PathBuf,
        #[serde(default)]
        permute: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub kind: AlgorithmKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<StepSchedule>,
}

impl AlgorithmSpec {
    pub fn to_config(&self, rng_seed: u64) -> Result<AlgorithmConfig> {
        let schedule = match (self.kind, self.schedule) {
            (AlgorithmKind::MultiSoa, None) => Some(StepSchedule::OneOverSqrtN),
            (_, s) => s,
        };
        AlgorithmConfig::new(self.kind, schedule, rng_seed)
    }

    pub fn label(&self) -> String {
        self.to_config(0)
            .map(|c| c.label())
            .unwrap_or_else(|_| self.kind.tag().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub root_seed: u64,
    pub trials: usize,
    /// Problem sizes; ignored for mknap sources, which fix `n` per problem.
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default = "one")]
    pub m: usize,
    pub source: Source,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "no_repair")]
    pub repair: RepairConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(default)]
    pub tolerances: SimplexOptions,
}

fn one() -> usize {
    1
}

fn no_repair() -> RepairConfig {
    RepairConfig {
        enabled: false,
        ..RepairConfig::default()
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Loads and validates a config file. Relative paths inside the file
    /// resolve against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Source::Mknap { path, .. } = &mut cfg.source {
            resolve(path);
        }
        if let Some(p) = &mut cfg.output.csv {
            resolve(p);
        }
        if let Some(p) = &mut cfg.output.summary {
            resolve(p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return fail("at least one algorithm is required".into());
        }
        for a in &self.algorithms {
            a.to_config(0)
                .map_err(|e| Error::Config(format!("algorithm {}: {e}", a.kind)))?;
        }
        if let Some(0) = self.parallelism {
            return fail("parallelism must be at least 1".into());
        }
        match &self.source {
            Source::Generator { family, d_range, .. } => {
                if self.n.is_empty() {
                    return fail("the n list must not be empty".into());
                }
                for &n in &self.n {
                    let spec = GeneratorSpec {
                        family: *family,
                        n,
                        m: self.m,
                        d_range: *d_range,
                        seed: 0,
                    };
                    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
                }
            }
            Source::Mknap { path, .. } => {
                if !path.is_file() {
                    return fail(format!("benchmark file {} does not exist", path.display()));
                }
            }
        }
        if let Some(d) = self.repair.d_lo_override {
            if !(d > 0.0) {
                return fail(format!("repair.d_lo_override must be positive, got {d}"));
            }
        }
        Ok(())
    }

    /// Worker count: explicit override, then the config, then
    /// `ONLINELP_THREADS`, then the machine's available parallelism.
    pub fn resolve_parallelism(&self, flag: Option<usize>) -> usize {
        flag.or(self.parallelism)
            .or_else(|| {
                std::env::var(PARALLELISM_ENV)
                    .ok()
                    .and_then(|v| v.trim().parse().ok())
            })
            .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
            .unwrap_or(1)
            .max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "t"
root_seed = 3
trials = 2
n = [10, 20]
m = 2

[source]
type = "generator"
family = "trunc_cauchy"
threshold = 10
permute = true

[[algorithms]]
kind = "soa"
schedule = "sqrt_t"

[[algorithms]]
kind = "dla"

[[algorithms]]
kind = "multisoa"
"#;

    #[test]
    fn parses_sample() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.algorithms.len(), 3);
        assert_eq!(cfg.algorithms[0].label(), "soa[sqrt_t]");
        assert_eq!(cfg.algorithms[2].label(), "multisoa");
        assert!(!cfg.repair.enabled);
        match cfg.source {
            Source::Generator {
                family: Family::TruncCauchy { threshold },
                permute,
                ..
            } => {
                assert_eq!(threshold, 10.0);
                assert!(permute);
            }
            other => panic!("unexpected source {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = SAMPLE.replace("trials = 2", "trials = 0");
        assert!(ExperimentConfig::from_toml(&bad).unwrap().validate().is_err());
        let bad = SAMPLE.replace("n = [10, 20]", "n = []");
        assert!(ExperimentConfig::from_toml(&bad).unwrap().validate().is_err());
        let bad = SAMPLE.replace("kind = \"dla\"", "kind = \"dla\"\nschedule = \"sqrt_n\"");
        assert!(ExperimentConfig::from_toml(&bad).unwrap().validate().is_err());
        assert!(ExperimentConfig::from_toml("name = 1").is_err());
        let missing = r#"
name = "t"
trials = 1
[source]
type = "mknap"
path = "/definitely/not/here.txt"
[[algorithms]]
kind = "dla"
"#;
        assert!(ExperimentConfig::from_toml(missing).unwrap().validate().is_err());
    }

    #[test]
    fn parallelism_precedence() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.resolve_parallelism(Some(3)), 3);
        let cfg = ExperimentConfig {
            parallelism: Some(5),
            ..cfg
        };
        assert_eq!(cfg.resolve_parallelism(None), 5);
        assert_eq!(cfg.resolve_parallelism(Some(2)), 2);
    }
}
