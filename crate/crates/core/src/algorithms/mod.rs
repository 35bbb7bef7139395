//! Online algorithms over a column stream.
//!
//! Every algorithm sees the columns of an [`Instance`] in storage order
//! (apply [`crate::generators::permute`] first for a random arrival order)
//! and returns a [`RunTrace`]. All of them are bit-deterministic given the
//! instance, the configuration and the seed.

mod lp_based;
mod multi;
mod repair;
mod subgradient;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use lp_based::{run_dla, run_dla_with, run_pbd, run_pbd_with};
pub use multi::run_multi_soa;
pub use repair::{repair_feasibility, repair_removal_count, truncate_at_exhaustion, RepairConfig};
pub use subgradient::{run_sfa, run_sna, run_soa};

use crate::dual::StepSchedule;
use crate::error::{Error, Result};
use crate::instance::{Instance, MultiInstance};
use crate::simplex::SimplexOptions;
use crate::trace::RunTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    /// One-pass projected dual subgradient with thresholding.
    Soa,
    /// SOA with an acceptance gate that keeps the output feasible.
    Sfa,
    /// SOA driven by the remaining-budget rate instead of the fixed budget.
    Sna,
    /// SOA over arrivals that each offer `k` options.
    MultiSoa,
    /// Thresholding with duals re-solved from every prefix LP.
    Dla,
    /// Randomized rounding of the prefix LP's newest coordinate.
    Pbd,
}

impl AlgorithmKind {
    pub fn uses_schedule(self) -> bool {
        matches!(
            self,
            AlgorithmKind::Soa | AlgorithmKind::Sfa | AlgorithmKind::Sna | AlgorithmKind::MultiSoa
        )
    }

    pub fn tag(self) -> &'static str {
        match self {
            AlgorithmKind::Soa => "soa",
            AlgorithmKind::Sfa => "sfa",
            AlgorithmKind::Sna => "sna",
            AlgorithmKind::MultiSoa => "multisoa",
            AlgorithmKind::Dla => "dla",
            AlgorithmKind::Pbd => "pbd",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "soa" => Ok(AlgorithmKind::Soa),
            "sfa" => Ok(AlgorithmKind::Sfa),
            "sna" => Ok(AlgorithmKind::Sna),
            "multisoa" | "multi_soa" | "multi" => Ok(AlgorithmKind::MultiSoa),
            "dla" => Ok(AlgorithmKind::Dla),
            "pbd" => Ok(AlgorithmKind::Pbd),
            other => Err(Error::InvalidArgument(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    /// Present exactly for the subgradient algorithms. MultiSOA only accepts
    /// [`StepSchedule::OneOverSqrtN`].
    pub schedule: Option<StepSchedule>,
    pub rng_seed: u64,
    pub record_dual_history: bool,
}

impl AlgorithmConfig {
    pub fn new(kind: AlgorithmKind, schedule: Option<StepSchedule>, rng_seed: u64) -> Result<Self> {
        let cfg = AlgorithmConfig {
            kind,
            schedule,
            rng_seed,
            record_dual_history: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn soa(schedule: StepSchedule) -> Self {
        AlgorithmConfig {
            kind: AlgorithmKind::Soa,
            schedule: Some(schedule),
            rng_seed: 0,
            record_dual_history: false,
        }
    }

    pub fn sfa(schedule: StepSchedule) -> Self {
        AlgorithmConfig {
            kind: AlgorithmKind::Sfa,
            ..Self::soa(schedule)
        }
    }

    pub fn sna(schedule: StepSchedule) -> Self {
        AlgorithmConfig {
            kind: AlgorithmKind::Sna,
            ..Self::soa(schedule)
        }
    }

    pub fn multi_soa(rng_seed: u64) -> Self {
        AlgorithmConfig {
            kind: AlgorithmKind::MultiSoa,
            schedule: Some(StepSchedule::OneOverSqrtN),
            rng_seed,
            record_dual_history: false,
        }
    }

    pub fn dla() -> Self {
        AlgorithmConfig {
            kind: AlgorithmKind::Dla,
            schedule: None,
            rng_seed: 0,
            record_dual_history: false,
        }
    }

    pub fn pbd(rng_seed: u64) -> Self {
        AlgorithmConfig {
            kind: AlgorithmKind::Pbd,
            schedule: None,
            rng_seed,
            record_dual_history: false,
        }
    }

    pub fn with_history(mut self) -> Self {
        self.record_dual_history = true;
        self
    }

    pub fn with_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind.uses_schedule(), self.schedule) {
            (true, None) => Err(Error::InvalidArgument(format!(
                "{} needs a step schedule",
                self.kind
            ))),
            (false, Some(_)) => Err(Error::InvalidArgument(format!(
                "{} does not take a step schedule",
                self.kind
            ))),
            _ if self.kind == AlgorithmKind::MultiSoa
                && self.schedule != Some(StepSchedule::OneOverSqrtN) =>
            {
                Err(Error::InvalidArgument(
                    "multisoa only supports the 1/sqrt(n) schedule".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Short label such as `soa[sqrt_n]` used in reports.
    pub fn label(&self) -> String {
        match self.schedule {
            Some(s) if self.kind != AlgorithmKind::MultiSoa => format!("{}[{}]", self.kind, s),
            _ => self.kind.tag().to_string(),
        }
    }

    fn expect(&self, kind: AlgorithmKind) -> Result<StepSchedule> {
        self.validate()?;
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!(
                "configuration is for {}, not {kind}",
                self.kind
            )));
        }
        Ok(self.schedule.unwrap_or(StepSchedule::OneOverSqrtN))
    }
}

/// Runs whichever algorithm `cfg` names. MultiSOA runs on the `k = 1` embedding.
pub fn run(inst: &Instance, cfg: &AlgorithmConfig, opts: &SimplexOptions) -> Result<RunTrace> {
    match cfg.kind {
        AlgorithmKind::Soa => run_soa(inst, cfg),
        AlgorithmKind::Sfa => run_sfa(inst, cfg),
        AlgorithmKind::Sna => run_sna(inst, cfg),
        AlgorithmKind::MultiSoa => run_multi_soa(&MultiInstance::from_instance(inst), cfg),
        AlgorithmKind::Dla => run_dla_with(inst, cfg.record_dual_history, opts),
        AlgorithmKind::Pbd => run_pbd_with(inst, cfg.rng_seed, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(AlgorithmConfig::new(AlgorithmKind::Soa, None, 0).is_err());
        assert!(AlgorithmConfig::new(AlgorithmKind::Dla, Some(StepSchedule::OneOverSqrtN), 0).is_err());
        assert!(AlgorithmConfig::new(AlgorithmKind::MultiSoa, Some(StepSchedule::OneOverSqrtT), 0).is_err());
        assert!(AlgorithmConfig::new(AlgorithmKind::Pbd, None, 3).is_ok());
        assert_eq!(AlgorithmConfig::soa(StepSchedule::OneOverSqrtT).label(), "soa[sqrt_t]");
        assert_eq!(AlgorithmConfig::dla().label(), "dla");
    }

    #[test]
    fn kind_round_trip() {
        for k in [
            AlgorithmKind::Soa,
            AlgorithmKind::Sfa,
            AlgorithmKind::Sna,
            AlgorithmKind::MultiSoa,
            AlgorithmKind::Dla,
            AlgorithmKind::Pbd,
        ] {
            assert_eq!(k.tag().parse::<AlgorithmKind>().unwrap(), k);
        }
    }
}
