use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Step-size schedule for the projected subgradient update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepSchedule {
    /// `γ_t = 1/√n` for every step.
    #[serde(rename = "sqrt_n")]
    OneOverSqrtN,
    /// `γ_t = 1/√t`.
    #[serde(rename = "sqrt_t")]
    OneOverSqrtT,
    /// `γ_t = 1`.
    #[serde(rename = "unit")]
    ConstantUnit,
}

impl StepSchedule {
    /// Step size for the 1-based step `t` of an `n`-step pass.
    #[inline]
    pub fn step_size(self, t: usize, n: usize) -> f64 {
        match self {
            StepSchedule::OneOverSqrtN => 1.0 / (n as f64).sqrt(),
            StepSchedule::OneOverSqrtT => 1.0 / (t as f64).sqrt(),
            StepSchedule::ConstantUnit => 1.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            StepSchedule::OneOverSqrtN => "sqrt_n",
            StepSchedule::OneOverSqrtT => "sqrt_t",
            StepSchedule::ConstantUnit => "unit",
        }
    }
}

impl fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for StepSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sqrt_n" | "1/sqrt(n)" | "one_over_sqrt_n" => Ok(StepSchedule::OneOverSqrtN),
            "sqrt_t" | "1/sqrt(t)" | "one_over_sqrt_t" => Ok(StepSchedule::OneOverSqrtT),
            "unit" | "1" | "constant" => Ok(StepSchedule::ConstantUnit),
            other => Err(Error::InvalidArgument(format!(
                "unknown step schedule {other:?} (expected sqrt_n, sqrt_t or unit)"
            ))),
        }
    }
}

/// Dual prices maintained by the one-pass algorithms.
#[derive(Debug, Clone)]
pub struct DualState {
    prices: Vec<f64>,
    step_index: usize,
    horizon: usize,
    schedule: StepSchedule,
    max_norm_seen: f64,
}

impl DualState {
    pub fn new(m: usize, horizon: usize, schedule: StepSchedule) -> Self {
        DualState {
            prices: vec![0.0; m],
            step_index: 1,
            horizon,
            schedule,
            max_norm_seen: 0.0,
        }
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// 1-based index of the step about to be taken.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn schedule(&self) -> StepSchedule {
        self.schedule
    }

    pub fn max_norm_seen(&self) -> f64 {
        self.max_norm_seen
    }

    pub fn norm(&self) -> f64 {
        self.prices.iter().map(|p| p * p).sum::<f64>().sqrt()
    }

    pub fn current_step_size(&self) -> f64 {
        self.schedule.step_size(self.step_index, self.horizon)
    }

    /// `p ← max(p + γ_t (used − target), 0)`, where `used` is `a_t x_t` (or
    /// `None` when nothing was consumed) and `target` is the per-period
    /// budget the step pulls towards.
    pub fn step(&mut self, used: Option<&[f64]>, target: &[f64]) {
        let gamma = self.current_step_size();
        match used {
            Some(a) => {
                for ((p, a), d) in self.prices.iter_mut().zip(a).zip(target) {
                    *p = (*p + gamma * (a - d)).max(0.0);
                }
            }
            None => {
                for (p, d) in self.prices.iter_mut().zip(target) {
                    *p = (*p - gamma * d).max(0.0);
                }
            }
        }
        self.step_index += 1;
        debug_assert!(self.prices.iter().all(|p| *p >= 0.0));
        self.max_norm_seen = self.max_norm_seen.max(self.norm());
    }

    /// Counts a step without touching the prices (used when the final update
    /// is dead state).
    pub fn skip(&mut self) {
        self.step_index += 1;
    }
}
