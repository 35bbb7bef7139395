use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, MultiInstance};

/// Output of one online pass.
///
/// For binary algorithms `decisions[t] ∈ {0, 1}`; for the multi-option
/// algorithm `decisions[t]` is the 1-based option index or 0 for a reject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub decisions: Vec<u32>,
    pub objective: f64,
    pub consumption: Vec<f64>,
    /// `‖p_t‖₂` for `t = 1..=n+1` when recording was requested.
    pub dual_norm_history: Option<Vec<f64>>,
    /// Running maximum of `‖p_t‖₂` over the pass (0 for algorithms that do not keep prices).
    pub max_dual_norm: f64,
    /// Prices after the last update (`p_{n+1}`); empty for algorithms without prices.
    pub final_prices: Vec<f64>,
    /// Pre-gate decisions `x̃_t` for algorithms that gate acceptance.
    pub tentative: Option<Vec<u32>>,
    pub rng_seed: u64,
}

impl RunTrace {
    pub(crate) fn from_decisions(inst: &Instance, decisions: Vec<u32>, rng_seed: u64) -> Self {
        let objective = inst.objective(&decisions).expect("decisions sized by algorithm");
        let consumption = inst
            .consumption(&decisions)
            .expect("decisions sized by algorithm");
        RunTrace {
            decisions,
            objective,
            consumption,
            dual_norm_history: None,
            max_dual_norm: 0.0,
            final_prices: Vec::new(),
            tentative: None,
            rng_seed,
        }
    }

    pub fn accepted(&self) -> usize {
        self.decisions.iter().filter(|&&x| x > 0).count()
    }

    /// Recomputes objective and consumption from the decisions.
    pub fn recompute(&mut self, inst: &Instance) -> Result<()> {
        self.objective = inst.objective(&self.decisions)?;
        self.consumption = inst.consumption(&self.decisions)?;
        Ok(())
    }

    /// Checks the stored objective and consumption against a fresh
    /// recomputation, to 1e-9 relative tolerance.
    pub fn check_consistency(&self, inst: &Instance) -> Result<()> {
        let objective = inst.objective(&self.decisions)?;
        let consumption = inst.consumption(&self.decisions)?;
        check_close("objective", self.objective, objective)?;
        for (i, (a, b)) in self.consumption.iter().zip(&consumption).enumerate() {
            check_close(&format!("consumption[{i}]"), *a, *b)?;
        }
        Ok(())
    }

    pub fn check_consistency_multi(&self, inst: &MultiInstance) -> Result<()> {
        let objective = inst.objective(&self.decisions)?;
        let consumption = inst.consumption(&self.decisions)?;
        check_close("objective", self.objective, objective)?;
        for (i, (a, b)) in self.consumption.iter().zip(&consumption).enumerate() {
            check_close(&format!("consumption[{i}]"), *a, *b)?;
        }
        Ok(())
    }
}

fn check_close(what: &str, stored: f64, fresh: f64) -> Result<()> {
    let scale = stored.abs().max(fresh.abs()).max(1.0);
    if (stored - fresh).abs() > 1e-9 * scale {
        return Err(Error::InvalidArgument(format!(
            "trace {what} = {stored} but recomputation gives {fresh}"
        )));
    }
    Ok(())
}
