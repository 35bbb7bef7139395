//! Binary ILP instances and the instance-level arithmetic every algorithm shares.
//!
//! An [`Instance`] holds `max rᵀx s.t. Ax ≤ b, x ∈ {0,1}ⁿ` with `A` stored
//! column-major, because every online algorithm consumes the data one column
//! at a time. The per-period budget `d = b/n` is computed once at construction
//! and never recomputed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    m: usize,
    rewards: Vec<f64>,
    columns: Vec<f64>,
    capacity: Vec<f64>,
    per_column_budget: Vec<f64>,
    metadata: BTreeMap<String, String>,
}

/// Bounds on the instance data: `r̄ = max|r_j|`, `ā = max|a_ij|`, `d̲ = min d_i`, `d̄ = max d_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub r_bar: f64,
    pub a_bar: f64,
    pub d_lo: f64,
    pub d_hi: f64,
}

impl InstanceStats {
    /// Upper bound on every dual price produced by the subgradient algorithms
    /// when all step sizes are at most one:
    /// `(2r̄ + m(ā+d̄)²)/d̲ + m(ā+d̄)`.
    pub fn dual_price_bound(&self, m: usize) -> f64 {
        let m = m as f64;
        let spread = self.a_bar + self.d_hi;
        (2.0 * self.r_bar + m * spread * spread) / self.d_lo + m * spread
    }

    /// The `m(ā+d̄)²` factor that multiplies `√n` in the regret bound.
    pub fn regret_constant(&self, m: usize) -> f64 {
        let spread = self.a_bar + self.d_hi;
        m as f64 * spread * spread
    }
}

impl Instance {
    /// Builds an instance from column-major constraint data (`columns[j*m + i] = a_ij`).
    pub fn new(rewards: Vec<f64>, columns: Vec<f64>, capacity: Vec<f64>) -> Result<Self> {
        let n = rewards.len();
        let m = capacity.len();
        if n == 0 || m == 0 {
            return Err(Error::InvalidInstance(format!(
                "need n ≥ 1 and m ≥ 1, got n = {n}, m = {m}"
            )));
        }
        if columns.len() != n * m {
            return Err(Error::Dimension(format!(
                "constraint data has {} entries, expected n·m = {}",
                columns.len(),
                n * m
            )));
        }
        if let Some(bad) = rewards
            .iter()
            .chain(&columns)
            .chain(&capacity)
            .find(|v| !v.is_finite())
        {
            return Err(Error::InvalidInstance(format!("non-finite entry {bad}")));
        }
        let per_column_budget: Vec<f64> = capacity.iter().map(|b| b / n as f64).collect();
        if let Some((i, d)) = per_column_budget
            .iter()
            .enumerate()
            .find(|(_, d)| !(**d > 0.0))
        {
            return Err(Error::InvalidInstance(format!(
                "per-column budget d_{i} = {d} must be positive"
            )));
        }
        Ok(Instance {
            n,
            m,
            rewards,
            columns,
            capacity,
            per_column_budget,
            metadata: BTreeMap::new(),
        })
    }

    /// Builds an instance from the rows of `A` (`rows[i][j] = a_ij`).
    pub fn from_rows(rewards: Vec<f64>, rows: &[Vec<f64>], capacity: Vec<f64>) -> Result<Self> {
        let n = rewards.len();
        let m = rows.len();
        if m != capacity.len() {
            return Err(Error::Dimension(format!(
                "{m} constraint rows but {} capacities",
                capacity.len()
            )));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        let mut columns = vec![0.0; n * m];
        for (i, row) in rows.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                columns[j * m + i] = a;
            }
        }
        Instance::new(rewards, columns, capacity)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn reward(&self, j: usize) -> f64 {
        self.rewards[j]
    }

    /// Column `a_j` (length `m`).
    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.m..(j + 1) * self.m]
    }

    /// Raw column-major constraint data.
    pub fn columns(&self) -> &[f64] {
        &self.columns
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.columns[j * self.m + i]
    }

    pub fn capacity(&self) -> &[f64] {
        &self.capacity
    }

    /// The per-period budget `d = b/n`.
    pub fn per_column_budget(&self) -> &[f64] {
        &self.per_column_budget
    }

    pub fn capacity_norm(&self) -> f64 {
        self.capacity.iter().map(|b| b * b).sum::<f64>().sqrt()
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn set_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.insert(key.into(), value.into());
    }

    pub fn stats(&self) -> InstanceStats {
        compute_stats(self)
    }

    /// `Ax` for a binary decision vector.
    pub fn consumption(&self, x: &[u32]) -> Result<Vec<f64>> {
        check_binary(self.n, x)?;
        let mut used = vec![0.0; self.m];
        for (j, _) in x.iter().enumerate().filter(|(_, &xj)| xj == 1) {
            for (u, a) in used.iter_mut().zip(self.column(j)) {
                *u += a;
            }
        }
        Ok(used)
    }

    /// `rᵀx` for a binary decision vector.
    pub fn objective(&self, x: &[u32]) -> Result<f64> {
        check_binary(self.n, x)?;
        Ok(x
            .iter()
            .zip(&self.rewards)
            .filter(|(&xj, _)| xj == 1)
            .fold(0.0, |acc, (_, r)| acc + r))
    }

    /// Writes the plain-text matrix format: `n m`, the rewards, the `m` rows
    /// of `A`, then the capacities. Floats use the shortest representation
    /// that parses back to the same bits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.m);
        write_row(&mut out, self.rewards.iter().copied());
        for i in 0..self.m {
            write_row(&mut out, (0..self.n).map(|j| self.entry(i, j)));
        }
        write_row(&mut out, self.capacity.iter().copied());
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::parse_text(text, Path::new("<memory>"))
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_text(&text, path)
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::harness::report::write_atomic(path.as_ref(), self.to_text().as_bytes())
    }

    fn parse_text(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let mut next_row = |what: &str, len: usize| -> Result<Vec<f64>> {
            let (line, content) = lines
                .next()
                .ok_or_else(|| err(0, format!("unexpected end of input, expected {what}")))?;
            let row = content
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| err(line, format!("non-numeric token {tok:?} in {what}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != len {
                return Err(err(
                    line,
                    format!("{what} has {} values, expected {len}", row.len()),
                ));
            }
            Ok(row)
        };
        let header = next_row("header", 2)?;
        let as_count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(err(1, format!("invalid count {v}")))
            }
        };
        let n = as_count(header[0])?;
        let m = as_count(header[1])?;
        let rewards = next_row("rewards", n)?;
        let rows = (0..m)
            .map(|i| next_row(&format!("row {} of A", i + 1), n))
            .collect::<Result<Vec<_>>>()?;
        let capacity = next_row("capacities", m)?;
        Instance::from_rows(rewards, &rows, capacity)
    }
}

fn write_row(out: &mut String, values: impl Iterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{v:?}");
    }
    out.push('\n');
}

pub(crate) fn check_binary(n: usize, x: &[u32]) -> Result<()> {
    if x.len() != n {
        return Err(Error::Dimension(format!(
            "decision vector has length {}, expected {n}",
            x.len()
        )));
    }
    if let Some((j, v)) = x.iter().enumerate().find(|(_, &v)| v > 1) {
        return Err(Error::InvalidArgument(format!(
            "decision x_{j} = {v} is not binary"
        )));
    }
    Ok(())
}

pub fn compute_stats(inst: &Instance) -> InstanceStats {
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let d = inst.per_column_budget();
    InstanceStats {
        r_bar: max_abs(inst.rewards()),
        a_bar: max_abs(inst.columns()),
        d_lo: d.iter().copied().fold(f64::INFINITY, f64::min),
        d_hi: d.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// `‖(Ax − b)⁺‖₂`, zero exactly when `x` is feasible.
pub fn violation_norm(inst: &Instance, x: &[u32]) -> Result<f64> {
    let used = inst.consumption(x)?;
    Ok(overflow_norm(&used, inst.capacity()))
}

pub(crate) fn overflow_norm(used: &[f64], capacity: &[f64]) -> f64 {
    used.iter()
        .zip(capacity)
        .map(|(u, b)| (u - b).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// The sample-average dual objective `f_n(p) = dᵀp + (1/n) Σ_j (r_j − a_jᵀp)⁺`.
///
/// `n·f_n(p)` is the D-LP objective at `p` with the optimal choice of `s`,
/// so minimizing it over `p ≥ 0` recovers the LP optimum divided by `n`.
pub fn dual_saa_objective(inst: &Instance, prices: &[f64]) -> Result<f64> {
    check_prices(inst.m(), prices)?;
    let linear = dot(inst.per_column_budget(), prices);
    let hinge: f64 = (0..inst.n())
        .map(|j| (inst.reward(j) - dot(inst.column(j), prices)).max(0.0))
        .sum();
    Ok(linear + hinge / inst.n() as f64)
}

pub(crate) fn check_prices(m: usize, prices: &[f64]) -> Result<()> {
    if prices.len() != m {
        return Err(Error::Dimension(format!(
            "price vector has length {}, expected {m}",
            prices.len()
        )));
    }
    if let Some((index, &value)) = prices.iter().enumerate().find(|(_, p)| !(**p >= 0.0)) {
        return Err(Error::NegativePrice { index, value });
    }
    Ok(())
}

/// Accept (1) iff `r_t > a_tᵀp` strictly. Ties reject.
#[inline]
pub fn threshold_decision(reward: f64, column: &[f64], prices: &[f64]) -> u32 {
    debug_assert_eq!(column.len(), prices.len());
    u32::from(reward > dot(column, prices))
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The multi-dimensional variant: each arrival offers `k` options, at most one
/// of which may be accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiInstance {
    n: usize,
    m: usize,
    k: usize,
    /// `rewards[j*k + l] = r_jl`
    rewards: Vec<f64>,
    /// `columns[(j*k + l)*m + i] = a_ijl`
    columns: Vec<f64>,
    capacity: Vec<f64>,
    per_column_budget: Vec<f64>,
}

impl MultiInstance {
    pub fn new(
        k: usize,
        rewards: Vec<f64>,
        columns: Vec<f64>,
        capacity: Vec<f64>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("k must be at least 1".into()));
        }
        if rewards.len() % k != 0 {
            return Err(Error::Dimension(format!(
                "{} rewards is not a multiple of k = {k}",
                rewards.len()
            )));
        }
        let n = rewards.len() / k;
        let m = capacity.len();
        if n == 0 || m == 0 {
            return Err(Error::InvalidInstance(format!(
                "need n ≥ 1 and m ≥ 1, got n = {n}, m = {m}"
            )));
        }
        if columns.len() != n * k * m {
            return Err(Error::Dimension(format!(
                "constraint data has {} entries, expected n·k·m = {}",
                columns.len(),
                n * k * m
            )));
        }
        let per_column_budget: Vec<f64> = capacity.iter().map(|b| b / n as f64).collect();
        if per_column_budget.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::InvalidInstance(
                "every per-column budget must be positive".into(),
            ));
        }
        Ok(MultiInstance {
            n,
            m,
            k,
            rewards,
            columns,
            capacity,
            per_column_budget,
        })
    }

    /// The `k = 1` embedding of a single-option instance.
    pub fn from_instance(inst: &Instance) -> Self {
        MultiInstance {
            n: inst.n,
            m: inst.m,
            k: 1,
            rewards: inst.rewards.clone(),
            columns: inst.columns.clone(),
            capacity: inst.capacity.clone(),
            per_column_budget: inst.per_column_budget.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn reward(&self, j: usize, l: usize) -> f64 {
        self.rewards[j * self.k + l]
    }

    pub fn column(&self, j: usize, l: usize) -> &[f64] {
        let start = (j * self.k + l) * self.m;
        &self.columns[start..start + self.m]
    }

    pub fn capacity(&self) -> &[f64] {
        &self.capacity
    }

    pub fn per_column_budget(&self) -> &[f64] {
        &self.per_column_budget
    }

    fn check_choices(&self, choices: &[u32]) -> Result<()> {
        if choices.len() != self.n {
            return Err(Error::Dimension(format!(
                "choice vector has length {}, expected {}",
                choices.len(),
                self.n
            )));
        }
        if let Some(c) = choices.iter().find(|&&c| c as usize > self.k) {
            return Err(Error::InvalidArgument(format!(
                "choice {c} outside 0..={}",
                self.k
            )));
        }
        Ok(())
    }

    /// Objective of a choice vector (`0` rejects, `l ≥ 1` accepts option `l`).
    pub fn objective(&self, choices: &[u32]) -> Result<f64> {
        self.check_choices(choices)?;
        Ok(choices
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .fold(0.0, |acc, (j, &c)| acc + self.reward(j, c as usize - 1)))
    }

    pub fn consumption(&self, choices: &[u32]) -> Result<Vec<f64>> {
        self.check_choices(choices)?;
        let mut used = vec![0.0; self.m];
        for (j, &c) in choices.iter().enumerate().filter(|(_, &c)| c > 0) {
            for (u, a) in used.iter_mut().zip(self.column(j, c as usize - 1)) {
                *u += a;
            }
        }
        Ok(used)
    }
}
