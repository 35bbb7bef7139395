//! Dense bounded-variable primal simplex for the LP relaxation
//!
//! ```text
//! max rᵀx  s.t.  Ax ≤ b,  0 ≤ x ≤ 1
//! ```
//!
//! The box `0 ≤ x ≤ 1` is handled through variable bounds, so the basis is
//! always `m × m` and most iterations are cheap bound flips. Rows with a
//! negative right-hand side get an artificial variable and a phase-one pass.
//! Pricing is Dantzig's rule until `3(n+m)` consecutive degenerate iterations
//! have been seen, after which the solve switches to Bland's rule for good.
//!
//! After the last iteration the primal values and the duals are recomputed
//! from the final basis with an LU solve, so accumulated tableau round-off
//! does not leak into the reported prices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{dot, Instance};

/// Largest `n` accepted by [`solve_binary_exact`].
pub const ENUMERATION_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimplexOptions {
    /// Smallest tableau entry accepted as a pivot.
    pub pivot_tol: f64,
    /// Slack allowed on primal feasibility (scaled by `1 + ‖b‖∞`).
    pub feasibility_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pivot_tol: 1e-9,
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub primal: Vec<f64>,
    /// Prices `p` on the capacity rows.
    pub duals: Vec<f64>,
    /// Prices `s` on the `x ≤ 1` bounds, `s_j = max(0, r_j − a_jᵀp)`.
    pub reduced_bounds_duals: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub iterations: usize,
}

impl LpSolution {
    fn infeasible(n: usize, m: usize, iterations: usize) -> Self {
        LpSolution {
            primal: vec![0.0; n],
            duals: vec![0.0; m],
            reduced_bounds_duals: vec![0.0; n],
            objective: f64::NEG_INFINITY,
            status: LpStatus::Infeasible,
            iterations,
        }
    }

    /// `bᵀp + 1ᵀs`, the dual objective at the extracted prices.
    pub fn dual_objective(&self, rhs: &[f64]) -> f64 {
        dot(rhs, &self.duals) + self.reduced_bounds_duals.iter().sum::<f64>()
    }
}

/// Solves the LP relaxation of the full instance.
pub fn solve_relaxation(inst: &Instance) -> Result<LpSolution> {
    solve_relaxation_with(inst, &SimplexOptions::default())
}

pub fn solve_relaxation_with(inst: &Instance, opts: &SimplexOptions) -> Result<LpSolution> {
    solve_box_lp(inst.rewards(), inst.columns(), inst.capacity(), opts)
}

/// Solves the scaled LP over the first `s` columns with capacity `s·d + relax`.
pub fn solve_scaled(inst: &Instance, s: usize, relax: &[f64]) -> Result<LpSolution> {
    solve_scaled_with(inst, s, relax, &SimplexOptions::default())
}

pub fn solve_scaled_with(
    inst: &Instance,
    s: usize,
    relax: &[f64],
    opts: &SimplexOptions,
) -> Result<LpSolution> {
    let m = inst.m();
    if s == 0 || s > inst.n() {
        return Err(Error::InvalidArgument(format!(
            "prefix length {s} outside 1..={}",
            inst.n()
        )));
    }
    if relax.len() != m {
        return Err(Error::Dimension(format!(
            "relaxation vector has length {}, expected {m}",
            relax.len()
        )));
    }
    if relax.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::InvalidArgument(
            "relaxation amounts must be non-negative".into(),
        ));
    }
    let rhs: Vec<f64> = inst
        .per_column_budget()
        .iter()
        .zip(relax)
        .map(|(d, e)| s as f64 * d + e)
        .collect();
    solve_box_lp(&inst.rewards()[..s], &inst.columns()[..s * m], &rhs, opts)
}

/// Solves `max cᵀx s.t. Ax ≤ rhs, 0 ≤ x ≤ 1` for column-major `A` with
/// `rhs.len()` rows. `rhs` may have negative entries.
pub fn solve_box_lp(
    objective: &[f64],
    columns: &[f64],
    rhs: &[f64],
    opts: &SimplexOptions,
) -> Result<LpSolution> {
    let n = objective.len();
    let m = rhs.len();
    if m == 0 {
        return Err(Error::Dimension("LP needs at least one row".into()));
    }
    if columns.len() != n * m {
        return Err(Error::Dimension(format!(
            "constraint data has {} entries, expected {}",
            columns.len(),
            n * m
        )));
    }
    let mut tableau = Tableau::new(objective, columns, rhs, opts);
    tableau.solve()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau<'a> {
    objective: &'a [f64],
    columns: &'a [f64],
    rhs: &'a [f64],
    opts: SimplexOptions,
    n: usize,
    m: usize,
    /// Total variable count: structural, slack, artificial.
    width: usize,
    /// Row-major `m × width`, the current `B⁻¹[A I ±I]`.
    rows: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    artificial_rows: Vec<usize>,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl<'a> Tableau<'a> {
    fn new(objective: &'a [f64], columns: &'a [f64], rhs: &'a [f64], opts: &SimplexOptions) -> Self {
        let n = objective.len();
        let m = rhs.len();
        let artificial_rows: Vec<usize> = (0..m).filter(|&i| rhs[i] < 0.0).collect();
        let width = n + m + artificial_rows.len();
        let mut rows = vec![0.0; m * width];
        let mut beta = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut state = vec![VarState::AtLower; width];
        let mut upper = vec![1.0; width];
        for u in &mut upper[n..] {
            *u = f64::INFINITY;
        }
        for i in 0..m {
            let row = &mut rows[i * width..(i + 1) * width];
            for (j, r) in row[..n].iter_mut().enumerate() {
                *r = columns[j * m + i];
            }
            row[n + i] = 1.0;
        }
        for (k, &i) in artificial_rows.iter().enumerate() {
            // a_i x + s_i − art = b_i with b_i < 0; the artificial starts basic at −b_i.
            let art = n + m + k;
            let row = &mut rows[i * width..(i + 1) * width];
            row[art] = -1.0;
            for v in row.iter_mut() {
                *v = -*v;
            }
            basis[i] = art;
            state[art] = VarState::Basic;
            beta[i] = -rhs[i];
        }
        for i in 0..m {
            if rhs[i] >= 0.0 {
                basis[i] = n + i;
                state[n + i] = VarState::Basic;
                beta[i] = rhs[i];
            }
        }
        Tableau {
            objective,
            columns,
            rhs,
            opts: *opts,
            n,
            m,
            width,
            rows,
            beta,
            basis,
            state,
            upper,
            cost: vec![0.0; width],
            reduced: vec![0.0; width],
            artificial_rows,
            iterations: 0,
            degenerate_run: 0,
            bland: false,
        }
    }

    fn solve(&mut self) -> Result<LpSolution> {
        let rhs_scale = 1.0 + self.rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        if !self.artificial_rows.is_empty() {
            let mut cost = vec![0.0; self.width];
            for c in &mut cost[self.n + self.m..] {
                *c = -1.0;
            }
            self.set_cost(cost);
            self.run_phase()?;
            let infeasibility: f64 = (0..self.m)
                .filter(|&i| self.basis[i] >= self.n + self.m)
                .map(|i| self.beta[i].max(0.0))
                .sum();
            if infeasibility > self.opts.feasibility_tol * rhs_scale {
                return Ok(LpSolution::infeasible(self.n, self.m, self.iterations));
            }
            for u in &mut self.upper[self.n + self.m..] {
                *u = 0.0;
            }
            self.degenerate_run = 0;
        }
        let mut cost = vec![0.0; self.width];
        cost[..self.n].copy_from_slice(self.objective);
        self.set_cost(cost);
        if !self.run_phase()? {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                ..LpSolution::infeasible(self.n, self.m, self.iterations)
            });
        }
        self.extract()
    }

    fn set_cost(&mut self, cost: Vec<f64>) {
        self.reduced.copy_from_slice(&cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.rows[i * self.width..(i + 1) * self.width];
                for (d, t) in self.reduced.iter_mut().zip(row) {
                    *d -= cb * t;
                }
            }
        }
        for i in 0..self.m {
            self.reduced[self.basis[i]] = 0.0;
        }
        self.cost = cost;
    }

    /// Iterates to optimality for the current cost; `false` on unboundedness.
    fn run_phase(&mut self) -> Result<bool> {
        let limit = 50 * (self.width + self.m) + 10_000;
        let mut count = 0;
        loop {
            match self.iterate() {
                Step::Optimal => return Ok(true),
                Step::Unbounded => return Ok(false),
                Step::Moved => {}
            }
            count += 1;
            if count > limit {
                return Err(Error::Solver(format!(
                    "no convergence after {count} iterations"
                )));
            }
        }
    }

    fn choose_entering(&self) -> Option<usize> {
        let tol = self.opts.optimality_tol;
        let improving = |j: usize| -> Option<f64> {
            let d = self.reduced[j];
            match self.state[j] {
                VarState::AtLower if d > tol && self.upper[j] > 0.0 => Some(d),
                VarState::AtUpper if d < -tol => Some(-d),
                _ => None,
            }
        };
        if self.bland {
            (0..self.width).find(|&j| improving(j).is_some())
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.width {
                if let Some(score) = improving(j) {
                    if best.is_none_or(|(_, s)| score > s) {
                        best = Some((j, score));
                    }
                }
            }
            best.map(|(j, _)| j)
        }
    }

    fn iterate(&mut self) -> Step {
        let Some(q) = self.choose_entering() else {
            return Step::Optimal;
        };
        self.iterations += 1;
        let dir = if self.state[q] == VarState::AtLower {
            1.0
        } else {
            -1.0
        };
        let w = self.width;

        // Ratio test. `None` row means the entering variable hits its own bound.
        let mut theta = self.upper[q];
        let mut leave: Option<(usize, bool)> = None;
        let mut leave_alpha = 0.0_f64;
        for i in 0..self.m {
            let alpha = self.rows[i * w + q];
            if alpha.abs() <= self.opts.pivot_tol {
                continue;
            }
            let rate = dir * alpha;
            let b = self.basis[i];
            let (limit, to_upper) = if rate > 0.0 {
                (self.beta[i].max(0.0) / rate, false)
            } else {
                let ub = self.upper[b];
                if ub.is_infinite() {
                    continue;
                }
                ((ub - self.beta[i]).max(0.0) / -rate, true)
            };
            let better = if limit < theta - 1e-12 {
                true
            } else if limit <= theta + 1e-12 {
                // Ties against the bound flip keep the flip, which needs no pivot.
                match leave {
                    Some((r, _)) if self.bland => b < self.basis[r],
                    Some(_) => alpha.abs() > leave_alpha,
                    None => false,
                }
            } else {
                false
            };
            if better {
                theta = limit;
                leave = Some((i, to_upper));
                leave_alpha = alpha.abs();
            }
        }
        if theta.is_infinite() {
            return Step::Unbounded;
        }

        if theta <= 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run > 3 * (self.n + self.m) {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }

        for i in 0..self.m {
            let alpha = self.rows[i * w + q];
            if alpha != 0.0 {
                self.beta[i] -= theta * dir * alpha;
            }
        }

        match leave {
            None => {
                self.state[q] = if dir > 0.0 {
                    VarState::AtUpper
                } else {
                    VarState::AtLower
                };
            }
            Some((r, to_upper)) => {
                let entering_value = if dir > 0.0 {
                    theta
                } else {
                    self.upper[q] - theta
                };
                let leaving = self.basis[r];
                self.state[leaving] = if to_upper {
                    VarState::AtUpper
                } else {
                    VarState::AtLower
                };
                self.pivot(r, q);
                self.basis[r] = q;
                self.state[q] = VarState::Basic;
                self.beta[r] = entering_value;
            }
        }
        Step::Moved
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let pivot = self.rows[r * w + q];
        {
            let row = &mut self.rows[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= pivot;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.rows.split_at_mut(r * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let factor = row[q];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= factor * p;
                }
                row[q] = 0.0;
            }
        }
        let factor = self.reduced[q];
        if factor != 0.0 {
            for (d, p) in self.reduced.iter_mut().zip(pivot_row.iter()) {
                *d -= factor * p;
            }
            self.reduced[q] = 0.0;
        }
    }

    /// Original constraint column of variable `j`.
    fn original_column(&self, j: usize) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        if j < n {
            self.columns[j * m..(j + 1) * m].to_vec()
        } else if j < n + m {
            let mut e = vec![0.0; m];
            e[j - n] = 1.0;
            e
        } else {
            let mut e = vec![0.0; m];
            e[self.artificial_rows[j - n - m]] = -1.0;
            e
        }
    }

    fn extract(&self) -> Result<LpSolution> {
        let (n, m) = (self.n, self.m);
        let mut values = vec![0.0; self.width];
        for j in 0..self.width {
            if self.state[j] == VarState::AtUpper {
                values[j] = self.upper[j];
            }
        }
        let mut basis_matrix = DMatrix::<f64>::zeros(m, m);
        for (k, &b) in self.basis.iter().enumerate() {
            for (i, v) in self.original_column(b).into_iter().enumerate() {
                basis_matrix[(i, k)] = v;
            }
        }
        let mut residual = DVector::from_column_slice(self.rhs);
        for j in 0..n {
            if values[j] != 0.0 && self.state[j] != VarState::Basic {
                for i in 0..m {
                    residual[i] -= self.columns[j * m + i] * values[j];
                }
            }
        }
        let lu = basis_matrix.clone().lu();
        let basic_values = lu
            .solve(&residual)
            .ok_or_else(|| Error::Solver("final basis is singular".into()))?;
        let basic_costs = DVector::from_iterator(m, self.basis.iter().map(|&b| self.cost[b]));
        let prices = basis_matrix
            .transpose()
            .lu()
            .solve(&basic_costs)
            .ok_or_else(|| Error::Solver("final basis is singular".into()))?;
        for (k, &b) in self.basis.iter().enumerate() {
            values[b] = basic_values[k];
        }

        let tol = 1e-9;
        let primal: Vec<f64> = values[..n]
            .iter()
            .map(|&x| {
                if (-tol..0.0).contains(&x) {
                    0.0
                } else if x > 1.0 && x <= 1.0 + tol {
                    1.0
                } else {
                    x
                }
            })
            .collect();
        let duals: Vec<f64> = prices.iter().map(|&p| p.max(0.0)).collect();
        let reduced_bounds_duals: Vec<f64> = (0..n)
            .map(|j| (self.objective[j] - dot(&self.columns[j * m..(j + 1) * m], &duals)).max(0.0))
            .collect();
        let objective = dot(self.objective, &primal);
        Ok(LpSolution {
            primal,
            duals,
            reduced_bounds_duals,
            objective,
            status: LpStatus::Optimal,
            iterations: self.iterations,
        })
    }
}

/// Exact binary optimum by enumerating all `2ⁿ` assignments in Gray-code order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryOptimum {
    /// `−∞` when no assignment is feasible.
    pub objective: f64,
    /// Empty when no assignment is feasible.
    pub x: Vec<u32>,
}

pub fn solve_binary_exact(inst: &Instance) -> Result<BinaryOptimum> {
    let n = inst.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationBudget {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let m = inst.m();
    let capacity = inst.capacity();
    let slack: Vec<f64> = capacity.iter().map(|b| 1e-9 * (1.0 + b.abs())).collect();
    let feasible = |used: &[f64]| {
        used.iter()
            .zip(capacity)
            .zip(&slack)
            .all(|((u, b), s)| *u <= b + s)
    };

    let mut used = vec![0.0; m];
    let mut value = 0.0;
    let mut mask: u32 = 0;
    let mut best: Option<(f64, u32)> = feasible(&used).then_some((0.0, 0));
    for step in 1u32..(1u32 << n) {
        let j = step.trailing_zeros() as usize;
        let sign = if mask & (1 << j) == 0 { 1.0 } else { -1.0 };
        mask ^= 1 << j;
        value += sign * inst.reward(j);
        for (u, a) in used.iter_mut().zip(inst.column(j)) {
            *u += sign * a;
        }
        if best.is_none_or(|(b, _)| value > b) && feasible(&used) {
            best = Some((value, mask));
        }
    }
    Ok(match best {
        Some((_, mask)) => {
            let x: Vec<u32> = (0..n).map(|j| (mask >> j) & 1).collect();
            BinaryOptimum {
                objective: inst.objective(&x)?,
                x,
            }
        }
        None => BinaryOptimum {
            objective: f64::NEG_INFINITY,
            x: Vec::new(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_variable() {
        let inst = Instance::new(vec![1.0], vec![1.0], vec![0.5]).unwrap();
        let sol = solve_relaxation(&inst).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.primal[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.objective, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.duals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.reduced_bounds_duals[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_items_one_row() {
        let inst = Instance::new(vec![2.0, 1.0], vec![1.0, 1.0], vec![1.0]).unwrap();
        let sol = solve_relaxation(&inst).unwrap();
        assert_abs_diff_eq!(sol.objective, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.primal[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.primal[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            sol.dual_objective(inst.capacity()),
            sol.objective,
            epsilon = 1e-9
        );
    }

    #[test]
    fn nonpositive_rewards_reject_everything() {
        let inst = Instance::from_rows(
            vec![-1.0, 0.0, -2.5],
            &[vec![1.0, -2.0, 0.5], vec![0.3, 0.3, 0.3]],
            vec![1.0, 1.0],
        )
        .unwrap();
        let sol = solve_relaxation(&inst).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.primal.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn negative_rhs_phase_one() {
        // x1 + x2 ≤ 1 and −x1 ≤ −0.25 (x1 ≥ 0.25), max −x1 + 2 x2
        let sol = solve_box_lp(
            &[-1.0, 2.0],
            &[1.0, -1.0, 1.0, 0.0],
            &[1.0, -0.25],
            &SimplexOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.primal[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.primal[1], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.objective, 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(
            sol.dual_objective(&[1.0, -0.25]),
            sol.objective,
            epsilon = 1e-9
        );
    }

    #[test]
    fn infeasible_rhs() {
        // −x1 ≤ −2 cannot hold with x1 ≤ 1
        let sol = solve_box_lp(&[1.0], &[-1.0], &[-2.0], &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn scaled_full_prefix_matches_relaxation() {
        let inst = Instance::from_rows(
            vec![1.0, 2.0, 0.5, 1.5],
            &[vec![1.0, 2.0, 0.5, 1.0], vec![0.2, 1.0, 1.0, 0.3]],
            vec![2.0, 1.0],
        )
        .unwrap();
        let full = solve_relaxation(&inst).unwrap();
        let scaled = solve_scaled(&inst, 4, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(full.objective, scaled.objective, epsilon = 1e-9);
    }

    #[test]
    fn scaled_single_prefix() {
        let inst = Instance::new(vec![1.0, 3.0], vec![1.0, 1.0], vec![1.0]).unwrap();
        let sol = solve_scaled(&inst, 1, &[0.0]).unwrap();
        assert_abs_diff_eq!(sol.primal[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.objective, 0.5, epsilon = 1e-12);
        assert!(solve_scaled(&inst, 0, &[0.0]).is_err());
        assert!(solve_scaled(&inst, 3, &[0.0]).is_err());
        assert!(solve_scaled(&inst, 1, &[-1.0]).is_err());
    }

    #[test]
    fn relax_adds_capacity() {
        let inst = Instance::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0]).unwrap();
        let sol = solve_scaled(&inst, 2, &[0.5]).unwrap();
        assert_abs_diff_eq!(sol.objective, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn binary_small_cases() {
        let inst = Instance::new(vec![2.0, 1.0], vec![1.0, 1.0], vec![1.0]).unwrap();
        let opt = solve_binary_exact(&inst).unwrap();
        assert_eq!(opt.objective, 2.0);
        assert_eq!(opt.x, vec![1, 0]);

        let inst = Instance::new(vec![-1.0], vec![1.0], vec![1.0]).unwrap();
        let opt = solve_binary_exact(&inst).unwrap();
        assert_eq!(opt.objective, 0.0);
        assert_eq!(opt.x, vec![0]);
    }

    #[test]
    fn binary_budget_guard() {
        let n = ENUMERATION_LIMIT + 1;
        let inst = Instance::new(vec![1.0; n], vec![1.0; n], vec![1.0]).unwrap();
        assert!(matches!(
            solve_binary_exact(&inst),
            Err(Error::EnumerationBudget { .. })
        ));
    }
}
