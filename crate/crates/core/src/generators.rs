//! Seeded instance generators for the experiment protocols.
//!
//! Every generator is a pure function of its [`GeneratorSpec`]: the same
//! spec (including the seed) always yields the same instance bits. Columns
//! are drawn one at a time (reward first, then the `m` constraint entries)
//! and the per-period budgets last.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

pub const DEFAULT_D_RANGE: (f64, f64) = (1.0 / 3.0, 2.0 / 3.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `a_ij, r_j ~ U[0, 2]`.
    Uniform,
    /// `a_ij ~ N(1, 1)`, `r_j = Σ_i a_ij − ε_j` with `ε_j ~ U(0, m)`.
    Gaussian,
    /// As `Gaussian` but `a_ij ~ Cauchy(1, 1)` redrawn until `|a_ij| ≤ threshold`.
    TruncCauchy { threshold: f64 },
    /// Four equal blocks with `a_ij` from `U[0,2]`, `N(1,1)`, `N(0,1)` and
    /// uniform on `{−1, 1, 3}`; `r_j ~ U[0, 1]` throughout.
    MixedFourGroups,
    /// Low-reward first half, high-reward second half.
    Adversarial(AdversarialParams),
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Gaussian => "gaussian",
            Family::TruncCauchy { .. } => "trunc_cauchy",
            Family::MixedFourGroups => "mixed_four_groups",
            Family::Adversarial(_) => "adversarial",
        }
    }
}

/// Two-phase instance generalizing the multi-secretary example: the first
/// `⌊n/2⌋` columns pay `low_reward`, the rest `high_reward`.
///
/// With `random_columns = false` every entry of `A` is 1 and every
/// `d_i = capacity_fraction`; with `m = 1` and the defaults this is the
/// single-resource problem with `b = n/2` and rewards `(1,…,1,2,…,2)`.
/// With `random_columns = true`, `a_ij ~ U[0, 2]` and `d_i ~ U[d_range]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdversarialParams {
    pub low_reward: f64,
    pub high_reward: f64,
    pub capacity_fraction: f64,
    pub random_columns: bool,
}

impl Default for AdversarialParams {
    fn default() -> Self {
        AdversarialParams {
            low_reward: 1.0,
            high_reward: 2.0,
            capacity_fraction: 0.5,
            random_columns: false,
        }
    }
}

fn default_d_range() -> (f64, f64) {
    DEFAULT_D_RANGE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    pub m: usize,
    #[serde(default = "default_d_range")]
    pub d_range: (f64, f64),
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, m: usize, seed: u64) -> Self {
        GeneratorSpec {
            family,
            n,
            m,
            d_range: DEFAULT_D_RANGE,
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Generator(format!(
                "need n, m ≥ 1 (got n = {}, m = {})",
                self.n, self.m
            )));
        }
        let (lo, hi) = self.d_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Generator(format!(
                "d_range must satisfy 0 < lo ≤ hi, got ({lo}, {hi})"
            )));
        }
        match self.family {
            Family::TruncCauchy { threshold } if !(threshold > 0.0) => Err(Error::Generator(
                format!("truncation threshold must be positive, got {threshold}"),
            )),
            Family::Adversarial(p) if !(p.capacity_fraction > 0.0) => Err(Error::Generator(
                format!(
                    "capacity fraction must be positive, got {}",
                    p.capacity_fraction
                ),
            )),
            _ => Ok(()),
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Generates an instance for any family.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    match spec.family {
        Family::Uniform => gen_uniform(spec),
        Family::Gaussian => gen_gaussian(spec),
        Family::TruncCauchy { .. } => gen_trunc_cauchy(spec),
        Family::MixedFourGroups => gen_mixed_four_groups(spec),
        Family::Adversarial(_) => gen_adversarial(spec),
    }
}

fn expect_family(spec: &GeneratorSpec, tag: &str) -> Result<()> {
    spec.validate()?;
    if spec.family.tag() != tag {
        return Err(Error::Generator(format!(
            "spec is for family {}, not {tag}",
            spec.family.tag()
        )));
    }
    Ok(())
}

fn draw_budgets(spec: &GeneratorSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (lo, hi) = spec.d_range;
    let dist = Uniform::new_inclusive(lo, hi).expect("validated range");
    (0..spec.m).map(|_| n as f64 * dist.sample(rng)).collect()
}

pub fn gen_uniform(spec: &GeneratorSpec) -> Result<Instance> {
    expect_family(spec, "uniform")?;
    let (n, m) = (spec.n, spec.m);
    let mut rng = spec.rng();
    let unif = Uniform::new_inclusive(0.0, 2.0).expect("static range");
    let mut rewards = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(n * m);
    for _ in 0..n {
        rewards.push(unif.sample(&mut rng));
        columns.extend((0..m).map(|_| unif.sample(&mut rng)));
    }
    let capacity = draw_budgets(spec, n, &mut rng);
    Instance::new(rewards, columns, capacity)
}

/// Shared body of the Gaussian and truncated-Cauchy protocols: `r_j` is the
/// column sum minus `U(0, m)` noise.
fn column_sum_rewards(
    spec: &GeneratorSpec,
    mut entry: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Result<Instance> {
    let (n, m) = (spec.n, spec.m);
    let mut rng = spec.rng();
    let noise = Uniform::new(0.0, m as f64).expect("m ≥ 1");
    let mut rewards = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(n * m);
    for _ in 0..n {
        let start = columns.len();
        for _ in 0..m {
            columns.push(entry(&mut rng));
        }
        let sum: f64 = columns[start..].iter().sum();
        rewards.push(sum - noise.sample(&mut rng));
    }
    let capacity = draw_budgets(spec, n, &mut rng);
    Instance::new(rewards, columns, capacity)
}

pub fn gen_gaussian(spec: &GeneratorSpec) -> Result<Instance> {
    expect_family(spec, "gaussian")?;
    let normal = Normal::new(1.0, 1.0).expect("static parameters");
    column_sum_rewards(spec, |rng| normal.sample(rng))
}

/// Two-sided magnitude truncation by rejection: draws outside `[−τ, τ]` are
/// discarded and redrawn, so no probability mass piles up at `±τ`.
pub fn gen_trunc_cauchy(spec: &GeneratorSpec) -> Result<Instance> {
    expect_family(spec, "trunc_cauchy")?;
    let Family::TruncCauchy { threshold } = spec.family else {
        unreachable!("checked by expect_family");
    };
    let cauchy = Cauchy::new(1.0, 1.0).expect("static parameters");
    column_sum_rewards(spec, |rng| loop {
        let v: f64 = cauchy.sample(rng);
        if v.abs() <= threshold {
            break v;
        }
    })
}

/// Blocks are laid out in fixed group order; apply [`permute`] to mix them.
/// When `n` is not a multiple of 4 it is truncated to the nearest lower
/// multiple and the instance metadata records how many columns were dropped.
pub fn gen_mixed_four_groups(spec: &GeneratorSpec) -> Result<Instance> {
    expect_family(spec, "mixed_four_groups")?;
    let n = spec.n - spec.n % 4;
    if n == 0 {
        return Err(Error::Generator(format!(
            "mixed-four-groups needs n ≥ 4, got {}",
            spec.n
        )));
    }
    let m = spec.m;
    let group = n / 4;
    let mut rng = spec.rng();
    let unif02 = Uniform::new_inclusive(0.0, 2.0).expect("static range");
    let unif01 = Uniform::new_inclusive(0.0, 1.0).expect("static range");
    let n11 = Normal::new(1.0, 1.0).expect("static parameters");
    let n01 = Normal::new(0.0, 1.0).expect("static parameters");
    const DISCRETE: [f64; 3] = [-1.0, 1.0, 3.0];
    let mut rewards = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(n * m);
    for j in 0..n {
        rewards.push(unif01.sample(&mut rng));
        for _ in 0..m {
            let a = match j / group {
                0 => unif02.sample(&mut rng),
                1 => n11.sample(&mut rng),
                2 => n01.sample(&mut rng),
                _ => DISCRETE[rng.random_range(0..3)],
            };
            columns.push(a);
        }
    }
    let capacity = draw_budgets(spec, n, &mut rng);
    let mut inst = Instance::new(rewards, columns, capacity)?;
    inst.set_metadata("truncated_columns", (spec.n - n).to_string());
    Ok(inst)
}

pub fn gen_adversarial(spec: &GeneratorSpec) -> Result<Instance> {
    expect_family(spec, "adversarial")?;
    let Family::Adversarial(p) = spec.family else {
        unreachable!("checked by expect_family");
    };
    let (n, m) = (spec.n, spec.m);
    let half = n / 2;
    let rewards: Vec<f64> = (0..n)
        .map(|j| if j < half { p.low_reward } else { p.high_reward })
        .collect();
    let (columns, capacity) = if p.random_columns {
        let mut rng = spec.rng();
        let unif = Uniform::new_inclusive(0.0, 2.0).expect("static range");
        let columns = (0..n * m).map(|_| unif.sample(&mut rng)).collect();
        (columns, draw_budgets(spec, n, &mut rng))
    } else {
        (vec![1.0; n * m], vec![p.capacity_fraction * n as f64; m])
    };
    let mut inst = Instance::new(rewards, columns, capacity)?;
    inst.set_metadata("generator", "adversarial two-phase");
    Ok(inst)
}

/// An arrival order: `order[t]` is the original index of the column seen at step `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationPlan {
    pub n: usize,
    pub seed: u64,
    pub order: Vec<usize>,
}

impl PermutationPlan {
    pub fn identity(n: usize) -> Self {
        PermutationPlan {
            n,
            seed: 0,
            order: (0..n).collect(),
        }
    }

    /// Uniformly random order (Fisher–Yates) from a seeded generator.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        PermutationPlan { n, seed, order }
    }

    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &j in &order {
            if j >= n || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidArgument(format!(
                    "order is not a permutation of 0..{n}"
                )));
            }
        }
        Ok(PermutationPlan { n, seed: 0, order })
    }

    pub fn inverse(&self) -> Self {
        let mut order = vec![0; self.n];
        for (t, &j) in self.order.iter().enumerate() {
            order[j] = t;
        }
        PermutationPlan {
            n: self.n,
            seed: self.seed,
            order,
        }
    }
}

/// Reorders rewards and columns by `plan.order`; capacities are unchanged.
pub fn permute(inst: &Instance, plan: &PermutationPlan) -> Result<Instance> {
    if plan.n != inst.n() || plan.order.len() != inst.n() {
        return Err(Error::Dimension(format!(
            "permutation over {} elements applied to an instance with n = {}",
            plan.order.len(),
            inst.n()
        )));
    }
    let rewards = plan.order.iter().map(|&j| inst.reward(j)).collect();
    let columns = plan
        .order
        .iter()
        .flat_map(|&j| inst.column(j).iter().copied())
        .collect();
    let mut out = Instance::new(rewards, columns, inst.capacity().to_vec())?;
    for (k, v) in inst.metadata() {
        out.set_metadata(k.clone(), v.clone());
    }
    Ok(out)
}

/// Multi-constraint knapsack in the Chu–Beasley style used by the larger
/// OR-Library files: integer weights `U{0..1000}`, capacities
/// `tightness · Σ_j w_ij`, profits `Σ_i w_ij / m + 500·U(0,1)` rounded down.
pub fn gen_chu_beasley(n: usize, m: usize, tightness: f64, seed: u64) -> Result<Instance> {
    if n == 0 || m == 0 || !(tightness > 0.0 && tightness <= 1.0) {
        return Err(Error::Generator(format!(
            "need n, m ≥ 1 and tightness in (0, 1], got n = {n}, m = {m}, tightness = {tightness}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = vec![0.0; n * m];
    for i in 0..m {
        for j in 0..n {
            columns[j * m + i] = rng.random_range(0..=1000) as f64;
        }
    }
    let rewards = (0..n)
        .map(|j| {
            let mean: f64 = columns[j * m..(j + 1) * m].iter().sum::<f64>() / m as f64;
            (mean + 500.0 * rng.random::<f64>()).floor()
        })
        .collect();
    let capacity = (0..m)
        .map(|i| (tightness * (0..n).map(|j| columns[j * m + i]).sum::<f64>()).floor())
        .collect();
    Instance::new(rewards, columns, capacity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let mut spec = GeneratorSpec::new(Family::Uniform, 10, 2, 0);
        spec.d_range = (0.0, 1.0);
        assert!(gen_uniform(&spec).is_err());
        let spec = GeneratorSpec::new(Family::TruncCauchy { threshold: 0.0 }, 10, 2, 0);
        assert!(gen_trunc_cauchy(&spec).is_err());
        let spec = GeneratorSpec::new(Family::Gaussian, 10, 2, 0);
        assert!(gen_uniform(&spec).is_err());
    }

    #[test]
    fn mixed_truncates_to_multiple_of_four() {
        let spec = GeneratorSpec::new(Family::MixedFourGroups, 10, 2, 3);
        let inst = gen_mixed_four_groups(&spec).unwrap();
        assert_eq!(inst.n(), 8);
        assert_eq!(inst.metadata()["truncated_columns"], "2");
        assert!(gen_mixed_four_groups(&GeneratorSpec::new(Family::MixedFourGroups, 3, 2, 3)).is_err());
    }

    #[test]
    fn example_one_layout() {
        let spec = GeneratorSpec::new(Family::Adversarial(AdversarialParams::default()), 6, 1, 0);
        let inst = gen_adversarial(&spec).unwrap();
        assert_eq!(inst.rewards(), &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        assert_eq!(inst.capacity(), &[3.0]);
        assert!(inst.columns().iter().all(|&a| a == 1.0));
    }

    #[test]
    fn plan_validation_and_inverse() {
        assert!(PermutationPlan::from_order(vec![0, 0, 1]).is_err());
        assert!(PermutationPlan::from_order(vec![0, 3, 1]).is_err());
        let plan = PermutationPlan::random(50, 9);
        let composed: Vec<usize> = plan.inverse().order.iter().map(|&t| plan.order[t]).collect();
        assert_eq!(composed, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn spec_serde_round_trip() {
        let spec = GeneratorSpec::new(Family::TruncCauchy { threshold: 10.0 }, 100, 3, 5);
        let text = toml::to_string(&spec).unwrap();
        let back: GeneratorSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let spec: GeneratorSpec = toml::from_str("family = \"uniform\"\nn = 5\nm = 2\n").unwrap();
        assert_eq!(spec.d_range, DEFAULT_D_RANGE);
    }
}
