//! One-pass dual-subgradient algorithms for online binary linear programs,
//! with LP-resolving baselines, feasibility repair, instance generators and
//! a seeded experiment harness.
//!
//! ```
//! use onlinelp::{generators, algorithms, metrics, dual::StepSchedule};
//!
//! let spec = generators::GeneratorSpec::new(generators::Family::Uniform, 200, 3, 7);
//! let inst = generators::generate(&spec).unwrap();
//! let trace = algorithms::run_soa(&inst, &algorithms::AlgorithmConfig::soa(StepSchedule::OneOverSqrtN)).unwrap();
//! let result = metrics::evaluate_trial(&inst, &trace, None).unwrap();
//! assert!(result.objective <= result.offline_lp_opt + 1e-9 || result.violation > 0.0);
//! ```

pub mod algorithms;
pub mod dual;
pub mod error;
pub mod generators;
pub mod harness;
pub mod instance;
pub mod metrics;
pub mod mknap;
pub mod simplex;
pub mod trace;

pub use error::{Error, Result};
pub use instance::{Instance, MultiInstance};
pub use trace::RunTrace;
