use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use onlinelp::algorithms::{self, AlgorithmConfig, RepairConfig};
use onlinelp::dual::StepSchedule;
use onlinelp::generators::{self, AdversarialParams, Family, GeneratorSpec, PermutationPlan};
use onlinelp::instance::{self as inst, MultiInstance};
use onlinelp::{metrics, mknap, simplex};

create_exception!(pyonlinelp, OnlineLpError, PyException);

fn err(e: onlinelp::Error) -> PyErr {
    OnlineLpError::new_err(e.to_string())
}

fn schedule(s: &str) -> PyResult<StepSchedule> {
    s.parse().map_err(err)
}

/// A binary online LP: rewards, an `m × n` constraint matrix and capacities.
#[pyclass(name = "Instance", module = "pyonlinelp", skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: onlinelp::Instance,
}

#[pymethods]
impl PyInstance {
    #[new]
    fn new(rewards: Vec<f64>, rows: Vec<Vec<f64>>, capacity: Vec<f64>) -> PyResult<Self> {
        let inner = onlinelp::Instance::from_rows(rewards, &rows, capacity).map_err(err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyInstance {
            inner: onlinelp::Instance::from_text(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(PyInstance {
            inner: onlinelp::Instance::read_text(path).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn rewards(&self) -> Vec<f64> {
        self.inner.rewards().to_vec()
    }

    #[getter]
    fn capacity(&self) -> Vec<f64> {
        self.inner.capacity().to_vec()
    }

    fn column(&self, j: usize) -> PyResult<Vec<f64>> {
        if j >= self.inner.n() {
            return Err(OnlineLpError::new_err(format!("column {j} out of range")));
        }
        Ok(self.inner.column(j).to_vec())
    }

    fn objective(&self, x: Vec<u32>) -> PyResult<f64> {
        self.inner.objective(&x).map_err(err)
    }

    fn consumption(&self, x: Vec<u32>) -> PyResult<Vec<f64>> {
        self.inner.consumption(&x).map_err(err)
    }

    fn violation(&self, x: Vec<u32>) -> PyResult<f64> {
        inst::violation_norm(&self.inner, &x).map_err(err)
    }

    /// `f_n(p) = dᵀp + (1/n) Σ (r_j − a_jᵀp)⁺`.
    fn dual_saa_objective(&self, prices: Vec<f64>) -> PyResult<f64> {
        inst::dual_saa_objective(&self.inner, &prices).map_err(err)
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.stats();
        let d = PyDict::new(py);
        d.set_item("r_bar", s.r_bar)?;
        d.set_item("a_bar", s.a_bar)?;
        d.set_item("d_lo", s.d_lo)?;
        d.set_item("d_hi", s.d_hi)?;
        d.set_item("dual_price_bound", s.dual_price_bound(self.inner.m()))?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Instance(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// Decisions and bookkeeping from one online pass.
#[pyclass(name = "RunTrace", module = "pyonlinelp", skip_from_py_object)]
#[derive(Clone)]
struct PyTrace {
    inner: onlinelp::RunTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn decisions(&self) -> Vec<u32> {
        self.inner.decisions.clone()
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn consumption(&self) -> Vec<f64> {
        self.inner.consumption.clone()
    }

    #[getter]
    fn max_dual_norm(&self) -> f64 {
        self.inner.max_dual_norm
    }

    #[getter]
    fn final_prices(&self) -> Vec<f64> {
        self.inner.final_prices.clone()
    }

    #[getter]
    fn dual_norm_history(&self) -> Option<Vec<f64>> {
        self.inner.dual_norm_history.clone()
    }

    #[getter]
    fn accepted(&self) -> usize {
        self.inner.accepted()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunTrace(n={}, accepted={}, objective={})",
            self.inner.decisions.len(),
            self.inner.accepted(),
            self.inner.objective
        )
    }
}

fn trace(inner: onlinelp::Result<onlinelp::RunTrace>) -> PyResult<PyTrace> {
    Ok(PyTrace {
        inner: inner.map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (family, n, m, seed=0, threshold=10.0, d_range=None))]
fn generate(
    family: &str,
    n: usize,
    m: usize,
    seed: u64,
    threshold: f64,
    d_range: Option<(f64, f64)>,
) -> PyResult<PyInstance> {
    let family = match family {
        "uniform" => Family::Uniform,
        "gaussian" => Family::Gaussian,
        "trunc_cauchy" => Family::TruncCauchy { threshold },
        "mixed_four_groups" => Family::MixedFourGroups,
        "adversarial" => Family::Adversarial(AdversarialParams::default()),
        other => return Err(OnlineLpError::new_err(format!("unknown family {other:?}"))),
    };
    let mut spec = GeneratorSpec::new(family, n, m, seed);
    if let Some(r) = d_range {
        spec.d_range = r;
    }
    spec.validate().map_err(err)?;
    Ok(PyInstance {
        inner: generators::generate(&spec).map_err(err)?,
    })
}

/// Returns the instance with its columns in a seeded random order.
#[pyfunction]
fn permute(instance: &PyInstance, seed: u64) -> PyResult<PyInstance> {
    let plan = PermutationPlan::random(instance.inner.n(), seed);
    Ok(PyInstance {
        inner: generators::permute(&instance.inner, &plan).map_err(err)?,
    })
}

#[pyfunction]
fn solve_relaxation<'py>(py: Python<'py>, instance: &PyInstance) -> PyResult<Bound<'py, PyDict>> {
    let sol = simplex::solve_relaxation(&instance.inner).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("status", format!("{:?}", sol.status).to_lowercase())?;
    d.set_item("objective", sol.objective)?;
    d.set_item("primal", sol.primal)?;
    d.set_item("duals", sol.duals)?;
    d.set_item("iterations", sol.iterations)?;
    Ok(d)
}

/// Exact binary optimum by enumeration; `n` must be at most 25.
#[pyfunction]
fn solve_binary_exact(instance: &PyInstance) -> PyResult<(f64, Vec<u32>)> {
    let best = simplex::solve_binary_exact(&instance.inner).map_err(err)?;
    Ok((best.objective, best.x))
}

#[pyfunction]
#[pyo3(signature = (instance, schedule="sqrt_n", history=false))]
fn run_soa(instance: &PyInstance, schedule: &str, history: bool) -> PyResult<PyTrace> {
    let mut cfg = AlgorithmConfig::soa(self::schedule(schedule)?);
    cfg.record_dual_history = history;
    trace(algorithms::run_soa(&instance.inner, &cfg))
}

#[pyfunction]
#[pyo3(signature = (instance, schedule="sqrt_n", history=false))]
fn run_sfa(instance: &PyInstance, schedule: &str, history: bool) -> PyResult<PyTrace> {
    let mut cfg = AlgorithmConfig::sfa(self::schedule(schedule)?);
    cfg.record_dual_history = history;
    trace(algorithms::run_sfa(&instance.inner, &cfg))
}

#[pyfunction]
#[pyo3(signature = (instance, schedule="sqrt_n", history=false))]
fn run_sna(instance: &PyInstance, schedule: &str, history: bool) -> PyResult<PyTrace> {
    let mut cfg = AlgorithmConfig::sna(self::schedule(schedule)?);
    cfg.record_dual_history = history;
    trace(algorithms::run_sna(&instance.inner, &cfg))
}

/// Multi-option SOA. `rewards[j][l]` is option `l` of arrival `j` and
/// `columns[j][l]` its resource vector. Decisions are 1-based option
/// indices, 0 for a reject.
#[pyfunction]
#[pyo3(signature = (rewards, columns, capacity, seed=0))]
fn run_multi_soa(
    rewards: Vec<Vec<f64>>,
    columns: Vec<Vec<Vec<f64>>>,
    capacity: Vec<f64>,
    seed: u64,
) -> PyResult<PyTrace> {
    let k = rewards.first().map_or(0, Vec::len);
    if rewards.iter().any(|r| r.len() != k) || columns.len() != rewards.len() {
        return Err(OnlineLpError::new_err("rewards and columns must be n × k"));
    }
    let flat_r: Vec<f64> = rewards.into_iter().flatten().collect();
    let flat_a: Vec<f64> = columns.into_iter().flatten().flatten().collect();
    let multi = MultiInstance::new(k, flat_r, flat_a, capacity).map_err(err)?;
    trace(algorithms::run_multi_soa(&multi, &AlgorithmConfig::multi_soa(seed)))
}

#[pyfunction]
fn run_dla(instance: &PyInstance) -> PyResult<PyTrace> {
    trace(algorithms::run_dla(&instance.inner))
}

#[pyfunction]
#[pyo3(signature = (instance, seed=0))]
fn run_pbd(instance: &PyInstance, seed: u64) -> PyResult<PyTrace> {
    trace(algorithms::run_pbd(&instance.inner, seed))
}

#[pyfunction]
#[pyo3(signature = (instance, trace, seed=0, skip_if_feasible=false))]
fn repair(instance: &PyInstance, trace: &PyTrace, seed: u64, skip_if_feasible: bool) -> PyResult<PyTrace> {
    let cfg = RepairConfig {
        skip_if_feasible,
        ..RepairConfig::default()
    };
    self::trace(algorithms::repair_feasibility(&instance.inner, &trace.inner, &cfg, seed))
}

#[pyfunction]
fn truncate_at_exhaustion(instance: &PyInstance, trace: &PyTrace) -> PyResult<PyTrace> {
    self::trace(algorithms::truncate_at_exhaustion(&instance.inner, &trace.inner))
}

#[pyfunction]
#[pyo3(signature = (instance, trace, lp_opt=None))]
fn evaluate_trial<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    trace: &PyTrace,
    lp_opt: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let r = metrics::evaluate_trial(&instance.inner, &trace.inner, lp_opt).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("objective", r.objective)?;
    d.set_item("offline_lp_opt", r.offline_lp_opt)?;
    d.set_item("regret", r.regret)?;
    d.set_item("violation", r.violation)?;
    d.set_item("competitiveness", r.competitiveness)?;
    d.set_item("normalized_regret", r.normalized_regret())?;
    d.set_item("normalized_violation", r.normalized_violation())?;
    Ok(d)
}

/// Every problem of a multi-knapsack file as `(Instance, known_optimum or None)`.
#[pyfunction]
fn read_mknap(path: &str) -> PyResult<Vec<(PyInstance, Option<f64>)>> {
    Ok(mknap::read_mknap(path)
        .map_err(err)?
        .into_iter()
        .map(|p| (PyInstance { inner: p.instance }, p.known_optimum))
        .collect())
}

#[pymodule]
fn pyonlinelp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("OnlineLpError", m.py().get_type::<OnlineLpError>())?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(permute, m)?)?;
    m.add_function(wrap_pyfunction!(solve_relaxation, m)?)?;
    m.add_function(wrap_pyfunction!(solve_binary_exact, m)?)?;
    m.add_function(wrap_pyfunction!(run_soa, m)?)?;
    m.add_function(wrap_pyfunction!(run_sfa, m)?)?;
    m.add_function(wrap_pyfunction!(run_sna, m)?)?;
    m.add_function(wrap_pyfunction!(run_multi_soa, m)?)?;
    m.add_function(wrap_pyfunction!(run_dla, m)?)?;
    m.add_function(wrap_pyfunction!(run_pbd, m)?)?;
    m.add_function(wrap_pyfunction!(repair, m)?)?;
    m.add_function(wrap_pyfunction!(truncate_at_exhaustion, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_trial, m)?)?;
    m.add_function(wrap_pyfunction!(read_mknap, m)?)?;
    Ok(())
}
