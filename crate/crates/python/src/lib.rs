//! Python bindings: second-order distributions, the two uncertainty
//! decompositions, the Monte Carlo oracles and the axiom suite.
//!
//! Structured results (axiom reports, reproducers) cross the boundary as
//! JSON strings; parse them with `json.loads`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use uqreg::axioms::{reproduce_counterexample, run_suite, SuiteRequest, REPRO_IDS};
use uqreg::config::parse_second_order;
use uqreg::measures::{compute, EstimatorPolicy, MeasureRequest};
use uqreg::numerics::RandomnessContract;
use uqreg::oracle::{self, OracleEstimate};
use uqreg::{Family, MeasureKind, ParamPoint, UncertaintyReport, UqError};

fn err(e: UqError) -> PyErr {
    if e.is_usage() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn family(name: &str) -> PyResult<Family> {
    name.parse().map_err(err)
}

fn kind(name: &str) -> PyResult<MeasureKind> {
    name.parse().map_err(err)
}

/// A distribution over the parameters of an exponential-family predictive.
#[pyclass(name = "SecondOrder", module = "uqreg", frozen)]
#[derive(Clone)]
pub struct PySecondOrder(pub uqreg::SecondOrderDist);

#[pymethods]
impl PySecondOrder {
    /// Normal-inverse-gamma over Gaussian `(μ, σ²)`.
    #[staticmethod]
    fn nig(gamma: f64, upsilon: f64, alpha: f64, beta: f64) -> PyResult<Self> {
        uqreg::SecondOrderDist::nig(gamma, upsilon, alpha, beta).map(Self).map_err(err)
    }

    /// Equally weighted ensemble; each member is a full parameter vector.
    #[staticmethod]
    fn mixture(family_name: &str, members: Vec<Vec<f64>>) -> PyResult<Self> {
        uqreg::SecondOrderDist::mixture(family(family_name)?, members).map(Self).map_err(err)
    }

    #[staticmethod]
    fn dirac(family_name: &str, theta: Vec<f64>) -> PyResult<Self> {
        let p = ParamPoint::new(family(family_name)?, theta).map_err(err)?;
        Ok(Self(uqreg::SecondOrderDist::dirac(&p)))
    }

    /// Any law the configuration files accept, given as an inline TOML
    /// table, e.g. `"{ law = 'pareto', alpha = 1.5 }"`.
    #[staticmethod]
    fn from_toml(family_name: &str, table: &str) -> PyResult<Self> {
        let value: toml::Value = format!("q = {table}")
            .parse::<toml::Table>()
            .map_err(|e| PyValueError::new_err(e.to_string()))?
            .remove("q")
            .expect("key just written");
        parse_second_order(family(family_name)?, &value, "second_order").map(Self).map_err(err)
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.0.family().name()
    }

    /// `θ̄ = E_Q[θ]`.
    fn mean_params(&self) -> PyResult<Vec<f64>> {
        self.0.mean_params().map(ParamPoint::into_values).map_err(err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("distributions serialise")
    }

    fn __repr__(&self) -> String {
        format!("SecondOrder({})", self.to_json())
    }
}

/// TU, AU and EU for one measure.
#[pyclass(name = "Report", module = "uqreg", frozen, get_all)]
pub struct PyReport {
    measure: String,
    tu: f64,
    au: f64,
    eu: f64,
    additivity_gap: f64,
    se_tu: Option<f64>,
    se_au: Option<f64>,
    se_eu: Option<f64>,
    estimator: String,
}

impl From<UncertaintyReport> for PyReport {
    fn from(r: UncertaintyReport) -> Self {
        PyReport {
            measure: r.measure.to_string(),
            tu: r.tu,
            au: r.au,
            eu: r.eu,
            additivity_gap: r.additivity_gap,
            se_tu: r.se_tu,
            se_au: r.se_au,
            se_eu: r.se_eu,
            estimator: r.estimator.to_string(),
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!("Report({}: tu={}, au={}, eu={}, {})", self.measure, self.tu, self.au, self.eu, self.estimator)
    }
}

/// `measure` is `"entropy"` or `"variance"`. Closed forms are used where
/// they exist; `mc_samples` forces Monte Carlo.
#[pyfunction]
#[pyo3(signature = (q, measure, mc_samples = None, seed = 0))]
fn measure(q: &PySecondOrder, measure: &str, mc_samples: Option<usize>, seed: u64) -> PyResult<PyReport> {
    let mut req = MeasureRequest::new(q.0.clone(), kind(measure)?);
    if let Some(samples) = mc_samples {
        req = req.with_policy(EstimatorPolicy::ForceMonteCarlo {
            samples,
            rng: RandomnessContract::new(seed, 0),
        });
    }
    compute(&req).map(PyReport::from).map_err(err)
}

fn estimate(o: OracleEstimate) -> (f64, f64) {
    (o.value, o.se())
}

/// Monte Carlo `(total, aleatoric, epistemic)` variance terms, each as
/// `(value, standard_error)`.
#[pyfunction]
#[pyo3(signature = (q, n = 100_000, seed = 0))]
fn oracle_variance(q: &PySecondOrder, n: usize, seed: u64) -> PyResult<[(f64, f64); 3]> {
    let d = oracle::mc_variance_decomposition(&q.0, RandomnessContract::new(seed, 0), n).map_err(err)?;
    Ok([estimate(d.total), estimate(d.aleatoric), estimate(d.epistemic)])
}

/// Nested Monte Carlo `(marginal, conditional, mutual_info)` entropy terms.
#[pyfunction]
#[pyo3(signature = (q, n = 100_000, seed = 0))]
fn oracle_entropy(q: &PySecondOrder, n: usize, seed: u64) -> PyResult<[(f64, f64); 3]> {
    let d = oracle::mc_entropy_decomposition(&q.0, RandomnessContract::new(seed, 0), n).map_err(err)?;
    Ok([estimate(d.h_marginal), estimate(d.h_conditional), estimate(d.mutual_info)])
}

/// The default axiom suite as a JSON report.
#[pyfunction]
#[pyo3(signature = (measure = "both", seed = 0))]
fn run_axioms(py: Python<'_>, measure: &str, seed: u64) -> PyResult<String> {
    let mut req = SuiteRequest::default_suite(seed);
    if measure != "both" {
        req.measures = vec![kind(measure)?];
    }
    let report = py.detach(|| run_suite(&req));
    Ok(serde_json::to_string(&report).expect("reports serialise"))
}

/// One counterexample reproducer as JSON; see `REPRO_IDS`.
#[pyfunction]
#[pyo3(signature = (id, seed = 0))]
fn reproduce(py: Python<'_>, id: &str, seed: u64) -> PyResult<String> {
    let report = py.detach(|| reproduce_counterexample(id, seed)).map_err(err)?;
    Ok(serde_json::to_string(&report).expect("reports serialise"))
}

#[pymodule]
#[pyo3(name = "uqreg")]
fn uqreg_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySecondOrder>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_variance, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(run_axioms, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    m.add("REPRO_IDS", REPRO_IDS.to_vec())?;
    Ok(())
}
