//! Python bindings for `fullcorr`.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use fullcorr::quantum::{self, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS};
use fullcorr::{analytic, catalogue, reduction};

create_exception!(pyfullcorr, FullcorrError, PyValueError);
create_exception!(pyfullcorr, GuardError, PyRuntimeError);

fn err(e: fullcorr::Error) -> PyErr {
    match e {
        fullcorr::Error::EnumerationGuardExceeded { .. } | fullcorr::Error::SizeGuardExceeded { .. } => {
            GuardError::new_err(e.to_string())
        }
        other => FullcorrError::new_err(other.to_string()),
    }
}

#[pyclass(frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Scenario(fullcorr::Scenario);

#[pymethods]
impl Scenario {
    #[new]
    fn new(n: usize, m: usize, k: usize) -> PyResult<Self> {
        fullcorr::Scenario::new(n, m, k).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.parties()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.settings()
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.outcomes()
    }

    fn __repr__(&self) -> String {
        format!("Scenario(n={}, m={}, k={})", self.n(), self.m(), self.k())
    }
}

#[pyclass(frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct BellExpression(fullcorr::BellExpression);

#[pymethods]
impl BellExpression {
    /// `f` is an m x k table; the default is `f_I`.
    #[new]
    #[pyo3(signature = (n, m, k, f=None))]
    fn new(n: usize, m: usize, k: usize, f: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let s = fullcorr::Scenario::new(n, m, k).map_err(err)?;
        match f {
            None => Ok(Self(fullcorr::BellExpression::omega(s))),
            Some(rows) => {
                let f = fullcorr::CoefficientFunction::new(rows).map_err(err)?;
                fullcorr::BellExpression::general(s, f).map(Self).map_err(err)
            }
        }
    }

    #[staticmethod]
    fn mabk(n: usize) -> PyResult<Self> {
        let s = fullcorr::Scenario::new(n, 2, 2).map_err(err)?;
        let f = fullcorr::CoefficientFunction::mabk(2, 2).map_err(err)?;
        fullcorr::BellExpression::general(s, f).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        fullcorr::BellExpression::from_json(text).map(Self).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn scenario(&self) -> Scenario {
        Scenario(self.0.scenario())
    }

    #[getter]
    fn f(&self) -> Vec<Vec<f64>> {
        self.0.function().rows()
    }

    fn coefficient(&self, settings: Vec<usize>, r: usize) -> PyResult<f64> {
        self.0.coefficient(&settings, r).map_err(err)
    }

    /// Correlator weights in settings-index order, plus the constant term.
    fn correlator_weights(&self) -> PyResult<(Vec<f64>, f64)> {
        let form = self.0.correlator_form().map_err(err)?;
        let weights = self
            .0
            .scenario()
            .settings_vectors()
            .map(|v| form.weight(&v))
            .collect::<fullcorr::Result<_>>()
            .map_err(err)?;
        Ok((weights, form.constant))
    }

    /// Flat coefficient tensor indexed by (settings, outcome sum).
    fn expand(&self) -> PyResult<Vec<f64>> {
        self.0.expand().map(|t| t.values().to_vec()).map_err(err)
    }

    fn __repr__(&self) -> String {
        self.0.to_json()
    }
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Behavior(fullcorr::Behavior);

#[pymethods]
impl Behavior {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        fullcorr::Behavior::from_json(text).map(Self).map_err(err)
    }

    #[staticmethod]
    fn pr_box() -> Self {
        Self(fullcorr::Behavior::pr_box())
    }

    #[staticmethod]
    fn uniform(scenario: &Scenario) -> PyResult<Self> {
        fullcorr::Behavior::uniform(scenario.0).map(Self).map_err(err)
    }

    #[staticmethod]
    fn deterministic(scenario: &Scenario, responses: Vec<Vec<usize>>) -> PyResult<Self> {
        fullcorr::Behavior::deterministic(scenario.0, &responses).map(Self).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn scenario(&self) -> Scenario {
        Scenario(self.0.scenario())
    }

    fn prob_sum(&self, settings: Vec<usize>, r: usize) -> PyResult<f64> {
        self.0.prob_sum(&settings, r).map_err(err)
    }

    fn is_no_signaling(&self) -> PyResult<bool> {
        self.0.check_no_signaling().map(|v| v.no_signaling).map_err(err)
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
pub struct BoundReport(fullcorr::BoundReport);

#[pymethods]
impl BoundReport {
    #[getter]
    fn kind(&self) -> String {
        self.0.kind.to_string()
    }

    #[getter]
    fn method(&self) -> String {
        self.0.method.to_string()
    }

    #[getter]
    fn value(&self) -> f64 {
        self.0.value.as_f64()
    }

    #[getter]
    fn exact(&self) -> Option<i64> {
        self.0.value.as_integer()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!("BoundReport(kind={}, method={}, value={})", self.0.kind, self.0.method, self.0.value)
    }
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct QuantumReport(quantum::QuantumValueReport);

#[pymethods]
impl QuantumReport {
    #[getter]
    fn value(&self) -> f64 {
        self.0.value
    }

    #[getter]
    fn angles(&self) -> Vec<Vec<f64>> {
        self.0.angles.phases().to_vec()
    }

    #[getter]
    fn target_bound(&self) -> Option<f64> {
        self.0.target_bound
    }

    #[getter]
    fn gap(&self) -> Option<f64> {
        self.0.gap
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }
}

#[pyfunction]
fn evaluate(expr: &BellExpression, behavior: &Behavior) -> PyResult<f64> {
    fullcorr::evaluate(&expr.0, &behavior.0).map_err(err)
}

#[pyfunction]
fn local_bound(expr: &BellExpression) -> PyResult<BoundReport> {
    fullcorr::local_bound(&expr.0).map(BoundReport).map_err(err)
}

#[pyfunction]
fn svetlichny_bound(expr: &BellExpression) -> PyResult<BoundReport> {
    fullcorr::svetlichny_bound(&expr.0).map(BoundReport).map_err(err)
}

#[pyfunction]
fn g_group_bound(expr: &BellExpression, groups: usize) -> PyResult<BoundReport> {
    fullcorr::g_group_bound(&expr.0, groups).map(BoundReport).map_err(err)
}

#[pyfunction]
fn known_bounds(scenario: &Scenario) -> PyResult<Vec<BoundReport>> {
    catalogue::known_bound_table(&scenario.0, "fI")
        .map(|v| v.into_iter().map(BoundReport).collect())
        .map_err(err)
}

#[pyfunction]
fn tsirelson_bound_binary(n: usize, m: usize) -> PyResult<f64> {
    analytic::tsirelson_bound_binary(n, m).map_err(err)
}

#[pyfunction]
fn diew_bound_binary(n: usize, m: usize, g: Vec<f64>) -> PyResult<f64> {
    analytic::diew_bound_binary(n, m, &g).map_err(err)
}

#[pyfunction]
fn lemma1_max(m: usize, j: usize) -> PyResult<f64> {
    analytic::lemma1_max(m, j).map_err(err)
}

/// Returns `(value, [verdict, ...])` with each verdict as `(kind, bound, violated, margin)`.
#[pyfunction]
fn classify(
    expr: &BellExpression,
    behavior: &Behavior,
    bounds: Vec<BoundReport>,
) -> PyResult<(f64, Vec<(String, f64, bool, f64)>)> {
    let bounds: Vec<_> = bounds.into_iter().map(|b| b.0).collect();
    let report = fullcorr::classify(&expr.0, &behavior.0, &bounds).map_err(err)?;
    let verdicts = report
        .verdicts
        .iter()
        .map(|v| (v.kind.to_string(), v.bound, v.violated, v.margin))
        .collect();
    Ok((report.value, verdicts))
}

#[pyfunction]
#[pyo3(signature = (expr, seed=0, restarts=DEFAULT_RESTARTS, max_iters=DEFAULT_MAX_ITERS))]
fn optimize_phases(
    py: Python<'_>,
    expr: &BellExpression,
    seed: u64,
    restarts: usize,
    max_iters: usize,
) -> PyResult<QuantumReport> {
    let expr = expr.0.clone();
    py.detach(|| quantum::optimize_phases(&expr, seed, restarts, max_iters))
        .map(QuantumReport)
        .map_err(err)
}

#[pyfunction]
fn quantum_value(expr: &BellExpression, angles: Vec<Vec<f64>>) -> PyResult<QuantumReport> {
    let angles = quantum::PhaseAssignment::new(angles).map_err(err)?;
    quantum::quantum_value(&expr.0, &angles, None).map(QuantumReport).map_err(err)
}

#[pyfunction]
fn ghz_behavior(angles: Vec<Vec<f64>>) -> PyResult<Behavior> {
    let angles = quantum::PhaseAssignment::new(angles).map_err(err)?;
    quantum::ghz_behavior(&angles).map(Behavior).map_err(err)
}

/// Whether the relabelled tensor equals the chained bipartite form.
#[pyfunction]
fn bkp_matches(m: usize, k: usize) -> PyResult<bool> {
    let expr = fullcorr::BellExpression::omega(fullcorr::Scenario::new(2, m, k).map_err(err)?);
    let got = reduction::reduce_to_bkp(&expr).map_err(err)?;
    Ok(got == reduction::bkp_form_tensor(m, k).map_err(err)?)
}

#[pyfunction]
fn svetlichny_cglmp_matches(n: usize, k: usize) -> PyResult<bool> {
    let expr = fullcorr::BellExpression::omega(fullcorr::Scenario::new(n, 2, k).map_err(err)?);
    let got = reduction::reduce_to_svetlichny_cglmp(&expr).map_err(err)?;
    Ok(got == reduction::svetlichny_cglmp_form_tensor(n, k).map_err(err)?)
}

#[pymodule]
fn pyfullcorr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("FullcorrError", py.get_type::<FullcorrError>())?;
    m.add("GuardError", py.get_type::<GuardError>())?;
    m.add_class::<Scenario>()?;
    m.add_class::<BellExpression>()?;
    m.add_class::<Behavior>()?;
    m.add_class::<BoundReport>()?;
    m.add_class::<QuantumReport>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(local_bound, m)?)?;
    m.add_function(wrap_pyfunction!(svetlichny_bound, m)?)?;
    m.add_function(wrap_pyfunction!(g_group_bound, m)?)?;
    m.add_function(wrap_pyfunction!(known_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(tsirelson_bound_binary, m)?)?;
    m.add_function(wrap_pyfunction!(diew_bound_binary, m)?)?;
    m.add_function(wrap_pyfunction!(lemma1_max, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_phases, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_value, m)?)?;
    m.add_function(wrap_pyfunction!(ghz_behavior, m)?)?;
    m.add_function(wrap_pyfunction!(bkp_matches, m)?)?;
    m.add_function(wrap_pyfunction!(svetlichny_cglmp_matches, m)?)?;
    Ok(())
}
