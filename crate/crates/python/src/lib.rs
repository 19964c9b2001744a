//! Python bindings for `seqbell`.
//!
//! Distributions are returned as lists of 16 floats in canonical outcome
//! order (see [`outcome_labels`]). Report structures come back as plain
//! dicts mirroring their JSON form.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use seqbell::hvm::{self, FeasibilityResult, PairTargets};
use seqbell::inequality::{self, MaximizeOptions, Restriction};
use seqbell::{quantum, sampler, CorrelatorSet, Mode, OutcomeQuadruple, PairLabel, PlanarAngle, Sign};

fn to_py_err(e: seqbell::Error) -> PyErr {
    match e {
        seqbell::Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(to_py_err)
}

fn parse_sign(s: i64) -> PyResult<Sign> {
    match s {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        _ => Err(PyValueError::new_err(format!("sign must be +1 or -1, got {s}"))),
    }
}

fn parse_pair(pair: &str) -> PyResult<PairLabel> {
    pair.parse().map_err(to_py_err)
}

/// Measurement settings `(a, a', b, b')` in radians plus the experiment mode.
#[pyclass(name = "Scenario", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyScenario(seqbell::Scenario);

#[pymethods]
impl PyScenario {
    #[new]
    fn new(mode: &str, a: f64, a_prime: f64, b: f64, b_prime: f64) -> PyResult<Self> {
        seqbell::Scenario::from_radians(parse_mode(mode)?, a, a_prime, b, b_prime)
            .map(PyScenario)
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn from_degrees(mode: &str, a: f64, a_prime: f64, b: f64, b_prime: f64) -> PyResult<Self> {
        seqbell::Scenario::from_degrees(parse_mode(mode)?, a, a_prime, b, b_prime)
            .map(PyScenario)
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn from_differences(mode: &str, theta_ab: f64, theta_aa: f64, theta_bb: f64) -> PyResult<Self> {
        seqbell::Scenario::from_differences(parse_mode(mode)?, theta_ab, theta_aa, theta_bb)
            .map(PyScenario)
            .map_err(to_py_err)
    }

    #[getter]
    fn mode(&self) -> String {
        self.0.mode.to_string()
    }

    #[getter]
    fn angles(&self) -> [f64; 4] {
        self.0.angles().map(PlanarAngle::radians)
    }

    fn with_mode(&self, mode: &str) -> PyResult<Self> {
        Ok(PyScenario(self.0.with_mode(parse_mode(mode)?)))
    }

    fn __repr__(&self) -> String {
        let [a, ap, b, bp] = self.angles();
        format!("Scenario('{}', {a}, {ap}, {b}, {bp})", self.0.mode)
    }
}

/// Hidden-variable model over `lambda = (alpha, beta)`.
#[pyclass(name = "HVModel", frozen)]
struct PyHVModel(hvm::HVModel);

#[pymethods]
impl PyHVModel {
    #[staticmethod]
    fn build(sc: &PyScenario) -> PyResult<Self> {
        hvm::build_contextual_model(&sc.0).map(PyHVModel).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        hvm::load_model(path).map(PyHVModel).map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        hvm::HVModel::from_json(text).map(PyHVModel).map_err(to_py_err)
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        hvm::save_model(&self.0, path).map_err(to_py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(to_py_err)
    }

    #[getter]
    fn settings(&self) -> PyScenario {
        PyScenario(*self.0.settings())
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights()
    }

    fn induced(&self) -> PyResult<Vec<f64>> {
        hvm::induced_distribution(&self.0)
            .map(|d| d.probs().to_vec())
            .map_err(to_py_err)
    }

    #[pyo3(signature = (tol = 1e-12))]
    fn check<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &hvm::check_factorizability(&self.0, tol))
    }

    fn hv_correlator(&self, pair: &str) -> PyResult<f64> {
        Ok(hvm::hv_correlator(&self.0, parse_pair(pair)?))
    }
}

/// Labels such as `"+-+-"` for `(A1, B1, A2, B2)` in canonical order.
#[pyfunction]
fn outcome_labels() -> Vec<String> {
    OutcomeQuadruple::all().map(|q| q.label()).collect()
}

/// Spin state along `m` as `[(re, im), (re, im)]`.
#[pyfunction]
fn make_spin_state(m: f64, sign: i64) -> PyResult<[(f64, f64); 2]> {
    let angle = PlanarAngle::from_radians(m).map_err(to_py_err)?;
    let st = quantum::make_spin_state(angle, parse_sign(sign)?);
    Ok(st.amplitudes().map(|c| (c.re, c.im)))
}

#[pyfunction]
fn transition_prob(m_from: f64, s_from: i64, m_to: f64, s_to: i64) -> PyResult<f64> {
    let from = PlanarAngle::from_radians(m_from).map_err(to_py_err)?;
    let to = PlanarAngle::from_radians(m_to).map_err(to_py_err)?;
    Ok(quantum::transition_prob(from, parse_sign(s_from)?, to, parse_sign(s_to)?))
}

#[pyfunction]
fn grand_joint_quantum(sc: &PyScenario) -> PyResult<Vec<f64>> {
    quantum::grand_joint_quantum(&sc.0)
        .map(|d| d.probs().to_vec())
        .map_err(to_py_err)
}

/// Marginal of the sequential joint for a pair such as `"A1,B2"`, ordered
/// `(++, +-, -+, --)`.
#[pyfunction]
fn marginal_pair(sc: &PyScenario, pair: &str) -> PyResult<[f64; 4]> {
    let d = quantum::grand_joint_quantum(&sc.0).map_err(to_py_err)?;
    Ok(*d.marginal_pair(parse_pair(pair)?).probs())
}

#[pyfunction]
fn closed_form_correlators<'py>(py: Python<'py>, sc: &PyScenario) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &quantum::closed_form_correlators(&sc.0))
}

#[pyfunction]
fn chsh_value(ab: f64, ab_prime: f64, a_prime_b: f64, a_prime_b_prime: f64) -> PyResult<f64> {
    let c = CorrelatorSet::new(ab, ab_prime, a_prime_b, a_prime_b_prime).map_err(to_py_err)?;
    Ok(inequality::chsh_value(&c))
}

#[pyfunction]
fn chsh_sequential_closed(theta_ab: f64, theta_aa: f64, theta_bb: f64) -> f64 {
    inequality::chsh_sequential_closed(theta_ab, theta_aa, theta_bb)
}

#[pyfunction]
fn chsh_closed(mode: &str, angles: Vec<f64>) -> PyResult<f64> {
    inequality::chsh_closed(parse_mode(mode)?, &angles).map_err(to_py_err)
}

#[pyfunction]
fn chsh_gradient(mode: &str, angles: Vec<f64>) -> PyResult<Vec<f64>> {
    inequality::chsh_gradient(parse_mode(mode)?, &angles).map_err(to_py_err)
}

#[pyfunction]
fn scan_grid<'py>(py: Python<'py>, mode: &str, step: f64) -> PyResult<Bound<'py, PyAny>> {
    let report = py
        .detach(|| inequality::scan_grid(parse_mode(mode)?, step).map_err(to_py_err))?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (mode, coarse_step = None, tol = None, init = None, tied = false))]
fn maximize_chsh<'py>(
    py: Python<'py>,
    mode: &str,
    coarse_step: Option<f64>,
    tol: Option<f64>,
    init: Option<Vec<f64>>,
    tied: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let defaults = MaximizeOptions::default();
    let opts = MaximizeOptions {
        coarse_step: coarse_step.unwrap_or(defaults.coarse_step),
        tol: tol.unwrap_or(defaults.tol),
        init,
        restriction: if tied { Restriction::TiedSettings } else { Restriction::None },
        ..defaults
    };
    let mode = parse_mode(mode)?;
    let report = py.detach(|| inequality::maximize_chsh(mode, &opts).map_err(to_py_err))?;
    to_dict(py, &report)
}

/// Decides whether the pair statistics implied by `sc` admit a grand joint.
#[pyfunction]
fn noncontextual_feasibility<'py>(py: Python<'py>, sc: &PyScenario) -> PyResult<Bound<'py, PyAny>> {
    let targets = PairTargets::from_scenario(&sc.0).map_err(to_py_err)?;
    let result = hvm::noncontextual_feasibility(&targets).map_err(to_py_err)?;
    to_dict(py, &result)
}

#[pyfunction]
fn is_feasible(sc: &PyScenario) -> PyResult<bool> {
    let targets = PairTargets::from_scenario(&sc.0).map_err(to_py_err)?;
    let result = hvm::noncontextual_feasibility(&targets).map_err(to_py_err)?;
    Ok(matches!(result, FeasibilityResult::Feasible { .. }))
}

/// Draws `n` outcomes from the sequential joint; returns the 16 counts.
#[pyfunction]
#[pyo3(signature = (sc, n, seed, workers = 1))]
fn sample(py: Python<'_>, sc: &PyScenario, n: u64, seed: u64, workers: usize) -> PyResult<Vec<u64>> {
    let d = quantum::grand_joint_quantum(&sc.0).map_err(to_py_err)?;
    let counts = py.detach(|| {
        if workers > 1 {
            sampler::sample_sharded(&d, n, seed, workers)
        } else {
            sampler::sample(&d, n, seed)
        }
    });
    Ok(counts.counts.to_vec())
}

#[pyfunction]
fn empirical_correlators<'py>(py: Python<'py>, counts: [u64; 16]) -> PyResult<Bound<'py, PyAny>> {
    let est = sampler::empirical_correlators(&sampler::OutcomeCounts::from_counts(counts, 0))
        .map_err(to_py_err)?;
    to_dict(py, &est)
}

#[pymodule]
fn pyseqbell(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyHVModel>()?;
    m.add_function(wrap_pyfunction!(outcome_labels, m)?)?;
    m.add_function(wrap_pyfunction!(make_spin_state, m)?)?;
    m.add_function(wrap_pyfunction!(transition_prob, m)?)?;
    m.add_function(wrap_pyfunction!(grand_joint_quantum, m)?)?;
    m.add_function(wrap_pyfunction!(marginal_pair, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_correlators, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_value, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_sequential_closed, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_closed, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(scan_grid, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_chsh, m)?)?;
    m.add_function(wrap_pyfunction!(noncontextual_feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(is_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_correlators, m)?)?;
    Ok(())
}
