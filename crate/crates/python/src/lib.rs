//! Python module `ecoepi`: Mittag-Leffler functions, the model, its
//! equilibria and stability verdicts, and the fractional PECE solver.

use ecoepi_core::{
    characteristic_cubic as cubic_of, classify_equilibrium, equilibria as equilibria_of,
    thresholds as thresholds_of, EcoEpiModel, Equilibrium, EquilibriumKind, ModelParams, Preset,
    SolverConfig, State,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(
    ecoepi,
    DivergenceError,
    PyRuntimeError,
    "The solver left the finite region."
);

fn to_py(e: ecoepi_core::Error) -> PyErr {
    match e {
        ecoepi_core::Error::Divergence { .. } => DivergenceError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

pub fn parse_kind(label: &str) -> Option<EquilibriumKind> {
    match label {
        "E0" => Some(EquilibriumKind::E0),
        "E1" => Some(EquilibriumKind::E1),
        "E2" => Some(EquilibriumKind::E2),
        "E*" | "Estar" | "EStar" => Some(EquilibriumKind::EStar),
        _ => None,
    }
}

/// Model parameters `r, K, lambda, m, mu, a, theta, d`.
#[pyclass(name = "Params", frozen)]
#[derive(Clone)]
pub struct PyParams {
    inner: ModelParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[allow(clippy::too_many_arguments, non_snake_case)]
    #[pyo3(signature = (r, K, lambda_, m, mu, a, theta, d))]
    fn new(
        r: f64,
        K: f64,
        lambda_: f64,
        m: f64,
        mu: f64,
        a: f64,
        theta: f64,
        d: f64,
    ) -> PyResult<Self> {
        ModelParams::new(r, K, lambda_, m, mu, a, theta, d)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        name.parse::<Preset>()
            .map(|p| Self { inner: p.params() })
            .map_err(to_py)
    }

    /// Copy with one parameter replaced.
    fn replace(&self, name: &str, value: f64) -> PyResult<Self> {
        self.inner
            .with(name, value)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn __getitem__(&self, name: &str) -> PyResult<f64> {
        self.inner
            .get(name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown parameter `{name}`")))
    }

    fn r0(&self) -> f64 {
        self.inner.r0()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.inner.entries() {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let body: Vec<String> = self
            .inner
            .entries()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("Params({})", body.join(", "))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// A solved trajectory on a uniform grid.
#[pyclass(name = "Trajectory", frozen)]
pub struct PyTrajectory {
    #[pyo3(get)]
    alpha: f64,
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    states: Vec<[f64; 3]>,
}

#[pymethods]
impl PyTrajectory {
    fn __len__(&self) -> usize {
        self.times.len()
    }

    #[getter]
    fn last(&self) -> [f64; 3] {
        *self
            .states
            .last()
            .expect("trajectories hold the initial state")
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory(alpha={}, nodes={})",
            self.alpha,
            self.times.len()
        )
    }
}

/// `E_{alpha,beta}(z)`.
#[pyfunction]
#[pyo3(signature = (alpha, z, beta = 1.0))]
fn mittag_leffler(alpha: f64, z: f64, beta: f64) -> PyResult<f64> {
    ecoepi_core::ml_two(alpha, beta, z).map_err(to_py)
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    Preset::ALL.iter().map(|p| p.name()).collect()
}

fn equilibrium_dict<'py>(py: Python<'py>, e: &Equilibrium) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("kind", e.kind.label())?;
    d.set_item("exists", e.exists)?;
    d.set_item("state", e.coords.to_array())?;
    let conditions = PyDict::new(py);
    for c in &e.conditions {
        conditions.set_item(c.name, c.satisfied)?;
    }
    d.set_item("conditions", conditions)?;
    d.set_item("note", e.note)?;
    Ok(d)
}

#[pyfunction]
fn equilibria<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Vec<Bound<'py, PyDict>>> {
    equilibria_of(&params.inner)
        .map_err(to_py)?
        .iter()
        .map(|e| equilibrium_dict(py, e))
        .collect()
}

/// Threshold quantities; `reference` is the state whose `S` enters `theta2`.
#[pyfunction]
#[pyo3(signature = (params, reference = None))]
fn thresholds<'py>(
    py: Python<'py>,
    params: &PyParams,
    reference: Option<[f64; 3]>,
) -> PyResult<Bound<'py, PyDict>> {
    let t = thresholds_of(
        &params.inner,
        reference.map(|[s, i, p]| State::new(s, i, p)),
    )
    .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("R0", t.r0)?;
    d.set_item("d1", t.d1)?;
    d.set_item("d2", t.d2)?;
    d.set_item("theta1", t.theta1)?;
    d.set_item("theta2", t.theta2)?;
    d.set_item("theta2_s_star", t.theta2_s_star)?;
    d.set_item("r_focus", t.r_focus)?;
    Ok(d)
}

/// Coefficients of the characteristic cubic at the interior equilibrium.
#[pyfunction]
fn characteristic_cubic<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyDict>> {
    let estar = ecoepi_core::model::equilibrium(&params.inner, EquilibriumKind::EStar);
    if !estar.exists {
        return Err(PyValueError::new_err(
            "the interior equilibrium does not exist",
        ));
    }
    let c = cubic_of(&params.inner, estar.coords).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("A1", c.a1)?;
    d.set_item("A2", c.a2)?;
    d.set_item("A3", c.a3)?;
    d.set_item("D", c.discriminant)?;
    d.set_item("A1A2_minus_A3", c.routh_product)?;
    Ok(d)
}

/// Local stability of equilibrium `kind` (`E0`, `E1`, `E2`, `E*`) at order `alpha`.
#[pyfunction]
fn classify<'py>(
    py: Python<'py>,
    params: &PyParams,
    kind: &str,
    alpha: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = parse_kind(kind)
        .ok_or_else(|| PyValueError::new_err(format!("unknown equilibrium `{kind}`")))?;
    let eq = ecoepi_core::model::equilibrium(&params.inner, kind);
    let v = classify_equilibrium(&params.inner, &eq, alpha).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("label", v.label.as_str())?;
    d.set_item("stable", v.label.is_stable())?;
    d.set_item("margin", v.margin)?;
    d.set_item("critical_order", v.critical_order)?;
    let eigenvalues: Vec<(f64, f64)> = v
        .spectrum
        .eigenvalues
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    d.set_item("eigenvalues", eigenvalues)?;
    d.set_item("case", v.sign_case.map(|c| c.tag()))?;
    d.set_item("case_agrees", v.case_agrees)?;
    d.set_item("notes", v.notes)?;
    Ok(d)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (params, alpha, initial, step = 0.05, t_end = 500.0, corrector_iterations = 1, memory_truncation = None))]
fn simulate(
    py: Python<'_>,
    params: &PyParams,
    alpha: f64,
    initial: [f64; 3],
    step: f64,
    t_end: f64,
    corrector_iterations: usize,
    memory_truncation: Option<usize>,
) -> PyResult<PyTrajectory> {
    let model = EcoEpiModel::new(params.inner).map_err(to_py)?;
    let mut config = SolverConfig::new(step, t_end).with_corrector_iterations(corrector_iterations);
    if let Some(w) = memory_truncation {
        config = config.with_memory_truncation(w);
    }
    let [s, i, p] = initial;
    let traj = py
        .allow_threads(|| model.simulate(alpha, State::new(s, i, p), &config))
        .map_err(to_py)?;
    Ok(PyTrajectory {
        alpha,
        states: traj.states().map(|x| [x[0], x[1], x[2]]).collect(),
        times: traj.times,
    })
}

#[pymodule]
fn ecoepi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyTrajectory>()?;
    m.add("DivergenceError", m.py().get_type::<DivergenceError>())?;
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(equilibria, m)?)?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(characteristic_cubic, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_labels() {
        assert_eq!(parse_kind("E*"), Some(EquilibriumKind::EStar));
        assert_eq!(parse_kind("E2"), Some(EquilibriumKind::E2));
        assert_eq!(parse_kind("E3"), None);
        for kind in EquilibriumKind::ALL {
            assert_eq!(parse_kind(kind.label()), Some(kind));
        }
    }
}
