//! Python bindings for `detpower`.
//!
//! Matrices cross the boundary as nested lists of Python numbers (complex or
//! real). Results come back as dicts.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use detpower_core as core;
use core::{ComplexMatrix, DensityMatrix, Error, Povm, SearchOptions};

create_exception!(detpower, ResourceCapError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Resource { .. } => ResourceCapError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(rows).map_err(to_py)
}

fn rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    m.rows()
}

/// A validated measurement.
#[pyclass(name = "Povm", module = "detpower", frozen)]
struct PyPovm {
    inner: Povm,
}

#[pymethods]
impl PyPovm {
    #[new]
    fn new(elements: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let els = elements.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: Povm::new(els).map_err(to_py)?,
        })
    }

    /// `{diag(p, q), diag(1-p, 1-q)}`.
    #[staticmethod]
    fn commuting_qubit(p: f64, q: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Povm::commuting_qubit(p, q).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core::io::parse_povm(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        core::io::povm_to_json(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn elements(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.inner.elements().iter().map(rows).collect()
    }

    /// Outcome probabilities `tr(E_k rho)`.
    fn probabilities(&self, rho: &PyDensityMatrix) -> PyResult<Vec<f64>> {
        let d = core::induced_distribution(&self.inner, &rho.inner).map_err(to_py)?;
        Ok(d.probs().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Povm(dim={}, outcomes={})", self.inner.dim(), self.inner.len())
    }
}

#[pyclass(name = "DensityMatrix", module = "detpower", frozen)]
struct PyDensityMatrix {
    inner: DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self {
            inner: DensityMatrix::new(matrix(rows)?).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn pure(psi: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: DensityMatrix::from_pure(&psi).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn basis(dim: usize, k: usize) -> PyResult<Self> {
        if k >= dim {
            return Err(PyValueError::new_err(format!("basis index {k} out of range for dimension {dim}")));
        }
        Ok(Self {
            inner: DensityMatrix::basis(dim, k),
        })
    }

    #[staticmethod]
    fn bloch(x: f64, y: f64, z: f64) -> PyResult<Self> {
        let b = core::BlochVector::new(x, y, z).map_err(to_py)?;
        Ok(Self {
            inner: core::bloch_to_density(b).map_err(to_py)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        rows(self.inner.matrix())
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={})", self.inner.dim())
    }
}

fn options(restarts: usize, seed: u64, mixed: bool, tol: f64) -> SearchOptions {
    SearchOptions {
        restarts,
        seed,
        mixed,
        tol,
    }
}

fn power_dict<'py>(py: Python<'py>, rep: &core::PowerReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", rep.value)?;
    d.set_item("rho", rows(rep.optimizer.rho.matrix()))?;
    d.set_item("sigma", rows(rep.optimizer.sigma.matrix()))?;
    d.set_item("s_star", rep.s_star)?;
    d.set_item("restarts_used", rep.restarts_used)?;
    d.set_item("orthogonal_value", rep.orthogonal_value)?;
    d.set_item("grouping", rep.grouping.as_ref().map(|g| g.members()))?;
    Ok(d)
}

/// Minimum single-shot error over input pairs and groupings.
#[pyfunction]
fn single_shot_power<'py>(py: Python<'py>, povm: &PyPovm) -> PyResult<Bound<'py, PyDict>> {
    let rep = py.detach(|| core::single_shot_power(&povm.inner)).map_err(to_py)?;
    power_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (povm, restarts=64, seed=0, mixed=false, tol=1e-10))]
fn zeta_chernoff<'py>(
    py: Python<'py>,
    povm: &PyPovm,
    restarts: usize,
    seed: u64,
    mixed: bool,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = options(restarts, seed, mixed, tol);
    let rep = py.detach(|| core::zeta_chernoff(&povm.inner, &opts)).map_err(to_py)?;
    power_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (povm, restarts=64, seed=0, mixed=false, tol=1e-10))]
fn zeta_stein<'py>(
    py: Python<'py>,
    povm: &PyPovm,
    restarts: usize,
    seed: u64,
    mixed: bool,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = options(restarts, seed, mixed, tol);
    let rep = py.detach(|| core::zeta_stein(&povm.inner, &opts)).map_err(to_py)?;
    power_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (povm, rate, restarts=64, seed=0, mixed=false, tol=1e-10))]
fn zeta_hoeffding<'py>(
    py: Python<'py>,
    povm: &PyPovm,
    rate: f64,
    restarts: usize,
    seed: u64,
    mixed: bool,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = options(restarts, seed, mixed, tol);
    let rep = py
        .detach(|| core::zeta_hoeffding(&povm.inner, rate, &opts))
        .map_err(to_py)?;
    power_dict(py, &rep)
}

fn states(list: Vec<PyRef<'_, PyDensityMatrix>>) -> Vec<DensityMatrix> {
    list.iter().map(|s| s.inner.clone()).collect()
}

/// Maximum-likelihood error for product inputs picked from `candidates`.
#[pyfunction]
fn product_error(
    py: Python<'_>,
    povm: &PyPovm,
    candidates: Vec<PyRef<'_, PyDensityMatrix>>,
    rho_pattern: Vec<usize>,
    sigma_pattern: Vec<usize>,
) -> PyResult<f64> {
    let cands = states(candidates);
    py.detach(|| {
        let a = core::ProductInput::from_pattern(&cands, &rho_pattern)?;
        let b = core::ProductInput::from_pattern(&cands, &sigma_pattern)?;
        let pa = core::sequence_distribution(&povm.inner, &a)?;
        let pb = core::sequence_distribution(&povm.inner, &b)?;
        core::ml_error_probability(&pa, &pb).map(|g| g.p_err)
    })
    .map_err(to_py)
}

/// Best assignment of candidates to each of the `n` uses under both hypotheses.
#[pyfunction]
fn best_product_pair<'py>(
    py: Python<'py>,
    povm: &PyPovm,
    n: usize,
    candidates: Vec<PyRef<'py, PyDensityMatrix>>,
) -> PyResult<Bound<'py, PyDict>> {
    let cands = states(candidates);
    let out = py
        .detach(|| core::best_product_pair(&povm.inner, n, &cands))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("p_err", out.p_err)?;
    d.set_item("rho_pattern", out.rho_pattern)?;
    d.set_item("sigma_pattern", out.sigma_pattern)?;
    d.set_item("heuristic", out.heuristic)?;
    Ok(d)
}

/// Error and rate along `rho0^(n-m) rho1^m` against its mirror, `m = 0..n`.
#[pyfunction]
fn sweep_x(py: Python<'_>, povm: &PyPovm, n: usize) -> PyResult<Vec<(f64, f64, f64)>> {
    let sweep = py.detach(|| core::sweep_x(&povm.inner, n)).map_err(to_py)?;
    Ok(sweep.points.iter().map(|p| (p.x, p.p_err, p.rate)).collect())
}

/// Exact optimum over feedback strategies of depth `n`.
#[pyfunction]
fn optimal_adaptive<'py>(
    py: Python<'py>,
    povm: &PyPovm,
    candidates: Vec<PyRef<'py, PyDensityMatrix>>,
    n: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let cands = states(candidates);
    let found = py
        .detach(|| core::optimal_adaptive(&povm.inner, &cands, n))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("p_err", found.p_err)?;
    d.set_item(
        "strategy",
        serde_json::to_string(&found.strategy).expect("strategy serializes"),
    )?;
    Ok(d)
}

/// Error of a strategy given in its JSON file format.
#[pyfunction]
fn evaluate_strategy(py: Python<'_>, povm: &PyPovm, strategy_json: &str) -> PyResult<f64> {
    let strat = core::io::parse_strategy(strategy_json).map_err(to_py)?;
    py.detach(|| core::evaluate_strategy(&povm.inner, &strat))
        .map(|e| e.p_err)
        .map_err(to_py)
}

#[pyfunction]
fn noisy_sg_zeta(r: f64) -> PyResult<f64> {
    core::noisy_sg_zeta(r).map_err(to_py)
}

#[pyfunction]
fn equivalent_sg_purity(zeta: f64) -> PyResult<f64> {
    core::equivalent_sg_purity(zeta).map_err(to_py)
}

#[pyfunction]
fn commuting_zeta(p: f64, q: f64) -> PyResult<f64> {
    core::commuting_zeta(p, q).map_err(to_py)
}

#[pyfunction]
fn commuting_gamma(p: f64, q: f64) -> PyResult<f64> {
    core::commuting_gamma(p, q).map_err(to_py)
}

/// Chernoff exponent of the `m`-point covariant discretization.
#[pyfunction]
fn covariant_zeta(py: Python<'_>, m: usize) -> PyResult<f64> {
    py.detach(|| {
        let disc = core::CovariantDiscretization::new(m)?;
        core::covariant_zeta_numeric(&disc).map(|o| o.value)
    })
    .map_err(to_py)
}

#[pymodule]
fn detpower(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPovm>()?;
    m.add_class::<PyDensityMatrix>()?;
    m.add("ResourceCapError", m.py().get_type::<ResourceCapError>())?;
    m.add_function(wrap_pyfunction!(single_shot_power, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_chernoff, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_stein, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_hoeffding, m)?)?;
    m.add_function(wrap_pyfunction!(product_error, m)?)?;
    m.add_function(wrap_pyfunction!(best_product_pair, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_x, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_adaptive, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_strategy, m)?)?;
    m.add_function(wrap_pyfunction!(noisy_sg_zeta, m)?)?;
    m.add_function(wrap_pyfunction!(equivalent_sg_purity, m)?)?;
    m.add_function(wrap_pyfunction!(commuting_zeta, m)?)?;
    m.add_function(wrap_pyfunction!(commuting_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(covariant_zeta, m)?)?;
    Ok(())
}
