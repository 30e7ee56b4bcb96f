// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

//! Python module `spinctrl`: chain setup, propagation, pulse optimization and
//! channel distances.
//!
//! Matrices cross the boundary as nested lists of complex numbers.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spinctrl::channels;
use spinctrl::model;
use spinctrl::objective;
use spinctrl::optimizer;
use spinctrl::{
    BasisState, ChainSpec, ComplexMatrix, ControlSequence, ObjectiveConfig, OptimizerConfig,
    TargetGate,
};

type Matrix = Vec<Vec<Complex64>>;
type BlochSeries = (Vec<f64>, Vec<Vec<[f64; 3]>>);

fn py_err(err: spinctrl::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn to_rows(m: &ComplexMatrix) -> Matrix {
    (0..m.dim())
        .map(|r| (0..m.dim()).map(|c| m[(r, c)]).collect())
        .collect()
}

fn from_rows(rows: Matrix) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a non-empty square matrix"));
    }
    Ok(ComplexMatrix::from_rows(&rows))
}

fn target(name: &str) -> PyResult<TargetGate> {
    name.parse().map_err(py_err)
}

/// A Heisenberg chain, optionally with an environment qubit.
#[pyclass(name = "ChainSpec", module = "spinctrl", skip_from_py_object)]
#[derive(Clone)]
struct PyChainSpec {
    inner: ChainSpec,
}

#[pymethods]
impl PyChainSpec {
    /// `gamma=None` leaves the environment qubit out.
    #[new]
    #[pyo3(signature = (n_qubits, coupling = 1.0, gamma = None))]
    fn new(n_qubits: usize, coupling: f64, gamma: Option<f64>) -> PyResult<Self> {
        let mut inner = ChainSpec::new(n_qubits);
        inner.coupling = coupling;
        if let Some(g) = gamma {
            inner = inner.with_environment(g);
        }
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits
    }

    #[getter]
    fn coupling(&self) -> f64 {
        self.inner.coupling
    }

    #[getter]
    fn gamma(&self) -> Option<f64> {
        self.inner.env_enabled.then_some(self.inner.gamma)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChainSpec(n_qubits={}, coupling={}, gamma={:?})",
            self.inner.n_qubits,
            self.inner.coupling,
            self.gamma()
        )
    }
}

/// Piecewise-constant pulses `hx[i]`, `hy[i]`, each held for `dt`.
#[pyclass(name = "ControlSequence", module = "spinctrl", skip_from_py_object)]
#[derive(Clone)]
struct PyControlSequence {
    inner: ControlSequence,
}

#[pymethods]
impl PyControlSequence {
    #[new]
    #[pyo3(signature = (hx, hy, dt = 0.2, bound = spinctrl::cli::DEFAULT_BOUND))]
    fn new(hx: Vec<f64>, hy: Vec<f64>, dt: f64, bound: f64) -> PyResult<Self> {
        Ok(Self {
            inner: ControlSequence::new(hx, hy, dt, bound).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, dt = 0.2, bound = spinctrl::cli::DEFAULT_BOUND))]
    fn zeros(n: usize, dt: f64, bound: f64) -> PyResult<Self> {
        Ok(Self {
            inner: ControlSequence::zeros(n, dt, bound).map_err(py_err)?,
        })
    }

    #[getter]
    fn hx(&self) -> Vec<f64> {
        self.inner.hx.clone()
    }

    #[getter]
    fn hy(&self) -> Vec<f64> {
        self.inner.hy.clone()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn bound(&self) -> f64 {
        self.inner.bound
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!(
            "ControlSequence(n={}, dt={}, bound={})",
            self.inner.n(),
            self.inner.dt,
            self.inner.bound
        )
    }
}

#[pyclass(name = "ObjectiveConfig", module = "spinctrl", skip_from_py_object)]
#[derive(Clone)]
struct PyObjectiveConfig {
    inner: ObjectiveConfig,
}

#[pymethods]
impl PyObjectiveConfig {
    #[new]
    #[pyo3(signature = (mu = 0.2, surrogate = "fractional", alpha = 0.99, kt = 0.01))]
    fn new(mu: f64, surrogate: &str, alpha: f64, kt: f64) -> PyResult<Self> {
        let inner = ObjectiveConfig {
            mu,
            surrogate: surrogate.parse().map_err(py_err)?,
            alpha,
            kt,
            ..ObjectiveConfig::default()
        };
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }

    #[getter]
    fn surrogate(&self) -> String {
        format!("{:?}", self.inner.surrogate)
    }
}

#[pyclass(name = "OptimizerConfig", module = "spinctrl", skip_from_py_object)]
#[derive(Clone)]
struct PyOptimizerConfig {
    inner: OptimizerConfig,
}

#[pymethods]
impl PyOptimizerConfig {
    #[new]
    #[pyo3(signature = (restarts = 8, seed = 1, max_iters = 5000, grad_tol = 1e-6, init_amplitude = 0.5))]
    fn new(
        restarts: usize,
        seed: u64,
        max_iters: usize,
        grad_tol: f64,
        init_amplitude: f64,
    ) -> PyResult<Self> {
        let inner = OptimizerConfig {
            restarts,
            seed,
            max_iters,
            grad_tol,
            init_amplitude,
            ..OptimizerConfig::default()
        };
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }
}

#[pyclass(name = "OptimizationResult", module = "spinctrl")]
struct PyOptimizationResult {
    inner: optimizer::OptimizationResult,
}

#[pymethods]
impl PyOptimizationResult {
    #[getter]
    fn best_seq(&self) -> PyControlSequence {
        PyControlSequence {
            inner: self.inner.best_seq.clone(),
        }
    }

    #[getter]
    fn fidelity(&self) -> f64 {
        self.inner.fidelity
    }

    #[getter]
    fn penalty(&self) -> f64 {
        self.inner.penalty
    }

    #[getter(G)]
    fn g(&self) -> f64 {
        self.inner.g
    }

    #[getter]
    fn iterations_used(&self) -> usize {
        self.inner.iterations_used
    }

    #[getter]
    fn restart_index(&self) -> usize {
        self.inner.restart_index
    }

    #[getter]
    fn termination(&self) -> String {
        format!("{:?}", self.inner.termination)
    }

    /// `(G, F, P)` after each accepted step of the winning restart.
    #[getter]
    fn trace(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .trace
            .iter()
            .map(|e| (e.g, e.fidelity, e.penalty))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "OptimizationResult(fidelity={:.6}, penalty={:.6}, G={:.6})",
            self.inner.fidelity, self.inner.penalty, self.inner.g
        )
    }
}

#[pyfunction]
fn target_unitary(name: &str) -> PyResult<Matrix> {
    Ok(to_rows(&model::target_unitary(&target(name)?)))
}

#[pyfunction]
fn propagate(spec: &PyChainSpec, seq: &PyControlSequence) -> PyResult<Matrix> {
    Ok(to_rows(
        &model::propagate(&spec.inner, &seq.inner).map_err(py_err)?,
    ))
}

#[pyfunction]
fn propagate_with_env(spec: &PyChainSpec, seq: &PyControlSequence) -> PyResult<Matrix> {
    Ok(to_rows(
        &model::propagate_with_env(&spec.inner, &seq.inner).map_err(py_err)?,
    ))
}

#[pyfunction]
fn fidelity(target: Matrix, u: Matrix) -> PyResult<f64> {
    objective::fidelity(&from_rows(target)?, &from_rows(u)?).map_err(py_err)
}

#[pyfunction]
fn penalty(seq: &PyControlSequence) -> f64 {
    objective::penalty(&seq.inner)
}

#[pyfunction]
fn functional_g(
    spec: &PyChainSpec,
    seq: &PyControlSequence,
    target_name: &str,
    cfg: &PyObjectiveConfig,
) -> PyResult<f64> {
    objective::functional_g(&spec.inner, &seq.inner, &target(target_name)?, &cfg.inner)
        .map_err(py_err)
}

/// Gradient of `G`, laid out `[hx..., hy...]`.
#[pyfunction]
fn gradient_g(
    spec: &PyChainSpec,
    seq: &PyControlSequence,
    target_name: &str,
    cfg: &PyObjectiveConfig,
) -> PyResult<Vec<f64>> {
    objective::gradient_g(&spec.inner, &seq.inner, &target(target_name)?, &cfg.inner)
        .map_err(py_err)
}

#[pyfunction]
fn optimize_controls(
    py: Python<'_>,
    spec: &PyChainSpec,
    target_name: &str,
    template: &PyControlSequence,
    obj: &PyObjectiveConfig,
    opt: &PyOptimizerConfig,
) -> PyResult<PyOptimizationResult> {
    let gate = target(target_name)?;
    let (spec, template, obj, opt) = (
        spec.inner.clone(),
        template.inner.clone(),
        obj.inner.clone(),
        opt.inner.clone(),
    );
    let inner = py
        .detach(move || optimizer::optimize_controls(&spec, &gate, &template, &obj, &opt))
        .map_err(py_err)?;
    Ok(PyOptimizationResult { inner })
}

#[pyfunction]
fn choi_of_unitary(u: Matrix) -> PyResult<Matrix> {
    let choi = channels::choi_of_unitary(&from_rows(u)?).map_err(py_err)?;
    Ok(to_rows(choi.matrix()))
}

#[pyfunction]
fn choi_of_env_channel(spec: &PyChainSpec, seq: &PyControlSequence) -> PyResult<Matrix> {
    let choi = channels::choi_of_env_channel(&spec.inner, &seq.inner).map_err(py_err)?;
    Ok(to_rows(choi.matrix()))
}

/// Trace distance between the Choi matrices of two unitaries.
#[pyfunction]
fn unitary_choi_distance(u: Matrix, v: Matrix) -> PyResult<f64> {
    let a = channels::choi_of_unitary(&from_rows(u)?).map_err(py_err)?;
    let b = channels::choi_of_unitary(&from_rows(v)?).map_err(py_err)?;
    channels::choi_distance(&a, &b).map_err(py_err)
}

/// `(without_env, with_env)` distances from the target's Choi matrix.
#[pyfunction]
fn channel_distances(
    spec: &PyChainSpec,
    target_name: &str,
    seq: &PyControlSequence,
) -> PyResult<(f64, f64)> {
    let d = channels::channel_distances(&spec.inner, &target(target_name)?, &seq.inner)
        .map_err(py_err)?;
    Ok((d.without_env, d.with_env))
}

#[pyfunction]
fn robustness_experiment<'py>(
    py: Python<'py>,
    spec: &PyChainSpec,
    target_name: &str,
    template: &PyControlSequence,
    mu_constrained: f64,
    obj: &PyObjectiveConfig,
    opt: &PyOptimizerConfig,
) -> PyResult<Bound<'py, PyDict>> {
    let gate = target(target_name)?;
    let (spec, template, obj, opt) = (
        spec.inner.clone(),
        template.inner.clone(),
        obj.inner.clone(),
        opt.inner.clone(),
    );
    let run = py
        .detach(move || {
            channels::robustness_experiment(&spec, &gate, &template, mu_constrained, &obj, &opt)
        })
        .map_err(py_err)?;
    let r = &run.report;
    let out = PyDict::new(py);
    out.set_item("target", &r.target)?;
    out.set_item("mu_used", r.mu_used)?;
    out.set_item("gamma", r.gamma)?;
    out.set_item("seed", r.seed)?;
    out.set_item("dist_no_env_mu1", r.dist_no_env_mu1)?;
    out.set_item("dist_no_env_muL", r.dist_no_env_mu_l)?;
    out.set_item("dist_env_mu1", r.dist_env_mu1)?;
    out.set_item("dist_env_muL", r.dist_env_mu_l)?;
    out.set_item("fidelity_mu1", r.fidelity_mu1)?;
    out.set_item("fidelity_muL", r.fidelity_mu_l)?;
    out.set_item("penalty_mu1", r.penalty_mu1)?;
    out.set_item("penalty_muL", r.penalty_mu_l)?;
    Ok(out)
}

/// `(times, bloch)` where `bloch[k][q]` is the Bloch vector of qubit `q + 1`
/// at `times[k]`.
#[pyfunction]
fn bloch_trajectories(
    spec: &PyChainSpec,
    seq: &PyControlSequence,
    initial_state: &str,
) -> PyResult<BlochSeries> {
    let initial = BasisState::parse(initial_state, spec.inner.n_qubits).map_err(py_err)?;
    let traj = model::bloch_trajectories(&spec.inner, &seq.inner, &initial).map_err(py_err)?;
    Ok((traj.times, traj.bloch))
}

#[pymodule]
#[pyo3(name = "spinctrl")]
fn spinctrl_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChainSpec>()?;
    m.add_class::<PyControlSequence>()?;
    m.add_class::<PyObjectiveConfig>()?;
    m.add_class::<PyOptimizerConfig>()?;
    m.add_class::<PyOptimizationResult>()?;
    m.add_function(wrap_pyfunction!(target_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_with_env, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(penalty, m)?)?;
    m.add_function(wrap_pyfunction!(functional_g, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_g, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_controls, m)?)?;
    m.add_function(wrap_pyfunction!(choi_of_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(choi_of_env_channel, m)?)?;
    m.add_function(wrap_pyfunction!(unitary_choi_distance, m)?)?;
    m.add_function(wrap_pyfunction!(channel_distances, m)?)?;
    m.add_function(wrap_pyfunction!(robustness_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(bloch_trajectories, m)?)?;
    Ok(())
}
