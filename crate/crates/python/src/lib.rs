//! Python bindings: feasible sets, problems (built-in or from Python
//! callables), both solvers and the trace audits.

use std::cell::RefCell;
use std::sync::Arc;

use dcfw::lmo::LinearMinimizationOracle;
use dcfw::problem::{ConvexFunction, SmoothFunction};
use dcfw::problems::{
    make_convex_qp, make_fermat_weber, make_star_convex_biquadratic, make_weak_star_l1, FermatWeberInstance,
    WeakStarL1Instance,
};
use dcfw::trace::{to_csv_string, TraceRow};
use dcfw::verify::{estimate_gamma_bar, parse_theorem_list, RateConstants};
use dcfw::{BoundReport, ClassicConfig, DCProblem, EvalCounters, FdConfig, SetKind, SolveTrace, SolverKind, TheoremId};
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn to_py_err(e: dcfw::Error) -> PyErr {
    match e {
        dcfw::Error::NonFinite(_) => PyArithmeticError::new_err(e.to_string()),
        dcfw::Error::ImpossibleState(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for dcfw::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

#[pyclass(name = "FeasibleSet", module = "pydcfw", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySet {
    inner: LinearMinimizationOracle,
}

#[pymethods]
impl PySet {
    #[staticmethod]
    #[pyo3(name = "box")]
    fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: LinearMinimizationOracle::boxed(lower, upper).py()?,
        })
    }

    /// `[lo, hi]^dim`
    #[staticmethod]
    fn cube(dim: usize, lo: f64, hi: f64) -> PyResult<Self> {
        Ok(Self {
            inner: LinearMinimizationOracle::cube(dim, lo, hi).py()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (dim, radius = 1.0))]
    fn simplex(dim: usize, radius: f64) -> PyResult<Self> {
        Ok(Self {
            inner: LinearMinimizationOracle::simplex(dim, radius).py()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (dim, radius = 1.0))]
    fn l1_ball(dim: usize, radius: f64) -> PyResult<Self> {
        Ok(Self {
            inner: LinearMinimizationOracle::l1_ball(dim, radius).py()?,
        })
    }

    #[staticmethod]
    fn l2_ball(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        Ok(Self {
            inner: LinearMinimizationOracle::l2_ball(center, radius).py()?,
        })
    }

    #[staticmethod]
    fn finite_hull(points: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: LinearMinimizationOracle::finite_hull(points).py()?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        set_kind_name(self.inner.kind())
    }

    fn argmin_linear(&self, c: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.argmin_linear(&c).py()
    }

    #[pyo3(signature = (x, tol = 1e-9))]
    fn contains(&self, x: Vec<f64>, tol: f64) -> bool {
        self.inner.contains(&x, tol)
    }

    /// A random feasible point, reproducible for a given seed.
    #[pyo3(signature = (seed = 0))]
    fn sample(&self, seed: u64) -> Vec<f64> {
        self.inner.sample(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn __repr__(&self) -> String {
        format!("FeasibleSet({}, dim={})", self.kind(), self.dim())
    }
}

fn set_kind_name(kind: &SetKind) -> &'static str {
    match kind {
        SetKind::Box { .. } => "box",
        SetKind::Simplex { .. } => "simplex",
        SetKind::L1Ball { .. } => "l1_ball",
        SetKind::L2Ball { .. } => "l2_ball",
        SetKind::FiniteHull { .. } => "finite_hull",
    }
}

/// `g` backed by Python callables. Exceptions and non-float results become
/// NaN, which the solvers report as a non-finite value.
struct PySmooth {
    value: Py<PyAny>,
    gradient: Py<PyAny>,
    dim: usize,
    lipschitz: Option<f64>,
}

fn call_scalar(f: &Py<PyAny>, x: &[f64]) -> f64 {
    Python::attach(|py| f.call1(py, (x.to_vec(),)).and_then(|r| r.bind(py).extract::<f64>()))
        .unwrap_or(f64::NAN)
}

fn call_vector(f: &Py<PyAny>, x: &[f64], dim: usize) -> Vec<f64> {
    Python::attach(|py| f.call1(py, (x.to_vec(),)).and_then(|r| r.bind(py).extract::<Vec<f64>>()))
        .unwrap_or_else(|_| vec![f64::NAN; dim])
}

impl SmoothFunction for PySmooth {
    fn value(&self, x: &[f64]) -> f64 {
        call_scalar(&self.value, x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        call_vector(&self.gradient, x, self.dim)
    }
    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

struct PyConvex {
    value: Py<PyAny>,
    subgradient: Py<PyAny>,
    dim: usize,
}

impl ConvexFunction for PyConvex {
    fn value(&self, x: &[f64]) -> f64 {
        call_scalar(&self.value, x)
    }
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        call_vector(&self.subgradient, x, self.dim)
    }
}

#[pyclass(name = "Problem", module = "pydcfw", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyProblem {
    inner: DCProblem,
}

#[pymethods]
impl PyProblem {
    /// `alpha ||x||^2 - beta ||x||_1` over a box.
    #[staticmethod]
    fn weak_star_l1(alpha: f64, beta: f64, set: &PySet) -> PyResult<Self> {
        let inner = make_weak_star_l1(&WeakStarL1Instance {
            alpha,
            beta,
            feasible_set: set.inner.clone(),
        })
        .py()?;
        Ok(Self { inner })
    }

    /// `1/2 ||x - center||^2`.
    #[staticmethod]
    fn convex_qp(center: Vec<f64>, set: &PySet) -> PyResult<Self> {
        Ok(Self {
            inner: make_convex_qp(center, set.inner.clone()).py()?,
        })
    }

    /// `s^2 t^2 + s^2 + t^2` over a 2-D box, `[-1, 1]^2` by default.
    #[staticmethod]
    #[pyo3(signature = (set = None))]
    fn biquadratic(set: Option<&PySet>) -> PyResult<Self> {
        Ok(Self {
            inner: make_star_convex_biquadratic(set.map(|s| s.inner.clone())).py()?,
        })
    }

    /// `sum_i w_i min_{y in sites[i]} ||x - y||^2`.
    #[staticmethod]
    fn fermat_weber(sites: Vec<Vec<Vec<f64>>>, weights: Vec<f64>, set: &PySet) -> PyResult<Self> {
        let inner = make_fermat_weber(&FermatWeberInstance {
            site_sets: sites,
            weights,
            feasible_set: set.inner.clone(),
        })
        .py()?;
        Ok(Self { inner })
    }

    /// `g - h` from Python callables taking and returning lists of floats.
    #[staticmethod]
    #[pyo3(signature = (name, g, grad_g, h, subgrad_h, set, lipschitz = None, fstar = None))]
    #[allow(clippy::too_many_arguments)]
    fn custom(
        name: String,
        g: Py<PyAny>,
        grad_g: Py<PyAny>,
        h: Py<PyAny>,
        subgrad_h: Py<PyAny>,
        set: &PySet,
        lipschitz: Option<f64>,
        fstar: Option<f64>,
    ) -> Self {
        let dim = set.inner.dim();
        let mut inner = DCProblem::new(
            name,
            Arc::new(PySmooth {
                value: g,
                gradient: grad_g,
                dim,
                lipschitz,
            }),
            Arc::new(PyConvex {
                value: h,
                subgradient: subgrad_h,
                dim,
            }),
            set.inner.clone(),
        );
        if let Some(f) = fstar {
            inner = inner.with_fstar(f);
        }
        Self { inner }
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn fstar(&self) -> Option<f64> {
        self.inner.known_fstar()
    }

    #[getter]
    fn minimizers(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.known_minimizers().map(<[Vec<f64>]>::to_vec)
    }

    #[getter]
    fn lipschitz(&self) -> Option<f64> {
        self.inner.lipschitz()
    }

    #[getter]
    fn set(&self) -> PySet {
        PySet {
            inner: self.inner.feasible_set().clone(),
        }
    }

    fn objective(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.inner.dim() {
            return Err(to_py_err(dcfw::Error::DimensionMismatch {
                expected: self.inner.dim(),
                got: x.len(),
            }));
        }
        Ok(self.inner.objective(&x))
    }

    fn __repr__(&self) -> String {
        format!("Problem({:?}, dim={})", self.inner.name, self.inner.dim())
    }
}

#[pyclass(name = "Trace", module = "pydcfw", frozen)]
pub struct PyTrace {
    inner: SolveTrace,
}

fn counters_dict<'py>(py: Python<'py>, c: &EvalCounters) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("f_evals", c.f_evals)?;
    d.set_item("grad_evals", c.grad_evals)?;
    d.set_item("subgrad_evals", c.subgrad_evals)?;
    d.set_item("lmo_calls", c.lmo_calls)?;
    d.set_item("fd_calls", c.fd_calls)?;
    Ok(d)
}

fn row_dict<'py>(py: Python<'py>, r: &TraceRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("k", r.k)?;
    d.set_item("f", r.f)?;
    d.set_item("omega", r.omega)?;
    d.set_item("lambda", r.lambda)?;
    d.set_item("L_k", r.l_k)?;
    d.set_item("j_k", r.j_k)?;
    d.set_item("i_k", r.i_k)?;
    d.set_item("s_k", r.s_k)?;
    d.set_item("step_norm_prev", r.step_norm_prev)?;
    d.set_item("lyapunov", r.lyapunov)?;
    d.set_item("f_evals_cum", r.counters.f_evals)?;
    d.set_item("grad_evals_cum", r.counters.grad_evals)?;
    d.set_item("subgrad_evals_cum", r.counters.subgrad_evals)?;
    d.set_item("lmo_calls_cum", r.counters.lmo_calls)?;
    Ok(d)
}

fn solver_name(s: SolverKind) -> &'static str {
    match s {
        SolverKind::Classic => "classic",
        SolverKind::Fd => "fd",
    }
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn solver(&self) -> &'static str {
        solver_name(self.inner.solver)
    }

    #[getter]
    fn status(&self) -> String {
        format!("{:?}", self.inner.status)
    }

    /// Converged, exactly stationary, or declared stationary.
    #[getter]
    fn succeeded(&self) -> bool {
        self.inner.status.is_success()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    #[getter]
    fn final_x(&self) -> Vec<f64> {
        self.inner.final_x().to_vec()
    }

    #[getter]
    fn final_f(&self) -> f64 {
        self.inner.final_f()
    }

    #[getter]
    fn final_omega(&self) -> Option<f64> {
        self.inner.terminal.omega
    }

    #[getter]
    fn counters<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        counters_dict(py, &self.inner.counters())
    }

    /// One dict per CSV row.
    fn rows<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner.rows().iter().map(|r| row_dict(py, r)).collect()
    }

    fn to_csv(&self) -> String {
        to_csv_string(&self.inner.rows())
    }

    fn __len__(&self) -> usize {
        self.inner.rows().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(solver={}, status={}, iterations={}, final_f={})",
            self.solver(),
            self.status(),
            self.iterations(),
            self.final_f()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (problem, x0, l0 = 1.0, tol_omega = None, max_iter = None, max_backtracks = None))]
fn solve_classic(
    py: Python<'_>,
    problem: &PyProblem,
    x0: Vec<f64>,
    l0: f64,
    tol_omega: Option<f64>,
    max_iter: Option<u64>,
    max_backtracks: Option<u32>,
) -> PyResult<PyTrace> {
    let p = &problem.inner;
    let mut cfg = ClassicConfig::new(p, x0, l0);
    if let Some(t) = tol_omega {
        cfg.tol_omega = t;
    }
    if let Some(m) = max_iter {
        cfg.max_iter = m;
    }
    if let Some(m) = max_backtracks {
        cfg.max_backtracks = m;
    }
    let inner = py.detach(|| dcfw::solve_classic(p, &cfg)).py()?;
    Ok(PyTrace { inner })
}

#[pyfunction]
#[pyo3(signature = (problem, x0, x1, l1 = 1.0, tol_omega = None, max_iter = None, max_inner_i = None))]
#[allow(clippy::too_many_arguments)]
fn solve_fd(
    py: Python<'_>,
    problem: &PyProblem,
    x0: Vec<f64>,
    x1: Vec<f64>,
    l1: f64,
    tol_omega: Option<f64>,
    max_iter: Option<u64>,
    max_inner_i: Option<u32>,
) -> PyResult<PyTrace> {
    let p = &problem.inner;
    let mut cfg = FdConfig::new(p, x0, x1, l1);
    if let Some(t) = tol_omega {
        cfg.tol_omega = t;
    }
    if let Some(m) = max_iter {
        cfg.max_iter = m;
    }
    if let Some(m) = max_inner_i {
        cfg.max_inner_i = m;
    }
    let inner = py.detach(|| dcfw::solve_fd(p, &cfg)).py()?;
    Ok(PyTrace { inner })
}

fn report_dict<'py>(py: Python<'py>, r: &BoundReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("theorem_id", r.theorem_id.name())?;
    d.set_item("passed", r.passed())?;
    d.set_item("checked_points", r.checked_points)?;
    d.set_item("max_slack_ratio", r.max_slack_ratio)?;
    d.set_item("advisory", r.advisory)?;
    d.set_item("estimated", r.estimated)?;
    let violations: Vec<(u64, f64, f64)> = r.violations.iter().map(|v| (v.k, v.lhs, v.rhs)).collect();
    d.set_item("violations", violations)?;
    Ok(d)
}

/// Checks named in `theorems`, or the defaults for the trace's solver
/// (dropping those that need an unknown optimal value).
fn select_checks(theorems: Option<Vec<String>>, solver: SolverKind, has_fstar: bool) -> dcfw::Result<Vec<TheoremId>> {
    match theorems {
        Some(names) => parse_theorem_list(&names.join(",")),
        None => Ok(TheoremId::defaults_for(solver)
            .into_iter()
            .filter(|t| has_fstar || !t.needs_fstar())
            .collect()),
    }
}

/// Audits a trace; returns one dict per check.
#[pyfunction]
#[pyo3(signature = (trace, problem, theorems = None, gamma_bar_samples = 10_000, seed = 0))]
fn audit<'py>(
    py: Python<'py>,
    trace: &PyTrace,
    problem: &PyProblem,
    theorems: Option<Vec<String>>,
    gamma_bar_samples: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let p = &problem.inner;
    let t = &trace.inner;
    let which = select_checks(theorems, t.solver, p.known_fstar().is_some()).py()?;
    let mut constants = RateConstants::for_problem(p, t.l_init).py()?;
    if which.contains(&TheoremId::EvalBudget) {
        let gb = estimate_gamma_bar(p, gamma_bar_samples, &mut ChaCha8Rng::seed_from_u64(seed)).py()?;
        constants = constants.with_gamma_bar(gb, true);
    }
    let reports = py.detach(|| dcfw::audit_trace(t, p, &constants, &which)).py()?;
    reports.iter().map(|r| report_dict(py, r)).collect()
}

/// Forward differences of a Python callable: `n + 1` calls.
#[pyfunction]
fn finite_difference(g: Bound<'_, PyAny>, x: Vec<f64>, s: f64) -> PyResult<Vec<f64>> {
    let err: RefCell<Option<PyErr>> = RefCell::new(None);
    let d = dcfw::fd::finite_difference(
        |y| match g.call1((y.to_vec(),)).and_then(|r| r.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        &x,
        s,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    d.py()
}

/// `sqrt(n) L s / 2`.
#[pyfunction]
fn fd_error_bound(lipschitz: f64, n: usize, s: f64) -> f64 {
    dcfw::fd::fd_error_bound(lipschitz, n, s)
}

/// Checks the two-sequence hypotheses and conclusions; returns
/// `{"hypotheses": report, "conclusions": report}`.
#[pyfunction]
fn lemma_taxa_check<'py>(py: Python<'py>, a: Vec<f64>, b: Vec<f64>, big_a: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = dcfw::verify::lemma_taxa_check(&a, &b, big_a).py()?;
    let d = PyDict::new(py);
    d.set_item("hypotheses", report_dict(py, &r.hypotheses)?)?;
    d.set_item("conclusions", report_dict(py, &r.conclusions)?)?;
    Ok(d)
}

#[pyfunction]
fn theorem_names() -> Vec<&'static str> {
    TheoremId::ALL.iter().map(|t| t.name()).collect()
}

#[pymodule]
fn pydcfw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySet>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(solve_classic, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fd, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(finite_difference, m)?)?;
    m.add_function(wrap_pyfunction!(fd_error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_taxa_check, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_names, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
