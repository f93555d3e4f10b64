//! The DC problem `min_{x in C} g(x) - h(x)` and the counted oracle context
//! that solvers evaluate it through.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lmo::LinearMinimizationOracle;
use crate::linalg::{all_finite, dot, sub};

/// Smooth convex part `g` with gradient. Defined on all of `R^n`.
pub trait SmoothFunction: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Lipschitz constant of the gradient over the feasible set, if known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

/// Convex, possibly nonsmooth part `h`. `subgradient` returns one element of
/// the subdifferential.
pub trait ConvexFunction: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn subgradient(&self, x: &[f64]) -> Vec<f64>;
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Closure-backed smooth function.
#[derive(Clone)]
pub struct SmoothFn {
    value: Arc<ValueFn>,
    gradient: Arc<VectorFn>,
    lipschitz: Option<f64>,
}

impl SmoothFn {
    pub fn new(
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        lipschitz: Option<f64>,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            lipschitz,
        }
    }
}

impl SmoothFunction for SmoothFn {
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }
    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Closure-backed convex function.
#[derive(Clone)]
pub struct ConvexFn {
    value: Arc<ValueFn>,
    subgradient: Arc<VectorFn>,
}

impl ConvexFn {
    pub fn new(
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        subgradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            subgradient: Arc::new(subgradient),
        }
    }
}

impl ConvexFunction for ConvexFn {
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        (self.subgradient)(x)
    }
}

#[derive(Clone)]
pub struct DCProblem {
    pub name: String,
    dim: usize,
    g: Arc<dyn SmoothFunction>,
    h: Arc<dyn ConvexFunction>,
    feasible_set: LinearMinimizationOracle,
    known_fstar: Option<f64>,
    known_minimizers: Option<Vec<Vec<f64>>>,
}

impl fmt::Debug for DCProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DCProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lipschitz", &self.g.lipschitz())
            .field("feasible_set", &self.feasible_set)
            .field("known_fstar", &self.known_fstar)
            .finish_non_exhaustive()
    }
}

impl DCProblem {
    pub fn new(
        name: impl Into<String>,
        g: Arc<dyn SmoothFunction>,
        h: Arc<dyn ConvexFunction>,
        feasible_set: LinearMinimizationOracle,
    ) -> Self {
        Self {
            name: name.into(),
            dim: feasible_set.dim(),
            g,
            h,
            feasible_set,
            known_fstar: None,
            known_minimizers: None,
        }
    }

    pub fn with_fstar(mut self, fstar: f64) -> Self {
        self.known_fstar = Some(fstar);
        self
    }

    pub fn without_fstar(mut self) -> Self {
        self.known_fstar = None;
        self.known_minimizers = None;
        self
    }

    pub fn with_minimizers(mut self, minimizers: Vec<Vec<f64>>) -> Self {
        self.known_minimizers = Some(minimizers);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn g(&self) -> &dyn SmoothFunction {
        self.g.as_ref()
    }

    pub fn h(&self) -> &dyn ConvexFunction {
        self.h.as_ref()
    }

    pub fn feasible_set(&self) -> &LinearMinimizationOracle {
        &self.feasible_set
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.g.lipschitz()
    }

    pub fn known_fstar(&self) -> Option<f64> {
        self.known_fstar
    }

    pub fn known_minimizers(&self) -> Option<&[Vec<f64>]> {
        self.known_minimizers.as_deref()
    }

    /// Uncounted `g(x) - h(x)`, for tests and brute-force oracles.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.g.value(x) - self.h.value(x)
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::new(self)
    }
}

/// Cumulative oracle usage of one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounters {
    /// Objective evaluations. Each `g` probe of a finite difference counts as one.
    pub f_evals: u64,
    pub grad_evals: u64,
    pub subgrad_evals: u64,
    pub lmo_calls: u64,
    /// Finite-difference vectors computed (each costs `n + 1` f-evaluations).
    #[serde(default)]
    pub fd_calls: u64,
}

/// Output of one linear-minimization step at `x` for coefficient `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapWitness {
    pub p: Vec<f64>,
    /// `c · (p - x)`, clamped to be nonpositive.
    pub omega: f64,
}

/// Per-solve oracle context: owns the counters, borrows the immutable problem.
pub struct Evaluator<'a> {
    problem: &'a DCProblem,
    counters: EvalCounters,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a DCProblem) -> Self {
        Self {
            problem,
            counters: EvalCounters::default(),
        }
    }

    pub fn problem(&self) -> &'a DCProblem {
        self.problem
    }

    pub fn counters(&self) -> EvalCounters {
        self.counters
    }

    /// `g(x) - h(x)` and `|g(x)| + |h(x)|`, the magnitude that bounds its
    /// rounding error; one f-evaluation.
    pub fn evaluate_f_scaled(&mut self, x: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.problem.dim, x.len())?;
        self.counters.f_evals += 1;
        let (g, h) = (self.problem.g.value(x), self.problem.h.value(x));
        let v = g - h;
        if v.is_finite() {
            Ok((v, g.abs() + h.abs()))
        } else {
            Err(Error::NonFinite("objective value"))
        }
    }

    /// `g(x) - h(x)`; one f-evaluation.
    pub fn evaluate_f(&mut self, x: &[f64]) -> Result<f64> {
        check_dim(self.problem.dim, x.len())?;
        self.counters.f_evals += 1;
        let v = self.problem.objective(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("objective value"))
        }
    }

    pub fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.problem.dim, x.len())?;
        self.counters.grad_evals += 1;
        let grad = self.problem.g.gradient(x);
        check_dim(self.problem.dim, grad.len())?;
        if !all_finite(&grad) {
            return Err(Error::NonFinite("gradient"));
        }
        Ok(grad)
    }

    pub fn subgradient(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.problem.dim, x.len())?;
        self.counters.subgrad_evals += 1;
        let u = self.problem.h.subgradient(x);
        check_dim(self.problem.dim, u.len())?;
        if !all_finite(&u) {
            return Err(Error::NonFinite("subgradient"));
        }
        Ok(u)
    }

    /// Forward finite difference of `g` at `x`; `n + 1` f-evaluations.
    pub fn finite_difference(&mut self, x: &[f64], s: f64) -> Result<Vec<f64>> {
        check_dim(self.problem.dim, x.len())?;
        let g = self.problem.g.as_ref();
        let d = crate::fd::finite_difference(|y| g.value(y), x, s)?;
        self.counters.f_evals += x.len() as u64 + 1;
        self.counters.fd_calls += 1;
        Ok(d)
    }

    /// `p = argmin_{p in C} c · (p - x)` and the gap `c · (p - x)`.
    pub fn linear_gap(&mut self, x: &[f64], c: &[f64]) -> Result<GapWitness> {
        check_dim(self.problem.dim, x.len())?;
        self.counters.lmo_calls += 1;
        let p = self.problem.feasible_set.argmin_linear(c)?;
        let omega = dot(c, &sub(&p, x)).min(0.0);
        Ok(GapWitness { p, omega })
    }

    /// Frank-Wolfe gap for the exact gradient and the selected subgradient `u`.
    ///
    /// `omega == 0` iff `x` is stationary for this `u`.
    pub fn stationarity_gap_witness(&mut self, x: &[f64], u: &[f64]) -> Result<GapWitness> {
        check_dim(self.problem.dim, u.len())?;
        let grad = self.gradient(x)?;
        let c = sub(&grad, u);
        self.linear_gap(x, &c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmo::LinearMinimizationOracle;
    use crate::problems::{make_convex_qp, make_fermat_weber, make_weak_star_l1, FermatWeberInstance, WeakStarL1Instance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn l1_problem() -> DCProblem {
        make_weak_star_l1(&WeakStarL1Instance {
            alpha: 0.5,
            beta: 1.0,
            feasible_set: LinearMinimizationOracle::cube(2, -2.0, 2.0).unwrap(),
        })
        .unwrap()
    }

    #[test]
    fn evaluate_f_examples() {
        let p = l1_problem();
        let mut ev = p.evaluator();
        assert_eq!(ev.evaluate_f(&[1.0, 1.0]).unwrap(), -1.0);
        assert_eq!(ev.counters().f_evals, 1);

        let zero = make_convex_qp(vec![0.0, 0.0], LinearMinimizationOracle::cube(2, -1.0, 1.0).unwrap()).unwrap();
        assert_eq!(zero.evaluator().evaluate_f(&[0.0, 0.0]).unwrap(), 0.0);

        let fw = make_fermat_weber(&FermatWeberInstance {
            site_sets: vec![vec![vec![1.0, 1.0]]],
            weights: vec![1.0],
            feasible_set: LinearMinimizationOracle::cube(2, 0.0, 2.0).unwrap(),
        })
        .unwrap();
        assert_eq!(fw.evaluator().evaluate_f(&[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = l1_problem();
        let mut ev = p.evaluator();
        assert_eq!(
            ev.evaluate_f(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn gap_examples() {
        let p = l1_problem();
        let mut ev = p.evaluator();
        let w = ev.stationarity_gap_witness(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(w.omega, 0.0);

        let qp = make_convex_qp(vec![0.25, 0.75], LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap()).unwrap();
        let mut ev = qp.evaluator();
        let w = ev.stationarity_gap_witness(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(w.p, vec![0.0, 0.0]);
        assert_eq!(w.omega, -1.0);
        assert_eq!(ev.counters().grad_evals, 1);
        assert_eq!(ev.counters().lmo_calls, 1);
    }

    #[test]
    fn gap_is_a_lower_bound_over_the_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = l1_problem();
        let set = p.feasible_set().clone();
        for _ in 0..200 {
            let x = set.sample(&mut rng);
            let mut ev = p.evaluator();
            let u = ev.subgradient(&x).unwrap();
            let grad = ev.gradient(&x).unwrap();
            let w = ev.stationarity_gap_witness(&x, &u).unwrap();
            assert!(w.omega <= 0.0);
            let c = sub(&grad, &u);
            for _ in 0..50 {
                let q = set.sample(&mut rng);
                assert!(dot(&c, &sub(&q, &x)) >= w.omega - 1e-12);
            }
        }
    }

    #[test]
    fn convex_gap_dominates_optimality_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let qp = make_convex_qp(vec![2.0, -0.3], LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap()).unwrap();
        let fstar = qp.known_fstar().unwrap();
        for _ in 0..500 {
            let x = qp.feasible_set().sample(&mut rng);
            let mut ev = qp.evaluator();
            let w = ev.stationarity_gap_witness(&x, &[0.0, 0.0]).unwrap();
            assert!(qp.objective(&x) - fstar <= w.omega.abs() + 1e-12);
        }
    }
}
