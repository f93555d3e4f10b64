//! Derivative-free Frank-Wolfe: the gradient of `g` is replaced by a forward
//! finite difference whose increment shrinks with the previous displacement.

use std::collections::HashMap;

use crate::classic::{
    default_tol_omega, initial_backtrack, rounding_allowance, step_size, validate_common, DEFAULT_MAX_BACKTRACKS,
    DEFAULT_MAX_ITER,
};
use crate::error::{Error, Result};
use crate::linalg::{dist, norm_sq, pow2, step, sub};
use crate::problem::{DCProblem, Evaluator};
use crate::trace::{FdState, IterationRecord, SolveTrace, SolverKind, Status, TerminalState};

pub const DEFAULT_MAX_INNER_I: u32 = 40;
/// `sqrt(eps)`: below this relative size a forward difference is dominated
/// by rounding in `x + s e_i` and in `g(x + s e_i) - g(x)`.
pub const DEFAULT_MIN_INCREMENT_REL: f64 = 1.490_116_119_384_765_6e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FdConfig {
    /// Initial Lipschitz estimate `L_1 > 0`.
    pub l1: f64,
    pub x0: Vec<f64>,
    /// Second starting point, distinct from `x0`; the iteration starts here.
    pub x1: Vec<f64>,
    pub tol_omega: f64,
    pub max_iter: u64,
    pub max_backtracks_j: u32,
    /// Number of increments probed before the iterate is declared stationary.
    pub max_inner_i: u32,
    /// Floor on `||x^k - x^{k-1}||`.
    pub min_step_norm: f64,
    /// Increments below `min_increment_rel * (1 + ||x^k||_inf)` are not
    /// probed; reaching that floor declares the iterate stationary.
    pub min_increment_rel: f64,
}

impl FdConfig {
    pub fn new(problem: &DCProblem, x0: Vec<f64>, x1: Vec<f64>, l1: f64) -> Self {
        let f1 = if x1.len() == problem.dim() { problem.objective(&x1) } else { 0.0 };
        Self {
            l1,
            x0,
            x1,
            tol_omega: default_tol_omega(f1),
            max_iter: DEFAULT_MAX_ITER,
            max_backtracks_j: DEFAULT_MAX_BACKTRACKS,
            max_inner_i: DEFAULT_MAX_INNER_I,
            min_step_norm: 1e-14 * problem.feasible_set().diameter(),
            min_increment_rel: DEFAULT_MIN_INCREMENT_REL,
        }
    }

    pub fn validate(&self, problem: &DCProblem) -> Result<()> {
        validate_common(problem, &self.x0, "x0", self.l1, "L1", self.tol_omega)?;
        validate_common(problem, &self.x1, "x1", self.l1, "L1", self.tol_omega)?;
        if dist(&self.x0, &self.x1) == 0.0 {
            return Err(Error::Config("x0 and x1 must differ".into()));
        }
        if self.max_backtracks_j == 0 || self.max_inner_i == 0 {
            return Err(Error::Config("max_backtracks_j and max_inner_i must be positive".into()));
        }
        if !(self.min_step_norm >= 0.0) {
            return Err(Error::Config("min_step_norm must be nonnegative".into()));
        }
        if !(self.min_increment_rel >= 0.0 && self.min_increment_rel.is_finite()) {
            return Err(Error::Config("min_increment_rel must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// `s_ij = 2 L_1 ||x^k - x^{k-1}|| / (2^(i+j) L_k sqrt(n))`.
pub fn fd_increment(l1: f64, i: u32, j: u32, l_k: f64, n: usize, step_norm: f64) -> Result<f64> {
    if !(step_norm > 0.0) {
        return Err(Error::ImpossibleState(format!("stalled iterates: ||x^k - x^(k-1)|| = {step_norm}")));
    }
    if !(l_k > 0.0) {
        return Err(Error::InvalidInput(format!("L_k must be positive, got {l_k}")));
    }
    Ok(2.0 * l1 * step_norm / (pow2(i + j) * l_k * (n as f64).sqrt()))
}

/// `f_trial <= f_x - |omega| lambda / 2 - (scaled_l / 4) dist_sq lambda^2
///             + (L_1 / 4) prev_step_norm^2`.
#[allow(clippy::too_many_arguments)]
pub fn fd_sufficient_decrease_holds(
    f_x: f64,
    f_trial: f64,
    omega: f64,
    lambda: f64,
    scaled_l: f64,
    dist_sq: f64,
    l1: f64,
    prev_step_norm: f64,
) -> bool {
    f_trial
        <= f_x - 0.5 * omega.abs() * lambda - 0.25 * scaled_l * dist_sq * lambda * lambda
            + 0.25 * l1 * prev_step_norm * prev_step_norm
}

#[derive(Debug, Clone, PartialEq)]
pub enum InnerSearch {
    Found {
        i: u32,
        p: Vec<f64>,
        omega: f64,
        s: f64,
    },
    /// No probe produced `omega < -tol`; carries the last probed gap, if any
    /// increment was above the floor.
    StationaryDeclared { last_omega: Option<f64> },
}

/// Parameters of one inner increment search.
#[derive(Debug, Clone, Copy)]
pub struct InnerParams {
    pub l1: f64,
    pub j: u32,
    pub l_k: f64,
    pub step_norm: f64,
    pub max_inner_i: u32,
    pub tol_omega: f64,
    /// Absolute increment floor.
    pub min_increment: f64,
}

/// Finite-difference vectors at the current iterate, keyed by `i + j`
/// (the increment depends on `i` and `j` only through their sum).
pub type FdMemo = HashMap<u32, Vec<f64>>;

/// Probe `i = 0, 1, ...` until the finite-difference gap is below `-tol`.
pub fn inner_gap_search(
    ev: &mut Evaluator<'_>,
    x: &[f64],
    u: &[f64],
    params: &InnerParams,
    memo: &mut FdMemo,
) -> Result<InnerSearch> {
    let n = x.len();
    let mut last_omega = None;
    for i in 0..params.max_inner_i {
        let s = fd_increment(params.l1, i, params.j, params.l_k, n, params.step_norm)?;
        if s < params.min_increment {
            break;
        }
        let d = match memo.get(&(i + params.j)) {
            Some(d) => d.clone(),
            None => {
                let d = ev.finite_difference(x, s)?;
                memo.insert(i + params.j, d.clone());
                d
            }
        };
        let c = sub(&d, u);
        let w = ev.linear_gap(x, &c)?;
        if w.omega < -params.tol_omega {
            return Ok(InnerSearch::Found {
                i,
                p: w.p,
                omega: w.omega,
                s,
            });
        }
        last_omega = Some(w.omega);
    }
    Ok(InnerSearch::StationaryDeclared { last_omega })
}

pub fn solve_fd(problem: &DCProblem, config: &FdConfig) -> Result<SolveTrace> {
    config.validate(problem)?;
    let n = problem.dim();
    let l1 = config.l1;
    let mut ev = problem.evaluator();
    let mut x_prev = config.x0.clone();
    let mut x = config.x1.clone();
    let (mut fx, mut fx_scale) = ev.evaluate_f_scaled(&x)?;
    let mut l_k = l1;
    let mut records: Vec<IterationRecord> = Vec::new();

    let mut k: u64 = 1;
    let (status, omega_final, j_final) = loop {
        if k > config.max_iter {
            break (Status::MaxIterations, None, None);
        }
        let step_norm = dist(&x, &x_prev);
        if step_norm <= config.min_step_norm {
            break (Status::StalledIterates, records.last().map(|r| r.omega), None);
        }
        let u = ev.subgradient(&x)?;
        let min_increment = config.min_increment_rel * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let mut memo = FdMemo::new();
        let (mut j, _) = initial_backtrack(l_k, l1);
        let outcome = loop {
            if j > config.max_backtracks_j {
                break Err((Status::BacktrackCapExceeded, None, Some(j)));
            }
            let params = InnerParams {
                l1,
                j,
                l_k,
                step_norm,
                max_inner_i: config.max_inner_i,
                tol_omega: config.tol_omega,
                min_increment,
            };
            match inner_gap_search(&mut ev, &x, &u, &params, &mut memo)? {
                InnerSearch::StationaryDeclared { last_omega } => {
                    break Err((Status::StationaryDeclared, last_omega, Some(j)));
                }
                InnerSearch::Found { i, p, omega, s } => {
                    let scaled = l_k * pow2(j);
                    let d = sub(&p, &x);
                    let dist_sq = norm_sq(&d);
                    let lambda = step_size(omega, scaled, dist_sq)?;
                    let trial = step(&x, lambda, &d);
                    if trial == x {
                        break Err((Status::StalledIterates, Some(omega), Some(j)));
                    }
                    let (f_trial, trial_scale) = ev.evaluate_f_scaled(&trial)?;
                    let slack = rounding_allowance(fx_scale, trial_scale);
                    if fd_sufficient_decrease_holds(fx, f_trial - slack, omega, lambda, scaled, dist_sq, l1, step_norm) {
                        break Ok((i, p, omega, s, lambda, trial, f_trial, trial_scale));
                    }
                    j += 1;
                }
            }
        };
        let (i, p, omega, s, lambda, trial, f_trial, trial_scale) = match outcome {
            Ok(v) => v,
            Err(stop) => break stop,
        };
        records.push(IterationRecord {
            k,
            x: x.clone(),
            f_val: fx,
            omega,
            lambda,
            l_k,
            j_k: j,
            p,
            u,
            step_norm_prev: Some(step_norm),
            fd: Some(FdState {
                i_k: i,
                s_k: s,
                lyapunov: fx + 0.5 * l1 * step_norm * step_norm,
            }),
            counters: ev.counters(),
        });
        x_prev = std::mem::replace(&mut x, trial);
        fx = f_trial;
        fx_scale = trial_scale;
        l_k = l_k * pow2(j) / 2.0;
        k += 1;
    };

    let step_norm = dist(&x, &x_prev);
    Ok(SolveTrace {
        solver: SolverKind::Fd,
        dim: n,
        l_init: l1,
        records,
        status,
        terminal: TerminalState {
            k,
            x,
            f_val: fx,
            omega: omega_final,
            l_k,
            j_k: j_final,
            step_norm_prev: Some(step_norm),
            lyapunov: Some(fx + 0.5 * l1 * step_norm * step_norm),
            counters: ev.counters(),
        },
        terminal_row: k > 1 || omega_final.is_some(),
    })
}
