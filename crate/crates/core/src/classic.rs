//! Frank-Wolfe for `g - h` with exact gradients, a closed-form step and
//! a backtracked Lipschitz estimate.

use crate::error::{Error, Result};
use crate::linalg::{dist, norm_sq, pow2, step, sub};
use crate::problem::DCProblem;
use crate::trace::{IterationRecord, SolveTrace, SolverKind, Status, TerminalState};

pub const DEFAULT_MAX_BACKTRACKS: u32 = 60;
pub const DEFAULT_MAX_ITER: u64 = 10_000;

/// Tolerance used for feasibility of starting points.
pub(crate) const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicConfig {
    /// Initial Lipschitz estimate `L_0 > 0`.
    pub l0: f64,
    pub x0: Vec<f64>,
    /// Stop once `|omega_k| <= tol_omega`.
    pub tol_omega: f64,
    pub max_iter: u64,
    /// Largest backtracking index `j` tried in one iteration.
    pub max_backtracks: u32,
}

impl ClassicConfig {
    /// Defaults: `tol_omega = 1e-8 (1 + |f(x0)|)`, 10^4 iterations, 60 backtracks.
    pub fn new(problem: &DCProblem, x0: Vec<f64>, l0: f64) -> Self {
        let f0 = if x0.len() == problem.dim() { problem.objective(&x0) } else { 0.0 };
        Self {
            l0,
            x0,
            tol_omega: default_tol_omega(f0),
            max_iter: DEFAULT_MAX_ITER,
            max_backtracks: DEFAULT_MAX_BACKTRACKS,
        }
    }

    pub fn validate(&self, problem: &DCProblem) -> Result<()> {
        validate_common(problem, &self.x0, "x0", self.l0, "L0", self.tol_omega)?;
        if self.max_backtracks == 0 {
            return Err(Error::Config("max_backtracks must be positive".into()));
        }
        Ok(())
    }
}

pub fn default_tol_omega(f0: f64) -> f64 {
    1e-8 * (1.0 + f0.abs())
}

pub(crate) fn validate_common(
    problem: &DCProblem,
    x: &[f64],
    x_name: &str,
    l: f64,
    l_name: &str,
    tol: f64,
) -> Result<()> {
    if x.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    if !problem.feasible_set().contains(x, FEASIBILITY_TOL) {
        return Err(Error::Config(format!("{x_name} = {x:?} is not in the feasible set")));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::Config(format!("{l_name} must be positive, got {l}")));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Config(format!("tol_omega must be nonnegative, got {tol}")));
    }
    Ok(())
}

/// `min{1, |omega| / (scaled_l * dist_sq)}`, the minimizer over `(0, 1]` of
/// `-|omega| t + (scaled_l / 2) dist_sq t^2`.
pub fn step_size(omega: f64, scaled_l: f64, dist_sq: f64) -> Result<f64> {
    if !(omega < 0.0) {
        return Err(Error::InvalidInput(format!("step size needs omega < 0, got {omega}")));
    }
    if !(scaled_l > 0.0) {
        return Err(Error::InvalidInput(format!("step size needs a positive curvature estimate, got {scaled_l}")));
    }
    if !(dist_sq > 0.0) {
        return Err(Error::ImpossibleState(format!(
            "negative gap {omega} with p == x"
        )));
    }
    let t = omega.abs() / (scaled_l * dist_sq);
    // A zero step would silently stall the iteration.
    if t == 0.0 {
        return Err(Error::ImpossibleState(format!("step size underflowed for omega {omega}")));
    }
    Ok(t.min(1.0))
}

/// A few ulps of `|g| + |h|` at the two compared points. The solvers subtract
/// it from `f_trial` before the decrease tests: once the predicted decrease
/// falls below the resolution of `g - h`, the exact comparison is decided by
/// rounding alone and `L_k` doubles without bound.
pub fn rounding_allowance(scale_x: f64, scale_trial: f64) -> f64 {
    4.0 * f64::EPSILON * scale_x.max(scale_trial)
}

/// `f_trial <= f_x - |omega| lambda + (scaled_l / 2) dist_sq lambda^2`.
pub fn sufficient_decrease_holds(
    f_x: f64,
    f_trial: f64,
    omega: f64,
    lambda: f64,
    scaled_l: f64,
    dist_sq: f64,
) -> bool {
    f_trial <= f_x - omega.abs() * lambda + 0.5 * scaled_l * dist_sq * lambda * lambda
}

/// Smallest `j` with `2^j l_k >= 2 l_init`, by exact doubling. Returns `j`
/// and `2^j l_k`.
pub fn initial_backtrack(l_k: f64, l_init: f64) -> (u32, f64) {
    let mut j = 0;
    let mut scaled = l_k;
    while scaled < 2.0 * l_init {
        scaled *= 2.0;
        j += 1;
    }
    (j, scaled)
}

pub fn solve_classic(problem: &DCProblem, config: &ClassicConfig) -> Result<SolveTrace> {
    config.validate(problem)?;
    let mut ev = problem.evaluator();
    let mut x = config.x0.clone();
    let (mut fx, mut fx_scale) = ev.evaluate_f_scaled(&x)?;
    let mut l_k = config.l0;
    let mut prev_step: Option<f64> = None;
    let mut records = Vec::new();

    let mut k: u64 = 0;
    let (status, omega_final, j_final) = loop {
        if k >= config.max_iter {
            break (Status::MaxIterations, None, None);
        }
        let u = ev.subgradient(&x)?;
        let witness = ev.stationarity_gap_witness(&x, &u)?;
        let omega = witness.omega;
        if omega == 0.0 && config.tol_omega == 0.0 {
            break (Status::StationaryExact, Some(omega), None);
        }
        if omega.abs() <= config.tol_omega {
            break (Status::Converged, Some(omega), None);
        }

        let d = sub(&witness.p, &x);
        let dist_sq = norm_sq(&d);
        let (mut j, _) = initial_backtrack(l_k, config.l0);
        let accepted = loop {
            if j > config.max_backtracks {
                break Err((Status::BacktrackCapExceeded, j));
            }
            let scaled = l_k * pow2(j);
            let lambda = step_size(omega, scaled, dist_sq)?;
            let trial = step(&x, lambda, &d);
            if trial == x {
                break Err((Status::StalledIterates, j));
            }
            let (f_trial, trial_scale) = ev.evaluate_f_scaled(&trial)?;
            let slack = rounding_allowance(fx_scale, trial_scale);
            if sufficient_decrease_holds(fx, f_trial - slack, omega, lambda, scaled, dist_sq) {
                break Ok((lambda, trial, f_trial, trial_scale));
            }
            j += 1;
        };
        let (lambda, trial, f_trial, trial_scale) = match accepted {
            Ok(v) => v,
            Err((status, j)) => break (status, Some(omega), Some(j)),
        };

        records.push(IterationRecord {
            k,
            x: x.clone(),
            f_val: fx,
            omega,
            lambda,
            l_k,
            j_k: j,
            p: witness.p,
            u,
            step_norm_prev: prev_step,
            fd: None,
            counters: ev.counters(),
        });
        prev_step = Some(dist(&trial, &x));
        x = trial;
        fx = f_trial;
        fx_scale = trial_scale;
        // 2^(j-1) L_k, exact for j = 0 as well.
        l_k = l_k * pow2(j) / 2.0;
        k += 1;
    };

    let terminal_row = k > 0 || omega_final.is_some();
    Ok(SolveTrace {
        solver: SolverKind::Classic,
        dim: problem.dim(),
        l_init: config.l0,
        records,
        status,
        terminal: TerminalState {
            k,
            x,
            f_val: fx,
            omega: omega_final,
            l_k,
            j_k: j_final,
            step_norm_prev: prev_step,
            lyapunov: None,
            counters: ev.counters(),
        },
        terminal_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmo::LinearMinimizationOracle;
    use crate::problems::{make_convex_qp, make_weak_star_l1, WeakStarL1Instance};

    fn l1_problem() -> DCProblem {
        make_weak_star_l1(&WeakStarL1Instance {
            alpha: 0.5,
            beta: 1.0,
            feasible_set: LinearMinimizationOracle::cube(2, -2.0, 2.0).unwrap(),
        })
        .unwrap()
    }

    #[test]
    fn step_size_examples() {
        assert_eq!(step_size(-4.0, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(step_size(-1.0, 4.0, 1.0).unwrap(), 0.25);
        assert_eq!(step_size(-1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(matches!(step_size(-1.0, 1.0, 0.0), Err(Error::ImpossibleState(_))));
        assert!(step_size(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn step_size_minimizes_the_model() {
        for &(omega, l, d2) in &[(-0.3, 2.0, 0.7), (-5.0, 1.0, 1.0), (-1e-3, 10.0, 4.0)] {
            let t = step_size(omega, l, d2).unwrap();
            let model = |s: f64| -f64::abs(omega) * s + 0.5 * l * d2 * s * s;
            for i in 1..=1000 {
                let s = i as f64 / 1000.0;
                assert!(model(t) <= model(s) + 1e-15);
            }
        }
    }

    #[test]
    fn decrease_test_examples() {
        assert!(sufficient_decrease_holds(1.0, 0.5, -1.0, 1.0, 1.0, 1.0));
        assert!(!sufficient_decrease_holds(1.0, 0.6, -1.0, 1.0, 1.0, 1.0));
        assert!(sufficient_decrease_holds(1.0, 1.0, -1.0, 0.0, 1.0, 1.0));
        assert_eq!(rounding_allowance(1.0, 3.0), 12.0 * f64::EPSILON);
    }

    #[test]
    fn initial_backtrack_is_ceil_log2() {
        assert_eq!(initial_backtrack(1.0, 1.0), (1, 2.0));
        assert_eq!(initial_backtrack(2.0, 1.0), (0, 2.0));
        assert_eq!(initial_backtrack(8.0, 1.0), (0, 8.0));
        assert_eq!(initial_backtrack(1.0, 3.0), (3, 8.0));
    }

    #[test]
    fn qp_converges_to_interior_minimizer() {
        let p = make_convex_qp(vec![0.25, 0.75], LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap()).unwrap();
        let mut cfg = ClassicConfig::new(&p, vec![1.0, 1.0], 1.0);
        cfg.tol_omega = 1e-8;
        let trace = solve_classic(&p, &cfg).unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert!(dist(trace.final_x(), &[0.25, 0.75]) < 1e-4);
        assert!(trace.final_f() <= 1e-8);
    }

    #[test]
    fn l1_converges_to_a_sign_pattern() {
        let p = l1_problem();
        let trace = solve_classic(&p, &ClassicConfig::new(&p, vec![2.0, 0.5], 1.0)).unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert!((trace.final_f() + 1.0).abs() <= 1e-6);
        let x = trace.final_x();
        assert!(p.known_minimizers().unwrap().iter().any(|m| dist(m, x) < 1e-3), "{x:?}");
    }

    #[test]
    fn stationary_start_takes_no_steps() {
        let p = l1_problem();
        let trace = solve_classic(&p, &ClassicConfig::new(&p, vec![1.0, 1.0], 1.0)).unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert!(trace.records.is_empty());
        assert_eq!(trace.terminal.k, 0);
        assert_eq!(trace.terminal.omega, Some(0.0));
    }

    #[test]
    fn exact_zero_gap_with_zero_tolerance() {
        let p = l1_problem();
        let mut cfg = ClassicConfig::new(&p, vec![1.0, 1.0], 1.0);
        cfg.tol_omega = 0.0;
        let trace = solve_classic(&p, &cfg).unwrap();
        assert_eq!(trace.status, Status::StationaryExact);
        assert_eq!(trace.terminal.omega, Some(0.0));
    }

    #[test]
    fn max_iter_zero_evaluates_nothing_past_start() {
        let p = l1_problem();
        let mut cfg = ClassicConfig::new(&p, vec![2.0, 0.5], 1.0);
        cfg.max_iter = 0;
        let trace = solve_classic(&p, &cfg).unwrap();
        assert_eq!(trace.status, Status::MaxIterations);
        assert!(trace.rows().is_empty());
    }

    #[test]
    fn backtrack_cap_is_reported() {
        let p = make_convex_qp(vec![0.25, 0.75], LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap()).unwrap();
        // With L_0 = 1e-6 the first trial uses 2e-6, far below L = 1.
        let mut cfg = ClassicConfig::new(&p, vec![1.0, 1.0], 1e-6);
        cfg.max_backtracks = 3;
        let trace = solve_classic(&p, &cfg).unwrap();
        assert_eq!(trace.status, Status::BacktrackCapExceeded);
    }

    #[test]
    fn zero_tolerance_runs_until_steps_stop_moving() {
        let p = l1_problem();
        let mut cfg = ClassicConfig::new(&p, vec![2.0, 0.5], 1.0);
        cfg.tol_omega = 0.0;
        let t = solve_classic(&p, &cfg).unwrap();
        assert!(matches!(t.status, Status::StalledIterates | Status::StationaryExact));
        assert!(t.terminal.omega.unwrap().abs() < 1e-12);
        for r in &t.records {
            assert!(r.l_k >= 1.0 && r.l_k <= 2.0);
        }
    }

    #[test]
    fn rejects_infeasible_start() {
        let p = l1_problem();
        let cfg = ClassicConfig::new(&p, vec![3.0, 0.0], 1.0);
        assert!(matches!(solve_classic(&p, &cfg), Err(Error::Config(_))));
        let cfg = ClassicConfig::new(&p, vec![1.0, 0.0], -1.0);
        assert!(matches!(solve_classic(&p, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn counters_follow_the_cost_model() {
        let p = l1_problem();
        let trace = solve_classic(&p, &ClassicConfig::new(&p, vec![2.0, 0.5], 1.0)).unwrap();
        let c = trace.counters();
        let iters = trace.records.len() as u64;
        let trials: u64 = trace
            .records
            .iter()
            .map(|r| (r.j_k - initial_backtrack(r.l_k, 1.0).0) as u64 + 1)
            .sum();
        // One f for x0, one per trial; one gradient, subgradient and LMO per
        // gap computation (accepted iterations plus the final check).
        assert_eq!(c.f_evals, 1 + trials);
        assert_eq!(c.grad_evals, iters + 1);
        assert_eq!(c.subgrad_evals, iters + 1);
        assert_eq!(c.lmo_calls, iters + 1);
        assert_eq!(c.fd_calls, 0);
    }
}
