//! Rate constants, theorem bounds, and audits of solve traces against them.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::derivative_free::fd_increment;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::problem::DCProblem;
use crate::trace::{SolveTrace, SolverKind, TraceRow};

/// Relative slack applied to every audited inequality.
pub const REL_SLACK: f64 = 1e-9;
/// Absolute slack for the per-step descent and Lyapunov checks.
pub const DESCENT_ABS_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub l: f64,
    /// `L_0` (classic) or `L_1` (finite-difference).
    pub l_init: f64,
    pub diam: f64,
    /// `2 (L + l_init) diam^2`.
    pub alpha: f64,
    pub gamma: Option<f64>,
    pub gamma_bar: Option<f64>,
    pub gamma_bar_estimated: bool,
}

impl RateConstants {
    pub fn new(l: f64, l_init: f64, diam: f64) -> Result<Self> {
        for (name, v) in [("L", l), ("initial Lipschitz estimate", l_init), ("diameter", diam)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(Self {
            l,
            l_init,
            diam,
            alpha: 2.0 * (l + l_init) * diam * diam,
            gamma: None,
            gamma_bar: None,
            gamma_bar_estimated: false,
        })
    }

    /// Constants for a problem whose gradient Lipschitz constant is known.
    pub fn for_problem(problem: &DCProblem, l_init: f64) -> Result<Self> {
        let l = problem
            .lipschitz()
            .ok_or_else(|| Error::Config(format!("problem {} has no known Lipschitz constant", problem.name)))?;
        Self::new(l, l_init, problem.feasible_set().diameter())
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_gamma_bar(mut self, gamma_bar: f64, estimated: bool) -> Self {
        self.gamma_bar = Some(gamma_bar);
        self.gamma_bar_estimated = estimated;
        self
    }

    /// `min{2 / (gamma_bar diam), 1 / alpha}`.
    pub fn theta(&self) -> Option<f64> {
        self.gamma_bar
            .map(|gb| (2.0 / (gb * self.diam)).min(1.0 / self.alpha))
    }

    /// `gamma_bar^2 / (theta L_0)`.
    pub fn beta_const(&self) -> Option<f64> {
        let gb = self.gamma_bar?;
        Some(gb * gb / (self.theta()? * self.l_init))
    }
}

/// `max{2 d0, sqrt(2 alpha d0)} / sqrt(N + 1)` with `d0 = f0 - fstar`.
pub fn classic_gap_rate_bound(n: u64, alpha: f64, f0: f64, fstar: f64) -> Result<f64> {
    let d0 = f0 - fstar;
    if d0 < 0.0 {
        return Err(Error::InvalidInput(format!("f0 = {f0} lies below f* = {fstar}")));
    }
    Ok((2.0 * d0).max((2.0 * alpha * d0).sqrt()) / ((n + 1) as f64).sqrt())
}

/// `4 (L + L0) diam^2 / k`.
pub fn weak_star_value_bound(k: u64, l: f64, l0: f64, diam: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("value bound needs k >= 1".into()));
    }
    Ok(4.0 * (l + l0) * diam * diam / k as f64)
}

/// Window `{floor(k/2) + 2, ..., k}` and the bound `16 (L + L0) diam^2 / (k - 2)`.
pub fn weak_star_window_gap_bound(
    k: u64,
    l: f64,
    l0: f64,
    diam: f64,
) -> Result<(std::ops::RangeInclusive<u64>, f64)> {
    if k < 3 {
        return Err(Error::InvalidInput("windowed gap bound needs k >= 3".into()));
    }
    Ok((k / 2 + 2..=k, 16.0 * (l + l0) * diam * diam / (k - 2) as f64))
}

/// `max{gamma, sqrt(abar gamma)} / sqrt(N)`.
pub fn fd_gap_rate_bound(n: u64, abar: f64, gamma: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("gap rate bound needs N >= 1".into()));
    }
    if gamma < 0.0 {
        return Err(Error::InvalidInput(format!("gamma must be nonnegative, got {gamma}")));
    }
    Ok(gamma.max((abar * gamma).sqrt()) / (n as f64).sqrt())
}

/// Function- and gradient-evaluation budgets for reaching `|omega| <= epsilon`:
/// `M (2 + log2(beta / eps^2))` and `M + 1`, `M = max{gb^2, alpha gb} / eps^2`.
pub fn eval_complexity_budget(epsilon: f64, alpha: f64, gamma_bar: f64, beta: f64) -> Result<(f64, f64)> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let m = (gamma_bar * gamma_bar).max(alpha * gamma_bar) / (epsilon * epsilon);
    Ok((m * (2.0 + (beta / (epsilon * epsilon)).log2()), m + 1.0))
}

impl RateConstants {
    pub fn eval_budget(&self, epsilon: f64) -> Result<(f64, f64)> {
        let gb = self
            .gamma_bar
            .ok_or_else(|| Error::Config("evaluation budget needs gamma_bar".into()))?;
        let beta = self.beta_const().expect("gamma_bar is set");
        eval_complexity_budget(epsilon, self.alpha, gb, beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TheoremId {
    /// `f(x^{k+1}) <= f(x^k) - |omega_k| lambda_k / 2`.
    Descent,
    /// `L_0 <= L_k <= L + L_0`.
    LkSandwich,
    /// `lambda_k >= min{1, |omega_k| / alpha}`.
    StepFloor,
    /// Running minimum of `|omega_k|` against `classic_gap_rate_bound`.
    GapRate,
    WeakStarValue,
    WeakStarGap,
    /// Advisory: f-evaluation count against `eval_complexity_budget`.
    EvalBudget,
    FdDescent,
    Lyapunov,
    /// `L_1 <= L_k <= 2 (L + L_1)`.
    FdLkSandwich,
    FdStepFloor,
    FdGapRate,
    /// Recorded increments reproduce `fd_increment` bit for bit.
    Increment,
    SequenceHypotheses,
    SequenceConclusions,
}

impl TheoremId {
    pub const ALL: [TheoremId; 15] = [
        TheoremId::Descent,
        TheoremId::LkSandwich,
        TheoremId::StepFloor,
        TheoremId::GapRate,
        TheoremId::WeakStarValue,
        TheoremId::WeakStarGap,
        TheoremId::EvalBudget,
        TheoremId::FdDescent,
        TheoremId::Lyapunov,
        TheoremId::FdLkSandwich,
        TheoremId::FdStepFloor,
        TheoremId::FdGapRate,
        TheoremId::Increment,
        TheoremId::SequenceHypotheses,
        TheoremId::SequenceConclusions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::Descent => "descent",
            TheoremId::LkSandwich => "lk-sandwich",
            TheoremId::StepFloor => "step-floor",
            TheoremId::GapRate => "gap-rate",
            TheoremId::WeakStarValue => "weak-star-value",
            TheoremId::WeakStarGap => "weak-star-gap",
            TheoremId::EvalBudget => "eval-budget",
            TheoremId::FdDescent => "fd-descent",
            TheoremId::Lyapunov => "lyapunov",
            TheoremId::FdLkSandwich => "fd-lk-sandwich",
            TheoremId::FdStepFloor => "fd-step-floor",
            TheoremId::FdGapRate => "fd-gap-rate",
            TheoremId::Increment => "increment",
            TheoremId::SequenceHypotheses => "sequence-hypotheses",
            TheoremId::SequenceConclusions => "sequence-conclusions",
        }
    }

    /// The checks that apply to a trace of the given solver.
    pub fn defaults_for(solver: SolverKind) -> Vec<TheoremId> {
        match solver {
            SolverKind::Classic => vec![
                TheoremId::Descent,
                TheoremId::LkSandwich,
                TheoremId::StepFloor,
                TheoremId::GapRate,
            ],
            SolverKind::Fd => vec![
                TheoremId::FdDescent,
                TheoremId::Lyapunov,
                TheoremId::FdLkSandwich,
                TheoremId::FdStepFloor,
                TheoremId::FdGapRate,
                TheoremId::Increment,
            ],
        }
    }

    /// Whether the check needs a known optimal value (`fd-gap-rate` only when
    /// `gamma` is not given).
    pub fn needs_fstar(self) -> bool {
        matches!(self, TheoremId::GapRate | TheoremId::WeakStarValue | TheoremId::FdGapRate)
    }

    fn solver(self) -> Option<SolverKind> {
        use TheoremId::*;
        match self {
            Descent | LkSandwich | StepFloor | GapRate | EvalBudget => Some(SolverKind::Classic),
            FdDescent | Lyapunov | FdLkSandwich | FdStepFloor | FdGapRate | Increment => Some(SolverKind::Fd),
            WeakStarValue | WeakStarGap => None,
            SequenceHypotheses | SequenceConclusions => None,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown check {s:?}")))
    }
}

impl From<TheoremId> for String {
    fn from(t: TheoremId) -> String {
        t.name().to_string()
    }
}

impl TryFrom<String> for TheoremId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Comma-separated list of check names.
pub fn parse_theorem_list(s: &str) -> Result<Vec<TheoremId>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub k: u64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem_id: TheoremId,
    pub checked_points: u64,
    pub violations: Vec<Violation>,
    /// Largest `lhs / (rhs + abs_slack)`; a check passes iff this is at most
    /// `1 + 1e-9`.
    pub max_slack_ratio: f64,
    /// Reported but not gating.
    pub advisory: bool,
    /// Derived from sampled rather than analytic constants.
    pub estimated: bool,
}

impl BoundReport {
    pub fn new(theorem_id: TheoremId) -> Self {
        Self {
            theorem_id,
            checked_points: 0,
            violations: Vec::new(),
            max_slack_ratio: 0.0,
            advisory: false,
            estimated: false,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Records the check `lhs <= rhs` with absolute slack `abs_slack` and
    /// relative slack `REL_SLACK`.
    pub fn check(&mut self, k: u64, lhs: f64, rhs: f64, abs_slack: f64) {
        self.checked_points += 1;
        let denom = rhs + abs_slack;
        let ratio = if denom > 0.0 {
            lhs / denom
        } else if lhs <= denom {
            0.0
        } else {
            f64::INFINITY
        };
        // NaN on either side counts as a violation.
        let ok = ratio <= 1.0 + REL_SLACK;
        if ok {
            self.max_slack_ratio = self.max_slack_ratio.max(ratio);
        } else {
            self.max_slack_ratio = if ratio.is_nan() { f64::INFINITY } else { self.max_slack_ratio.max(ratio) };
            self.violations.push(Violation { k, lhs, rhs });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceLemmaReport {
    pub hypotheses: BoundReport,
    pub conclusions: BoundReport,
}

/// Checks `a_{k+1} <= a_k - b_k beta_k + (A/2) beta_k^2` with
/// `beta_k = 2/(k+2)`, `0 <= a_k <= b_k`, and then the conclusions
/// `a_k <= 2A/k` and `min_{floor(k/2)+2 <= l <= k} b_l <= 8A/(k-2)`.
/// Sequences are indexed from 0.
pub fn lemma_taxa_check(a: &[f64], b: &[f64], big_a: f64) -> Result<SequenceLemmaReport> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if !(big_a > 0.0) {
        return Err(Error::InvalidInput(format!("A must be positive, got {big_a}")));
    }
    let mut hyp = BoundReport::new(TheoremId::SequenceHypotheses);
    for k in 0..a.len() {
        hyp.check(k as u64, -a[k], 0.0, 0.0);
        hyp.check(k as u64, -b[k], 0.0, 0.0);
        hyp.check(k as u64, a[k], b[k], 0.0);
        if k + 1 < a.len() {
            let beta = 2.0 / (k as f64 + 2.0);
            hyp.check(k as u64, a[k + 1], a[k] - b[k] * beta + 0.5 * big_a * beta * beta, 0.0);
        }
    }
    let mut con = BoundReport::new(TheoremId::SequenceConclusions);
    for k in 1..a.len() {
        con.check(k as u64, a[k], 2.0 * big_a / k as f64, 0.0);
    }
    let series: Vec<Option<f64>> = b.iter().copied().map(Some).collect();
    for (k, min_b) in window_minima(&series) {
        con.check(k, min_b, 8.0 * big_a / (k - 2) as f64, 0.0);
    }
    Ok(SequenceLemmaReport {
        hypotheses: hyp,
        conclusions: con,
    })
}

/// For every `k >= 3` below `values.len()`, the minimum of the present
/// values over `{floor(k/2)+2, ..., k}` (skipped when none is present).
fn window_minima(values: &[Option<f64>]) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    let mut dq: VecDeque<usize> = VecDeque::new();
    for k in 0..values.len() {
        if let Some(v) = values[k] {
            while dq.back().is_some_and(|&i| values[i].unwrap() >= v) {
                dq.pop_back();
            }
            dq.push_back(k);
        }
        if k < 3 {
            continue;
        }
        let lo = k / 2 + 2;
        while dq.front().is_some_and(|&i| i < lo) {
            dq.pop_front();
        }
        if let Some(&i) = dq.front() {
            out.push((k as u64, values[i].unwrap()));
        }
    }
    out
}

/// `2 (f(x^1) - f*) + L_1 ||x^2 - x^1||^2` from a finite-difference trace.
pub fn fd_gamma(rows: &[TraceRow], l1: f64, fstar: f64) -> Option<f64> {
    let first = rows.first()?;
    let step = rows.get(1).and_then(|r| r.step_norm_prev).unwrap_or(0.0);
    Some(2.0 * (first.f - fstar) + l1 * step * step)
}

/// `1.1 * max ||grad g(x)|| + ||u(x)||` over `samples` feasible points, half
/// of them extreme points returned by the oracle for random directions.
pub fn estimate_gamma_bar<R: Rng + ?Sized>(problem: &DCProblem, samples: usize, rng: &mut R) -> Result<f64> {
    let set = problem.feasible_set();
    let n = problem.dim();
    let mut best: f64 = 0.0;
    for i in 0..samples {
        let x = if i % 2 == 0 {
            set.sample(rng)
        } else {
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            set.argmin_linear(&c)?
        };
        let v = norm(&problem.g().gradient(&x)) + norm(&problem.h().subgradient(&x));
        if !v.is_finite() {
            return Err(Error::NonFinite("gradient norm while estimating gamma_bar"));
        }
        best = best.max(v);
    }
    Ok(1.1 * best)
}

fn need_fstar(problem: &DCProblem, t: TheoremId) -> Result<f64> {
    problem
        .known_fstar()
        .ok_or_else(|| Error::Config(format!("check {t} needs a known optimal value but problem {} has none", problem.name)))
}

pub fn audit_trace(
    trace: &SolveTrace,
    problem: &DCProblem,
    constants: &RateConstants,
    which: &[TheoremId],
) -> Result<Vec<BoundReport>> {
    if trace.dim != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: trace.dim,
        });
    }
    audit_rows(&trace.rows(), trace.solver, problem, constants, which)
}

/// Audits per-iterate rows (as written to or read from CSV).
pub fn audit_rows(
    rows: &[TraceRow],
    solver: SolverKind,
    problem: &DCProblem,
    constants: &RateConstants,
    which: &[TheoremId],
) -> Result<Vec<BoundReport>> {
    if let Some(first) = rows.first() {
        if first.l_k != constants.l_init {
            return Err(Error::Config(format!(
                "trace starts from L = {} but the constants use {}",
                first.l_k, constants.l_init
            )));
        }
        let start = if solver == SolverKind::Classic { 0 } else { 1 };
        if rows.iter().enumerate().any(|(i, r)| r.k != start + i as u64) {
            return Err(Error::Config("trace rows are not consecutive iterations".into()));
        }
    }
    let c = constants;
    let mut out = Vec::with_capacity(which.len());
    for &t in which {
        if let Some(s) = t.solver() {
            if s != solver {
                return Err(Error::Config(format!("check {t} does not apply to {solver:?} traces")));
            }
        }
        let mut rep = BoundReport::new(t);
        match t {
            TheoremId::Descent => {
                for w in rows.windows(2) {
                    if let (Some(om), Some(la)) = (w[0].omega, w[0].lambda) {
                        rep.check(w[0].k, w[1].f - w[0].f + 0.5 * om.abs() * la, 0.0, DESCENT_ABS_SLACK);
                    }
                }
            }
            TheoremId::LkSandwich | TheoremId::FdLkSandwich => {
                let upper = if t == TheoremId::LkSandwich { c.l + c.l_init } else { 2.0 * (c.l + c.l_init) };
                for r in rows {
                    rep.check(r.k, c.l_init, r.l_k, 0.0);
                    rep.check(r.k, r.l_k, upper, 0.0);
                }
            }
            TheoremId::StepFloor | TheoremId::FdStepFloor => {
                for r in rows {
                    if let (Some(om), Some(la)) = (r.omega, r.lambda) {
                        rep.check(r.k, (om.abs() / c.alpha).min(1.0), la, 0.0);
                    }
                }
            }
            TheoremId::GapRate => {
                let fstar = need_fstar(problem, t)?;
                let f0 = rows.first().map(|r| r.f).unwrap_or(fstar);
                let mut best = f64::INFINITY;
                for r in rows {
                    if let Some(om) = r.omega {
                        best = best.min(om.abs());
                        // f0 below f* only through rounding.
                        let bound = classic_gap_rate_bound(r.k, c.alpha, f0.max(fstar), fstar)?;
                        rep.check(r.k, best, bound, 0.0);
                    }
                }
            }
            TheoremId::WeakStarValue => {
                let fstar = need_fstar(problem, t)?;
                rep.advisory = solver == SolverKind::Fd;
                for r in rows.iter().filter(|r| r.k >= 1) {
                    rep.check(r.k, r.f - fstar, weak_star_value_bound(r.k, c.l, c.l_init, c.diam)?, 0.0);
                }
            }
            TheoremId::WeakStarGap => {
                rep.advisory = solver == SolverKind::Fd;
                let last = rows.last().map(|r| r.k as usize + 1).unwrap_or(0);
                let mut series = vec![None; last];
                for r in rows {
                    series[r.k as usize] = r.omega.map(f64::abs);
                }
                for (k, m) in window_minima(&series) {
                    rep.check(k, m, weak_star_window_gap_bound(k, c.l, c.l_init, c.diam)?.1, 0.0);
                }
            }
            TheoremId::EvalBudget => {
                rep.advisory = true;
                rep.estimated = c.gamma_bar_estimated;
                let mut best = f64::INFINITY;
                for r in rows {
                    if let Some(om) = r.omega {
                        if om.abs() < best && om != 0.0 {
                            best = om.abs();
                            let (f_budget, grad_budget) = c.eval_budget(best)?;
                            rep.check(r.k, r.counters.f_evals as f64, f_budget, 0.0);
                            rep.check(r.k, r.counters.grad_evals as f64, grad_budget, 0.0);
                        }
                    }
                }
            }
            TheoremId::FdDescent => {
                for w in rows.windows(2) {
                    if let (Some(om), Some(la), Some(prev), Some(next)) =
                        (w[0].omega, w[0].lambda, w[0].step_norm_prev, w[1].step_norm_prev)
                    {
                        let lhs = w[1].f - w[0].f + 0.5 * om.abs() * la + 0.5 * w[1].l_k * next * next
                            - 0.25 * c.l_init * prev * prev;
                        rep.check(w[0].k, lhs, 0.0, DESCENT_ABS_SLACK);
                    }
                }
            }
            TheoremId::Lyapunov => {
                for w in rows.windows(2) {
                    if let (Some(v0), Some(v1)) = (w[0].lyapunov, w[1].lyapunov) {
                        rep.check(w[1].k, v1 - v0, 0.0, DESCENT_ABS_SLACK);
                    }
                }
            }
            TheoremId::FdGapRate => {
                let gamma = match c.gamma {
                    Some(g) => g,
                    None => fd_gamma(rows, c.l_init, need_fstar(problem, t)?).unwrap_or(0.0),
                };
                let mut best = f64::INFINITY;
                for r in rows {
                    if let Some(om) = r.omega {
                        best = best.min(om.abs());
                        rep.check(r.k, best, fd_gap_rate_bound(r.k, c.alpha, gamma.max(0.0))?, 0.0);
                    }
                }
            }
            TheoremId::Increment => {
                for r in rows {
                    if let (Some(i), Some(j), Some(s), Some(step)) = (r.i_k, r.j_k, r.s_k, r.step_norm_prev) {
                        let again = fd_increment(c.l_init, i, j, r.l_k, problem.dim(), step)?;
                        rep.check(r.k, (s - again).abs(), 0.0, 0.0);
                    }
                }
            }
            TheoremId::SequenceHypotheses | TheoremId::SequenceConclusions => {
                return Err(Error::Config(format!("check {t} applies to sequences, not traces")));
            }
        }
        out.push(rep);
    }
    Ok(out)
}
