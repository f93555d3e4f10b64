//! The four subcommands. Each returns the process exit code.

use std::fs;
use std::path::{Path, PathBuf};

use dcfw::fd::certify_fd_error;
use dcfw::problem::SmoothFn;
use dcfw::problems::{make_star_convex_biquadratic, ScaledSquaredDistance};
use dcfw::trace::{format_float, read_csv, to_csv_string};
use dcfw::verify::{estimate_gamma_bar, RateConstants};
use dcfw::{audit_rows, BoundReport, EvalCounters, SmoothFunction, SolveTrace, SolverKind, Status, TheoremId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, Resolved, RunConfig, SuiteConfig};
use crate::output::write_atomic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_SOLVER_ERROR: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

/// Samples used to estimate `gamma_bar` for the evaluation budget check.
const GAMMA_BAR_SAMPLES: usize = 10_000;

pub fn status_exit_code(status: Status) -> i32 {
    match status {
        s if s.is_success() => EXIT_OK,
        Status::MaxIterations => EXIT_MAX_ITER,
        _ => EXIT_SOLVER_ERROR,
    }
}

fn load_run_config(path: &Path, seed: Option<u64>) -> Result<(RunConfig, Resolved), ConfigError> {
    let with_path = |mut e: ConfigError| {
        e.path = Some(path.to_path_buf());
        e
    };
    let source = fs::read_to_string(path).map_err(|e| {
        with_path(ConfigError {
            path: None,
            line: None,
            message: format!("cannot read config: {e}"),
        })
    })?;
    let mut cfg = RunConfig::parse(&source).map_err(with_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let resolved = cfg.resolve(&source).map_err(with_path)?;
    Ok((cfg, resolved))
}

fn output_dir(cfg: &RunConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn trace_name(cfg: &RunConfig) -> &str {
    cfg.output.trace.as_deref().unwrap_or("trace.csv")
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub solver: SolverKind,
    pub status: Status,
    pub seed: u64,
    pub iterations: usize,
    pub final_k: u64,
    pub final_f: f64,
    pub final_omega: Option<f64>,
    pub f_gap: Option<f64>,
    pub final_x: Vec<f64>,
    pub final_l_k: f64,
    pub tol_omega: f64,
    pub counters: EvalCounters,
}

fn summarize(cfg: &RunConfig, resolved: &Resolved, trace: &SolveTrace) -> RunSummary {
    RunSummary {
        problem: resolved.problem.name.clone(),
        solver: trace.solver,
        status: trace.status,
        seed: cfg.seed,
        iterations: trace.iterations(),
        final_k: trace.terminal.k,
        final_f: trace.final_f(),
        final_omega: trace.terminal.omega,
        f_gap: resolved.problem.known_fstar().map(|fs| trace.final_f() - fs),
        final_x: trace.final_x().to_vec(),
        final_l_k: trace.terminal.l_k,
        tol_omega: resolved.solver.tol_omega(),
        counters: trace.counters(),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn cmd_run(config: &Path, out: Option<&Path>, seed: Option<u64>) -> i32 {
    let (cfg, resolved) = match load_run_config(config, seed) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let trace = match resolved.solver.solve(&resolved.problem) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: solve failed: {e}");
            return EXIT_SOLVER_ERROR;
        }
    };
    let dir = output_dir(&cfg, out);
    let summary = summarize(&cfg, &resolved, &trace);
    let trace_path = dir.join(trace_name(&cfg));
    let summary_path = dir.join(cfg.output.summary.as_deref().unwrap_or("summary.json"));
    if let Err(e) = write_atomic(&trace_path, to_csv_string(&trace.rows()).as_bytes())
        .and_then(|_| write_atomic(&summary_path, json(&summary).as_bytes()))
    {
        eprintln!("error: writing output: {e}");
        return EXIT_SOLVER_ERROR;
    }
    println!(
        "{} {:?}: {:?} after {} iterations, f = {}, trace {}",
        summary.problem,
        summary.solver,
        summary.status,
        summary.iterations,
        format_float(summary.final_f),
        trace_path.display()
    );
    status_exit_code(trace.status)
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub problem: String,
    pub solver: SolverKind,
    pub trace: PathBuf,
    pub passed: bool,
    pub reports: Vec<BoundReport>,
}

pub fn cmd_verify(
    config: &Path,
    trace: Option<&Path>,
    theorems: Option<&str>,
    out: Option<&Path>,
    seed: Option<u64>,
) -> i32 {
    let (cfg, resolved) = match load_run_config(config, seed) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let problem = &resolved.problem;
    let solver = cfg.solver.kind();
    let trace_path = trace
        .map(Path::to_path_buf)
        .unwrap_or_else(|| output_dir(&cfg, None).join(trace_name(&cfg)));
    let rows = match fs::File::open(&trace_path).map_err(|e| e.to_string()).and_then(|f| read_csv(f).map_err(|e| e.to_string())) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", trace_path.display());
            return EXIT_CONFIG;
        }
    };
    let which = match theorems {
        Some(list) => match dcfw::verify::parse_theorem_list(list) {
            Ok(w) => w,
            Err(e) => {
                eprintln!("error: --theorems: {e}");
                return EXIT_CONFIG;
            }
        },
        None => TheoremId::defaults_for(solver)
            .into_iter()
            .filter(|t| problem.known_fstar().is_some() || !t.needs_fstar())
            .collect(),
    };
    let mut constants = match RateConstants::for_problem(problem, resolved.solver.l_init()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if which.contains(&TheoremId::EvalBudget) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        match estimate_gamma_bar(problem, GAMMA_BAR_SAMPLES, &mut rng) {
            Ok(gb) => constants = constants.with_gamma_bar(gb, true),
            Err(e) => {
                eprintln!("error: estimating gamma_bar: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    let reports = match audit_rows(&rows, solver, problem, &constants, &which) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let passed = reports.iter().all(|r| r.advisory || r.passed());
    for r in &reports {
        let verdict = match (r.passed(), r.advisory) {
            (true, _) => "pass",
            (false, true) => "advisory-fail",
            (false, false) => "FAIL",
        };
        println!(
            "{:<16} {verdict:<13} checked {:>7}  violations {:>5}  max ratio {}",
            r.theorem_id.name(),
            r.checked_points,
            r.violations.len(),
            format_float(r.max_slack_ratio)
        );
        for v in r.violations.iter().take(10) {
            println!("    k = {}: {} > {}", v.k, format_float(v.lhs), format_float(v.rhs));
        }
    }
    let report = VerifyReport {
        problem: problem.name.clone(),
        solver,
        trace: trace_path,
        passed,
        reports,
    };
    let report_path = output_dir(&cfg, out).join("report.json");
    if let Err(e) = write_atomic(&report_path, json(&report).as_bytes()) {
        eprintln!("error: writing report: {e}");
        return EXIT_CONFIG;
    }
    if passed {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GChoice {
    /// `1/2 ||x||^2`
    Quadratic,
    /// `||x||^2`
    SquaredNorm,
    /// `sum_i (i + 1) x_i`
    Linear,
    /// `(s^2 + t^2)^2 + s^2 + t^2` on `[-1, 1]^2`
    Biquadratic,
}

#[derive(Debug, Serialize)]
pub struct FdCheckRow {
    pub s: f64,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
    pub ok: bool,
}

pub fn fd_check_rows(g: GChoice, x: &[f64], s_grid: &[f64]) -> dcfw::Result<Vec<FdCheckRow>> {
    let n = x.len();
    let func: Box<dyn SmoothFunction> = match g {
        GChoice::Quadratic => Box::new(ScaledSquaredDistance {
            scale: 0.5,
            center: vec![0.0; n],
        }),
        GChoice::SquaredNorm => Box::new(ScaledSquaredDistance {
            scale: 1.0,
            center: vec![0.0; n],
        }),
        GChoice::Linear => Box::new(SmoothFn::new(
            |x| x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum(),
            |x| (0..x.len()).map(|i| (i + 1) as f64).collect(),
            Some(0.0),
        )),
        GChoice::Biquadratic => {
            if n != 2 || x.iter().any(|v| v.abs() > 1.0) {
                return Err(dcfw::Error::InvalidInput(
                    "the biquadratic g takes a point in [-1, 1]^2".into(),
                ));
            }
            let p = make_star_convex_biquadratic(None)?;
            let l = p.lipschitz();
            let p2 = p.clone();
            Box::new(SmoothFn::new(move |y| p.g().value(y), move |y| p2.g().gradient(y), l))
        }
    };
    s_grid
        .iter()
        .map(|&s| {
            let c = certify_fd_error(func.as_ref(), x, s)?;
            Ok(FdCheckRow {
                s,
                measured: c.measured,
                bound: c.bound,
                ratio: c.ratio(),
                ok: c.ok,
            })
        })
        .collect()
}

pub fn cmd_fd_check(
    g: GChoice,
    x: Option<Vec<f64>>,
    dim: usize,
    s_grid: &[f64],
    seed: u64,
    out: Option<&Path>,
) -> i32 {
    let x = x.unwrap_or_else(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = if g == GChoice::Biquadratic { 2 } else { dim };
        (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
    });
    let rows = match fd_check_rows(g, &x, s_grid) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let fmt_x: Vec<String> = x.iter().map(|v| format_float(*v)).collect();
    println!("x = [{}]", fmt_x.join(", "));
    println!("{:>24} {:>24} {:>24} {:>24}", "s", "measured", "bound", "ratio");
    let mut csv = String::from("s,measured,bound,ratio,ok\n");
    for r in &rows {
        println!(
            "{:>24} {:>24} {:>24} {:>24}{}",
            format_float(r.s),
            format_float(r.measured),
            format_float(r.bound),
            format_float(r.ratio),
            if r.ok { "" } else { "  EXCEEDS BOUND" }
        );
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            format_float(r.s),
            format_float(r.measured),
            format_float(r.bound),
            format_float(r.ratio),
            r.ok
        ));
    }
    if let Some(dir) = out {
        if let Err(e) = write_atomic(&dir.join("fd_check.csv"), csv.as_bytes()) {
            eprintln!("error: writing table: {e}");
            return EXIT_CONFIG;
        }
    }
    if rows.iter().all(|r| r.ok) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

/// One line of the bench aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub id: String,
    pub problem: String,
    pub solver: String,
    pub status: String,
    pub ok: bool,
    pub iterations: Option<usize>,
    pub iterations_to_tol: Option<u64>,
    pub final_abs_omega: Option<f64>,
    pub f_gap: Option<f64>,
    pub counters: Option<EvalCounters>,
    pub error: String,
}

pub const BENCH_COLUMNS: [&str; 13] = [
    "cell_id",
    "problem",
    "solver",
    "status",
    "ok",
    "iterations",
    "iterations_to_tol",
    "final_abs_omega",
    "f_gap",
    "f_evals",
    "grad_evals",
    "lmo_calls",
    "error",
];

fn failed_cell(id: &str, error: String) -> CellResult {
    CellResult {
        id: id.to_string(),
        problem: String::new(),
        solver: String::new(),
        status: "failed".into(),
        ok: false,
        iterations: None,
        iterations_to_tol: None,
        final_abs_omega: None,
        f_gap: None,
        counters: None,
        error,
    }
}

fn run_cell(cell: &crate::config::SuiteCell, dir: &Path) -> CellResult {
    let c = match &cell.config {
        Ok(c) => c,
        Err(e) => return failed_cell(&cell.id, e.clone()),
    };
    let run = RunConfig {
        seed: cell.seed,
        problem: c.problem.clone(),
        solver: c.solver.clone(),
        output: Default::default(),
    };
    // Semantic errors are reported without line anchors; the suite was
    // already parsed.
    let resolved = match run.resolve("") {
        Ok(r) => r,
        Err(e) => return failed_cell(&cell.id, e.message),
    };
    let trace = match resolved.solver.solve(&resolved.problem) {
        Ok(t) => t,
        Err(e) => return failed_cell(&cell.id, e.to_string()),
    };
    let rows = trace.rows();
    let tol = resolved.solver.tol_omega();
    let path = dir.join(format!("{}.csv", cell.id));
    let write_error = write_atomic(&path, to_csv_string(&rows).as_bytes())
        .err()
        .map(|e| format!("writing trace: {e}"));
    let final_abs_omega = rows.iter().rev().find_map(|r| r.omega).map(f64::abs);
    CellResult {
        id: cell.id.clone(),
        problem: resolved.problem.name.clone(),
        solver: match trace.solver {
            SolverKind::Classic => "classic".into(),
            SolverKind::Fd => "fd".into(),
        },
        status: format!("{:?}", trace.status),
        ok: trace.status.is_success() && write_error.is_none(),
        iterations: Some(trace.iterations()),
        iterations_to_tol: rows.iter().find(|r| r.omega.is_some_and(|o| o.abs() <= tol)).map(|r| r.k),
        final_abs_omega,
        f_gap: resolved.problem.known_fstar().map(|fs| trace.final_f() - fs),
        counters: Some(trace.counters()),
        error: write_error.unwrap_or_default(),
    }
}

pub fn bench_csv(results: &[CellResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BENCH_COLUMNS).expect("writing to memory");
    let opt_f = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in results {
        w.write_record([
            r.id.clone(),
            r.problem.clone(),
            r.solver.clone(),
            r.status.clone(),
            r.ok.to_string(),
            opt(r.iterations.map(|i| i as u64)),
            opt(r.iterations_to_tol),
            opt_f(r.final_abs_omega),
            opt_f(r.f_gap),
            opt(r.counters.map(|c| c.f_evals)),
            opt(r.counters.map(|c| c.grad_evals)),
            opt(r.counters.map(|c| c.lmo_calls)),
            r.error.clone(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing memory")).expect("csv output is utf-8")
}

pub fn cmd_bench(config: &Path, out: Option<&Path>, jobs: Option<usize>, seed: Option<u64>) -> i32 {
    let source = match fs::read_to_string(config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: cannot read suite: {e}", config.display());
            return EXIT_CONFIG;
        }
    };
    let mut suite = match SuiteConfig::parse(&source) {
        Ok(s) => s,
        Err(mut e) => {
            e.path = Some(config.to_path_buf());
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(s) = seed {
        // Re-derive the per-cell seeds that were not pinned in the file.
        let pinned: Vec<Option<u64>> = suite
            .cells
            .iter()
            .map(|c| c.config.as_ref().ok().and_then(|c| c.seed))
            .collect();
        suite.seed = s;
        for (i, (cell, pin)) in suite.cells.iter_mut().zip(pinned).enumerate() {
            cell.seed = pin.unwrap_or_else(|| s.wrapping_add(i as u64));
        }
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = suite.cells.iter().find(|c| !seen.insert(c.id.clone())) {
        eprintln!("error: {}: duplicate cell id {:?}", config.display(), dup.id);
        return EXIT_CONFIG;
    }
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let cells_dir = dir.join("cells");
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_SOLVER_ERROR;
        }
    };
    let results: Vec<CellResult> = pool.install(|| suite.cells.par_iter().map(|c| run_cell(c, &cells_dir)).collect());
    let agg = dir.join("bench.csv");
    if let Err(e) = write_atomic(&agg, bench_csv(&results).as_bytes()) {
        eprintln!("error: writing aggregate: {e}");
        return EXIT_SOLVER_ERROR;
    }
    for r in &results {
        println!(
            "{:<24} {:<8} {:<20} {}",
            r.id,
            r.solver,
            r.status,
            if r.error.is_empty() { "" } else { &r.error }
        );
    }
    println!("{} cells, aggregate {}", results.len(), agg.display());
    if results.iter().all(|r| r.ok) {
        EXIT_OK
    } else {
        EXIT_SOLVER_ERROR
    }
}
