//! Iteration records, solve traces and their stable CSV form.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::EvalCounters;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Classic,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// `|omega| <= tol_omega`.
    Converged,
    /// `omega == 0` exactly with `tol_omega == 0`.
    StationaryExact,
    /// Every probed finite-difference gap stayed above `-tol_omega`.
    StationaryDeclared,
    MaxIterations,
    BacktrackCapExceeded,
    /// `||x^k - x^{k-1}||` fell below the configured floor, or a trial step
    /// no longer changed the iterate in floating point.
    StalledIterates,
}

impl Status {
    pub fn is_success(self) -> bool {
        matches!(self, Status::Converged | Status::StationaryExact | Status::StationaryDeclared)
    }

    pub fn is_error(self) -> bool {
        matches!(self, Status::BacktrackCapExceeded | Status::StalledIterates)
    }
}

/// Extra state recorded by the finite-difference solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdState {
    pub i_k: u32,
    pub s_k: f64,
    /// `f(x^k) + (L_1/2) ||x^k - x^{k-1}||^2`
    pub lyapunov: f64,
}

/// One accepted iteration: the state at `x^k` and the step taken from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: u64,
    pub x: Vec<f64>,
    pub f_val: f64,
    pub omega: f64,
    pub lambda: f64,
    pub l_k: f64,
    pub j_k: u32,
    pub p: Vec<f64>,
    pub u: Vec<f64>,
    /// `||x^k - x^{k-1}||`, absent at the classic starting point.
    pub step_norm_prev: Option<f64>,
    pub fd: Option<FdState>,
    pub counters: EvalCounters,
}

/// State at the iterate where the solve stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalState {
    pub k: u64,
    pub x: Vec<f64>,
    pub f_val: f64,
    /// Gap at the final iterate, when the stopping rule computed one.
    pub omega: Option<f64>,
    pub l_k: f64,
    /// Backtracking index reached when the final iteration stopped inside
    /// its backtracking loop; every trial up to it was rejected.
    pub j_k: Option<u32>,
    pub step_norm_prev: Option<f64>,
    pub lyapunov: Option<f64>,
    pub counters: EvalCounters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub solver: SolverKind,
    pub dim: usize,
    /// `L_0` for the classic solver, `L_1` for the finite-difference solver.
    pub l_init: f64,
    pub records: Vec<IterationRecord>,
    pub status: Status,
    pub terminal: TerminalState,
    /// Whether `terminal` is emitted as a trace row (false when nothing past
    /// the starting point was evaluated).
    pub terminal_row: bool,
}

impl SolveTrace {
    pub fn final_x(&self) -> &[f64] {
        &self.terminal.x
    }

    pub fn final_f(&self) -> f64 {
        self.terminal.f_val
    }

    pub fn counters(&self) -> EvalCounters {
        self.terminal.counters
    }

    /// Number of accepted steps.
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Flat per-iterate view: every record, then the terminal iterate.
    pub fn rows(&self) -> Vec<TraceRow> {
        let mut rows: Vec<TraceRow> = self
            .records
            .iter()
            .map(|r| TraceRow {
                k: r.k,
                f: r.f_val,
                omega: Some(r.omega),
                lambda: Some(r.lambda),
                l_k: r.l_k,
                j_k: Some(r.j_k),
                i_k: r.fd.map(|s| s.i_k),
                s_k: r.fd.map(|s| s.s_k),
                step_norm_prev: r.step_norm_prev,
                lyapunov: r.fd.map(|s| s.lyapunov),
                counters: r.counters,
            })
            .collect();
        if self.terminal_row {
            let t = &self.terminal;
            rows.push(TraceRow {
                k: t.k,
                f: t.f_val,
                omega: t.omega,
                lambda: None,
                l_k: t.l_k,
                j_k: t.j_k,
                i_k: None,
                s_k: None,
                step_norm_prev: t.step_norm_prev,
                lyapunov: t.lyapunov,
                counters: t.counters,
            });
        }
        rows
    }
}

/// One CSV row. Columns that do not apply are empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    pub f: f64,
    pub omega: Option<f64>,
    pub lambda: Option<f64>,
    pub l_k: f64,
    pub j_k: Option<u32>,
    pub i_k: Option<u32>,
    pub s_k: Option<f64>,
    pub step_norm_prev: Option<f64>,
    pub lyapunov: Option<f64>,
    pub counters: EvalCounters,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "k",
    "f",
    "omega",
    "lambda",
    "L_k",
    "j_k",
    "i_k",
    "s_k",
    "step_norm_prev",
    "lyapunov",
    "f_evals_cum",
    "grad_evals_cum",
    "subgrad_evals_cum",
    "lmo_calls_cum",
];

/// 17 significant digits; parses back to the identical binary64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn opt_int(v: Option<u32>) -> String {
    v.map(|i| i.to_string()).unwrap_or_default()
}

pub fn write_csv<W: io::Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::InvalidInput(format!("writing trace: {e}"));
    w.write_record(CSV_COLUMNS).map_err(io_err)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            format_float(r.f),
            opt_float(r.omega),
            opt_float(r.lambda),
            format_float(r.l_k),
            opt_int(r.j_k),
            opt_int(r.i_k),
            opt_float(r.s_k),
            opt_float(r.step_norm_prev),
            opt_float(r.lyapunov),
            r.counters.f_evals.to_string(),
            r.counters.grad_evals.to_string(),
            r.counters.subgrad_evals.to_string(),
            r.counters.lmo_calls.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("writing trace: {e}")))?;
    Ok(())
}

pub fn to_csv_string(rows: &[TraceRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| Error::InvalidInput(format!("reading trace header: {e}")))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != CSV_COLUMNS {
        return Err(Error::InvalidInput(format!(
            "unexpected trace columns {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidInput(format!("trace row {}: {e}", line + 1)))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |i: usize| Error::InvalidInput(format!("trace row {}: bad {} value {:?}", line + 1, CSV_COLUMNS[i], field(i)));
        let float = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        let opt_f = |i: usize| -> Result<Option<f64>> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                float(i).map(Some)
            }
        };
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
        let opt_i = |i: usize| -> Result<Option<u32>> {
            if field(i).is_empty() {
                Ok(None)
            } else {
                field(i).parse::<u32>().map(Some).map_err(|_| bad(i))
            }
        };
        rows.push(TraceRow {
            k: int(0)?,
            f: float(1)?,
            omega: opt_f(2)?,
            lambda: opt_f(3)?,
            l_k: float(4)?,
            j_k: opt_i(5)?,
            i_k: opt_i(6)?,
            s_k: opt_f(7)?,
            step_norm_prev: opt_f(8)?,
            lyapunov: opt_f(9)?,
            counters: EvalCounters {
                f_evals: int(10)?,
                grad_evals: int(11)?,
                subgrad_evals: int(12)?,
                lmo_calls: int(13)?,
                fd_calls: 0,
            },
        });
    }
    Ok(rows)
}
