//! Frank-Wolfe methods for difference-of-convex objectives `f = g - h` over
//! compact convex sets, with a derivative-free variant and trace auditing
//! against the known convergence rates.

pub mod classic;
pub mod derivative_free;
pub mod error;
pub mod fd;
pub mod linalg;
pub mod lmo;
pub mod problem;
pub mod problems;
pub mod trace;
pub mod verify;

pub use classic::{solve_classic, ClassicConfig};
pub use derivative_free::{solve_fd, FdConfig};
pub use error::{Error, Result};
pub use lmo::{LinearMinimizationOracle, SetKind};
pub use problem::{ConvexFunction, DCProblem, EvalCounters, SmoothFunction};
pub use trace::{SolveTrace, SolverKind, Status, TraceRow};
pub use verify::{audit_rows, audit_trace, BoundReport, RateConstants, TheoremId};
