//! TOML run and suite configurations and their translation into problems and
//! solver settings. The grammar is documented in `docs/config.md`.

use std::fmt;
use std::path::PathBuf;

use dcfw::derivative_free::{DEFAULT_MAX_INNER_I, DEFAULT_MIN_INCREMENT_REL};
use dcfw::lmo::LinearMinimizationOracle;
use dcfw::problems::{
    make_convex_qp, make_fermat_weber, make_star_convex_biquadratic, make_weak_star_l1, FermatWeberInstance,
    WeakStarL1Instance,
};
use dcfw::{ClassicConfig, DCProblem, FdConfig, SetKind, SolverKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetConfig {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `[lo, hi]^dim`
    Cube { dim: usize, lo: f64, hi: f64 },
    Simplex { dim: usize, radius: f64 },
    L1Ball { dim: usize, radius: f64 },
    L2Ball { center: Vec<f64>, radius: f64 },
    FiniteHull { points: Vec<Vec<f64>> },
}

impl SetConfig {
    pub fn build(&self) -> dcfw::Result<LinearMinimizationOracle> {
        match self {
            SetConfig::Box { lower, upper } => LinearMinimizationOracle::boxed(lower.clone(), upper.clone()),
            SetConfig::Cube { dim, lo, hi } => LinearMinimizationOracle::cube(*dim, *lo, *hi),
            SetConfig::Simplex { dim, radius } => LinearMinimizationOracle::new(*dim, SetKind::Simplex { radius: *radius }),
            SetConfig::L1Ball { dim, radius } => LinearMinimizationOracle::new(*dim, SetKind::L1Ball { radius: *radius }),
            SetConfig::L2Ball { center, radius } => LinearMinimizationOracle::l2_ball(center.clone(), *radius),
            SetConfig::FiniteHull { points } => LinearMinimizationOracle::finite_hull(points.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// `alpha ||x||^2 - beta ||x||_1` over a box.
    WeakStarL1 { alpha: f64, beta: f64, set: SetConfig },
    /// `1/2 ||x - center||^2`.
    ConvexQp { center: Vec<f64>, set: SetConfig },
    /// `s^2 t^2 + s^2 + t^2`, by default over `[-1, 1]^2`.
    Biquadratic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        set: Option<SetConfig>,
    },
    /// Weighted squared distance to finite site sets.
    FermatWeber {
        sites: Vec<Vec<Vec<f64>>>,
        weights: Vec<f64>,
        set: SetConfig,
    },
}

impl ProblemConfig {
    pub fn build(&self) -> dcfw::Result<DCProblem> {
        match self {
            ProblemConfig::WeakStarL1 { alpha, beta, set } => make_weak_star_l1(&WeakStarL1Instance {
                alpha: *alpha,
                beta: *beta,
                feasible_set: set.build()?,
            }),
            ProblemConfig::ConvexQp { center, set } => make_convex_qp(center.clone(), set.build()?),
            ProblemConfig::Biquadratic { set } => make_star_convex_biquadratic(set.as_ref().map(SetConfig::build).transpose()?),
            ProblemConfig::FermatWeber { sites, weights, set } => make_fermat_weber(&FermatWeberInstance {
                site_sets: sites.clone(),
                weights: weights.clone(),
                feasible_set: set.build()?,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverConfig {
    Classic {
        l0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol_omega: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_iter: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_backtracks: Option<u32>,
    },
    Fd {
        l1: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x1: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol_omega: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_iter: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_backtracks_j: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_inner_i: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_step_norm: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_increment_rel: Option<f64>,
    },
}

impl SolverConfig {
    pub fn kind(&self) -> SolverKind {
        match self {
            SolverConfig::Classic { .. } => SolverKind::Classic,
            SolverConfig::Fd { .. } => SolverKind::Fd,
        }
    }

    pub fn l_init(&self) -> f64 {
        match self {
            SolverConfig::Classic { l0, .. } => *l0,
            SolverConfig::Fd { l1, .. } => *l1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

impl OutputConfig {
    fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds the random starting points used when `x0` / `x1` are omitted.
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemConfig,
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "OutputConfig::is_default")]
    pub output: OutputConfig,
}

/// A configuration error anchored to a line of the source document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = self.path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<config>".into());
        match self.line {
            Some(line) => write!(f, "{path}:{line}: {}", self.message),
            None => write!(f, "{path}: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

pub(crate) fn toml_error(source: &str, e: &toml::de::Error) -> ConfigError {
    ConfigError {
        path: None,
        line: e.span().map(|s| line_of(source, s.start)),
        message: e.message().trim().to_string(),
    }
}

/// Line of `key = ...` inside the table `[section]` (`""` for the root),
/// falling back to the section header.
pub(crate) fn find_key_line(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

impl RunConfig {
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        toml::from_str(source).map_err(|e| toml_error(source, &e))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs serialize to TOML")
    }

    /// Problem, solver settings and random starting points, with semantic
    /// errors anchored to the offending key in `source`.
    pub fn resolve(&self, source: &str) -> Result<Resolved, ConfigError> {
        let anchored = |section: &str, key: &str, message: String| ConfigError {
            path: None,
            line: find_key_line(source, section, key),
            message,
        };
        let problem = self
            .problem
            .build()
            .map_err(|e| anchored("problem", "kind", format!("problem: {e}")))?;
        let solver = resolve_solver(&self.solver, &problem, self.seed)
            .map_err(|(key, e)| anchored("solver", key, format!("solver.{key}: {e}")))?;
        Ok(Resolved { problem, solver })
    }
}

pub enum ResolvedSolver {
    Classic(ClassicConfig),
    Fd(FdConfig),
}

impl ResolvedSolver {
    pub fn tol_omega(&self) -> f64 {
        match self {
            ResolvedSolver::Classic(c) => c.tol_omega,
            ResolvedSolver::Fd(c) => c.tol_omega,
        }
    }

    pub fn l_init(&self) -> f64 {
        match self {
            ResolvedSolver::Classic(c) => c.l0,
            ResolvedSolver::Fd(c) => c.l1,
        }
    }

    pub fn solve(&self, problem: &DCProblem) -> dcfw::Result<dcfw::SolveTrace> {
        match self {
            ResolvedSolver::Classic(c) => dcfw::solve_classic(problem, c),
            ResolvedSolver::Fd(c) => dcfw::solve_fd(problem, c),
        }
    }
}

pub struct Resolved {
    pub problem: DCProblem,
    pub solver: ResolvedSolver,
}

fn check_point(problem: &DCProblem, x: &[f64]) -> dcfw::Result<()> {
    if x.len() != problem.dim() {
        return Err(dcfw::Error::DimensionMismatch {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    if !problem.feasible_set().contains(x, 1e-9) {
        return Err(dcfw::Error::Config(format!("{x:?} is not in the feasible set")));
    }
    Ok(())
}

type KeyedError = (&'static str, dcfw::Error);

fn resolve_solver(cfg: &SolverConfig, problem: &DCProblem, seed: u64) -> Result<ResolvedSolver, KeyedError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set = problem.feasible_set();
    let positive = |key: &'static str, v: f64| -> Result<(), KeyedError> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err((key, dcfw::Error::Config(format!("must be positive and finite, got {v}"))))
        }
    };
    let tol_ok = |tol: Option<f64>| -> Result<(), KeyedError> {
        match tol {
            Some(t) if !(t.is_finite() && t >= 0.0) => {
                Err(("tol_omega", dcfw::Error::Config(format!("must be finite and nonnegative, got {t}"))))
            }
            _ => Ok(()),
        }
    };
    match cfg {
        SolverConfig::Classic {
            l0,
            x0,
            tol_omega,
            max_iter,
            max_backtracks,
        } => {
            positive("l0", *l0)?;
            tol_ok(*tol_omega)?;
            let x0 = match x0 {
                Some(x) => {
                    check_point(problem, x).map_err(|e| ("x0", e))?;
                    x.clone()
                }
                None => set.sample(&mut rng),
            };
            let mut c = ClassicConfig::new(problem, x0, *l0);
            if let Some(t) = tol_omega {
                c.tol_omega = *t;
            }
            if let Some(m) = max_iter {
                c.max_iter = *m;
            }
            if let Some(m) = max_backtracks {
                c.max_backtracks = *m;
            }
            if c.max_backtracks == 0 {
                return Err(("max_backtracks", dcfw::Error::Config("must be positive".into())));
            }
            c.validate(problem).map_err(|e| ("kind", e))?;
            Ok(ResolvedSolver::Classic(c))
        }
        SolverConfig::Fd {
            l1,
            x0,
            x1,
            tol_omega,
            max_iter,
            max_backtracks_j,
            max_inner_i,
            min_step_norm,
            min_increment_rel,
        } => {
            positive("l1", *l1)?;
            tol_ok(*tol_omega)?;
            let x0 = match x0 {
                Some(x) => {
                    check_point(problem, x).map_err(|e| ("x0", e))?;
                    x.clone()
                }
                None => set.sample(&mut rng),
            };
            let x1 = match x1 {
                Some(x) => {
                    check_point(problem, x).map_err(|e| ("x1", e))?;
                    x.clone()
                }
                None => {
                    let y = set.sample(&mut rng);
                    x0.iter().zip(&y).map(|(a, b)| a + 0.1 * (b - a)).collect()
                }
            };
            if x0 == x1 {
                return Err(("x1", dcfw::Error::Config("x0 and x1 must differ".into())));
            }
            let mut c = FdConfig::new(problem, x0, x1, *l1);
            if let Some(t) = tol_omega {
                c.tol_omega = *t;
            }
            if let Some(m) = max_iter {
                c.max_iter = *m;
            }
            c.max_backtracks_j = max_backtracks_j.unwrap_or(c.max_backtracks_j);
            c.max_inner_i = max_inner_i.unwrap_or(DEFAULT_MAX_INNER_I);
            if let Some(m) = min_step_norm {
                c.min_step_norm = *m;
            }
            c.min_increment_rel = min_increment_rel.unwrap_or(DEFAULT_MIN_INCREMENT_REL);
            if c.max_backtracks_j == 0 {
                return Err(("max_backtracks_j", dcfw::Error::Config("must be positive".into())));
            }
            if c.max_inner_i == 0 {
                return Err(("max_inner_i", dcfw::Error::Config("must be positive".into())));
            }
            if !(c.min_step_norm >= 0.0) {
                return Err(("min_step_norm", dcfw::Error::Config("must be nonnegative".into())));
            }
            if !(c.min_increment_rel >= 0.0 && c.min_increment_rel.is_finite()) {
                return Err(("min_increment_rel", dcfw::Error::Config("must be finite and nonnegative".into())));
            }
            c.validate(problem).map_err(|e| ("kind", e))?;
            Ok(ResolvedSolver::Fd(c))
        }
    }
}

/// One cell of a benchmark suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub problem: ProblemConfig,
    pub solver: SolverConfig,
}

/// A suite is parsed cell by cell so one malformed cell does not hide the
/// others.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub cells: Vec<SuiteCell>,
}

#[derive(Debug, Clone)]
pub struct SuiteCell {
    pub id: String,
    pub seed: u64,
    pub config: Result<CellConfig, String>,
}

impl SuiteConfig {
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(source).map_err(|e| toml_error(source, &e))?;
        let fail = |message: String| ConfigError {
            path: None,
            line: None,
            message,
        };
        for key in table.keys() {
            if key != "seed" && key != "cell" {
                return Err(ConfigError {
                    path: None,
                    line: find_key_line(source, "", key),
                    message: format!("unknown top-level key `{key}`, expected `seed` or `cell`"),
                });
            }
        }
        let seed = match table.get("seed") {
            None => 0,
            Some(toml::Value::Integer(s)) if *s >= 0 => *s as u64,
            Some(v) => return Err(fail(format!("seed must be a nonnegative integer, got {v}"))),
        };
        let raw_cells = match table.get("cell") {
            None => Vec::new(),
            Some(toml::Value::Array(a)) => a.clone(),
            Some(_) => return Err(fail("`cell` must be an array of tables ([[cell]])".into())),
        };
        let cells = raw_cells
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                // Read id and seed from the raw table so a malformed cell keeps them.
                let id = v
                    .get("id")
                    .and_then(toml::Value::as_str)
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("cell-{i}"));
                let pinned = v.get("seed").and_then(toml::Value::as_integer).map(|s| s as u64);
                let parsed: Result<CellConfig, String> = v.try_into().map_err(|e: toml::de::Error| e.message().to_string());
                let cell_seed = pinned.unwrap_or_else(|| seed.wrapping_add(i as u64));
                SuiteCell {
                    id,
                    seed: cell_seed,
                    config: parsed,
                }
            })
            .collect();
        Ok(SuiteConfig { seed, cells })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const L1_RUN: &str = r#"
seed = 7

[problem]
kind = "weak_star_l1"
alpha = 0.5
beta = 1.0
set = { kind = "cube", dim = 2, lo = -2.0, hi = 2.0 }

[solver]
kind = "classic"
l0 = 1.0
x0 = [2.0, 0.5]
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::parse(L1_RUN).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.solver.kind(), SolverKind::Classic);
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn missing_field_is_named_with_a_line() {
        let src = L1_RUN.replace("l0 = 1.0\n", "");
        let e = RunConfig::parse(&src).unwrap_err();
        assert!(e.message.contains("l0"), "{e}");
        assert!(e.line.is_some(), "{e}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let src = L1_RUN.replace("l0 = 1.0", "l0 = 1.0\nlO = 2.0");
        let e = RunConfig::parse(&src).unwrap_err();
        assert!(e.message.contains("lO"), "{e}");
    }

    #[test]
    fn semantic_errors_point_at_the_key() {
        let src = L1_RUN.replace("x0 = [2.0, 0.5]", "x0 = [3.0, 0.5]");
        let cfg = RunConfig::parse(&src).unwrap();
        let e = cfg.resolve(&src).err().unwrap();
        assert_eq!(e.line, Some(13), "{e}");
        assert!(e.message.starts_with("solver.x0"), "{e}");
    }

    #[test]
    fn random_starts_follow_the_seed() {
        let src = L1_RUN.replace("x0 = [2.0, 0.5]\n", "");
        let cfg = RunConfig::parse(&src).unwrap();
        let x = |c: &RunConfig| match c.resolve(&src).ok().unwrap().solver {
            ResolvedSolver::Classic(c) => c.x0,
            ResolvedSolver::Fd(_) => unreachable!(),
        };
        assert_eq!(x(&cfg), x(&cfg));
        let mut other = cfg.clone();
        other.seed = 8;
        assert_ne!(x(&cfg), x(&other));
    }

    #[test]
    fn suite_keeps_bad_cells() {
        let src = r#"
seed = 3
[[cell]]
id = "qp"
problem = { kind = "convex_qp", center = [0.25, 0.75], set = { kind = "cube", dim = 2, lo = 0.0, hi = 1.0 } }
solver = { kind = "fd", l1 = 1.0 }

[[cell]]
problem = { kind = "convex_qp", center = [0.25, 0.75], set = { kind = "cube", dim = 2, lo = 0.0, hi = 1.0 } }
solver = { kind = "classic" }
"#;
        let s = SuiteConfig::parse(src).unwrap();
        assert_eq!(s.cells.len(), 2);
        assert_eq!(s.cells[0].id, "qp");
        assert_eq!(s.cells[0].seed, 3);
        assert_eq!(s.cells[1].id, "cell-1");
        assert_eq!(s.cells[1].seed, 4);
        assert!(s.cells[1].config.as_ref().unwrap_err().contains("l0"));
    }

    #[test]
    fn key_lines() {
        let src = "a = 1\n[solver]\nkind = \"fd\"\nl1 = 2\n[problem]\nl1 = 3\n";
        assert_eq!(find_key_line(src, "solver", "l1"), Some(4));
        assert_eq!(find_key_line(src, "solver", "x0"), Some(2));
        assert_eq!(find_key_line(src, "", "a"), Some(1));
    }

    fn any_set() -> impl Strategy<Value = SetConfig> {
        prop_oneof![
            (1usize..4, -5.0f64..0.0, 0.5f64..5.0).prop_map(|(dim, lo, hi)| SetConfig::Cube { dim, lo, hi }),
            prop::collection::vec(-3.0f64..3.0, 2).prop_map(|lower| SetConfig::Box {
                upper: lower.iter().map(|v| v + 1.0).collect(),
                lower,
            }),
            (1usize..4, 0.1f64..3.0).prop_map(|(dim, radius)| SetConfig::Simplex { dim, radius }),
            (prop::collection::vec(-1.0f64..1.0, 3), 0.1f64..2.0)
                .prop_map(|(center, radius)| SetConfig::L2Ball { center, radius }),
        ]
    }

    fn any_solver() -> impl Strategy<Value = SolverConfig> {
        let opt_x = prop::option::of(prop::collection::vec(-1.0f64..1.0, 2));
        prop_oneof![
            (0.01f64..100.0, opt_x.clone(), prop::option::of(0.0f64..1.0), prop::option::of(0u64..100_000)).prop_map(
                |(l0, x0, tol_omega, max_iter)| SolverConfig::Classic {
                    l0,
                    x0,
                    tol_omega,
                    max_iter,
                    max_backtracks: None,
                }
            ),
            (0.01f64..100.0, opt_x.clone(), opt_x, prop::option::of(1u32..50)).prop_map(|(l1, x0, x1, max_inner_i)| {
                SolverConfig::Fd {
                    l1,
                    x0,
                    x1,
                    tol_omega: None,
                    max_iter: Some(10),
                    max_backtracks_j: None,
                    max_inner_i,
                    min_step_norm: None,
                    min_increment_rel: Some(1e-8),
                }
            }),
        ]
    }

    proptest! {
        #[test]
        fn toml_round_trip_is_identity(
            seed in any::<u64>(),
            set in any_set(),
            center in prop::collection::vec(-2.0f64..2.0, 2),
            solver in any_solver(),
            dir in prop::option::of("[a-z]{1,8}"),
        ) {
            let cfg = RunConfig {
                seed: seed >> 1,
                problem: ProblemConfig::ConvexQp { center, set },
                solver,
                output: OutputConfig { dir: dir.map(PathBuf::from), trace: None, summary: None },
            };
            let text = cfg.to_toml();
            let back = RunConfig::parse(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_toml(), text);
        }
    }
}
