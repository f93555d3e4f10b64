//! Concrete DC instances with exact oracles and certified constants.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm_sq};
use crate::lmo::{sign, LinearMinimizationOracle, SetKind};
use crate::problem::{ConvexFunction, DCProblem, SmoothFunction};

/// `scale * ||x - center||^2`.
#[derive(Debug, Clone)]
pub struct ScaledSquaredDistance {
    pub scale: f64,
    pub center: Vec<f64>,
}

impl SmoothFunction for ScaledSquaredDistance {
    fn value(&self, x: &[f64]) -> f64 {
        self.scale
            * x.iter()
                .zip(&self.center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .map(|(a, b)| 2.0 * self.scale * (a - b))
            .collect()
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(2.0 * self.scale)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Zero {
    pub dim: usize,
}

impl ConvexFunction for Zero {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn subgradient(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim]
    }
}

/// `beta * ||x||_1` with subgradient `beta * sign(x)`, `sign(0) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledL1Norm {
    pub beta: f64,
}

impl ConvexFunction for ScaledL1Norm {
    fn value(&self, x: &[f64]) -> f64 {
        self.beta * x.iter().map(|v| v.abs()).sum::<f64>()
    }
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| self.beta * sign(*v)).collect()
    }
}

/// `sum_i w_i max_{y in Y_i} (2 x·y - ||y||^2)`.
#[derive(Debug, Clone)]
pub struct WeightedMaxAffine {
    site_sets: Vec<Vec<Vec<f64>>>,
    weights: Vec<f64>,
    dim: usize,
}

impl WeightedMaxAffine {
    /// Index of the maximizing site in each set, smallest index on ties.
    fn argmax_sites(&self, x: &[f64]) -> Vec<usize> {
        self.site_sets
            .iter()
            .map(|sites| {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (k, y) in sites.iter().enumerate() {
                    let v = 2.0 * dot(x, y) - norm_sq(y);
                    if v > best_val {
                        best = k;
                        best_val = v;
                    }
                }
                best
            })
            .collect()
    }
}

impl ConvexFunction for WeightedMaxAffine {
    fn value(&self, x: &[f64]) -> f64 {
        self.site_sets
            .iter()
            .zip(&self.weights)
            .map(|(sites, w)| {
                w * sites
                    .iter()
                    .map(|y| 2.0 * dot(x, y) - norm_sq(y))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum()
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.dim];
        for ((sites, w), k) in self.site_sets.iter().zip(&self.weights).zip(self.argmax_sites(x)) {
            for (ui, yi) in u.iter_mut().zip(&sites[k]) {
                *ui += 2.0 * w * yi;
            }
        }
        u
    }
}

/// `g(s, t) = (s^2 + t^2)^2 + s^2 + t^2` with a Lipschitz constant valid on a box.
#[derive(Debug, Clone, Copy)]
pub struct BiquadraticSmooth {
    lipschitz: f64,
}

impl SmoothFunction for BiquadraticSmooth {
    fn value(&self, x: &[f64]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        r2 * r2 + r2
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        vec![4.0 * r2 * x[0] + 2.0 * x[0], 4.0 * r2 * x[1] + 2.0 * x[1]]
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// `h(s, t) = s^2 t^2 + s^4 + t^4`.
#[derive(Debug, Clone, Copy)]
pub struct BiquadraticConvex;

impl ConvexFunction for BiquadraticConvex {
    fn value(&self, x: &[f64]) -> f64 {
        let (s2, t2) = (x[0] * x[0], x[1] * x[1]);
        s2 * t2 + s2 * s2 + t2 * t2
    }
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let (s, t) = (x[0], x[1]);
        vec![2.0 * s * t * t + 4.0 * s * s * s, 2.0 * s * s * t + 4.0 * t * t * t]
    }
}

#[derive(Debug, Clone)]
pub struct FermatWeberInstance {
    /// Finite site sets `Y_i`.
    pub site_sets: Vec<Vec<Vec<f64>>>,
    /// Nonnegative weights summing to one.
    pub weights: Vec<f64>,
    pub feasible_set: LinearMinimizationOracle,
}

#[derive(Debug, Clone)]
pub struct WeakStarL1Instance {
    pub alpha: f64,
    pub beta: f64,
    /// Must be a box containing every `±beta/(2 alpha)` pattern in its interior.
    pub feasible_set: LinearMinimizationOracle,
}

/// Largest site selection product enumerated when computing `f*`.
const MAX_SELECTIONS: usize = 1_000_000;

/// Weighted squared distance to finite site sets,
/// `f(x) = sum_i w_i min_{y in Y_i} ||x - y||^2 = ||x||^2 - h(x)`.
pub fn make_fermat_weber(instance: &FermatWeberInstance) -> Result<DCProblem> {
    let dim = instance.feasible_set.dim();
    if instance.site_sets.is_empty() {
        return Err(Error::InvalidInput("Fermat-Weber instance needs at least one site set".into()));
    }
    if instance.site_sets.len() != instance.weights.len() {
        return Err(Error::InvalidInput(format!(
            "{} site sets but {} weights",
            instance.site_sets.len(),
            instance.weights.len()
        )));
    }
    for (i, sites) in instance.site_sets.iter().enumerate() {
        if sites.is_empty() {
            return Err(Error::InvalidInput(format!("site set {i} is empty")));
        }
        for y in sites {
            check_dim(dim, y.len())?;
        }
    }
    if instance.weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidInput("weights must be nonnegative".into()));
    }
    let total: f64 = instance.weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("weights must sum to 1, got {total}")));
    }

    let h = WeightedMaxAffine {
        site_sets: instance.site_sets.clone(),
        weights: instance.weights.clone(),
        dim,
    };
    let g = ScaledSquaredDistance {
        scale: 1.0,
        center: vec![0.0; dim],
    };
    let mut problem = DCProblem::new(
        "fermat-weber",
        Arc::new(g),
        Arc::new(h),
        instance.feasible_set.clone(),
    );
    if let Some((fstar, minimizers)) = fermat_weber_optimum(instance) {
        problem = problem.with_fstar(fstar).with_minimizers(minimizers);
    }
    Ok(problem)
}

/// For a fixed choice of one site `y_i` per set the objective is
/// `sum_i w_i ||x - y_i||^2 = ||x - ybar||^2 + sum_i w_i ||y_i||^2 - ||ybar||^2`
/// with `ybar = sum_i w_i y_i`, minimized over C at `proj_C(ybar)`. The
/// objective is the pointwise min over choices, so `f*` is the min over
/// choices of those values.
fn fermat_weber_optimum(instance: &FermatWeberInstance) -> Option<(f64, Vec<Vec<f64>>)> {
    let set = &instance.feasible_set;
    let dim = set.dim();
    let count = instance
        .site_sets
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.len()).filter(|c| *c <= MAX_SELECTIONS))?;
    set.project(&vec![0.0; dim])?;

    let mut best = f64::INFINITY;
    let mut minimizers: Vec<Vec<f64>> = Vec::new();
    let mut choice = vec![0usize; instance.site_sets.len()];
    for _ in 0..count {
        let mut ybar = vec![0.0; dim];
        let mut spread = 0.0;
        for ((sites, w), k) in instance.site_sets.iter().zip(&instance.weights).zip(&choice) {
            let y = &sites[*k];
            for (b, yi) in ybar.iter_mut().zip(y) {
                *b += w * yi;
            }
            spread += w * norm_sq(y);
        }
        let x = set.project(&ybar)?;
        // Evaluate the true objective at the candidate so the value is exact
        // for the minimizer, not just for this site choice.
        let value = instance
            .site_sets
            .iter()
            .zip(&instance.weights)
            .map(|(sites, w)| {
                w * sites
                    .iter()
                    .map(|y| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>();
        debug_assert!(value <= norm_sq(&x) - 2.0 * dot(&x, &ybar) + spread + 1e-9);
        if value < best - 1e-12 {
            best = value;
            minimizers.clear();
            minimizers.push(x);
        } else if (value - best).abs() <= 1e-12 && !minimizers.iter().any(|m| m == &x) {
            minimizers.push(x);
            best = best.min(value);
        }
        for (c, sites) in choice.iter_mut().zip(&instance.site_sets) {
            *c += 1;
            if *c < sites.len() {
                break;
            }
            *c = 0;
        }
    }
    Some((best, minimizers))
}

/// `f(x) = alpha ||x||^2 - beta ||x||_1` over a box.
///
/// Each coordinate of `alpha t^2 - beta |t|` is minimized at
/// `|t| = beta / (2 alpha)` with value `-beta^2 / (4 alpha)`, so
/// `f* = -n beta^2 / (4 alpha)` attained at all `2^n` sign patterns.
pub fn make_weak_star_l1(instance: &WeakStarL1Instance) -> Result<DCProblem> {
    let WeakStarL1Instance { alpha, beta, feasible_set } = instance;
    if !(alpha.is_finite() && *alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    if !(beta.is_finite() && *beta >= 0.0) {
        return Err(Error::InvalidInput(format!("beta must be nonnegative, got {beta}")));
    }
    let SetKind::Box { lower, upper } = feasible_set.kind() else {
        return Err(Error::InvalidInput("the l1 instance needs a box feasible set".into()));
    };
    let t = beta / (2.0 * alpha);
    for (i, (lo, hi)) in lower.iter().zip(upper).enumerate() {
        if !(*lo < -t && t < *hi) {
            return Err(Error::InvalidInput(format!(
                "minimizer coordinate ±{t} is not inside [{lo}, {hi}] on axis {i}"
            )));
        }
    }
    let n = feasible_set.dim();
    let fstar = -(n as f64) * beta * beta / (4.0 * alpha);
    let mut problem = DCProblem::new(
        "weak-star-l1",
        Arc::new(ScaledSquaredDistance {
            scale: *alpha,
            center: vec![0.0; n],
        }),
        Arc::new(ScaledL1Norm { beta: *beta }),
        feasible_set.clone(),
    )
    .with_fstar(fstar);
    if *beta == 0.0 {
        problem = problem.with_minimizers(vec![vec![0.0; n]]);
    } else if n <= 16 {
        let patterns = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { -t } else { t })
                    .collect()
            })
            .collect();
        problem = problem.with_minimizers(patterns);
    }
    Ok(problem)
}

/// The star-convex `s^2 t^2 + s^2 + t^2` split as
/// `g = (s^2 + t^2)^2 + s^2 + t^2`, `h = s^2 t^2 + s^4 + t^4`, over a 2-D box.
///
/// Hessian of g is `(4 r^2 + 2) I + 8 x x^T` with spectral norm `12 r^2 + 2`,
/// so on a box the gradient Lipschitz constant is `12 max r^2 + 2`, the max
/// attained at a corner. `f >= 0` with equality only at the origin.
pub fn make_star_convex_biquadratic(feasible_set: Option<LinearMinimizationOracle>) -> Result<DCProblem> {
    let set = match feasible_set {
        Some(set) => set,
        None => LinearMinimizationOracle::cube(2, -1.0, 1.0)?,
    };
    let SetKind::Box { lower, upper } = set.kind() else {
        return Err(Error::InvalidInput("the biquadratic instance needs a box feasible set".into()));
    };
    check_dim(2, set.dim())?;
    let max_r2: f64 = lower
        .iter()
        .zip(upper)
        .map(|(lo, hi)| (lo * lo).max(hi * hi))
        .sum();
    let origin_inside = set.contains(&[0.0, 0.0], 0.0);
    let mut problem = DCProblem::new(
        "biquadratic",
        Arc::new(BiquadraticSmooth {
            lipschitz: 12.0 * max_r2 + 2.0,
        }),
        Arc::new(BiquadraticConvex),
        set,
    );
    if origin_inside {
        problem = problem.with_fstar(0.0).with_minimizers(vec![vec![0.0, 0.0]]);
    }
    Ok(problem)
}

/// Convex baseline `1/2 ||x - center||^2`, `h = 0`. `f*` and the minimizer
/// come from the closed-form projection of `center` when the set has one.
pub fn make_convex_qp(center: Vec<f64>, feasible_set: LinearMinimizationOracle) -> Result<DCProblem> {
    let n = feasible_set.dim();
    check_dim(n, center.len())?;
    let projection = feasible_set.project(&center);
    let mut problem = DCProblem::new(
        "convex-qp",
        Arc::new(ScaledSquaredDistance {
            scale: 0.5,
            center: center.clone(),
        }),
        Arc::new(Zero { dim: n }),
        feasible_set,
    );
    if let Some(p) = projection {
        let fstar = 0.5
            * p.iter()
                .zip(&center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        problem = problem.with_fstar(fstar).with_minimizers(vec![p]);
    }
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::finite_difference;
    use crate::linalg::{dist, norm, sub};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn suite() -> Vec<DCProblem> {
        vec![
            make_convex_qp(vec![0.25, 0.75], LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap()).unwrap(),
            make_convex_qp(vec![2.0, 2.0, -1.0], LinearMinimizationOracle::l2_ball(vec![0.0; 3], 1.0).unwrap()).unwrap(),
            make_weak_star_l1(&WeakStarL1Instance {
                alpha: 0.5,
                beta: 1.0,
                feasible_set: LinearMinimizationOracle::cube(2, -2.0, 2.0).unwrap(),
            })
            .unwrap(),
            make_fermat_weber(&FermatWeberInstance {
                site_sets: vec![
                    vec![vec![0.0, 0.0], vec![1.5, 1.0]],
                    vec![vec![2.0, 0.0], vec![-1.0, 1.0], vec![0.5, -0.5]],
                ],
                weights: vec![0.3, 0.7],
                feasible_set: LinearMinimizationOracle::cube(2, -1.0, 2.0).unwrap(),
            })
            .unwrap(),
            make_star_convex_biquadratic(None).unwrap(),
        ]
    }

    #[test]
    fn fermat_weber_examples() {
        let single = make_fermat_weber(&FermatWeberInstance {
            site_sets: vec![vec![vec![1.0, 1.0]]],
            weights: vec![1.0],
            feasible_set: LinearMinimizationOracle::cube(2, 0.0, 2.0).unwrap(),
        })
        .unwrap();
        assert_eq!(single.known_fstar(), Some(0.0));
        assert_eq!(single.known_minimizers().unwrap(), &[vec![1.0, 1.0]]);
        let x = [0.3, 1.7];
        assert!((single.objective(&x) - (0.49 + 0.49)).abs() < 1e-12);

        let origin = make_fermat_weber(&FermatWeberInstance {
            site_sets: vec![vec![vec![0.0, 0.0]]],
            weights: vec![1.0],
            feasible_set: LinearMinimizationOracle::cube(2, -1.0, 1.0).unwrap(),
        })
        .unwrap();
        assert_eq!(origin.known_fstar(), Some(0.0));
        assert!((origin.objective(&[0.5, -0.5]) - 0.5).abs() < 1e-15);

        let pair = make_fermat_weber(&FermatWeberInstance {
            site_sets: vec![vec![vec![0.0, 0.0]], vec![vec![2.0, 0.0]]],
            weights: vec![0.5, 0.5],
            feasible_set: LinearMinimizationOracle::cube(2, 0.0, 2.0).unwrap(),
        })
        .unwrap();
        // 1/2 ||x||^2 + 1/2 ||x - (2,0)||^2 = ||x - (1,0)||^2 + 1
        assert_eq!(pair.known_fstar(), Some(1.0));
        assert_eq!(pair.known_minimizers().unwrap(), &[vec![1.0, 0.0]]);
        assert!((pair.objective(&[0.2, 0.4]) - (0.64 + 0.16 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn fermat_weber_rejects_empty_sets() {
        let err = make_fermat_weber(&FermatWeberInstance {
            site_sets: vec![vec![]],
            weights: vec![1.0],
            feasible_set: LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap(),
        });
        assert!(err.is_err());
        let err = make_fermat_weber(&FermatWeberInstance {
            site_sets: vec![vec![vec![0.0, 0.0]], vec![vec![1.0, 0.0]]],
            weights: vec![0.5, 0.6],
            feasible_set: LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap(),
        });
        assert!(err.is_err());
    }

    #[test]
    fn weak_star_examples() {
        let p = make_weak_star_l1(&WeakStarL1Instance {
            alpha: 0.5,
            beta: 1.0,
            feasible_set: LinearMinimizationOracle::cube(2, -2.0, 2.0).unwrap(),
        })
        .unwrap();
        assert_eq!(p.known_fstar(), Some(-1.0));
        assert_eq!(p.lipschitz(), Some(1.0));
        let mins = p.known_minimizers().unwrap();
        assert_eq!(mins.len(), 4);
        for expect in [[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]] {
            assert!(mins.iter().any(|m| m.as_slice() == expect));
            assert_eq!(p.objective(&expect), -1.0);
        }

        let one = make_weak_star_l1(&WeakStarL1Instance {
            alpha: 1.0,
            beta: 2.0,
            feasible_set: LinearMinimizationOracle::cube(1, -3.0, 3.0).unwrap(),
        })
        .unwrap();
        assert_eq!(one.known_fstar(), Some(-1.0));
        assert_eq!(one.objective(&[1.0]), -1.0);
        assert_eq!(one.objective(&[-1.0]), -1.0);

        let convex = make_weak_star_l1(&WeakStarL1Instance {
            alpha: 1.0,
            beta: 0.0,
            feasible_set: LinearMinimizationOracle::cube(2, -1.0, 1.0).unwrap(),
        })
        .unwrap();
        assert_eq!(convex.known_fstar(), Some(0.0));
        assert_eq!(convex.known_minimizers().unwrap(), &[vec![0.0, 0.0]]);
    }

    #[test]
    fn weak_star_rejects_minimizers_outside_box() {
        let err = make_weak_star_l1(&WeakStarL1Instance {
            alpha: 0.5,
            beta: 1.0,
            feasible_set: LinearMinimizationOracle::cube(2, -0.5, 2.0).unwrap(),
        });
        assert!(err.is_err());
        let err = make_weak_star_l1(&WeakStarL1Instance {
            alpha: 0.5,
            beta: 1.0,
            feasible_set: LinearMinimizationOracle::l2_ball(vec![0.0, 0.0], 3.0).unwrap(),
        });
        assert!(err.is_err());
    }

    #[test]
    fn biquadratic_examples() {
        let p = make_star_convex_biquadratic(None).unwrap();
        assert_eq!(p.objective(&[0.0, 0.0]), 0.0);
        assert_eq!(p.known_fstar(), Some(0.0));
        assert_eq!(p.g().value(&[1.0, 1.0]), 6.0);
        assert_eq!(p.h().value(&[1.0, 1.0]), 3.0);
        assert_eq!(p.objective(&[1.0, 1.0]), 3.0);
        assert_eq!(p.g().gradient(&[1.0, 0.0]), vec![6.0, 0.0]);
        assert_eq!(p.lipschitz(), Some(26.0));
    }

    #[test]
    fn biquadratic_lipschitz_dominates_sampled_hessian() {
        let p = make_star_convex_biquadratic(None).unwrap();
        let l = p.lipschitz().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut worst = 0.0f64;
        for _ in 0..20_000 {
            let x = p.feasible_set().sample(&mut rng);
            let y = p.feasible_set().sample(&mut rng);
            let ratio = dist(&p.g().gradient(&x), &p.g().gradient(&y)) / dist(&x, &y);
            worst = worst.max(ratio);
        }
        assert!(worst <= l);
        // The constant comes from the corner Hessian, so the sampled ratio
        // gets reasonably close to it.
        assert!(worst > 0.5 * l);
    }

    #[test]
    fn qp_examples() {
        let inside = make_convex_qp(vec![0.25, 0.75], LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(inside.known_fstar(), Some(0.0));
        assert_eq!(inside.known_minimizers().unwrap(), &[vec![0.25, 0.75]]);
        let outside = make_convex_qp(vec![2.0, 2.0], LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(outside.known_fstar(), Some(1.0));
        assert_eq!(outside.known_minimizers().unwrap(), &[vec![1.0, 1.0]]);
        let ball = make_convex_qp(vec![0.0, 0.0], LinearMinimizationOracle::l2_ball(vec![0.0, 0.0], 1.0).unwrap()).unwrap();
        assert_eq!(ball.known_fstar(), Some(0.0));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in suite() {
            for _ in 0..100 {
                let x = p.feasible_set().sample(&mut rng);
                let grad = p.g().gradient(&x);
                let d = finite_difference(|y| p.g().value(y), &x, 1e-6).unwrap();
                assert!(dist(&grad, &d) <= 1e-4 * (1.0 + norm(&grad)), "{}", p.name);
            }
        }
    }

    #[test]
    fn subgradient_inequality_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in suite() {
            for _ in 0..100 {
                let x = p.feasible_set().sample(&mut rng);
                let y = p.feasible_set().sample(&mut rng);
                let u = p.h().subgradient(&x);
                let lhs = p.h().value(&y);
                let rhs = p.h().value(&x) + dot(&u, &sub(&y, &x));
                assert!(lhs >= rhs - 1e-12 * (1.0 + lhs.abs()), "{}", p.name);
            }
        }
    }

    #[test]
    fn known_fstar_is_a_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in suite() {
            let fstar = p.known_fstar().unwrap();
            for _ in 0..10_000 {
                let x = p.feasible_set().sample(&mut rng);
                assert!(p.objective(&x) >= fstar - 1e-12, "{}", p.name);
            }
            for m in p.known_minimizers().unwrap() {
                assert!((p.objective(m) - fstar).abs() <= 1e-12, "{}", p.name);
                assert!(p.feasible_set().contains(m, 1e-12));
            }
        }
    }

    #[test]
    fn fermat_weber_h_is_convex_along_segments() {
        let p = &suite()[3];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..2000 {
            let x = p.feasible_set().sample(&mut rng);
            let y = p.feasible_set().sample(&mut rng);
            let t: f64 = rng.random();
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            assert!(p.h().value(&z) <= t * p.h().value(&x) + (1.0 - t) * p.h().value(&y) + 1e-12);
        }
    }
}
