//! Exact linear-minimization oracles over closed-form compact convex sets.
//!
//! Every oracle returns a deterministic minimizer of `c · p` over its set and
//! knows the exact diameter of the set. Ties are broken the same way for `c`
//! and `t * c` (`t > 0`), so traces are reproducible.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, dot, norm, norm_sq};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetKind {
    /// `{ x : lower <= x <= upper }`
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Scaled standard simplex `{ x >= 0, sum(x) = radius }`.
    Simplex { radius: f64 },
    /// `{ x : ||x||_1 <= radius }`
    L1Ball { radius: f64 },
    /// `{ x : ||x - center||_2 <= radius }`
    L2Ball { center: Vec<f64>, radius: f64 },
    /// Convex hull of a finite point list.
    FiniteHull { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearMinimizationOracle {
    dim: usize,
    kind: SetKind,
    diameter: f64,
}

impl LinearMinimizationOracle {
    pub fn new(dim: usize, kind: SetKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("set dimension must be positive".into()));
        }
        let positive = |r: f64, what: &str| -> Result<()> {
            if r.is_finite() && r > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{what} radius must be positive and finite, got {r}")))
            }
        };
        let diameter = match &kind {
            SetKind::Box { lower, upper } => {
                check_dim(dim, lower.len())?;
                check_dim(dim, upper.len())?;
                for (i, (lo, hi)) in lower.iter().zip(upper).enumerate() {
                    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        return Err(Error::InvalidInput(format!(
                            "box bounds must satisfy lower < upper, coordinate {i}: [{lo}, {hi}]"
                        )));
                    }
                }
                dist(upper, lower)
            }
            SetKind::Simplex { radius } => {
                positive(*radius, "simplex")?;
                if dim >= 2 {
                    radius * 2f64.sqrt()
                } else {
                    0.0
                }
            }
            SetKind::L1Ball { radius } => {
                positive(*radius, "l1 ball")?;
                2.0 * radius
            }
            SetKind::L2Ball { center, radius } => {
                check_dim(dim, center.len())?;
                positive(*radius, "l2 ball")?;
                if !center.iter().all(|v| v.is_finite()) {
                    return Err(Error::NonFinite("l2 ball center"));
                }
                2.0 * radius
            }
            SetKind::FiniteHull { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidInput("finite hull needs at least one point".into()));
                }
                for p in points {
                    check_dim(dim, p.len())?;
                    if !p.iter().all(|v| v.is_finite()) {
                        return Err(Error::NonFinite("finite hull point"));
                    }
                }
                let mut d = 0.0f64;
                for (a, p) in points.iter().enumerate() {
                    for q in &points[a + 1..] {
                        d = d.max(dist(p, q));
                    }
                }
                d
            }
        };
        Ok(Self { dim, kind, diameter })
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::new(lower.len(), SetKind::Box { lower, upper })
    }

    /// The box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(vec![lo; dim], vec![hi; dim])
    }

    pub fn simplex(dim: usize, radius: f64) -> Result<Self> {
        Self::new(dim, SetKind::Simplex { radius })
    }

    pub fn l1_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::new(dim, SetKind::L1Ball { radius })
    }

    pub fn l2_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::new(center.len(), SetKind::L2Ball { center, radius })
    }

    pub fn finite_hull(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        Self::new(dim, SetKind::FiniteHull { points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// Exact `max ||x - y||` over the set.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn argmin_linear(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, c.len())?;
        if !c.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("linear objective"));
        }
        let p = match &self.kind {
            SetKind::Box { lower, upper } => c
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(ci, (lo, hi))| if *ci < 0.0 { *hi } else { *lo })
                .collect(),
            SetKind::Simplex { radius } => {
                let mut best = 0;
                for (i, ci) in c.iter().enumerate() {
                    if *ci < c[best] {
                        best = i;
                    }
                }
                let mut p = vec![0.0; self.dim];
                p[best] = *radius;
                p
            }
            SetKind::L1Ball { radius } => {
                let mut best = 0;
                for (i, ci) in c.iter().enumerate() {
                    if ci.abs() > c[best].abs() {
                        best = i;
                    }
                }
                let mut p = vec![0.0; self.dim];
                p[best] = -radius * sign(c[best]);
                p
            }
            SetKind::L2Ball { center, radius } => {
                let nc = norm(c);
                if nc == 0.0 {
                    center.clone()
                } else {
                    center
                        .iter()
                        .zip(c)
                        .map(|(m, ci)| m - radius * ci / nc)
                        .collect()
                }
            }
            SetKind::FiniteHull { points } => {
                let mut best = 0;
                let mut best_val = dot(c, &points[0]);
                for (i, p) in points.iter().enumerate().skip(1) {
                    let v = dot(c, p);
                    if v < best_val {
                        best = i;
                        best_val = v;
                    }
                }
                points[best].clone()
            }
        };
        Ok(p)
    }

    /// Membership up to `tol` in the defining inequalities.
    ///
    /// For finite hulls the distance to the hull is computed by Wolfe's
    /// min-norm-point algorithm, with a separating-hyperplane certificate.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim || !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        match &self.kind {
            SetKind::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(xi, (lo, hi))| *xi >= lo - tol && *xi <= hi + tol),
            SetKind::Simplex { radius } => {
                x.iter().all(|xi| *xi >= -tol) && (x.iter().sum::<f64>() - radius).abs() <= tol
            }
            SetKind::L1Ball { radius } => x.iter().map(|v| v.abs()).sum::<f64>() <= radius + tol,
            SetKind::L2Ball { center, radius } => dist(x, center) <= radius + tol,
            SetKind::FiniteHull { points } => hull_distance_within(points, x, tol),
        }
    }

    /// Euclidean projection, where a closed form exists.
    pub fn project(&self, x: &[f64]) -> Option<Vec<f64>> {
        if x.len() != self.dim {
            return None;
        }
        match &self.kind {
            SetKind::Box { lower, upper } => Some(
                x.iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(xi, (lo, hi))| xi.clamp(*lo, *hi))
                    .collect(),
            ),
            SetKind::L2Ball { center, radius } => {
                let d = dist(x, center);
                if d <= *radius {
                    Some(x.to_vec())
                } else {
                    Some(
                        center
                            .iter()
                            .zip(x)
                            .map(|(m, xi)| m + radius * (xi - m) / d)
                            .collect(),
                    )
                }
            }
            SetKind::Simplex { radius } => Some(project_simplex(x, *radius)),
            SetKind::L1Ball { radius } => {
                if x.iter().map(|v| v.abs()).sum::<f64>() <= *radius {
                    return Some(x.to_vec());
                }
                let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                let w = project_simplex(&abs, *radius);
                Some(x.iter().zip(w).map(|(xi, wi)| sign(*xi) * wi).collect())
            }
            SetKind::FiniteHull { .. } => None,
        }
    }

    /// A random feasible point. Not uniform for every kind; only membership
    /// is guaranteed.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            SetKind::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                .collect(),
            SetKind::Simplex { radius } => dirichlet(self.dim, rng)
                .into_iter()
                .map(|w| w * radius)
                .collect(),
            SetKind::L1Ball { radius } => {
                // Scale a random simplex point over the 2n signed vertices.
                let w = dirichlet(self.dim + 1, rng);
                let shrink = rng.random::<f64>();
                (0..self.dim)
                    .map(|i| {
                        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        s * w[i] * radius * shrink
                    })
                    .collect()
            }
            SetKind::L2Ball { center, radius } => {
                let dir: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(rng)).collect();
                let nd = norm(&dir).max(f64::MIN_POSITIVE);
                let r = radius * rng.random::<f64>().powf(1.0 / self.dim as f64) * (1.0 - 1e-12);
                center
                    .iter()
                    .zip(&dir)
                    .map(|(m, d)| m + r * d / nd)
                    .collect()
            }
            SetKind::FiniteHull { points } => {
                let w = dirichlet(points.len(), rng);
                let mut x = vec![0.0; self.dim];
                for (wi, p) in w.iter().zip(points) {
                    for (xj, pj) in x.iter_mut().zip(p) {
                        *xj += wi * pj;
                    }
                }
                x
            }
        }
    }
}

/// `sign(0) = 0`.
pub(crate) fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn dirichlet<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

/// Sort-based projection onto `{ w >= 0, sum(w) = radius }`.
fn project_simplex(x: &[f64], radius: f64) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - radius) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

fn hull_distance_within(points: &[Vec<f64>], x: &[f64], tol: f64) -> bool {
    // Wolfe's min-norm-point algorithm on conv(points - x). Each major step
    // either certifies ||y|| <= tol, separates x from the hull by more than
    // tol, or strictly decreases ||y||.
    let shifted: Vec<Vec<f64>> = points.iter().map(|p| p.iter().zip(x).map(|(a, b)| a - b).collect()).collect();
    let scale = shifted.iter().map(|p| norm_sq(p)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let eps = 1e-13 * scale;
    let start = (0..shifted.len())
        .min_by(|&a, &b| norm_sq(&shifted[a]).total_cmp(&norm_sq(&shifted[b])))
        .unwrap_or(0);
    let mut active: Vec<usize> = vec![start];
    let mut w: Vec<f64> = vec![1.0];
    let combine = |active: &[usize], w: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (&i, wi) in active.iter().zip(w) {
            for (yk, pk) in y.iter_mut().zip(&shifted[i]) {
                *yk += wi * pk;
            }
        }
        y
    };
    for _ in 0..10 * (points.len() + x.len() + 10) {
        let y = combine(&active, &w);
        let ny = norm(&y);
        if ny <= tol {
            return true;
        }
        let (best, val) = (0..shifted.len())
            .map(|i| (i, dot(&y, &shifted[i])))
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        // Every hull point z has y.z >= val, so dist(x, hull) >= val / ||y||.
        if val / ny > tol {
            return false;
        }
        if ny * ny - val <= eps || active.contains(&best) {
            return ny <= tol + 1e-12 * scale.sqrt();
        }
        active.push(best);
        w.push(0.0);
        loop {
            let Some(alpha) = affine_minimizer(&shifted, &active) else {
                return ny <= tol + 1e-12 * scale.sqrt();
            };
            if alpha.iter().all(|&a| a > 1e-15) {
                w = alpha;
                break;
            }
            let theta = w
                .iter()
                .zip(&alpha)
                .filter(|(_, &a)| a <= 1e-15)
                .map(|(&wi, &a)| wi / (wi - a))
                .fold(1.0, f64::min);
            for (wi, a) in w.iter_mut().zip(&alpha) {
                *wi = theta * a + (1.0 - theta) * *wi;
            }
            let mut k = 0;
            while k < active.len() {
                if w[k] <= 1e-15 {
                    active.remove(k);
                    w.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= total);
            if active.len() == 1 {
                break;
            }
        }
    }
    norm(&combine(&active, &w)) <= tol + 1e-12 * scale.sqrt()
}

/// Weights summing to one that minimize `||sum alpha_i p_i||` over the affine
/// hull of the active points, or `None` if they are affinely dependent.
fn affine_minimizer(points: &[Vec<f64>], active: &[usize]) -> Option<Vec<f64>> {
    let m = active.len();
    // [G 1; 1^T 0] [alpha; mu] = [0; 1] with G the Gram matrix.
    let mut a = vec![vec![0.0; m + 2]; m + 1];
    for r in 0..m {
        for c in 0..m {
            a[r][c] = dot(&points[active[r]], &points[active[c]]);
        }
        a[r][m] = 1.0;
        a[m][r] = 1.0;
    }
    a[m][m + 1] = 1.0;
    let size = m + 1;
    let pivot_floor = 1e-14 * a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..size {
        let piv = (col..size).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= pivot_floor {
            return None;
        }
        a.swap(col, piv);
        for r in 0..size {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=size {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some((0..m).map(|r| a[r][size] / a[r][r]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_kinds() -> Vec<LinearMinimizationOracle> {
        vec![
            LinearMinimizationOracle::boxed(vec![-1.0, 0.0, 2.0], vec![1.0, 3.0, 2.5]).unwrap(),
            LinearMinimizationOracle::simplex(3, 1.5).unwrap(),
            LinearMinimizationOracle::l1_ball(3, 2.0).unwrap(),
            LinearMinimizationOracle::l2_ball(vec![0.5, -1.0, 0.0], 0.7).unwrap(),
            LinearMinimizationOracle::finite_hull(vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 2.0],
                vec![0.0, 1.0, -1.0],
                vec![2.0, 2.0, 0.5],
            ])
            .unwrap(),
        ]
    }

    #[test]
    fn closed_form_argmins() {
        let b = LinearMinimizationOracle::cube(2, -1.0, 1.0).unwrap();
        assert_eq!(b.argmin_linear(&[2.0, -3.0]).unwrap(), vec![-1.0, 1.0]);
        let s = LinearMinimizationOracle::simplex(3, 1.0).unwrap();
        assert_eq!(s.argmin_linear(&[3.0, 1.0, 2.0]).unwrap(), vec![0.0, 1.0, 0.0]);
        let l2 = LinearMinimizationOracle::l2_ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = l2.argmin_linear(&[3.0, 4.0]).unwrap();
        assert!((p[0] + 0.6).abs() < 1e-15 && (p[1] + 0.8).abs() < 1e-15);
        let l1 = LinearMinimizationOracle::l1_ball(3, 2.0).unwrap();
        assert_eq!(l1.argmin_linear(&[1.0, -5.0, 3.0]).unwrap(), vec![0.0, 2.0, 0.0]);
        let hull = LinearMinimizationOracle::finite_hull(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(hull.argmin_linear(&[-1.0, 1.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn tie_breaking() {
        let b = LinearMinimizationOracle::cube(2, -1.0, 1.0).unwrap();
        assert_eq!(b.argmin_linear(&[0.0, 0.0]).unwrap(), vec![-1.0, -1.0]);
        let s = LinearMinimizationOracle::simplex(3, 1.0).unwrap();
        assert_eq!(s.argmin_linear(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let l1 = LinearMinimizationOracle::l1_ball(2, 1.0).unwrap();
        assert_eq!(l1.argmin_linear(&[-2.0, 2.0]).unwrap(), vec![1.0, 0.0]);
        let l2 = LinearMinimizationOracle::l2_ball(vec![0.3, 0.1], 1.0).unwrap();
        assert_eq!(l2.argmin_linear(&[0.0, 0.0]).unwrap(), vec![0.3, 0.1]);
        let hull = LinearMinimizationOracle::finite_hull(vec![vec![1.0, 0.0], vec![1.0, 5.0]]).unwrap();
        assert_eq!(hull.argmin_linear(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn membership_examples() {
        let b = LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap();
        assert!(b.contains(&[0.5, 0.5], 0.0));
        let l2 = LinearMinimizationOracle::l2_ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(!l2.contains(&[1.0 + 1e-6, 0.0], 1e-9));
        let s = LinearMinimizationOracle::simplex(2, 1.0).unwrap();
        assert!(s.contains(&[0.5, 0.5], 1e-12));
        let hull = LinearMinimizationOracle::finite_hull(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        assert!(hull.contains(&[0.25, 0.25], 1e-12));
        assert!(hull.contains(&[1.0, 0.0], 0.0));
        assert!(!hull.contains(&[0.6, 0.6], 1e-9));
    }

    #[test]
    fn diameters() {
        let b = LinearMinimizationOracle::cube(2, -2.0, 2.0).unwrap();
        assert!((b.diameter() - 4.0 * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(LinearMinimizationOracle::l2_ball(vec![0.0; 4], 3.0).unwrap().diameter(), 6.0);
        let hull = LinearMinimizationOracle::finite_hull(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(hull.diameter(), 5.0);
        assert!((LinearMinimizationOracle::simplex(3, 2.0).unwrap().diameter() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(LinearMinimizationOracle::l1_ball(3, 1.5).unwrap().diameter(), 3.0);
    }

    #[test]
    fn hull_membership_near_the_boundary() {
        let tet = LinearMinimizationOracle::finite_hull(vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(tet.contains(&[0.25, 0.25, 0.25], 1e-12));
        assert!(tet.contains(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1e-12));
        let out = 1.0 / 3.0 + 1e-6;
        assert!(!tet.contains(&[out, out, out], 1e-9));
        assert!(tet.contains(&[out, out, out], 2e-6));
        assert!(!tet.contains(&[-1e-6, 0.5, 0.25], 1e-9));
        assert!(tet.contains(&[0.0, 0.5, 0.5], 1e-12));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(LinearMinimizationOracle::boxed(vec![1.0], vec![1.0]).is_err());
        assert!(LinearMinimizationOracle::simplex(2, 0.0).is_err());
        assert!(LinearMinimizationOracle::finite_hull(vec![]).is_err());
        let b = LinearMinimizationOracle::cube(2, 0.0, 1.0).unwrap();
        assert!(matches!(b.argmin_linear(&[f64::NAN, 0.0]), Err(Error::NonFinite(_))));
        assert!(matches!(b.argmin_linear(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn optimality_against_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for oracle in all_kinds() {
            let qs: Vec<Vec<f64>> = (0..1000).map(|_| oracle.sample(&mut rng)).collect();
            for q in &qs {
                assert!(oracle.contains(q, 1e-9), "{:?} sample {:?}", oracle.kind(), q);
            }
            for _ in 0..1000 {
                let c: Vec<f64> = (0..oracle.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
                let p = oracle.argmin_linear(&c).unwrap();
                assert!(oracle.contains(&p, 1e-12), "{:?} argmin {:?}", oracle.kind(), p);
                let slack = 1e-12 * norm(&c) * oracle.diameter().max(1.0);
                let cp = dot(&c, &p);
                // Subsample feasible points to keep the double loop cheap.
                for q in qs.iter().step_by(10) {
                    assert!(cp <= dot(&c, q) + slack);
                }
            }
        }
    }

    #[test]
    fn projection_lands_in_set_and_is_closest() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for oracle in all_kinds().into_iter().take(4) {
            for _ in 0..200 {
                let x: Vec<f64> = (0..oracle.dim()).map(|_| 3.0 * rng.random::<f64>() - 1.5).collect();
                let p = oracle.project(&x).unwrap();
                assert!(oracle.contains(&p, 1e-9));
                let d = dist(&p, &x);
                for _ in 0..20 {
                    let q = oracle.sample(&mut rng);
                    assert!(d <= dist(&q, &x) + 1e-9);
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn argmin_is_scale_invariant(
            c in proptest::collection::vec(-10.0f64..10.0, 3),
            t in 1e-3f64..1e3,
            which in 0usize..5,
        ) {
            let oracle = &all_kinds()[which];
            let scaled: Vec<f64> = c.iter().map(|v| v * t).collect();
            let a = oracle.argmin_linear(&c).unwrap();
            let b = oracle.argmin_linear(&scaled).unwrap();
            if matches!(oracle.kind(), SetKind::L2Ball { .. }) {
                // c / ||c|| is only reproduced up to rounding.
                proptest::prop_assert!(dist(&a, &b) <= 1e-14);
            } else {
                proptest::prop_assert_eq!(a, b);
            }
        }
    }
}
