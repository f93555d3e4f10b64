//! Forward finite-difference gradients and their a-priori error bound.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, dist};
use crate::problem::SmoothFunction;

/// Increment `s_ij` together with the two backtracking indices producing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdIncrement {
    pub s: f64,
    pub i: u32,
    pub j: u32,
}

/// `D_i = (g(x + s e_i) - g(x)) / s`, using exactly `n + 1` evaluations of `g`.
pub fn finite_difference<G>(g: G, x: &[f64], s: f64) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> f64,
{
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("finite-difference increment must be positive, got {s}")));
    }
    let gx = g(x);
    let mut probe = x.to_vec();
    let mut d = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + s;
        d.push((g(&probe) - gx) / s);
        probe[i] = x[i];
    }
    if !gx.is_finite() || !all_finite(&d) {
        return Err(Error::NonFinite("finite difference"));
    }
    Ok(d)
}

/// `sqrt(n) * L * s / 2`, the worst-case error of `finite_difference` for a
/// gradient with Lipschitz constant `L`.
pub fn fd_error_bound(lipschitz: f64, n: usize, s: f64) -> f64 {
    (n as f64).sqrt() * lipschitz * s / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdCertificate {
    pub measured: f64,
    pub bound: f64,
    pub ok: bool,
}

impl FdCertificate {
    pub fn ratio(&self) -> f64 {
        if self.bound > 0.0 {
            self.measured / self.bound
        } else {
            0.0
        }
    }
}

/// Compares `||grad g(x) - D(x, s)||` with `fd_error_bound`.
pub fn certify_fd_error(g: &dyn SmoothFunction, x: &[f64], s: f64) -> Result<FdCertificate> {
    let lipschitz = g
        .lipschitz()
        .ok_or_else(|| Error::Config("certifying a finite difference needs a known Lipschitz constant".into()))?;
    let d = finite_difference(|y| g.value(y), x, s)?;
    let grad = g.gradient(x);
    let measured = dist(&grad, &d);
    let bound = fd_error_bound(lipschitz, x.len(), s);
    Ok(FdCertificate {
        measured,
        bound,
        ok: measured <= bound + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm_sq};
    use crate::problem::SmoothFn;
    use proptest::prelude::*;

    fn sq_norm(scale: f64) -> SmoothFn {
        SmoothFn::new(
            move |x| scale * norm_sq(x),
            move |x| x.iter().map(|v| 2.0 * scale * v).collect(),
            Some(2.0 * scale),
        )
    }

    #[test]
    fn difference_examples() {
        let d = finite_difference(|x| norm_sq(x), &[1.0, 2.0], 0.1).unwrap();
        assert!((d[0] - 2.1).abs() < 1e-12 && (d[1] - 4.1).abs() < 1e-12);

        let c = [3.0, -1.5, 0.25];
        let d = finite_difference(|x| dot(&c, x), &[0.5, 0.5, 0.5], 0.5).unwrap();
        assert_eq!(d, c.to_vec());

        let d = finite_difference(|x| 0.5 * norm_sq(x), &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(d, vec![0.5, 0.5]);
    }

    #[test]
    fn uses_n_plus_one_evaluations() {
        let calls = std::cell::Cell::new(0);
        finite_difference(
            |x| {
                calls.set(calls.get() + 1);
                norm_sq(x)
            },
            &[1.0; 7],
            0.01,
        )
        .unwrap();
        assert_eq!(calls.get(), 8);
    }

    #[test]
    fn bad_increment_and_values() {
        assert!(matches!(finite_difference(norm_sq, &[1.0], 0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(finite_difference(norm_sq, &[1.0], -1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(
            finite_difference(|_| f64::NAN, &[1.0], 0.1),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn bound_examples() {
        assert!((fd_error_bound(2.0, 2, 0.1) - 0.1 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(fd_error_bound(1.0, 1, 0.0), 0.0);
        assert_eq!(fd_error_bound(4.0, 9, 0.5), 3.0);
    }

    #[test]
    fn certificate_examples() {
        let c = certify_fd_error(&sq_norm(1.0), &[1.0, 2.0], 0.1).unwrap();
        assert!((c.measured - 0.1 * 2f64.sqrt()).abs() < 1e-12);
        assert!((c.bound - 0.1 * 2f64.sqrt()).abs() < 1e-15);
        assert!(c.ok);

        let lin = SmoothFn::new(|x| 2.0 * x[0] - x[1], |_| vec![2.0, -1.0], Some(1.0));
        let c = certify_fd_error(&lin, &[0.25, 0.75], 0.25).unwrap();
        assert_eq!(c.measured, 0.0);
        assert!(c.ok);

        let c = certify_fd_error(&sq_norm(0.5), &[0.0, 0.0], 1.0).unwrap();
        assert!((c.measured - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!((c.bound - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!(c.ok);
    }

    #[test]
    fn certificate_needs_lipschitz() {
        let g = SmoothFn::new(norm_sq, |x| x.iter().map(|v| 2.0 * v).collect(), None);
        assert!(matches!(certify_fd_error(&g, &[1.0], 0.1), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn bound_holds_for_random_quadratics(
            a in prop::collection::vec(-2.0f64..2.0, 9),
            x in prop::collection::vec(-3.0f64..3.0, 3),
            s in 1e-4f64..1.0,
        ) {
            // g(x) = x^T A x with A = (M + M^T)/2, L = 2 ||A||_F >= 2 ||A||_2.
            let sym: Vec<f64> = (0..9).map(|k| 0.5 * (a[k] + a[(k % 3) * 3 + k / 3])).collect();
            let fro = sym.iter().map(|v| v * v).sum::<f64>().sqrt();
            let s2 = sym.clone();
            let g = SmoothFn::new(
                move |x| (0..3).map(|r| x[r] * (0..3).map(|c| s2[r * 3 + c] * x[c]).sum::<f64>()).sum(),
                move |x| (0..3).map(|r| 2.0 * (0..3).map(|c| sym[r * 3 + c] * x[c]).sum::<f64>()).collect(),
                Some(2.0 * fro + 1e-12),
            );
            let cert = certify_fd_error(&g, &x, s).unwrap();
            prop_assert!(cert.measured <= cert.bound + 1e-12 + 1e-10 * cert.bound.max(1.0));
        }

        #[test]
        fn exact_for_affine(
            c in prop::collection::vec(-5.0f64..5.0, 4),
            x in prop::collection::vec(-5.0f64..5.0, 4),
            s in 0.01f64..2.0,
        ) {
            let c2 = c.clone();
            let d = finite_difference(move |y| dot(&c2, y) + 1.0, &x, s).unwrap();
            for (di, ci) in d.iter().zip(&c) {
                prop_assert!((di - ci).abs() <= 1e-12 * (1.0 + ci.abs()) / s.min(1.0));
            }
        }
    }
}
