//! Bracketed scalar root finding.

use crate::error::{DesignError, Result};

/// Bisection on a sign-changing bracket until its width drops below `tol`.
///
/// Endpoint roots are returned directly.
pub fn bisect(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(DesignError::Convergence(format!(
            "no sign change on [{a}, {b}]: f = ({fa}, {fb})"
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= tol || m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Every sign change of `f` on a uniform grid of `n` intervals over [lo, hi],
/// each refined by bisection.
pub fn all_roots(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, n: usize, tol: f64) -> Vec<f64> {
    let step = (hi - lo) / n as f64;
    let mut roots = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + step * i as f64 };
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f1 != 0.0 && f0.is_finite() && f1.is_finite() && f0.signum() != f1.signum() {
            if let Ok(r) = bisect(&mut f, x0, x1, tol) {
                roots.push(r);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(hi);
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
        assert_eq!(bisect(|x| x - 1.0, 0.0, 1.0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn all_roots_of_cubic() {
        let roots = all_roots(|x| (x - 0.5) * (x + 0.25) * (x - 0.9), -1.0, 1.0, 400, 1e-13);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-0.25, 0.5, 0.9]) {
            assert!((r - e).abs() < 1e-12);
        }
    }
}
