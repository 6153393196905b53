//! Standard normal helpers that stay finite deep into the tails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Beyond this |x| the upper tail is evaluated through the Mills ratio.
pub(crate) const TAIL_SWITCH: f64 = 8.0;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub(crate) fn log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

#[inline]
pub(crate) fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Lower tail probability Φ(x).
#[inline]
pub(crate) fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Mills ratio R(z) = (1 − Φ(z)) / φ(z) for z ≥ 0.
pub(crate) fn mills_ratio(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < TAIL_SWITCH {
        return cdf(-z) / pdf(z);
    }
    // R(z) = 1/(z + 1/(z + 2/(z + 3/(z + ...)))), modified Lentz.
    const TINY: f64 = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0;
    for n in 1..500 {
        let a = n as f64;
        d = z + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = z + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Hazard pair at x: (φ(x)/Φ(x), φ(x)/(1 − Φ(x))).
pub(crate) fn hazards(x: f64) -> (f64, f64) {
    let z = x.abs();
    let (near, far) = if z <= TAIL_SWITCH {
        let p = pdf(z);
        (p / cdf(z), p / cdf(-z))
    } else {
        let r = mills_ratio(z);
        let p = pdf(z);
        (p / (1.0 - p * r), 1.0 / r)
    };
    if x >= 0.0 {
        (near, far)
    } else {
        (far, near)
    }
}

/// ln(Φ(x)(1 − Φ(x))).
pub(crate) fn log_cdf_product(x: f64) -> f64 {
    let z = x.abs();
    if z <= TAIL_SWITCH {
        cdf(z).ln() + cdf(-z).ln()
    } else {
        let r = mills_ratio(z);
        let upper = log_pdf(z) + r.ln();
        upper + (-(pdf(z) * r)).ln_1p()
    }
}
