//! Stable scalar kernels around tanh and cosh.
//!
//! The whole model is driven by the damped-tanh nonlinearity tanh(x)/x and by
//! ratios of cosh values whose arguments grow like sqrt(j) * rho.  Naive
//! evaluation overflows or cancels exactly where the interesting asymptotics
//! live, so the handful of helpers here are the only place the crate touches
//! raw hyperbolic functions.

/// tanh(x)/x extended continuously by 1 at x = 0.
///
/// Strictly decreasing on [0, inf) with range (0, 1].  Below 1e-4 the
/// Maclaurin series 1 - x^2/3 + 2 x^4/15 is exact to double precision.
pub fn tanhc(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0
    } else {
        x.tanh() / x
    }
}

/// d/dx [tanh(x)/x].
///
/// Closed form (1 - tanh(x)/x - tanh(x)^2) / x cancels near 0; the series
/// -2x/3 + 8x^3/15 - 34x^5/105 takes over below 0.01.
pub fn dtanhc(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-2 {
        let x2 = x * x;
        x * (-2.0 / 3.0 + x2 * (8.0 / 15.0 - x2 * (34.0 / 105.0)))
    } else {
        let t = x.tanh();
        (1.0 - t / x - t * t) / x
    }
}

/// Inverse of [`tanhc`] on (0, 1): the unique x > 0 with tanh(x)/x = u.
///
/// Bisection on the strictly decreasing tanhc, absolute tolerance 1e-13.
pub fn inv_tanhc(u: f64) -> crate::Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(crate::Error::DomainError(format!(
            "inv_tanhc requires u in (0,1), got {u}"
        )));
    }
    let mut hi = 1.0_f64;
    while tanhc(hi) > u {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(crate::Error::ConvergenceError(
                "inv_tanhc: upper bracket expansion ran away".into(),
            ));
        }
    }
    let mut lo = 0.0_f64;
    for _ in 0..200 {
        if hi - lo <= 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if tanhc(mid) > u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// cosh(y)/cosh(rho) for y, rho >= 0 without overflow.
///
/// Past rho = 30 the quotient is evaluated as
/// exp(y - rho) * (1 + exp(-2y)) / (1 + exp(-2 rho)), which never forms a
/// large intermediate; below that the direct ratio is exact enough.
pub fn cosh_ratio(y: f64, rho: f64) -> f64 {
    debug_assert!(y >= 0.0 && rho >= 0.0);
    if rho <= 30.0 {
        y.cosh() / rho.cosh()
    } else {
        (y - rho).exp() * (1.0 + (-2.0 * y).exp()) / (1.0 + (-2.0 * rho).exp())
    }
}

/// 1/cosh(x), stable for any magnitude of x.
pub fn sech(x: f64) -> f64 {
    let ax = x.abs();
    2.0 * (-ax).exp() / (1.0 + (-2.0 * ax).exp())
}

/// sqrt(j) * tanh(sqrt(j) * rho), with the continuous value 0 at j = 0.
pub fn sqrt_tanh(j: f64, rho: f64) -> f64 {
    debug_assert!(j >= 0.0);
    if j == 0.0 {
        0.0
    } else {
        let s = j.sqrt();
        s * (s * rho).tanh()
    }
}

/// sqrt(1+j) tanh(sqrt(1+j) rho) - sqrt(j) tanh(sqrt(j) rho), cancellation-free.
///
/// For large j the two terms agree to ~1/(2 sqrt(j)); the rewrite
///   d * tanh(a rho) + sqrt(j) * sinh(d rho) * sech(a rho) * sech(b rho),
/// with a = sqrt(1+j), b = sqrt(j), d = a - b = 1/(a+b), keeps full relative
/// accuracy all the way to j ~ 1e12.
pub fn sqrt_tanh_gap(j: f64, rho: f64) -> f64 {
    debug_assert!(j >= 0.0 && rho >= 0.0);
    let a = (1.0 + j).sqrt();
    if j == 0.0 {
        return rho.tanh();
    }
    let b = j.sqrt();
    let d = 1.0 / (a + b);
    d * (a * rho).tanh() + b * (d * rho).sinh() * sech(a * rho) * sech(b * rho)
}
