//! Small shared numerical kernels: fixed Gauss-Legendre panels, bracketed
//! scalar root finding, golden-section extremum refinement, least squares.

/// Abscissae of the 8-point Gauss-Legendre rule on [-1, 1] (positive half).
const GL8_X: [f64; 4] = [
    0.18343464249564980494,
    0.52553240991632898582,
    0.79666647741362673959,
    0.96028985649753623168,
];

/// Weights paired with `GL8_X`.
const GL8_W: [f64; 4] = [
    0.36268378337836198297,
    0.31370664587788728734,
    0.22238103445337447054,
    0.10122853629037625915,
];

/// 8-point Gauss-Legendre quadrature over a single interval [a, b].
pub fn gl8<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..4 {
        let dx = half * GL8_X[i];
        acc += GL8_W[i] * (f(mid - dx) + f(mid + dx));
    }
    acc * half
}

/// The 8 Gauss-Legendre nodes and weights mapped onto [a, b], in ascending
/// node order.  For callers that tabulate integrand samples.
pub fn gl8_nodes(a: f64, b: f64) -> [(f64, f64); 8] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 8];
    for i in 0..4 {
        out[i] = (mid - half * GL8_X[3 - i], half * GL8_W[3 - i]);
        out[4 + i] = (mid + half * GL8_X[i], half * GL8_W[i]);
    }
    out
}

/// Composite 8-point Gauss-Legendre quadrature over `panels` equal panels.
pub fn gl8_panels<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels > 0 && b > a);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let lo = a + i as f64 * h;
        acc += gl8(&mut f, lo, lo + h);
    }
    acc
}

/// Bracketed bisection for f(x) = 0 on [lo, hi]; needs a sign change.
///
/// Runs until the bracket width drops below `tol` (absolute), then returns the
/// midpoint.  Function values are re-used, never re-evaluated at an endpoint.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> crate::Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(crate::Error::BracketError(format!(
            "no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}"
        )));
    }
    let neg_low = flo < 0.0;
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == neg_low {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section minimization of a unimodal f on [a, b], absolute tolerance
/// `tol` on the abscissa.  Returns (argmin, min).
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.6180339887498949;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    let fm = f(xm);
    if fm <= f1 && fm <= f2 {
        (xm, fm)
    } else if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimum of f over [a, b]: dense scan on `n` cells, then golden-section
/// refinement of the bracketing pair of cells down to `tol`.
pub fn grid_min_refine<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    tol: f64,
) -> (f64, f64) {
    assert!(n >= 2 && b > a);
    let h = (b - a) / n as f64;
    let mut best_i = 0usize;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let v = f(a + i as f64 * h);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = a + h * (best_i.saturating_sub(1)) as f64;
    let hi = (a + h * (best_i + 1) as f64).min(b);
    let (x, v) = golden_min(&mut f, lo, hi, tol);
    if v <= best {
        (x, v)
    } else {
        (a + best_i as f64 * h, best)
    }
}

/// Maximum of f over [a, b] via [`grid_min_refine`] on -f.
pub fn grid_max_refine<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    tol: f64,
) -> (f64, f64) {
    let (x, neg) = grid_min_refine(|t| -f(t), a, b, n, tol);
    (x, -neg)
}

/// Ordinary least squares y ~ slope * x + intercept.  Returns
/// (slope, intercept, r_squared).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(n >= 2.0);
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, intercept, r2)
}
