//! Validated T-periodic nutrient inputs.
//!
//! A nutrient level is a strictly positive T-periodic function Phi(t), given
//! either as a truncated Fourier series around its mean or as samples on a
//! uniform grid (interpolated by a periodic cubic spline, so the function is
//! C^2 either way).  Construction rejects anything that is not periodic,
//! positive, and self-consistent; the rest of the crate can then treat a
//! `PeriodicNutrient` as trustworthy.
//!
//! JSON forms (exactly one of `harmonics` / `samples`):
//!
//! ```json
//! {"period": 1.0, "mean": 1.0, "harmonics": [[1, 0.25, 0.0]]}
//! {"period": 1.0, "samples": [[0.0, 1.2], [0.25, 0.9], ...]}
//! ```

use serde::{Deserialize, Serialize};

use crate::numerics;
use crate::{Error, Result};

/// Number of grid points used for positivity screening and extremum scans.
const SCAN_POINTS: usize = 4096;

/// One Fourier term: amplitude of cos / sin at frequency index k >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: u32,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

#[derive(Debug, Clone)]
enum Repr {
    Fourier(Vec<Harmonic>),
    Sampled {
        /// Original (t, value) pairs, kept verbatim for serialization.
        raw: Vec<(f64, f64)>,
        spline: PeriodicSpline,
    },
}

/// A strictly positive T-periodic nutrient level.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "NutrientJson", into = "NutrientJson")]
pub struct PeriodicNutrient {
    period: f64,
    mean: f64,
    repr: Repr,
}

/// Mean, minimum and maximum of Phi over one period.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NutrientStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl PeriodicNutrient {
    /// Constant nutrient Phi = level.
    pub fn constant(period: f64, level: f64) -> Result<Self> {
        Self::fourier(period, level, Vec::new())
    }

    /// Truncated Fourier series: Phi(t) = mean + sum of harmonics at 2 pi k t / T.
    pub fn fourier(period: f64, mean: f64, harmonics: Vec<Harmonic>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidInput(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        if !mean.is_finite() {
            return Err(Error::InvalidInput("mean must be finite".into()));
        }
        for h in &harmonics {
            if h.k < 1 {
                return Err(Error::InvalidInput(
                    "harmonic frequency index k must be >= 1".into(),
                ));
            }
            if !h.cos_amp.is_finite() || !h.sin_amp.is_finite() {
                return Err(Error::InvalidInput(
                    "harmonic amplitudes must be finite".into(),
                ));
            }
        }
        let nut = PeriodicNutrient {
            period,
            mean,
            repr: Repr::Fourier(harmonics),
        };
        nut.validate()?;
        Ok(nut)
    }

    /// Tabulated nutrient on a uniform grid over one period.
    ///
    /// `samples` must list (t_i, v_i) with t_i = i * T / N (a trailing
    /// duplicate of the first point at t = T is tolerated and dropped).  The
    /// mean is the exact integral of the interpolating periodic cubic spline.
    pub fn from_samples(period: f64, samples: Vec<(f64, f64)>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidInput(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let raw = samples.clone();
        let mut samples = samples;
        if samples.len() >= 2 {
            let (t_last, v_last) = *samples.last().unwrap();
            let (_, v_first) = samples[0];
            if (t_last - period).abs() <= 1e-9 * period {
                if (v_last - v_first).abs() > 1e-9 * v_first.abs().max(1.0) {
                    return Err(Error::InvalidInput(
                        "closing sample at t = T disagrees with the sample at t = 0".into(),
                    ));
                }
                samples.pop();
            }
        }
        let n = samples.len();
        if n < 4 {
            return Err(Error::InvalidInput(format!(
                "need at least 4 samples per period, got {n}"
            )));
        }
        let h = period / n as f64;
        for (i, &(t, v)) in samples.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::InvalidInput("samples must be finite".into()));
            }
            if (t - i as f64 * h).abs() > 1e-9 * period {
                return Err(Error::InvalidInput(format!(
                    "samples must sit on the uniform grid i*T/{n}; sample {i} has t = {t}"
                )));
            }
        }
        let values: Vec<f64> = samples.iter().map(|&(_, v)| v).collect();
        let spline = PeriodicSpline::fit(period, &values)?;
        let mean = spline.integral() / period;
        let nut = PeriodicNutrient {
            period,
            mean,
            repr: Repr::Sampled { raw, spline },
        };
        nut.validate()?;
        Ok(nut)
    }

    /// Nutrient level at time t (reduced mod T, any real t accepted).
    pub fn eval(&self, t: f64) -> f64 {
        let tau = t.rem_euclid(self.period);
        match &self.repr {
            Repr::Fourier(harmonics) => {
                let w = 2.0 * std::f64::consts::PI / self.period;
                let mut v = self.mean;
                for h in harmonics {
                    let phase = w * h.k as f64 * tau;
                    v += h.cos_amp * phase.cos() + h.sin_amp * phase.sin();
                }
                v
            }
            Repr::Sampled { spline, .. } => spline.eval(tau),
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Declared mean (= exact spline mean for sampled inputs).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Trapezoid quadrature mean over [offset, offset + T] on `n` uniform
    /// cells.  For a periodic integrand this is spectrally accurate and exact
    /// for band-limited series with fewer than n/2 harmonics.
    pub fn quadrature_mean_with(&self, offset: f64, n: usize) -> f64 {
        assert!(n >= 2);
        let h = self.period / n as f64;
        // Periodic trapezoid = arithmetic mean of n samples.
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.eval(offset + i as f64 * h);
        }
        acc / n as f64
    }

    /// [`Self::quadrature_mean_with`] at the default resolution.
    pub fn quadrature_mean(&self, offset: f64) -> f64 {
        self.quadrature_mean_with(offset, SCAN_POINTS)
    }

    /// Mean / min / max over one period.
    ///
    /// Extrema come from a 4096-point scan refined by golden-section search to
    /// absolute tolerance 1e-12.  Errors with `PositivityViolation` if the
    /// refined minimum is not strictly positive.
    pub fn statistics(&self) -> Result<NutrientStats> {
        let (_, min) =
            numerics::grid_min_refine(|t| self.eval(t), 0.0, self.period, SCAN_POINTS, 1e-12);
        let (_, max) =
            numerics::grid_max_refine(|t| self.eval(t), 0.0, self.period, SCAN_POINTS, 1e-12);
        if min <= 0.0 {
            return Err(Error::PositivityViolation(format!(
                "nutrient minimum {min} is not strictly positive"
            )));
        }
        Ok(NutrientStats {
            mean: self.mean,
            min,
            max,
        })
    }

    fn validate(&self) -> Result<()> {
        let stats = self.statistics()?;
        let qmean = self.quadrature_mean(0.0);
        if (qmean - self.mean).abs() > 1e-10 * self.mean.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "declared mean {} disagrees with quadrature mean {qmean}",
                self.mean
            )));
        }
        // statistics() already guarantees min > 0.
        debug_assert!(stats.min > 0.0);
        Ok(())
    }
}

// ---------------------------------------------------------------- JSON form

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NutrientJson {
    period: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    harmonics: Option<Vec<(u32, f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<(f64, f64)>>,
}

impl TryFrom<NutrientJson> for PeriodicNutrient {
    type Error = Error;

    fn try_from(j: NutrientJson) -> Result<Self> {
        match (j.harmonics, j.samples, j.mean) {
            (Some(h), None, Some(mean)) => {
                let harmonics = h
                    .into_iter()
                    .map(|(k, cos_amp, sin_amp)| Harmonic {
                        k,
                        cos_amp,
                        sin_amp,
                    })
                    .collect();
                PeriodicNutrient::fourier(j.period, mean, harmonics)
            }
            (Some(_), None, None) => Err(Error::InvalidInput(
                "harmonic nutrient requires a `mean` field".into(),
            )),
            (None, Some(s), None) => PeriodicNutrient::from_samples(j.period, s),
            (None, Some(_), Some(_)) => Err(Error::InvalidInput(
                "sampled nutrient must not carry a `mean` field (it is computed)".into(),
            )),
            _ => Err(Error::InvalidInput(
                "nutrient needs exactly one of `harmonics` or `samples`".into(),
            )),
        }
    }
}

impl From<PeriodicNutrient> for NutrientJson {
    fn from(n: PeriodicNutrient) -> Self {
        match n.repr {
            Repr::Fourier(h) => NutrientJson {
                period: n.period,
                mean: Some(n.mean),
                harmonics: Some(h.into_iter().map(|h| (h.k, h.cos_amp, h.sin_amp)).collect()),
                samples: None,
            },
            Repr::Sampled { raw, .. } => NutrientJson {
                period: n.period,
                mean: None,
                harmonics: None,
                samples: Some(raw),
            },
        }
    }
}

// ------------------------------------------------------------------ spline

/// Periodic cubic spline on a uniform grid: C^2 interpolant of n values at
/// t_i = i * T / n, extended T-periodically.
#[derive(Debug, Clone)]
struct PeriodicSpline {
    h: f64,
    y: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
}

impl PeriodicSpline {
    fn fit(period: f64, y: &[f64]) -> Result<Self> {
        let n = y.len();
        assert!(n >= 4);
        let h = period / n as f64;
        // M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i-1} - 2 y_i + y_{i+1}) / h^2,
        // indices mod n: a cyclic tridiagonal system with constant bands.
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let ym = y[(i + n - 1) % n];
                let yp = y[(i + 1) % n];
                6.0 * (ym - 2.0 * y[i] + yp) / (h * h)
            })
            .collect();
        let m = solve_cyclic_tridiagonal(1.0, 4.0, 1.0, &rhs)?;
        Ok(PeriodicSpline {
            h,
            y: y.to_vec(),
            m,
        })
    }

    /// Value at tau in [0, T).
    fn eval(&self, tau: f64) -> f64 {
        let n = self.y.len();
        let mut i = (tau / self.h) as usize;
        if i >= n {
            i = n - 1;
        }
        let t0 = i as f64 * self.h;
        let a = t0 + self.h - tau; // distance to right node
        let b = tau - t0; // distance to left node
        let (y0, y1) = (self.y[i], self.y[(i + 1) % n]);
        let (m0, m1) = (self.m[i], self.m[(i + 1) % n]);
        let h = self.h;
        (m0 * a * a * a + m1 * b * b * b) / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * b
    }

    /// Exact integral over one period.
    fn integral(&self) -> f64 {
        let n = self.y.len();
        let h = self.h;
        let mut acc = 0.0;
        for i in 0..n {
            let (y0, y1) = (self.y[i], self.y[(i + 1) % n]);
            let (m0, m1) = (self.m[i], self.m[(i + 1) % n]);
            acc += 0.5 * h * (y0 + y1) - h * h * h * (m0 + m1) / 24.0;
        }
        acc
    }
}

/// Solve the cyclic tridiagonal system with constant bands
/// (sub = a, diag = b, super = c, wrap-around corners a and c) by
/// Sherman-Morrison on top of the Thomas algorithm.
fn solve_cyclic_tridiagonal(a: f64, b: f64, c: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    assert!(n >= 3);
    let gamma = -b;
    let mut diag = vec![b; n];
    diag[0] = b - gamma;
    diag[n - 1] = b - a * c / gamma;
    let x = solve_tridiagonal(a, &diag, c, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = a;
    let z = solve_tridiagonal(a, &diag, c, &u)?;
    let denom = 1.0 + z[0] + c * z[n - 1] / gamma;
    if denom.abs() < 1e-14 {
        return Err(Error::SingularSystem(
            "cyclic tridiagonal correction factor vanished".into(),
        ));
    }
    let fact = (x[0] + c * x[n - 1] / gamma) / denom;
    Ok(x.iter().zip(&z).map(|(&xi, &zi)| xi - fact * zi).collect())
}

/// Thomas algorithm for constant sub-/super-diagonals and a given diagonal.
fn solve_tridiagonal(sub: f64, diag: &[f64], sup: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut c_star = vec![0.0; n];
    let mut d_star = vec![0.0; n];
    if diag[0].abs() < 1e-300 {
        return Err(Error::SingularSystem(
            "zero pivot in tridiagonal solve".into(),
        ));
    }
    c_star[0] = sup / diag[0];
    d_star[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub * c_star[i - 1];
        if denom.abs() < 1e-300 {
            return Err(Error::SingularSystem(
                "zero pivot in tridiagonal solve".into(),
            ));
        }
        c_star[i] = sup / denom;
        d_star[i] = (rhs[i] - sub * d_star[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d_star[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_star[i] - c_star[i] * x[i + 1];
    }
    Ok(x)
}
