//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and semi-infinite
//! intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UqError};

/// Tolerances for [`integrate_1d`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 10_000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(UqError::Domain("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(UqError::Domain("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lower: f64,
    upper: f64,
    estimate: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lower: f64, upper: f64) -> Result<Segment> {
    let centre = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut finite = fc.is_finite();
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        finite &= pair.is_finite();
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    if !finite {
        return Err(UqError::Integration {
            best_estimate: f64::NAN,
            message: format!("integrand not finite on [{lower:e}, {upper:e}]"),
        });
    }
    Ok(Segment {
        lower,
        upper,
        estimate: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<(f64, usize)> {
    let first = gauss_kronrod(f, lower, upper)?;
    let mut total = first.estimate;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;
    loop {
        if error <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok((total, subdivisions));
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(UqError::Integration {
                best_estimate: total,
                message: format!("error estimate {error:e} after {subdivisions} subdivisions"),
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.lower + worst.upper);
        if !(mid > worst.lower && mid < worst.upper) {
            return Err(UqError::Integration {
                best_estimate: total,
                message: "segment cannot be bisected further".into(),
            });
        }
        let with_best = |e: UqError| match e {
            UqError::Integration { message, .. } => UqError::Integration {
                best_estimate: total,
                message,
            },
            other => other,
        };
        let left = gauss_kronrod(f, worst.lower, mid).map_err(with_best)?;
        let right = gauss_kronrod(f, mid, worst.upper).map_err(with_best)?;
        total += left.estimate + right.estimate - worst.estimate;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // resum to shed accumulated cancellation
            total = heap.iter().map(|s| s.estimate).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Integrates `f` over `[lower, upper]`; either bound may be infinite.
///
/// Semi-infinite ranges are mapped onto `[0, 1)` with `x = lower + t/(1 − t)`
/// (or the mirror image for an infinite lower bound); a doubly infinite range
/// is split at zero.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    integrate_dyn(&f, lower, upper, spec).map(|r| r.0)
}

/// Like [`integrate_piecewise`], also returning the number of subintervals used.
pub(crate) fn integrate_piecewise_counted<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, usize)> {
    spec.validate()?;
    let mut total = (0.0, 0);
    for w in points.windows(2) {
        let (v, k) = integrate_dyn(&f, w[0], w[1], spec)?;
        total.0 += v;
        total.1 += k;
    }
    Ok(total)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<(f64, usize)> {
    if lower.is_nan() || upper.is_nan() {
        return Err(UqError::Domain("integration bounds must not be NaN".into()));
    }
    if lower == upper {
        return Ok((0.0, 0));
    }
    if lower > upper {
        return integrate_dyn(f, upper, lower, spec).map(|(v, k)| (-v, k));
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => adaptive(&f, lower, upper, spec),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                let x = lower + t / s;
                // the point at infinity carries no mass for an integrable tail
                if s <= 0.0 || !x.is_finite() {
                    return 0.0;
                }
                f(x) / (s * s)
            };
            adaptive(&g, 0.0, 1.0, spec)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                let x = upper - t / s;
                // the point at infinity carries no mass for an integrable tail
                if s <= 0.0 || !x.is_finite() {
                    return 0.0;
                }
                f(x) / (s * s)
            };
            adaptive(&g, 0.0, 1.0, spec)
        }
        (false, false) => {
            let left = integrate_dyn(f, f64::NEG_INFINITY, 0.0, spec)?;
            let right = integrate_dyn(f, 0.0, f64::INFINITY, spec)?;
            Ok((left.0 + right.0, left.1 + right.1))
        }
    }
}

/// Integrates over consecutive pieces `[points[i], points[i+1]]`, useful when
/// the integrand has kinks at known locations.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(f: F, points: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    points
        .windows(2)
        .map(|w| integrate_1d(&f, w[0], w[1], spec))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn constant_on_unit_interval() {
        assert!((integrate_1d(|_| 1.0, 0.0, 1.0, &spec()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn half_log_on_one_three() {
        // antiderivative x log x − x
        let anti = |x: f64| x * x.ln() - x;
        let oracle = 0.5 * (anti(3.0) - anti(1.0));
        let value = integrate_1d(|x| x.ln() / 2.0, 1.0, 3.0, &spec()).unwrap();
        assert!((value - oracle).abs() < 1e-12);
        assert!((value - 0.647_918).abs() < 1e-6);
    }

    #[test]
    fn unit_exponential_mean() {
        let value = integrate_1d(|x| x * (-x).exp(), 0.0, f64::INFINITY, &spec()).unwrap();
        assert!((value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_over_real_line() {
        let norm = (2.0 * std::f64::consts::PI).sqrt();
        let value = integrate_1d(|x| (-0.5 * x * x).exp() / norm, f64::NEG_INFINITY, f64::INFINITY, &spec()).unwrap();
        assert!((value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let a = integrate_1d(|x| x * x, 0.0, 2.0, &spec()).unwrap();
        let b = integrate_1d(|x| x * x, 2.0, 0.0, &spec()).unwrap();
        assert!((a + b).abs() < 1e-14);
        assert!((a - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn divergent_integral_reports_best_estimate() {
        let tight = QuadratureSpec {
            max_subdivisions: 50,
            ..spec()
        };
        // ∫_1^∞ 1/x dx diverges
        match integrate_1d(|x| 1.0 / x, 1.0, f64::INFINITY, &tight) {
            Err(UqError::Integration { best_estimate, .. }) => assert!(best_estimate.is_finite()),
            other => panic!("expected integration error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let bad = QuadratureSpec {
            abs_tol: 0.0,
            ..spec()
        };
        assert!(integrate_1d(|x| x, 0.0, 1.0, &bad).is_err());
    }
}
