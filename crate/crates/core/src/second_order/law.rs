//! One-dimensional laws used as independent coordinate marginals.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, UqError};
use crate::numerics::{digamma, integrate_piecewise, log_gamma, QuadratureSpec};

/// Expectations with tabulated closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    /// `E[X]`
    Mean,
    /// `E[log X]`
    Log,
    /// `E[1/X]`
    Inv,
    /// `E[1/X²]`
    InvSq,
    /// `E[X log X]`
    XLogX,
}

impl Moment {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Moment::Mean => x,
            Moment::Log => x.ln(),
            Moment::Inv => 1.0 / x,
            Moment::InvSq => 1.0 / (x * x),
            Moment::XLogX => x * x.ln(),
        }
    }

    pub fn needs_positive_support(self) -> bool {
        !matches!(self, Moment::Mean)
    }
}

/// A law over a single parameter coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Law1d {
    #[serde(rename = "dirac")]
    PointMass { value: f64 },
    Uniform { lower: f64, upper: f64 },
    /// `Uniform(lower, upper) + Uniform(−half_width, half_width)`, the exact
    /// law after a uniform mean-preserving spread of a uniform marginal.
    Trapezoid { lower: f64, upper: f64, half_width: f64 },
    /// Pareto with scale 1 and shape `alpha`, support `[1, ∞)`.
    Pareto { alpha: f64 },
    #[serde(rename = "invgamma")]
    InverseGamma { alpha: f64, beta: f64 },
    /// Gamma with shape and rate.
    Gamma { shape: f64, rate: f64 },
    #[serde(rename = "gausslaw")]
    GaussianLaw { mean: f64, var: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(UqError::Domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(UqError::Domain(format!("{name} must be finite, got {v}")))
    }
}

/// `∫∫ log` antiderivatives used by the trapezoid closed forms; `H'' = g`.
fn second_antiderivative(m: Moment, x: f64) -> f64 {
    let lx = x.ln();
    match m {
        Moment::Mean => x * x * x / 6.0,
        Moment::Log => 0.5 * x * x * lx - 0.75 * x * x,
        Moment::Inv => x * lx - x,
        Moment::InvSq => -lx,
        Moment::XLogX => x * x * x / 6.0 * lx - 5.0 * x * x * x / 36.0,
    }
}

/// First antiderivative `G' = g` for the uniform closed forms.
fn antiderivative(m: Moment, x: f64) -> f64 {
    let lx = x.ln();
    match m {
        Moment::Mean => 0.5 * x * x,
        Moment::Log => x * lx - x,
        Moment::Inv => lx,
        Moment::InvSq => -1.0 / x,
        Moment::XLogX => 0.5 * x * x * lx - 0.25 * x * x,
    }
}

impl Law1d {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Law1d::PointMass { value } => finite("dirac value", value),
            Law1d::Uniform { lower, upper } => {
                finite("uniform lower", lower)?;
                finite("uniform upper", upper)?;
                if lower < upper {
                    Ok(())
                } else {
                    Err(UqError::Domain(format!("uniform requires lower < upper, got ({lower}, {upper})")))
                }
            }
            Law1d::Trapezoid { lower, upper, half_width } => {
                Law1d::Uniform { lower, upper }.validate()?;
                positive("trapezoid half_width", half_width)
            }
            Law1d::Pareto { alpha } => positive("pareto alpha", alpha),
            Law1d::InverseGamma { alpha, beta } => {
                positive("invgamma alpha", alpha)?;
                positive("invgamma beta", beta)
            }
            Law1d::Gamma { shape, rate } => {
                positive("gamma shape", shape)?;
                positive("gamma rate", rate)
            }
            Law1d::GaussianLaw { mean, var } => {
                finite("gausslaw mean", mean)?;
                positive("gausslaw var", var)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Law1d::PointMass { .. } => "dirac",
            Law1d::Uniform { .. } => "uniform",
            Law1d::Trapezoid { .. } => "trapezoid",
            Law1d::Pareto { .. } => "pareto",
            Law1d::InverseGamma { .. } => "invgamma",
            Law1d::Gamma { .. } => "gamma",
            Law1d::GaussianLaw { .. } => "gausslaw",
        }
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self, Law1d::PointMass { .. })
    }

    /// True when every realisation is strictly positive.
    pub fn is_strictly_positive(&self) -> bool {
        match *self {
            Law1d::PointMass { value } => value > 0.0,
            Law1d::Uniform { lower, .. } => lower > 0.0,
            Law1d::Trapezoid { lower, half_width, .. } => lower - half_width > 0.0,
            Law1d::Pareto { .. } | Law1d::InverseGamma { .. } | Law1d::Gamma { .. } => true,
            Law1d::GaussianLaw { .. } => false,
        }
    }

    /// Closed interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Law1d::PointMass { value } => (value, value),
            Law1d::Uniform { lower, upper } => (lower, upper),
            Law1d::Trapezoid { lower, upper, half_width } => (lower - half_width, upper + half_width),
            Law1d::Pareto { .. } => (1.0, f64::INFINITY),
            Law1d::InverseGamma { .. } | Law1d::Gamma { .. } => (0.0, f64::INFINITY),
            Law1d::GaussianLaw { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Support endpoints plus interior kinks of the density.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Law1d::Trapezoid { lower, upper, half_width } => {
                let mut pts = vec![lower - half_width, lower + half_width, upper - half_width, upper + half_width];
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                pts
            }
            Law1d::GaussianLaw { mean, .. } => vec![f64::NEG_INFINITY, mean, f64::INFINITY],
            _ => {
                let (lo, hi) = self.support();
                vec![lo, hi]
            }
        }
    }

    /// Density with respect to Lebesgue measure; `None` for a point mass.
    pub fn density(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return Some(0.0);
        }
        let d = match *self {
            Law1d::PointMass { .. } => return None,
            Law1d::Uniform { lower, upper } => 1.0 / (upper - lower),
            Law1d::Trapezoid { lower, upper, half_width } => {
                let overlap = (upper.min(x + half_width) - lower.max(x - half_width)).max(0.0);
                overlap / (2.0 * half_width * (upper - lower))
            }
            Law1d::Pareto { alpha } => alpha * x.powf(-alpha - 1.0),
            Law1d::InverseGamma { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (alpha * beta.ln() - log_gamma(alpha).ok()? - (alpha + 1.0) * x.ln() - beta / x).exp()
                }
            }
            Law1d::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (shape * rate.ln() - log_gamma(shape).ok()? + (shape - 1.0) * x.ln() - rate * x).exp()
                }
            }
            Law1d::GaussianLaw { mean, var } => {
                (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
            }
        };
        Some(d)
    }

    pub fn mean(&self) -> f64 {
        self.closed_form(Moment::Mean).expect("every law has a tabulated mean")
    }

    /// Variance, `+∞` where it diverges.
    pub fn variance(&self) -> f64 {
        match *self {
            Law1d::PointMass { .. } => 0.0,
            Law1d::Uniform { lower, upper } => (upper - lower).powi(2) / 12.0,
            Law1d::Trapezoid { lower, upper, half_width } => {
                (upper - lower).powi(2) / 12.0 + half_width * half_width / 3.0
            }
            Law1d::Pareto { alpha } => {
                if alpha > 2.0 {
                    alpha / ((alpha - 1.0).powi(2) * (alpha - 2.0))
                } else {
                    f64::INFINITY
                }
            }
            Law1d::InverseGamma { alpha, beta } => {
                if alpha > 2.0 {
                    beta * beta / ((alpha - 1.0).powi(2) * (alpha - 2.0))
                } else {
                    f64::INFINITY
                }
            }
            Law1d::Gamma { shape, rate } => shape / (rate * rate),
            Law1d::GaussianLaw { var, .. } => var,
        }
    }

    /// Tabulated closed form of `E[m(X)]`, `+∞` where it diverges, `None`
    /// where no closed form is tabulated or the moment is undefined.
    pub fn closed_form(&self, m: Moment) -> Option<f64> {
        if m.needs_positive_support() && !self.is_strictly_positive() {
            return None;
        }
        let inf = f64::INFINITY;
        let v = match *self {
            Law1d::PointMass { value } => m.apply(value),
            Law1d::Uniform { lower, upper } | Law1d::Trapezoid { lower, upper, .. } if m == Moment::Mean => {
                0.5 * (lower + upper)
            }
            Law1d::Uniform { lower, upper } => {
                (antiderivative(m, upper) - antiderivative(m, lower)) / (upper - lower)
            }
            Law1d::Trapezoid { lower, upper, half_width: w } => {
                let h = |x| second_antiderivative(m, x);
                (h(upper + w) - h(upper - w) - h(lower + w) + h(lower - w)) / (2.0 * w * (upper - lower))
            }
            Law1d::Pareto { alpha } => match m {
                Moment::Mean => {
                    if alpha > 1.0 {
                        alpha / (alpha - 1.0)
                    } else {
                        inf
                    }
                }
                Moment::Log => 1.0 / alpha,
                Moment::Inv => alpha / (alpha + 1.0),
                Moment::InvSq => alpha / (alpha + 2.0),
                Moment::XLogX => {
                    if alpha > 1.0 {
                        alpha / (alpha - 1.0).powi(2)
                    } else {
                        inf
                    }
                }
            },
            Law1d::InverseGamma { alpha, beta } => match m {
                Moment::Mean => {
                    if alpha > 1.0 {
                        beta / (alpha - 1.0)
                    } else {
                        inf
                    }
                }
                Moment::Log => beta.ln() - digamma(alpha).ok()?,
                Moment::Inv => alpha / beta,
                Moment::InvSq => alpha * (alpha + 1.0) / (beta * beta),
                Moment::XLogX => {
                    if alpha > 1.0 {
                        beta / (alpha - 1.0) * (beta.ln() - digamma(alpha - 1.0).ok()?)
                    } else {
                        inf
                    }
                }
            },
            Law1d::Gamma { shape, rate } => match m {
                Moment::Mean => shape / rate,
                Moment::Log => digamma(shape).ok()? - rate.ln(),
                Moment::Inv => {
                    if shape > 1.0 {
                        rate / (shape - 1.0)
                    } else {
                        inf
                    }
                }
                Moment::InvSq => {
                    if shape > 2.0 {
                        rate * rate / ((shape - 1.0) * (shape - 2.0))
                    } else {
                        inf
                    }
                }
                Moment::XLogX => shape / rate * (digamma(shape + 1.0).ok()? - rate.ln()),
            },
            Law1d::GaussianLaw { mean, .. } => match m {
                Moment::Mean => mean,
                _ => return None,
            },
        };
        Some(v)
    }

    /// `E[f(X)]` by quadrature against the density (exact for a point mass).
    pub fn expect_by_quadrature<F: Fn(f64) -> f64>(&self, f: F, spec: &QuadratureSpec) -> Result<f64> {
        if let Law1d::PointMass { value } = *self {
            return Ok(f(value));
        }
        let pts = self.breakpoints();
        integrate_piecewise(
            |x| {
                let d = self.density(x).unwrap_or(0.0);
                if d == 0.0 {
                    0.0
                } else {
                    f(x) * d
                }
            },
            &pts,
            spec,
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Law1d::PointMass { value } => value,
            Law1d::Uniform { lower, upper } => lower + (upper - lower) * rng.random::<f64>(),
            Law1d::Trapezoid { lower, upper, half_width } => {
                lower + (upper - lower) * rng.random::<f64>() + half_width * (2.0 * rng.random::<f64>() - 1.0)
            }
            Law1d::Pareto { alpha } => {
                let u = 1.0 - rng.random::<f64>();
                u.powf(-1.0 / alpha)
            }
            Law1d::InverseGamma { alpha, beta } => {
                let g: f64 = Gamma::new(alpha, 1.0).expect("alpha > 0").sample(rng);
                beta / g
            }
            Law1d::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate).expect("shape, rate > 0").sample(rng),
            Law1d::GaussianLaw { mean, var } => Normal::new(mean, var.sqrt()).expect("var > 0").sample(rng),
        }
    }

    /// The law of `X + z`, for laws closed under translation.
    pub fn shifted(&self, z: f64) -> Result<Law1d> {
        if z == 0.0 {
            return Ok(self.clone());
        }
        match *self {
            Law1d::PointMass { value } => Ok(Law1d::PointMass { value: value + z }),
            Law1d::Uniform { lower, upper } => Ok(Law1d::Uniform {
                lower: lower + z,
                upper: upper + z,
            }),
            Law1d::Trapezoid { lower, upper, half_width } => Ok(Law1d::Trapezoid {
                lower: lower + z,
                upper: upper + z,
                half_width,
            }),
            Law1d::GaussianLaw { mean, var } => Ok(Law1d::GaussianLaw { mean: mean + z, var }),
            _ => Err(UqError::Unsupported(format!("location shift of a {} law", self.name()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(law: &Law1d, m: Moment) -> f64 {
        law.expect_by_quadrature(|x| m.apply(x), &QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn pareto_expectations() {
        let p = Law1d::Pareto { alpha: 1.5 };
        assert_eq!(p.mean(), 3.0);
        assert_eq!(p.variance(), f64::INFINITY);
        assert!((p.closed_form(Moment::Log).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.closed_form(Moment::Inv).unwrap() - 0.6).abs() < 1e-15);
        assert!((quad(&p, Moment::Log) - 2.0 / 3.0).abs() < 1e-8);
        assert!((quad(&p, Moment::Inv) - 0.6).abs() < 1e-8);
        assert!((quad(&p, Moment::InvSq) - p.closed_form(Moment::InvSq).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn inverse_gamma_expectations() {
        let ig = Law1d::InverseGamma { alpha: 2.1, beta: 0.5 };
        assert!((ig.mean() - 0.5 / 1.1).abs() < 1e-15);
        assert!((ig.closed_form(Moment::Inv).unwrap() - 4.2).abs() < 1e-14);
        // ln 0.5 − ψ(2.1), ψ(2.1) from an independent high-precision value
        let expected = 0.5_f64.ln() - 0.485_335_968_679_832_35;
        assert!((ig.closed_form(Moment::Log).unwrap() - expected).abs() < 1e-12);
        assert!((ig.closed_form(Moment::Log).unwrap() + 1.1785).abs() < 1e-4);
        for m in [Moment::Log, Moment::Inv, Moment::InvSq, Moment::XLogX, Moment::Mean] {
            let c = ig.closed_form(m).unwrap();
            assert!((quad(&ig, m) - c).abs() < 1e-7 * (1.0 + c.abs()), "{m:?}");
        }
        // standard variance formula
        assert!((ig.variance() - 0.25 / (1.21 * 0.1)).abs() < 1e-12);
    }

    #[test]
    fn uniform_expectations() {
        let u = Law1d::Uniform { lower: 1.0, upper: 3.0 };
        assert_eq!(u.mean(), 2.0);
        assert!((u.variance() - 1.0 / 3.0).abs() < 1e-15);
        let expected = (3.0 * 3.0_f64.ln() - 0.0) / 2.0 - 1.0;
        assert!((u.closed_form(Moment::Log).unwrap() - expected).abs() < 1e-15);
        assert!((u.closed_form(Moment::Log).unwrap() - 0.647_918).abs() < 1e-6);
        for m in [Moment::Log, Moment::Inv, Moment::InvSq, Moment::XLogX] {
            assert!((quad(&u, m) - u.closed_form(m).unwrap()).abs() < 1e-10, "{m:?}");
        }
    }

    #[test]
    fn gamma_and_trapezoid_closed_forms_match_quadrature() {
        let laws = [
            Law1d::Gamma { shape: 3.5, rate: 2.0 },
            Law1d::Trapezoid { lower: 1.0, upper: 3.0, half_width: 0.5 },
            Law1d::Trapezoid { lower: 2.0, upper: 2.5, half_width: 1.5 },
        ];
        for law in &laws {
            for m in [Moment::Mean, Moment::Log, Moment::Inv, Moment::InvSq, Moment::XLogX] {
                let c = law.closed_form(m).unwrap();
                assert!((quad(law, m) - c).abs() < 1e-8 * (1.0 + c.abs()), "{law:?} {m:?}: {c}");
            }
            let mean = law.mean();
            let var = law.expect_by_quadrature(|x| (x - mean).powi(2), &QuadratureSpec::default()).unwrap();
            assert!((var - law.variance()).abs() < 1e-8);
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        let laws = [
            Law1d::Uniform { lower: -1.0, upper: 2.0 },
            Law1d::Trapezoid { lower: 1.0, upper: 3.0, half_width: 0.5 },
            Law1d::Pareto { alpha: 1.5 },
            Law1d::InverseGamma { alpha: 2.1, beta: 0.5 },
            Law1d::Gamma { shape: 2.0, rate: 2.0 },
            Law1d::GaussianLaw { mean: 1.0, var: 4.0 },
        ];
        for law in &laws {
            let total = law.expect_by_quadrature(|_| 1.0, &QuadratureSpec::default()).unwrap();
            assert!((total - 1.0).abs() < 1e-9, "{law:?}: {total}");
        }
    }

    #[test]
    fn positivity_and_undefined_moments() {
        let g = Law1d::GaussianLaw { mean: 0.0, var: 1.0 };
        assert!(!g.is_strictly_positive());
        assert_eq!(g.closed_form(Moment::Log), None);
        let u = Law1d::Uniform { lower: -1.0, upper: 1.0 };
        assert_eq!(u.closed_form(Moment::Inv), None);
        assert_eq!(Law1d::Gamma { shape: 0.5, rate: 1.0 }.closed_form(Moment::Inv), Some(f64::INFINITY));
    }

    #[test]
    fn shift_and_validation() {
        let u = Law1d::Uniform { lower: 1.0, upper: 3.0 };
        assert_eq!(u.shifted(2.0).unwrap(), Law1d::Uniform { lower: 3.0, upper: 5.0 });
        assert!(Law1d::Pareto { alpha: 1.5 }.shifted(1.0).is_err());
        assert!(Law1d::Uniform { lower: 3.0, upper: 1.0 }.validate().is_err());
        assert!(Law1d::Pareto { alpha: 0.0 }.validate().is_err());
    }

    #[test]
    fn serde_uses_config_vocabulary() {
        let j = serde_json::to_string(&Law1d::InverseGamma { alpha: 2.1, beta: 0.5 }).unwrap();
        assert_eq!(j, r#"{"law":"invgamma","alpha":2.1,"beta":0.5}"#);
        let back: Law1d = serde_json::from_str(r#"{"law":"dirac","value":3.0}"#).unwrap();
        assert_eq!(back, Law1d::PointMass { value: 3.0 });
    }
}
