//! Second-order distributions `Q` over the first-order parameter space Θ.
//!
//! Four representations are supported: a point mass, an equally weighted
//! ensemble of parameter vectors, the Normal–Inverse-Gamma prior over
//! `(μ, σ²)`, and products of independent 1-D coordinate laws. Every
//! measure in [`crate::measures`] reduces to expectations of functions of a
//! single coordinate, so a [`Coordinate`] view per parameter is all the
//! downstream code needs.

mod law;
mod transform;

pub use law::{Law1d, Moment};
pub use transform::{Perturbation, ShiftVector, SpreadSpec};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, UqError};
use crate::expfam::{validate_values, Family, ParamPoint};
use crate::numerics::{exact_mean, population_variance, QuadratureSpec, RandomnessContract};

/// The representation of `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum SecondOrderLaw {
    Dirac { theta: Vec<f64> },
    /// Equally weighted members (a deep ensemble).
    Mixture { members: Vec<Vec<f64>> },
    /// `μ | σ² ~ N(γ, σ²/υ)`, `σ² ~ Γ⁻¹(α, β)`.
    Nig { gamma: f64, upsilon: f64, alpha: f64, beta: f64 },
    /// Independent coordinate marginals.
    Product { marginals: Vec<Law1d> },
}

/// A validated second-order distribution for a given first-order family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSecondOrder")]
pub struct SecondOrderDist {
    family: Family,
    #[serde(flatten)]
    law: SecondOrderLaw,
}

#[derive(Deserialize)]
struct RawSecondOrder {
    family: Family,
    #[serde(flatten)]
    law: SecondOrderLaw,
}

impl TryFrom<RawSecondOrder> for SecondOrderDist {
    type Error = UqError;

    fn try_from(raw: RawSecondOrder) -> Result<Self> {
        SecondOrderDist::new(raw.family, raw.law)
    }
}

/// Per-coordinate moments of `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalMoments {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub e_log: Vec<Option<f64>>,
    pub e_inv: Vec<Option<f64>>,
}

/// How an expectation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    ClosedForm,
    Quadrature,
}

/// Controls whether tabulated closed forms are used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluator {
    pub prefer_closed_form: bool,
    pub quadrature: QuadratureSpec,
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator {
            prefer_closed_form: true,
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// Marginal view of a single parameter coordinate under `Q`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coordinate {
    /// Equally weighted atoms (Dirac and mixture coordinates).
    Atoms(Vec<f64>),
    Law(Law1d),
    /// The μ-marginal of a NIG law: a Student-t with the given moments.
    NigLocation { mean: f64, variance: f64 },
}

impl Coordinate {
    pub fn mean(&self) -> f64 {
        match self {
            Coordinate::Atoms(a) => exact_mean(a),
            Coordinate::Law(l) => l.mean(),
            Coordinate::NigLocation { mean, .. } => *mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Coordinate::Atoms(a) => population_variance(a),
            Coordinate::Law(l) => l.variance(),
            Coordinate::NigLocation { variance, .. } => *variance,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match self {
            Coordinate::Atoms(a) => a.iter().all(|&v| v == a[0]),
            Coordinate::Law(l) => l.is_point_mass(),
            Coordinate::NigLocation { .. } => false,
        }
    }

    /// `E[m(X)]` for this coordinate.
    pub fn expect(&self, m: Moment, eval: &Evaluator) -> Result<(f64, Evaluation)> {
        match self {
            Coordinate::Atoms(a) => {
                if m.needs_positive_support() && a.iter().any(|&v| v <= 0.0) {
                    return Err(UqError::Domain(format!("{m:?} needs a positive coordinate")));
                }
                let vals: Vec<f64> = a.iter().map(|&v| m.apply(v)).collect();
                Ok((exact_mean(&vals), Evaluation::ClosedForm))
            }
            Coordinate::Law(l) => {
                let closed = l.closed_form(m);
                match closed {
                    Some(v) if eval.prefer_closed_form || l.is_point_mass() || v.is_infinite() => {
                        Ok((v, Evaluation::ClosedForm))
                    }
                    _ => {
                        if m.needs_positive_support() && !l.is_strictly_positive() {
                            return Err(UqError::Domain(format!("{m:?} needs a positive coordinate")));
                        }
                        let v = l.expect_by_quadrature(|x| m.apply(x), &eval.quadrature)?;
                        Ok((v, Evaluation::Quadrature))
                    }
                }
            }
            Coordinate::NigLocation { mean, .. } => match m {
                Moment::Mean => Ok((*mean, Evaluation::ClosedForm)),
                _ => Err(UqError::Unsupported(format!("{m:?} of the NIG location marginal"))),
            },
        }
    }

    /// `E[f(X)]` for an arbitrary function: exact on atoms, quadrature on
    /// continuous laws.
    pub fn expect_fn<F: Fn(f64) -> f64>(&self, f: F, eval: &Evaluator) -> Result<(f64, Evaluation)> {
        match self {
            Coordinate::Atoms(a) => {
                let vals: Vec<f64> = a.iter().map(|&v| f(v)).collect();
                Ok((exact_mean(&vals), Evaluation::ClosedForm))
            }
            Coordinate::Law(l) => {
                let v = l.expect_by_quadrature(f, &eval.quadrature)?;
                let how = if l.is_point_mass() {
                    Evaluation::ClosedForm
                } else {
                    Evaluation::Quadrature
                };
                Ok((v, how))
            }
            Coordinate::NigLocation { .. } => {
                Err(UqError::Unsupported("arbitrary expectations over the NIG location marginal".into()))
            }
        }
    }
}

impl SecondOrderDist {
    pub fn new(family: Family, law: SecondOrderLaw) -> Result<Self> {
        let p = family.param_dim();
        match &law {
            SecondOrderLaw::Dirac { theta } => validate_values(family, theta)?,
            SecondOrderLaw::Mixture { members } => {
                if members.is_empty() {
                    return Err(UqError::Domain("mixture needs at least one member".into()));
                }
                for m in members {
                    validate_values(family, m)?;
                }
            }
            SecondOrderLaw::Nig { gamma, upsilon, alpha, beta } => {
                if family != Family::Gaussian {
                    return Err(UqError::Domain(format!("NIG is only defined over Gaussian parameters, not {family}")));
                }
                if !gamma.is_finite() {
                    return Err(UqError::Domain("NIG gamma must be finite".into()));
                }
                if !(upsilon.is_finite() && *upsilon > 0.0) {
                    return Err(UqError::Domain(format!("NIG upsilon must be > 0, got {upsilon}")));
                }
                if !(alpha.is_finite() && *alpha > 1.0) {
                    return Err(UqError::Domain(format!("NIG alpha must be > 1, got {alpha}")));
                }
                if !(beta.is_finite() && *beta > 0.0) {
                    return Err(UqError::Domain(format!("NIG beta must be > 0, got {beta}")));
                }
            }
            SecondOrderLaw::Product { marginals } => {
                if marginals.len() != p {
                    return Err(UqError::Domain(format!(
                        "{family} expects {p} coordinate laws, got {}",
                        marginals.len()
                    )));
                }
                for (i, l) in marginals.iter().enumerate() {
                    l.validate()?;
                    if family.is_positive_coordinate(i) && !l.is_strictly_positive() {
                        return Err(UqError::Domain(format!(
                            "{} law on {} must be supported in (0, ∞)",
                            l.name(),
                            family.param_names()[i]
                        )));
                    }
                }
            }
        }
        Ok(SecondOrderDist { family, law })
    }

    pub fn dirac(theta: &ParamPoint) -> Self {
        SecondOrderDist {
            family: theta.family(),
            law: SecondOrderLaw::Dirac {
                theta: theta.values().to_vec(),
            },
        }
    }

    pub fn mixture(family: Family, members: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(family, SecondOrderLaw::Mixture { members })
    }

    pub fn nig(gamma: f64, upsilon: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Gaussian, SecondOrderLaw::Nig { gamma, upsilon, alpha, beta })
    }

    pub fn product(family: Family, marginals: Vec<Law1d>) -> Result<Self> {
        Self::new(family, SecondOrderLaw::Product { marginals })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn law(&self) -> &SecondOrderLaw {
        &self.law
    }

    pub fn coordinate(&self, i: usize) -> Coordinate {
        match &self.law {
            SecondOrderLaw::Dirac { theta } => Coordinate::Atoms(vec![theta[i]]),
            SecondOrderLaw::Mixture { members } => Coordinate::Atoms(members.iter().map(|m| m[i]).collect()),
            SecondOrderLaw::Nig { gamma, upsilon, alpha, beta } => {
                if i == 0 {
                    Coordinate::NigLocation {
                        mean: *gamma,
                        variance: beta / (upsilon * (alpha - 1.0)),
                    }
                } else {
                    Coordinate::Law(Law1d::InverseGamma {
                        alpha: *alpha,
                        beta: *beta,
                    })
                }
            }
            SecondOrderLaw::Product { marginals } => Coordinate::Law(marginals[i].clone()),
        }
    }

    pub fn coordinates(&self) -> Vec<Coordinate> {
        (0..self.family.param_dim()).map(|i| self.coordinate(i)).collect()
    }

    /// `θ̄ = E_Q[ϑ]`.
    pub fn mean_params(&self) -> Result<ParamPoint> {
        let means: Vec<f64> = self.coordinates().iter().map(Coordinate::mean).collect();
        if let Some(i) = means.iter().position(|m| !m.is_finite()) {
            return Err(UqError::DivergingMoment(format!(
                "E_Q[{}] is infinite",
                self.family.param_names()[i]
            )));
        }
        ParamPoint::new(self.family, means)
    }

    pub fn marginal_moments(&self) -> MarginalMoments {
        self.marginal_moments_with(&Evaluator::default())
    }

    pub fn marginal_moments_with(&self, eval: &Evaluator) -> MarginalMoments {
        let coords = self.coordinates();
        let optional = |i: usize, c: &Coordinate, m: Moment| {
            if self.family.is_positive_coordinate(i) {
                c.expect(m, eval).ok().map(|(v, _)| v)
            } else {
                None
            }
        };
        MarginalMoments {
            mean: coords.iter().map(Coordinate::mean).collect(),
            variance: coords.iter().map(Coordinate::variance).collect(),
            e_log: coords.iter().enumerate().map(|(i, c)| optional(i, c, Moment::Log)).collect(),
            e_inv: coords.iter().enumerate().map(|(i, c)| optional(i, c, Moment::Inv)).collect(),
        }
    }

    /// True iff every coordinate is degenerate.
    pub fn is_dirac(&self) -> bool {
        match &self.law {
            SecondOrderLaw::Nig { .. } => false,
            _ => self.coordinates().iter().all(Coordinate::is_degenerate),
        }
    }

    pub(crate) fn draw_values<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.law {
            SecondOrderLaw::Dirac { theta } => theta.clone(),
            SecondOrderLaw::Mixture { members } => members[rng.random_range(0..members.len())].clone(),
            SecondOrderLaw::Nig { gamma, upsilon, alpha, beta } => {
                let s2 = Law1d::InverseGamma {
                    alpha: *alpha,
                    beta: *beta,
                }
                .sample(rng);
                let mu = Normal::new(*gamma, (s2 / upsilon).sqrt()).expect("finite scale").sample(rng);
                vec![mu, s2]
            }
            SecondOrderLaw::Product { marginals } => marginals.iter().map(|l| l.sample(rng)).collect(),
        }
    }

    /// One draw `ϑ ~ Q`. Extreme tails can underflow a positive coordinate
    /// to zero in floating point; such draws are rejected and redrawn.
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamPoint {
        loop {
            if let Ok(p) = ParamPoint::new(self.family, self.draw_values(rng)) {
                return p;
            }
        }
    }

    /// `n` i.i.d. draws `ϑ ~ Q`.
    pub fn sample_params(&self, rng: RandomnessContract, n: usize) -> Result<Vec<ParamPoint>> {
        if n == 0 {
            return Err(UqError::Usage("sample size must be at least 1".into()));
        }
        let mut r = rng.rng();
        Ok((0..n).map(|_| self.draw(&mut r)).collect())
    }
}
