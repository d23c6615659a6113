//! First-order predictive families: Gaussian `(μ, σ²)`, Exponential `λ` and
//! Poisson `λ`, with closed-form moments, entropy and KL divergence.
//!
//! The canonical form `h(y) exp(⟨η, S(y)⟩ − A)` is exposed through
//! [`natural_form`] and drives [`log_density`]; the closed forms for
//! entropy and KL are computed directly.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Result, UqError};
use crate::numerics::{log_gamma, RandomnessContract};

/// The predictive family of `Y | θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Parameters `(μ, σ²)`, variance parameterisation.
    Gaussian,
    /// Rate `λ`.
    Exponential,
    /// Rate `λ`.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    ContinuousReal,
    NonnegativeInteger,
}

/// `E[Y | θ] = slope · θ[coordinate] + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMean {
    pub coordinate: usize,
    pub slope: f64,
    pub intercept: f64,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gaussian, Family::Exponential, Family::Poisson];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Exponential => "exponential",
            Family::Poisson => "poisson",
        }
    }

    pub fn param_dim(self) -> usize {
        match self {
            Family::Gaussian => 2,
            Family::Exponential | Family::Poisson => 1,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Gaussian => &["mu", "sigma2"],
            Family::Exponential | Family::Poisson => &["lambda"],
        }
    }

    pub fn outcome_kind(self) -> OutcomeKind {
        match self {
            Family::Poisson => OutcomeKind::NonnegativeInteger,
            _ => OutcomeKind::ContinuousReal,
        }
    }

    /// Whether coordinate `i` is constrained to `(0, ∞)`.
    pub fn is_positive_coordinate(self, i: usize) -> bool {
        match self {
            Family::Gaussian => i == 1,
            Family::Exponential | Family::Poisson => i == 0,
        }
    }

    /// The coordinate the mean is affine in, if any. The exponential mean
    /// `1/λ` is not linear.
    pub fn mean_linear_in(self) -> Option<LinearMean> {
        match self {
            Family::Gaussian | Family::Poisson => Some(LinearMean {
                coordinate: 0,
                slope: 1.0,
                intercept: 0.0,
            }),
            Family::Exponential => None,
        }
    }

    /// Index of the parameter along which the first-order variance moves.
    pub fn variance_coordinate(self) -> usize {
        match self {
            Family::Gaussian => 1,
            Family::Exponential | Family::Poisson => 0,
        }
    }

    pub fn coordinate_index(self, name: &str) -> Option<usize> {
        self.param_names().iter().position(|n| *n == name)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = UqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Family::Gaussian),
            "exponential" => Ok(Family::Exponential),
            "poisson" => Ok(Family::Poisson),
            other => Err(UqError::Usage(format!("unknown family `{other}`"))),
        }
    }
}

/// A first-order parameter vector θ ∈ Θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    family: Family,
    values: Vec<f64>,
}

impl ParamPoint {
    pub fn new(family: Family, values: Vec<f64>) -> Result<Self> {
        validate_values(family, &values)?;
        Ok(ParamPoint { family, values })
    }

    pub fn gaussian(mu: f64, sigma2: f64) -> Result<Self> {
        Self::new(Family::Gaussian, vec![mu, sigma2])
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::new(Family::Exponential, vec![lambda])
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(Family::Poisson, vec![lambda])
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub(crate) fn validate_values(family: Family, values: &[f64]) -> Result<()> {
    if values.len() != family.param_dim() {
        return Err(UqError::Domain(format!(
            "{family} expects {} parameters, got {}",
            family.param_dim(),
            values.len()
        )));
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(UqError::Domain(format!("{family} parameter {} is not finite", family.param_names()[i])));
        }
        if family.is_positive_coordinate(i) && v <= 0.0 {
            return Err(UqError::Domain(format!(
                "{family} parameter {} must be > 0, got {v}",
                family.param_names()[i]
            )));
        }
    }
    Ok(())
}

/// Natural-parameter view of a [`ParamPoint`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalForm {
    pub eta: Vec<f64>,
    pub log_partition: f64,
    pub sufficient_stat_dim: usize,
}

/// `(E[Y | θ], V[Y | θ])`.
pub fn mean_var(theta: &ParamPoint) -> (f64, f64) {
    let v = &theta.values;
    match theta.family {
        Family::Gaussian => (v[0], v[1]),
        Family::Exponential => (1.0 / v[0], 1.0 / (v[0] * v[0])),
        Family::Poisson => (v[0], v[0]),
    }
}

/// Above this rate the Poisson entropy switches to its asymptotic series.
const POISSON_ASYMPTOTIC_RATE: f64 = 1e4;

fn poisson_entropy(lambda: f64) -> f64 {
    if lambda > POISSON_ASYMPTOTIC_RATE {
        let inv = 1.0 / lambda;
        return 0.5 * (2.0 * PI * E * lambda).ln()
            - inv * (1.0 / 12.0 + inv * (1.0 / 24.0 + inv * 19.0 / 360.0));
    }
    // Sum −p log p outward from the mode with the recurrence
    // log p(k) = log p(k−1) + log λ − log k. The upper window reaches
    // ⌈λ + 12√λ + 30⌉ and continues until a term drops below 1e-14; below the
    // mirrored window the same stopping rule applies.
    let ln_lambda = lambda.ln();
    let term = |log_p: f64| -> f64 {
        let p = log_p.exp();
        if p == 0.0 {
            0.0
        } else {
            -p * log_p
        }
    };
    let mode = lambda.floor();
    let log_p_mode = mode * ln_lambda - lambda - log_gamma(mode + 1.0).expect("k + 1 > 0");
    let upper = lambda + 12.0 * lambda.sqrt() + 30.0;
    let lower = lambda - 12.0 * lambda.sqrt() - 30.0;
    let mut total = term(log_p_mode);
    let (mut k, mut log_p) = (mode, log_p_mode);
    loop {
        k += 1.0;
        log_p += ln_lambda - k.ln();
        let t = term(log_p);
        total += t;
        if k >= upper && t.abs() < 1e-14 {
            break;
        }
    }
    let (mut k, mut log_p) = (mode, log_p_mode);
    while k > 0.0 {
        log_p -= ln_lambda - k.ln();
        k -= 1.0;
        let t = term(log_p);
        total += t;
        if k <= lower && t.abs() < 1e-14 {
            break;
        }
    }
    total
}

/// Shannon (differential for continuous families) entropy of `P_θ`.
pub fn entropy(theta: &ParamPoint) -> f64 {
    let v = &theta.values;
    match theta.family {
        Family::Gaussian => 0.5 * (2.0 * PI * E * v[1]).ln(),
        Family::Exponential => 1.0 - v[0].ln(),
        Family::Poisson => poisson_entropy(v[0]),
    }
}

/// `D_KL(P_from ‖ P_to)`.
pub fn kl_divergence(from: &ParamPoint, to: &ParamPoint) -> Result<f64> {
    if from.family != to.family {
        return Err(UqError::Usage(format!(
            "KL divergence between {} and {}",
            from.family, to.family
        )));
    }
    let (a, b) = (&from.values, &to.values);
    let kl = match from.family {
        Family::Gaussian => {
            0.5 * (b[1] / a[1]).ln() + (a[1] + (a[0] - b[0]).powi(2)) / (2.0 * b[1]) - 0.5
        }
        Family::Exponential => a[0].ln() - b[0].ln() + b[0] / a[0] - 1.0,
        Family::Poisson => a[0] * (a[0] / b[0]).ln() - a[0] + b[0],
    };
    // rounding can leave −ulp for nearly equal parameters
    Ok(kl.max(0.0))
}

/// The canonical exponential-family representation of `P_θ`.
pub fn natural_form(theta: &ParamPoint) -> NaturalForm {
    let v = &theta.values;
    match theta.family {
        Family::Gaussian => {
            let (mu, s2) = (v[0], v[1]);
            NaturalForm {
                eta: vec![mu / s2, -0.5 / s2],
                log_partition: mu * mu / (2.0 * s2) + 0.5 * (2.0 * PI * s2).ln(),
                sufficient_stat_dim: 2,
            }
        }
        Family::Exponential => NaturalForm {
            eta: vec![-v[0]],
            log_partition: -v[0].ln(),
            sufficient_stat_dim: 1,
        },
        Family::Poisson => NaturalForm {
            eta: vec![v[0].ln()],
            log_partition: v[0],
            sufficient_stat_dim: 1,
        },
    }
}

/// `log p(y | θ)` evaluated through the canonical form.
///
/// Continuous outcomes outside the support give `−∞`; a Poisson outcome that
/// is not a nonnegative integer is a domain error.
pub fn log_density(theta: &ParamPoint, y: f64) -> Result<f64> {
    let nf = natural_form(theta);
    match theta.family {
        Family::Gaussian => Ok(nf.eta[0] * y + nf.eta[1] * y * y - nf.log_partition),
        Family::Exponential => {
            if y < 0.0 {
                Ok(f64::NEG_INFINITY)
            } else {
                Ok(nf.eta[0] * y - nf.log_partition)
            }
        }
        Family::Poisson => {
            if !(y >= 0.0 && y.fract() == 0.0 && y.is_finite()) {
                return Err(UqError::Domain(format!("Poisson outcome must be a nonnegative integer, got {y}")));
            }
            let log_h = -log_gamma(y + 1.0)?;
            Ok(log_h + nf.eta[0] * y - nf.log_partition)
        }
    }
}

/// Draws one outcome from `P_θ` using a caller-supplied generator.
pub(crate) fn draw_outcome<R: Rng + ?Sized>(theta: &ParamPoint, rng: &mut R) -> f64 {
    let v = &theta.values;
    match theta.family {
        Family::Gaussian => Normal::new(v[0], v[1].sqrt()).expect("σ² > 0").sample(rng),
        Family::Exponential => Exp::new(v[0]).expect("λ > 0").sample(rng),
        Family::Poisson => Poisson::new(v[0]).expect("λ > 0").sample(rng),
    }
}

/// `n` i.i.d. draws from `P_θ`.
pub fn sample_outcome(theta: &ParamPoint, rng: RandomnessContract, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(UqError::Usage("sample size must be at least 1".into()));
    }
    let mut r = rng.rng();
    Ok((0..n).map(|_| draw_outcome(theta, &mut r)).collect())
}
