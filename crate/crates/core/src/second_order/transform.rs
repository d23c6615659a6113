//! Mean-preserving spreads and spread-preserving location shifts.
//!
//! Each supported `(law, perturbation)` pair maps to an exact resulting law
//! so that closed-form measures remain available after the transformation.

use serde::{Deserialize, Serialize};

use super::{Law1d, SecondOrderDist, SecondOrderLaw};
use crate::error::{Result, UqError};

/// Zero-mean perturbation of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    None,
    /// `Z ~ Uniform(−w, w)`
    UniformWidth(f64),
    /// `Z = ±d` with probability ½ each.
    SymmetricDiracSplit(f64),
}

impl Perturbation {
    fn magnitude(self) -> f64 {
        match self {
            Perturbation::None => 0.0,
            Perturbation::UniformWidth(w) | Perturbation::SymmetricDiracSplit(w) => w,
        }
    }
}

/// One perturbation per parameter coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadSpec(pub Vec<Perturbation>);

impl SpreadSpec {
    /// Perturbs a single coordinate and leaves the others untouched.
    pub fn single(dim: usize, coordinate: usize, perturbation: Perturbation) -> Self {
        let mut v = vec![Perturbation::None; dim];
        v[coordinate] = perturbation;
        SpreadSpec(v)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.0.len() != dim {
            return Err(UqError::Usage(format!("spread has {} coordinates, expected {dim}", self.0.len())));
        }
        for p in &self.0 {
            let m = p.magnitude();
            if !(m.is_finite() && m >= 0.0) || (*p != Perturbation::None && m == 0.0) {
                return Err(UqError::Usage(format!("invalid perturbation {p:?}")));
            }
        }
        if self.0.iter().all(|p| *p == Perturbation::None) {
            return Err(UqError::Usage("a spread needs at least one coordinate with positive variance".into()));
        }
        Ok(())
    }
}

/// Constant shift `z ≠ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftVector(pub Vec<f64>);

impl SecondOrderDist {
    fn check_lower_bound(&self, coordinate: usize, lowest: f64) -> Result<()> {
        if self.family.is_positive_coordinate(coordinate) && lowest <= 0.0 {
            return Err(UqError::Constraint(format!(
                "{} would reach {lowest}, leaving Θ",
                self.family.param_names()[coordinate]
            )));
        }
        Ok(())
    }

    fn split_members(&self, members: &[Vec<f64>], spec: &SpreadSpec) -> Result<Vec<Vec<f64>>> {
        let mut out: Vec<Vec<f64>> = members.to_vec();
        for (i, p) in spec.0.iter().enumerate() {
            match *p {
                Perturbation::None => {}
                Perturbation::SymmetricDiracSplit(d) => {
                    let lowest = members.iter().map(|m| m[i]).fold(f64::INFINITY, f64::min) - d;
                    self.check_lower_bound(i, lowest)?;
                    out = out
                        .into_iter()
                        .flat_map(|m| {
                            let mut lo = m.clone();
                            let mut hi = m;
                            lo[i] -= d;
                            hi[i] += d;
                            [lo, hi]
                        })
                        .collect();
                }
                Perturbation::UniformWidth(_) => unreachable!("filtered by caller"),
            }
        }
        Ok(out)
    }

    /// `Q′` with `ϑ′ = ϑ + Z`, `E[Z] = 0`, independent of `ϑ`.
    pub fn mean_preserving_spread(&self, spec: &SpreadSpec) -> Result<SecondOrderDist> {
        spec.validate(self.family.param_dim())?;
        let has_split = spec.0.iter().any(|p| matches!(p, Perturbation::SymmetricDiracSplit(_)));
        let has_width = spec.0.iter().any(|p| matches!(p, Perturbation::UniformWidth(_)));
        let law = match &self.law {
            SecondOrderLaw::Dirac { theta } if !has_width => SecondOrderLaw::Mixture {
                members: self.split_members(std::slice::from_ref(theta), spec)?,
            },
            SecondOrderLaw::Mixture { members } if !has_width => SecondOrderLaw::Mixture {
                members: self.split_members(members, spec)?,
            },
            SecondOrderLaw::Dirac { theta } if !has_split => {
                let marginals = theta.iter().map(|&v| Law1d::PointMass { value: v }).collect();
                return SecondOrderDist::new(self.family, SecondOrderLaw::Product { marginals })?
                    .mean_preserving_spread(spec);
            }
            SecondOrderLaw::Product { marginals } => {
                let mut out = Vec::with_capacity(marginals.len());
                for (i, (law, p)) in marginals.iter().zip(&spec.0).enumerate() {
                    let spread = match (law, *p) {
                        (_, Perturbation::None) => law.clone(),
                        (Law1d::PointMass { value }, Perturbation::UniformWidth(w)) => {
                            self.check_lower_bound(i, value - w)?;
                            Law1d::Uniform {
                                lower: value - w,
                                upper: value + w,
                            }
                        }
                        (Law1d::Uniform { lower, upper }, Perturbation::UniformWidth(w)) => {
                            self.check_lower_bound(i, lower - w)?;
                            Law1d::Trapezoid {
                                lower: *lower,
                                upper: *upper,
                                half_width: w,
                            }
                        }
                        (law, p) => {
                            return Err(UqError::Unsupported(format!("{p:?} spread of a {} marginal", law.name())))
                        }
                    };
                    out.push(spread);
                }
                SecondOrderLaw::Product { marginals: out }
            }
            other => {
                return Err(UqError::Unsupported(format!(
                    "spread {:?} of a {} law",
                    spec.0,
                    law_name(other)
                )))
            }
        };
        SecondOrderDist::new(self.family, law)
    }

    /// `Q′` with `ϑ′ = ϑ + z`.
    pub fn location_shift(&self, z: &ShiftVector) -> Result<SecondOrderDist> {
        let p = self.family.param_dim();
        if z.0.len() != p {
            return Err(UqError::Usage(format!("shift has {} coordinates, expected {p}", z.0.len())));
        }
        if z.0.iter().any(|v| !v.is_finite()) || z.0.iter().all(|&v| v == 0.0) {
            return Err(UqError::Usage("shift must be finite and non-zero".into()));
        }
        let add = |theta: &[f64]| -> Vec<f64> { theta.iter().zip(&z.0).map(|(a, b)| a + b).collect() };
        let law = match &self.law {
            SecondOrderLaw::Dirac { theta } => SecondOrderLaw::Dirac { theta: add(theta) },
            SecondOrderLaw::Mixture { members } => SecondOrderLaw::Mixture {
                members: members.iter().map(|m| add(m)).collect(),
            },
            SecondOrderLaw::Nig { gamma, upsilon, alpha, beta } => {
                if z.0[1] != 0.0 {
                    return Err(UqError::Unsupported("shifting σ² of a NIG law".into()));
                }
                SecondOrderLaw::Nig {
                    gamma: gamma + z.0[0],
                    upsilon: *upsilon,
                    alpha: *alpha,
                    beta: *beta,
                }
            }
            SecondOrderLaw::Product { marginals } => SecondOrderLaw::Product {
                marginals: marginals
                    .iter()
                    .zip(&z.0)
                    .map(|(l, &s)| l.shifted(s))
                    .collect::<Result<_>>()?,
            },
        };
        SecondOrderDist::new(self.family, law).map_err(|e| match e {
            UqError::Domain(msg) => UqError::Constraint(format!("shifted law leaves Θ: {msg}")),
            other => other,
        })
    }
}

fn law_name(law: &SecondOrderLaw) -> &'static str {
    match law {
        SecondOrderLaw::Dirac { .. } => "dirac",
        SecondOrderLaw::Mixture { .. } => "mixture",
        SecondOrderLaw::Nig { .. } => "nig",
        SecondOrderLaw::Product { .. } => "product",
    }
}
