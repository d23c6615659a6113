//! Brute-force reference estimators for the closed forms.
//!
//! Densities and conditional moments are re-derived here rather than taken
//! from [`crate::expfam`], so that an error in a closed form cannot hide in
//! the estimator meant to catch it. Only the samplers are shared.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UqError};
use crate::expfam::{draw_outcome, Family, ParamPoint};
use crate::measures::{MC_BATCHES, MIN_MC_SAMPLES};
use crate::numerics::{batch_mean_se, integrate_piecewise_counted, log_gamma, QuadratureSpec, RandomnessContract};
use crate::second_order::{Law1d, SecondOrderDist, SecondOrderLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    NestedMc,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub value: f64,
    /// Present iff `method` is [`OracleMethod::NestedMc`].
    pub standard_error: Option<f64>,
    pub method: OracleMethod,
    /// Sample size for Monte Carlo, subintervals for quadrature.
    pub n_or_subdivisions: u64,
}

impl OracleEstimate {
    fn mc(batches: &[f64], n: usize) -> Self {
        let (value, se) = batch_mean_se(batches);
        OracleEstimate {
            value,
            standard_error: Some(se),
            method: OracleMethod::NestedMc,
            n_or_subdivisions: n as u64,
        }
    }

    /// Standard error, zero for quadrature.
    pub fn se(&self) -> f64 {
        self.standard_error.unwrap_or(0.0)
    }

    /// True when `target` lies within `k` standard errors (or `abs_tol`).
    pub fn agrees_with(&self, target: f64, k: f64, abs_tol: f64) -> bool {
        (self.value - target).abs() <= (k * self.se()).max(abs_tol)
    }
}

/// The three terms of `H(Y) = H(Y | ϑ) + I(Y; ϑ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyDecomposition {
    pub h_marginal: OracleEstimate,
    pub h_conditional: OracleEstimate,
    pub mutual_info: OracleEstimate,
}

/// The three terms of the law of total variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceDecomposition {
    pub total: OracleEstimate,
    pub aleatoric: OracleEstimate,
    pub epistemic: OracleEstimate,
}

impl VarianceDecomposition {
    /// `total − aleatoric − epistemic`.
    pub fn residual(&self) -> f64 {
        self.total.value - self.aleatoric.value - self.epistemic.value
    }

    /// Root sum of squares of the three standard errors.
    pub fn combined_se(&self) -> f64 {
        (self.total.se().powi(2) + self.aleatoric.se().powi(2) + self.epistemic.se().powi(2)).sqrt()
    }
}

fn log_pdf(family: Family, theta: &[f64], y: f64) -> f64 {
    match family {
        Family::Gaussian => {
            let d = y - theta[0];
            -0.5 * (2.0 * PI * theta[1]).ln() - d * d / (2.0 * theta[1])
        }
        Family::Exponential => {
            if y < 0.0 {
                f64::NEG_INFINITY
            } else {
                theta[0].ln() - theta[0] * y
            }
        }
        Family::Poisson => y * theta[0].ln() - theta[0] - log_gamma(y + 1.0).expect("y ≥ 0"),
    }
}

fn conditional_mean_var(family: Family, theta: &[f64]) -> (f64, f64) {
    match family {
        Family::Gaussian => (theta[0], theta[1]),
        Family::Exponential => {
            let m = theta[0].recip();
            (m, m * m)
        }
        Family::Poisson => (theta[0], theta[0]),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < MIN_MC_SAMPLES {
        return Err(UqError::Usage(format!("oracle needs n ≥ {MIN_MC_SAMPLES}, got {n}")));
    }
    Ok(())
}

fn log_mean_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + (xs.iter().map(|x| (x - m).exp()).sum::<f64>() / xs.len() as f64).ln()
}

/// Nested Monte Carlo estimates of marginal entropy, conditional entropy and
/// mutual information from `n` ancestral pairs `(ϑ_i, y_i)`.
pub fn mc_entropy_decomposition(q: &SecondOrderDist, rng: RandomnessContract, n: usize) -> Result<EntropyDecomposition> {
    check_n(n)?;
    let family = q.family();
    let per = n.div_ceil(MC_BATCHES);
    let k = (n as f64).sqrt().floor() as usize;
    let exact: Option<Vec<Vec<f64>>> = match q.law() {
        SecondOrderLaw::Mixture { members } => Some(members.clone()),
        SecondOrderLaw::Dirac { theta } => Some(vec![theta.clone()]),
        _ => None,
    };
    let batches: Vec<(f64, f64)> = (0..MC_BATCHES as u64)
        .into_par_iter()
        .map(|b| {
            let stream = rng.substream(b);
            let mut outer = stream.substream(10).rng();
            let inner: Vec<Vec<f64>> = match &exact {
                Some(m) => m.clone(),
                None => {
                    let mut r = stream.substream(11).rng();
                    (0..k).map(|_| q.draw(&mut r).into_values()).collect()
                }
            };
            let mut buf = vec![0.0; inner.len()];
            let (mut h_marg, mut h_cond) = (0.0, 0.0);
            for _ in 0..per {
                let theta = q.draw(&mut outer);
                let y = draw_outcome(&theta, &mut outer);
                h_cond -= log_pdf(family, theta.values(), y);
                for (slot, t) in buf.iter_mut().zip(&inner) {
                    *slot = log_pdf(family, t, y);
                }
                h_marg -= log_mean_exp(&buf);
            }
            (h_marg / per as f64, h_cond / per as f64)
        })
        .collect();
    let total = per * MC_BATCHES;
    let marg: Vec<f64> = batches.iter().map(|b| b.0).collect();
    let cond: Vec<f64> = batches.iter().map(|b| b.1).collect();
    let mi: Vec<f64> = batches.iter().map(|b| b.0 - b.1).collect();
    Ok(EntropyDecomposition {
        h_marginal: OracleEstimate::mc(&marg, total),
        h_conditional: OracleEstimate::mc(&cond, total),
        mutual_info: OracleEstimate::mc(&mi, total),
    })
}

/// Monte Carlo terms of the law of total variance from `n` ancestral pairs.
pub fn mc_variance_decomposition(q: &SecondOrderDist, rng: RandomnessContract, n: usize) -> Result<VarianceDecomposition> {
    check_n(n)?;
    let family = q.family();
    let per = n.div_ceil(MC_BATCHES);
    let batches: Vec<[f64; 3]> = (0..MC_BATCHES as u64)
        .into_par_iter()
        .map(|b| {
            let mut r = rng.substream(b).substream(20).rng();
            let mut ys = Vec::with_capacity(per);
            let mut means = Vec::with_capacity(per);
            let mut al = 0.0;
            for _ in 0..per {
                let theta: ParamPoint = q.draw(&mut r);
                let (m, v) = conditional_mean_var(family, theta.values());
                ys.push(draw_outcome(&theta, &mut r));
                means.push(m);
                al += v;
            }
            [sample_variance(&ys), al / per as f64, sample_variance(&means)]
        })
        .collect();
    let total = per * MC_BATCHES;
    let col = |i: usize| batches.iter().map(|b| b[i]).collect::<Vec<_>>();
    Ok(VarianceDecomposition {
        total: OracleEstimate::mc(&col(0), total),
        aleatoric: OracleEstimate::mc(&col(1), total),
        epistemic: OracleEstimate::mc(&col(2), total),
    })
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// `E_Q[KL(P_ϑ ‖ P_θ̄)]` as the ancestral average of
/// `log p(y | ϑ) − log p(y | θ̄)` with `y ~ P_ϑ`.
pub fn mc_expected_kl(q: &SecondOrderDist, rng: RandomnessContract, n: usize) -> Result<OracleEstimate> {
    check_n(n)?;
    let family = q.family();
    let bar = q.mean_params()?.into_values();
    let per = n.div_ceil(MC_BATCHES);
    let batches: Vec<f64> = (0..MC_BATCHES as u64)
        .into_par_iter()
        .map(|b| {
            let mut r = rng.substream(b).substream(30).rng();
            let mut acc = 0.0;
            for _ in 0..per {
                let theta = q.draw(&mut r);
                let y = draw_outcome(&theta, &mut r);
                acc += log_pdf(family, theta.values(), y) - log_pdf(family, &bar, y);
            }
            acc / per as f64
        })
        .collect();
    Ok(OracleEstimate::mc(&batches, per * MC_BATCHES))
}

/// `∫ f(t) p(t) dt` for a 1-D law with a density.
pub fn quad_expectation<F: Fn(f64) -> f64>(law: &Law1d, f: F, spec: &QuadratureSpec) -> Result<OracleEstimate> {
    if law.is_point_mass() {
        return Err(UqError::Usage("a point mass has no density to integrate".into()));
    }
    let (value, subdivisions) = integrate_piecewise_counted(
        |t| {
            let d = law.density(t).unwrap_or(0.0);
            if d == 0.0 {
                0.0
            } else {
                f(t) * d
            }
        },
        &law.breakpoints(),
        spec,
    )?;
    Ok(OracleEstimate {
        value,
        standard_error: None,
        method: OracleMethod::Quadrature,
        n_or_subdivisions: subdivisions as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const H_STD_NORMAL: f64 = 1.418_938_533_204_672_7;

    fn rng() -> RandomnessContract {
        RandomnessContract::new(2024, 3)
    }

    #[test]
    fn dirac_has_no_mutual_information() {
        let q = SecondOrderDist::dirac(&ParamPoint::gaussian(0.0, 1.0).unwrap());
        let d = mc_entropy_decomposition(&q, rng(), 20_000).unwrap();
        assert_eq!(d.mutual_info.value, 0.0);
        assert!(d.h_marginal.agrees_with(H_STD_NORMAL, 3.0, 0.0));
    }

    #[test]
    fn ensemble_conditional_entropy() {
        let q = SecondOrderDist::mixture(Family::Gaussian, vec![vec![-2.0, 1.0], vec![2.0, 1.0]]).unwrap();
        let d = mc_entropy_decomposition(&q, rng(), 100_000).unwrap();
        assert!(d.h_conditional.agrees_with(H_STD_NORMAL, 3.0, 0.0));
        assert!(d.mutual_info.value > 0.0);
    }

    #[test]
    fn pareto_conditional_entropy() {
        let q = SecondOrderDist::product(Family::Exponential, vec![Law1d::Pareto { alpha: 1.5 }]).unwrap();
        let d = mc_entropy_decomposition(&q, rng(), 100_000).unwrap();
        assert!(d.h_conditional.agrees_with(1.0 / 3.0, 3.0, 0.0), "{:?}", d.h_conditional);
        assert!(d.mutual_info.value >= -3.0 * d.mutual_info.se());
    }

    #[test]
    fn variance_decomposition_targets() {
        let q = SecondOrderDist::dirac(&ParamPoint::gaussian(0.0, 7.0).unwrap());
        let d = mc_variance_decomposition(&q, rng(), 100_000).unwrap();
        assert!(d.total.agrees_with(7.0, 3.0, 0.0));
        assert_eq!(d.epistemic.value, 0.0);
        let q = SecondOrderDist::mixture(Family::Gaussian, vec![vec![-2.0, 1.0], vec![2.0, 1.0]]).unwrap();
        let d = mc_variance_decomposition(&q, rng(), 100_000).unwrap();
        assert!(d.total.agrees_with(5.0, 3.0, 0.0), "{:?}", d.total);
        assert!(d.residual().abs() <= 4.0 * d.combined_se());
    }

    #[test]
    fn quadrature_examples() {
        let spec = QuadratureSpec::default();
        let p = Law1d::Pareto { alpha: 1.5 };
        let e = quad_expectation(&p, f64::ln, &spec).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() < 1e-8);
        assert!(e.standard_error.is_none() && e.n_or_subdivisions >= 1);
        assert!((quad_expectation(&p, f64::recip, &spec).unwrap().value - 0.6).abs() < 1e-8);
        let u = Law1d::Uniform { lower: 1.0, upper: 3.0 };
        assert!((quad_expectation(&u, f64::ln, &spec).unwrap().value - 0.647_918_433).abs() < 1e-8);
        assert!(quad_expectation(&Law1d::PointMass { value: 1.0 }, f64::ln, &spec).is_err());
    }

    #[test]
    fn expected_kl_of_pareto() {
        let q = SecondOrderDist::product(Family::Exponential, vec![Law1d::Pareto { alpha: 1.5 }]).unwrap();
        let e = mc_expected_kl(&q, rng(), 100_000).unwrap();
        assert!(e.agrees_with(0.368_054, 4.0, 0.0), "{e:?}");
    }

    #[test]
    fn too_few_samples() {
        let q = SecondOrderDist::dirac(&ParamPoint::poisson(2.0).unwrap());
        assert!(mc_variance_decomposition(&q, rng(), 999).is_err());
    }
}
