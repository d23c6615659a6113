//! Entropy-based and variance-based uncertainty measures.
//!
//! Entropy: `AU = E_Q[H(P_ϑ)]`, `EU = E_Q[KL(P_ϑ ‖ P_θ̄)]`, `TU = H(P_θ̄)`
//! with `θ̄ = E_Q[ϑ]`. `TU` is not in general `AU + EU`; the entropy of the
//! true marginal predictive can be attached as `tu_marginal`.
//!
//! Variance: `AU = E_Q[V[Y|ϑ]]`, `EU = V_Q[E[Y|ϑ]]`, `TU = AU + EU`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UqError};
use crate::expfam::{self, Family, ParamPoint};
use crate::numerics::{batch_mean_se, population_variance, QuadratureSpec, RandomnessContract};
use crate::second_order::{Coordinate, Evaluation, Evaluator, Moment, SecondOrderDist};

/// Number of independent batches behind every Monte Carlo standard error.
pub const MC_BATCHES: usize = 20;

/// Smallest sample size accepted when Monte Carlo is forced.
pub const MIN_MC_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Entropy,
    Variance,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 2] = [MeasureKind::Entropy, MeasureKind::Variance];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Entropy => "entropy",
            MeasureKind::Variance => "variance",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = UqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy" => Ok(MeasureKind::Entropy),
            "variance" => Ok(MeasureKind::Variance),
            other => Err(UqError::Usage(format!("unknown measure `{other}`"))),
        }
    }
}

/// How a single component was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::ClosedForm => "closed_form",
            Estimator::Quadrature => "quadrature",
            Estimator::MonteCarlo => "monte_carlo",
        }
    }

    fn of(e: Evaluation) -> Self {
        match e {
            Evaluation::ClosedForm => Estimator::ClosedForm,
            Evaluation::Quadrature => Estimator::Quadrature,
        }
    }
}

impl FromStr for Estimator {
    type Err = UqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" => Ok(Estimator::ClosedForm),
            "quadrature" => Ok(Estimator::Quadrature),
            "monte_carlo" => Ok(Estimator::MonteCarlo),
            other => Err(UqError::Usage(format!("unknown estimator `{other}`"))),
        }
    }
}

/// Estimator used for each of TU, AU and EU.
///
/// Serialised as a single string: the shared name when all three agree,
/// otherwise `tu:<name>,au:<name>,eu:<name>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ComponentEstimators {
    pub tu: Estimator,
    pub au: Estimator,
    pub eu: Estimator,
}

impl ComponentEstimators {
    pub fn uniform(e: Estimator) -> Self {
        ComponentEstimators { tu: e, au: e, eu: e }
    }
}

impl fmt::Display for ComponentEstimators {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tu == self.au && self.au == self.eu {
            f.write_str(self.tu.name())
        } else {
            write!(f, "tu:{},au:{},eu:{}", self.tu.name(), self.au.name(), self.eu.name())
        }
    }
}

impl From<ComponentEstimators> for String {
    fn from(c: ComponentEstimators) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for ComponentEstimators {
    type Error = UqError;

    fn try_from(s: String) -> Result<Self> {
        if !s.contains(':') {
            return Ok(ComponentEstimators::uniform(s.parse()?));
        }
        let mut out = [None; 3];
        for part in s.split(',') {
            let (key, value) = part
                .split_once(':')
                .ok_or_else(|| UqError::Usage(format!("malformed estimator `{s}`")))?;
            let slot = match key {
                "tu" => 0,
                "au" => 1,
                "eu" => 2,
                _ => return Err(UqError::Usage(format!("malformed estimator `{s}`"))),
            };
            out[slot] = Some(value.parse()?);
        }
        match out {
            [Some(tu), Some(au), Some(eu)] => Ok(ComponentEstimators { tu, au, eu }),
            _ => Err(UqError::Usage(format!("malformed estimator `{s}`"))),
        }
    }
}

/// Which estimator to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorPolicy {
    /// Tabulated closed forms, quadrature over 1-D marginals otherwise.
    PreferClosedForm,
    /// Sample `ϑ ~ Q` in [`MC_BATCHES`] batches.
    ForceMonteCarlo { samples: usize, rng: RandomnessContract },
    /// Ignore tabulated expectations wherever a density is available.
    ForceQuadrature(QuadratureSpec),
}

/// Optional nested Monte Carlo estimate of the marginal predictive entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalRequest {
    pub samples: usize,
    pub rng: RandomnessContract,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRequest {
    pub q: SecondOrderDist,
    pub kind: MeasureKind,
    pub policy: EstimatorPolicy,
    pub marginal: Option<MarginalRequest>,
}

impl MeasureRequest {
    pub fn new(q: SecondOrderDist, kind: MeasureKind) -> Self {
        MeasureRequest {
            q,
            kind,
            policy: EstimatorPolicy::PreferClosedForm,
            marginal: None,
        }
    }

    pub fn with_policy(mut self, policy: EstimatorPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_marginal(mut self, samples: usize, rng: RandomnessContract) -> Self {
        self.marginal = Some(MarginalRequest { samples, rng });
        self
    }
}

/// TU/AU/EU with diagnostics, serialised as a flat record. Non-finite values
/// are written as the strings `"inf"`, `"-inf"` and `"nan"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub measure: MeasureKind,
    #[serde(with = "extended")]
    pub tu: f64,
    #[serde(with = "extended")]
    pub au: f64,
    #[serde(with = "extended")]
    pub eu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "extended_opt")]
    pub tu_marginal: Option<f64>,
    pub estimator: ComponentEstimators,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "extended_opt")]
    pub se_tu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "extended_opt")]
    pub se_au: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "extended_opt")]
    pub se_eu: Option<f64>,
    #[serde(with = "extended")]
    pub additivity_gap: f64,
}

/// `tu − (au + eu)`, zero when both sides are the same infinity.
pub fn additivity_gap(tu: f64, au: f64, eu: f64) -> f64 {
    let sum = au + eu;
    if tu == sum {
        0.0
    } else {
        tu - sum
    }
}

impl UncertaintyReport {
    fn build(
        measure: MeasureKind,
        (tu, au, eu): (f64, f64, f64),
        estimator: ComponentEstimators,
        se: (Option<f64>, Option<f64>, Option<f64>),
    ) -> Self {
        UncertaintyReport {
            measure,
            tu,
            au,
            eu,
            tu_marginal: None,
            estimator,
            se_tu: se.0,
            se_au: se.1,
            se_eu: se.2,
            additivity_gap: additivity_gap(tu, au, eu),
        }
    }
}

pub(crate) mod extended {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn encode(v: f64) -> Option<&'static str> {
        if v.is_nan() {
            Some("nan")
        } else if v == f64::INFINITY {
            Some("inf")
        } else if v == f64::NEG_INFINITY {
            Some("-inf")
        } else {
            None
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        match encode(*v) {
            Some(t) => s.serialize_str(t),
            None => s.serialize_f64(*v),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: `{other}`"))),
            },
        }
    }
}

pub(crate) mod extended_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::extended::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::extended")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// Dispatches on `req.kind`.
pub fn compute(req: &MeasureRequest) -> Result<UncertaintyReport> {
    match req.kind {
        MeasureKind::Entropy => entropy_measures(req),
        MeasureKind::Variance => variance_measures(req),
    }
}

/// Convenience wrapper: closed forms (quadrature fallback), no marginal.
pub fn measure(q: &SecondOrderDist, kind: MeasureKind) -> Result<UncertaintyReport> {
    compute(&MeasureRequest::new(q.clone(), kind))
}

fn evaluator(policy: &EstimatorPolicy) -> Evaluator {
    match policy {
        EstimatorPolicy::ForceQuadrature(spec) => Evaluator {
            prefer_closed_form: false,
            quadrature: *spec,
        },
        _ => Evaluator::default(),
    }
}

fn check_mc(samples: usize) -> Result<()> {
    if samples < MIN_MC_SAMPLES {
        return Err(UqError::Usage(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    Ok(())
}

fn worse(a: Estimator, b: Estimator) -> Estimator {
    a.max(b)
}

/// Entropy-based TU, AU and EU.
pub fn entropy_measures(req: &MeasureRequest) -> Result<UncertaintyReport> {
    if req.kind != MeasureKind::Entropy {
        return Err(UqError::Usage("entropy_measures called with a variance request".into()));
    }
    let mut report = match req.policy {
        EstimatorPolicy::ForceMonteCarlo { samples, rng } => {
            check_mc(samples)?;
            entropy_monte_carlo(&req.q, rng, samples)?
        }
        ref p => entropy_deterministic(&req.q, &evaluator(p))?,
    };
    if let Some(m) = req.marginal {
        report.tu_marginal = Some(marginal_entropy_tu(&req.q, m.rng, m.samples)?.0);
    }
    Ok(report)
}

fn poisson_entropy_of(lambda: f64) -> f64 {
    expfam::entropy(&ParamPoint::poisson(lambda).expect("λ > 0 on the support"))
}

fn entropy_deterministic(q: &SecondOrderDist, eval: &Evaluator) -> Result<UncertaintyReport> {
    let kind = MeasureKind::Entropy;
    if q.is_dirac() {
        let theta = q.mean_params()?;
        let h = expfam::entropy(&theta);
        return Ok(UncertaintyReport::build(
            kind,
            (h, h, 0.0),
            ComponentEstimators::uniform(Estimator::ClosedForm),
            (None, None, None),
        ));
    }
    let theta_bar = q.mean_params()?;
    let tu = expfam::entropy(&theta_bar);
    let bar = theta_bar.values();
    let (au, eu, est_au, est_eu) = match q.family() {
        Family::Gaussian => {
            let (e_log, how) = q.coordinate(1).expect(Moment::Log, eval)?;
            let (v_mu, how_v) = coordinate_variance(&q.coordinate(0), eval)?;
            let s2 = bar[1];
            let au = 0.5 * (1.0 + (2.0 * PI).ln() + e_log);
            let eu = 0.5 * ((s2.ln() - e_log) + v_mu / s2);
            let est = Estimator::of(how);
            (au, eu, est, worse(est, Estimator::of(how_v)))
        }
        Family::Exponential => {
            let c = q.coordinate(0);
            let (e_log, h1) = c.expect(Moment::Log, eval)?;
            let (e_inv, h2) = c.expect(Moment::Inv, eval)?;
            let lam = bar[0];
            let au = 1.0 - e_log;
            let eu = e_log - lam.ln() + lam * e_inv - 1.0;
            (au, eu, Estimator::of(h1), worse(Estimator::of(h1), Estimator::of(h2)))
        }
        Family::Poisson => {
            let c = q.coordinate(0);
            let (au, h1) = c.expect_fn(poisson_entropy_of, eval)?;
            let (e_xlogx, h2) = c.expect(Moment::XLogX, eval)?;
            let lam = bar[0];
            let eu = e_xlogx - lam * lam.ln();
            (au, eu, Estimator::of(h1), Estimator::of(h2))
        }
    };
    // EU is a Jensen gap; rounding can leave a negative ulp
    let eu = if eu.is_nan() { eu } else { eu.max(0.0) };
    Ok(UncertaintyReport::build(
        kind,
        (tu, au, eu),
        ComponentEstimators {
            tu: Estimator::ClosedForm,
            au: est_au,
            eu: est_eu,
        },
        (None, None, None),
    ))
}

fn coordinate_variance(c: &Coordinate, eval: &Evaluator) -> Result<(f64, Evaluation)> {
    let v = c.variance();
    match c {
        Coordinate::Law(l) if !eval.prefer_closed_form && v.is_finite() && !l.is_point_mass() => {
            let m = c.mean();
            let (v, how) = c.expect_fn(|x| (x - m) * (x - m), eval)?;
            Ok((v, how))
        }
        _ => Ok((v, Evaluation::ClosedForm)),
    }
}

/// Runs `f` on [`MC_BATCHES`] batches of parameter draws in parallel; batch
/// `b` uses `rng.substream(b)`, so the result does not depend on scheduling.
pub(crate) fn batched<T: Send, F>(q: &SecondOrderDist, rng: RandomnessContract, n: usize, f: F) -> Vec<T>
where
    F: Fn(&[ParamPoint]) -> T + Sync,
{
    let per = n.div_ceil(MC_BATCHES);
    (0..MC_BATCHES)
        .into_par_iter()
        .map(|b| {
            let draws = q.sample_params(rng.substream(b as u64), per).expect("per ≥ 1");
            f(&draws)
        })
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut k) = (0.0, 0usize);
    for x in xs {
        s += x;
        k += 1;
    }
    s / k as f64
}

fn entropy_monte_carlo(q: &SecondOrderDist, rng: RandomnessContract, n: usize) -> Result<UncertaintyReport> {
    let theta_bar = q.mean_params()?;
    let tu = expfam::entropy(&theta_bar);
    let parts = batched(q, rng, n, |draws| {
        let au = mean(draws.iter().map(expfam::entropy));
        let eu = mean(
            draws
                .iter()
                .map(|t| expfam::kl_divergence(t, &theta_bar).expect("same family")),
        );
        (au, eu)
    });
    let (au, se_au) = batch_mean_se(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let (eu, se_eu) = batch_mean_se(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
    Ok(UncertaintyReport::build(
        MeasureKind::Entropy,
        (tu, au, eu),
        ComponentEstimators {
            tu: Estimator::ClosedForm,
            au: Estimator::MonteCarlo,
            eu: Estimator::MonteCarlo,
        },
        (None, Some(se_au), Some(se_eu)),
    ))
}

/// Variance-based TU, AU and EU. Diverging moments are reported as `+∞`.
pub fn variance_measures(req: &MeasureRequest) -> Result<UncertaintyReport> {
    if req.kind != MeasureKind::Variance {
        return Err(UqError::Usage("variance_measures called with an entropy request".into()));
    }
    match req.policy {
        EstimatorPolicy::ForceMonteCarlo { samples, rng } => {
            check_mc(samples)?;
            Ok(variance_monte_carlo(&req.q, rng, samples))
        }
        ref p => variance_deterministic(&req.q, &evaluator(p)),
    }
}

fn variance_deterministic(q: &SecondOrderDist, eval: &Evaluator) -> Result<UncertaintyReport> {
    let kind = MeasureKind::Variance;
    let (au, eu, est_au, est_eu) = match q.family() {
        Family::Gaussian => {
            let (au, h1) = q.coordinate(1).expect(Moment::Mean, eval)?;
            let (eu, h2) = coordinate_variance(&q.coordinate(0), eval)?;
            (au, eu, Estimator::of(h1), Estimator::of(h2))
        }
        Family::Poisson => {
            let c = q.coordinate(0);
            let (au, h1) = c.expect(Moment::Mean, eval)?;
            let (eu, h2) = coordinate_variance(&c, eval)?;
            (au, eu, Estimator::of(h1), Estimator::of(h2))
        }
        Family::Exponential => {
            let c = q.coordinate(0);
            let (au, h1) = c.expect(Moment::InvSq, eval)?;
            let (eu, h2) = if c.is_degenerate() {
                (0.0, Evaluation::ClosedForm)
            } else if let Coordinate::Atoms(a) = &c {
                let inv: Vec<f64> = a.iter().map(|x| 1.0 / x).collect();
                (population_variance(&inv), Evaluation::ClosedForm)
            } else if au.is_infinite() {
                (f64::INFINITY, h1)
            } else {
                let (e_inv, h) = c.expect(Moment::Inv, eval)?;
                ((au - e_inv * e_inv).max(0.0), h)
            };
            (au, eu, Estimator::of(h1), worse(Estimator::of(h1), Estimator::of(h2)))
        }
    };
    let tu = au + eu;
    Ok(UncertaintyReport::build(
        kind,
        (tu, au, eu),
        ComponentEstimators {
            tu: worse(est_au, est_eu),
            au: est_au,
            eu: est_eu,
        },
        (None, None, None),
    ))
}

fn variance_monte_carlo(q: &SecondOrderDist, rng: RandomnessContract, n: usize) -> UncertaintyReport {
    let parts = batched(q, rng, n, |draws| {
        let mv: Vec<(f64, f64)> = draws.iter().map(expfam::mean_var).collect();
        let au = mean(mv.iter().map(|p| p.1));
        let m = mean(mv.iter().map(|p| p.0));
        let k = mv.len() as f64;
        let eu = mv.iter().map(|p| (p.0 - m).powi(2)).sum::<f64>() / (k - 1.0);
        (au, eu)
    });
    let (au, se_au) = batch_mean_se(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let (eu, se_eu) = batch_mean_se(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
    let (_, se_tu) = batch_mean_se(&parts.iter().map(|p| p.0 + p.1).collect::<Vec<_>>());
    UncertaintyReport::build(
        MeasureKind::Variance,
        (au + eu, au, eu),
        ComponentEstimators::uniform(Estimator::MonteCarlo),
        (Some(se_tu), Some(se_au), Some(se_eu)),
    )
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Nested Monte Carlo estimate of the entropy `H(Y)` of the marginal
/// predictive `p(y) = ∫ p(y|θ) dQ(θ)`, with its standard error.
///
/// Each of the [`MC_BATCHES`] batches draws fresh outer pairs `(ϑ, y)` and
/// `K = ⌊√n⌋` fresh inner parameters; a mixture uses its exact density.
pub fn marginal_entropy_tu(q: &SecondOrderDist, rng: RandomnessContract, n: usize) -> Result<(f64, f64)> {
    check_mc(n)?;
    let per = n.div_ceil(MC_BATCHES);
    let k = (n as f64).sqrt().floor() as usize;
    let members: Option<Vec<ParamPoint>> = match q.law() {
        crate::second_order::SecondOrderLaw::Mixture { members } => Some(
            members
                .iter()
                .map(|m| ParamPoint::new(q.family(), m.clone()))
                .collect::<Result<_>>()?,
        ),
        crate::second_order::SecondOrderLaw::Dirac { theta } => {
            Some(vec![ParamPoint::new(q.family(), theta.clone())?])
        }
        _ => None,
    };
    let batches: Vec<f64> = (0..MC_BATCHES as u64)
        .into_par_iter()
        .map(|b| {
            let stream = rng.substream(b);
            let mut r = stream.substream(0).rng();
            let inner = match &members {
                Some(m) => m.clone(),
                None => q.sample_params(stream.substream(1), k).expect("k ≥ 1"),
            };
            let mut buf = vec![0.0; inner.len()];
            let mut total = 0.0;
            for _ in 0..per {
                let theta = q.draw(&mut r);
                let y = expfam::draw_outcome(&theta, &mut r);
                for (slot, t) in buf.iter_mut().zip(&inner) {
                    *slot = expfam::log_density(t, y).expect("outcome in support");
                }
                total -= log_sum_exp(&buf) - (inner.len() as f64).ln();
            }
            total / per as f64
        })
        .collect();
    Ok(batch_mean_se(&batches))
}
