//! Executable versions of the axioms A0–A5 and reproducers for the known
//! counterexamples.
//!
//! Every check returns an [`AxiomVerdict`]. A `violated` verdict carries a
//! [`Witness`] holding the minimal offending input, which [`recheck`]
//! evaluates again from scratch.
//!
//! | axiom       | statement                                                          |
//! |-------------|--------------------------------------------------------------------|
//! | A0          | TU, AU, EU ≥ 0                                                     |
//! | A1          | EU(Q) = 0 iff Q is a Dirac measure                                 |
//! | A2_lower    | EU vanishes on zero-variance Q                                     |
//! | A2_upper    | EU of an infinite-variance Q dominates EU of finite-variance Q     |
//! | A3          | AU ordered like the first-order variance along Dirac triples       |
//! | A4_weak     | EU and TU do not decrease under a mean-preserving spread           |
//! | A4_strict   | EU and TU strictly increase under a mean-preserving spread         |
//! | A5          | EU is invariant under a spread-preserving location shift           |

// `!(x <= tol)` is deliberate: a NaN measure must count as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod catalog;
mod repro;

pub use catalog::{default_catalog, parse_catalog, random_config, Catalog, CatalogEntry, Check};
pub use repro::{reproduce_counterexample, ReproReport, ReproValue, REPRO_IDS};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UqError};
use crate::expfam::{self, Family, ParamPoint};
use crate::measures::{self, Estimator, MeasureKind, UncertaintyReport};
use crate::second_order::{Coordinate, SecondOrderDist, ShiftVector, SpreadSpec};

/// Equality tolerance when every quantity came from a closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Equality tolerance when a quantity came from adaptive quadrature.
pub const QUADRATURE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    A0,
    A1,
    #[serde(rename = "A2_lower")]
    A2Lower,
    #[serde(rename = "A2_upper")]
    A2Upper,
    A3,
    #[serde(rename = "A4_weak")]
    A4Weak,
    #[serde(rename = "A4_strict")]
    A4Strict,
    A5,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::A0 => "A0",
            Axiom::A1 => "A1",
            Axiom::A2Lower => "A2_lower",
            Axiom::A2Upper => "A2_upper",
            Axiom::A3 => "A3",
            Axiom::A4Weak => "A4_weak",
            Axiom::A4Strict => "A4_strict",
            Axiom::A5 => "A5",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The component(s) a verdict is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    All,
    Tu,
    Au,
    Eu,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::All => "all",
            Target::Tu => "tu",
            Target::Au => "au",
            Target::Eu => "eu",
        }
    }

    fn pick(self, r: &UncertaintyReport) -> Vec<(&'static str, f64)> {
        match self {
            Target::All => vec![("tu", r.tu), ("au", r.au), ("eu", r.eu)],
            Target::Tu => vec![("tu", r.tu)],
            Target::Au => vec![("au", r.au)],
            Target::Eu => vec![("eu", r.eu)],
        }
    }

    fn single(self, r: &UncertaintyReport) -> f64 {
        match self {
            Target::Tu => r.tu,
            Target::Au => r.au,
            _ => r.eu,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Violated,
    Inconclusive,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Violated => "violated",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Status {
    type Err = UqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holds" => Ok(Status::Holds),
            "violated" => Ok(Status::Violated),
            "inconclusive" => Ok(Status::Inconclusive),
            other => Err(UqError::Usage(format!("unknown status `{other}`"))),
        }
    }
}

/// Three Dirac points ordered by first-order variance `θ_l ≤ θ ≤ θ_u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracTriple {
    pub theta_l: ParamPoint,
    pub theta: ParamPoint,
    pub theta_u: ParamPoint,
}

impl DiracTriple {
    pub fn new(theta_l: ParamPoint, theta: ParamPoint, theta_u: ParamPoint) -> Result<Self> {
        if theta_l.family() != theta.family() || theta.family() != theta_u.family() {
            return Err(UqError::Usage("triple mixes families".into()));
        }
        let t = DiracTriple { theta_l, theta, theta_u };
        if !t.is_ordered() {
            return Err(UqError::Usage("triple is not ordered by first-order variance".into()));
        }
        Ok(t)
    }

    pub fn family(&self) -> Family {
        self.theta.family()
    }

    /// `θ_l`, `θ`, `θ_u` in order.
    pub fn points(&self) -> impl Iterator<Item = &ParamPoint> {
        [&self.theta_l, &self.theta, &self.theta_u].into_iter()
    }

    fn is_ordered(&self) -> bool {
        let v = |p: &ParamPoint| expfam::mean_var(p).1;
        v(&self.theta_u) >= v(&self.theta) && v(&self.theta) >= v(&self.theta_l)
    }
}

/// The minimal input that reproduces a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckInput {
    Single { q: SecondOrderDist },
    Bound { infinite: SecondOrderDist, finite: SecondOrderDist },
    Triple { triple: DiracTriple },
    Spread { q: SecondOrderDist, spread: SpreadSpec },
    Shift { q: SecondOrderDist, shift: ShiftVector },
}

/// Offending configuration plus the values that decided the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub input: CheckInput,
    pub values: BTreeMap<String, WitnessValue>,
}

/// A witness value; non-finite numbers serialise as strings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WitnessValue(#[serde(with = "crate::measures::extended")] pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomVerdict {
    pub axiom: Axiom,
    pub target: Target,
    pub measure: MeasureKind,
    pub family: Family,
    pub status: Status,
    /// False where the axiom is only claimed under a precondition the
    /// family does not meet (e.g. a mean that is not linear in a parameter).
    pub in_scope: bool,
    pub note: String,
    pub witness: Option<Witness>,
    pub tolerance_used: f64,
}

impl AxiomVerdict {
    fn new(axiom: Axiom, target: Target, measure: MeasureKind, family: Family) -> Self {
        AxiomVerdict {
            axiom,
            target,
            measure,
            family,
            status: Status::Holds,
            in_scope: true,
            note: String::new(),
            witness: None,
            tolerance_used: CLOSED_FORM_TOL,
        }
    }

    fn inconclusive(mut self, note: impl Into<String>) -> Self {
        self.status = Status::Inconclusive;
        self.note = note.into();
        self
    }

    fn with_witness(mut self, status: Status, input: CheckInput, values: Vec<(String, f64)>) -> Self {
        self.status = status;
        self.witness = Some(Witness {
            input,
            values: values.into_iter().map(|(k, v)| (k, WitnessValue(v))).collect(),
        });
        self
    }

    fn scoped(mut self, in_scope: bool) -> Self {
        self.in_scope = in_scope;
        self
    }
}

fn tolerance(reports: &[&UncertaintyReport]) -> f64 {
    let quad = reports.iter().any(|r| {
        let e = r.estimator;
        [e.tu, e.au, e.eu].contains(&Estimator::Quadrature)
    });
    if quad {
        QUADRATURE_TOL
    } else {
        CLOSED_FORM_TOL
    }
}

/// `a − b`, zero when both are the same infinity.
fn difference(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        a - b
    }
}

fn named(prefix: &str, r: &UncertaintyReport) -> Vec<(String, f64)> {
    vec![
        (format!("{prefix}tu"), r.tu),
        (format!("{prefix}au"), r.au),
        (format!("{prefix}eu"), r.eu),
    ]
}

/// Whether the variance-measure claims restricted to linear-mean families
/// apply: the mean must be affine in the coordinate carrying the spread.
fn linear_mean_scope(measure: MeasureKind, family: Family) -> bool {
    measure == MeasureKind::Entropy || family.mean_linear_in().is_some()
}

/// A0 over a batch: holds iff the targeted components are ≥ −tolerance.
pub fn check_a0(measure: MeasureKind, family: Family, batch: &[SecondOrderDist], target: Target) -> AxiomVerdict {
    let mut v = AxiomVerdict::new(Axiom::A0, target, measure, family);
    if batch.is_empty() {
        return v.inconclusive("empty batch");
    }
    let mut failed = 0usize;
    for q in batch {
        let r = match measures::measure(q, measure) {
            Ok(r) => r,
            Err(_) => {
                failed += 1;
                continue;
            }
        };
        let tol = tolerance(&[&r]);
        v.tolerance_used = v.tolerance_used.max(tol);
        if let Some((name, value)) = target.pick(&r).into_iter().find(|(_, x)| !(*x >= -tol)) {
            v.tolerance_used = tol;
            v.note = format!("{name} = {value:.6} < 0");
            return v.with_witness(Status::Violated, CheckInput::Single { q: q.clone() }, named("", &r));
        }
    }
    if failed > 0 {
        return v.inconclusive(format!("{failed} of {} configurations could not be evaluated", batch.len()));
    }
    v.note = format!("{} configurations non-negative", batch.len());
    v
}

/// A1: EU vanishes on every Dirac in `diracs` and on none of `non_diracs`.
///
/// The converse direction cannot be verified universally; `holds` means no
/// counterexample was found among the supplied configurations.
pub fn check_a1(
    measure: MeasureKind,
    family: Family,
    diracs: &[SecondOrderDist],
    non_diracs: &[SecondOrderDist],
) -> AxiomVerdict {
    let mut v = AxiomVerdict::new(Axiom::A1, Target::Eu, measure, family);
    for q in diracs {
        match measures::measure(q, measure) {
            Ok(r) => {
                let tol = tolerance(&[&r]);
                if !(r.eu.abs() <= tol) {
                    v.tolerance_used = tol;
                    v.note = format!("EU = {:.6} on a Dirac measure", r.eu);
                    return v.with_witness(Status::Violated, CheckInput::Single { q: q.clone() }, named("", &r));
                }
            }
            Err(e) => return v.inconclusive(format!("Dirac configuration failed: {e}")),
        }
    }
    let mut failed = 0usize;
    for q in non_diracs {
        if q.is_dirac() {
            continue;
        }
        match measures::measure(q, measure) {
            Ok(r) => {
                let tol = tolerance(&[&r]);
                v.tolerance_used = v.tolerance_used.max(tol);
                if !(r.eu > tol) {
                    v.tolerance_used = tol;
                    v.note = format!("EU = {:.3e} on a non-Dirac Q", r.eu);
                    let mut values = named("", &r);
                    values.push(("is_dirac".into(), 0.0));
                    return v.with_witness(Status::Violated, CheckInput::Single { q: q.clone() }, values);
                }
            }
            Err(_) => failed += 1,
        }
    }
    if failed > 0 {
        return v.inconclusive(format!("{failed} non-Dirac configurations could not be evaluated"));
    }
    v.note = format!(
        "no counterexample among {} Dirac and {} non-Dirac configurations",
        diracs.len(),
        non_diracs.len()
    );
    v
}

/// A2 lower bound: EU of each zero-variance configuration is zero.
pub fn check_a2_lower(measure: MeasureKind, family: Family, zero_variance: &[SecondOrderDist]) -> AxiomVerdict {
    let mut v = AxiomVerdict::new(Axiom::A2Lower, Target::Eu, measure, family);
    if zero_variance.is_empty() {
        return v.inconclusive("no zero-variance configurations");
    }
    for q in zero_variance {
        if !q.coordinates().iter().all(|c| c.variance() == 0.0) {
            return v.inconclusive("configuration with positive variance in the zero-variance set");
        }
        match measures::measure(q, measure) {
            Ok(r) => {
                let tol = tolerance(&[&r]);
                if !(r.eu.abs() <= tol) {
                    v.tolerance_used = tol;
                    return v.with_witness(Status::Violated, CheckInput::Single { q: q.clone() }, named("", &r));
                }
            }
            Err(e) => return v.inconclusive(e.to_string()),
        }
    }
    v.note = format!("EU = 0 on {} zero-variance configurations", zero_variance.len());
    v
}

/// A2 upper bound: `EU(q_infinite) ≥ EU(q)` for every `q` in `finite`.
pub fn check_a2_upper(
    measure: MeasureKind,
    q_infinite: &SecondOrderDist,
    finite: &[SecondOrderDist],
) -> AxiomVerdict {
    let family = q_infinite.family();
    let coords = q_infinite.coordinates();
    let infinite_at: Vec<usize> = (0..coords.len()).filter(|&i| coords[i].variance() == f64::INFINITY).collect();
    let in_scope = measure == MeasureKind::Entropy
        || family
            .mean_linear_in()
            .is_some_and(|lm| infinite_at.contains(&lm.coordinate));
    let v = AxiomVerdict::new(Axiom::A2Upper, Target::Eu, measure, family).scoped(in_scope);
    if infinite_at.is_empty() {
        return v.inconclusive("reference configuration has finite variance");
    }
    let top = match measures::measure(q_infinite, measure) {
        Ok(r) => r,
        Err(e) => return v.inconclusive(format!("EU of the infinite-variance configuration: {e}")),
    };
    check_a2_upper_with(v, q_infinite, &top, finite)
}

fn check_a2_upper_with(
    mut v: AxiomVerdict,
    q_infinite: &SecondOrderDist,
    top: &UncertaintyReport,
    finite: &[SecondOrderDist],
) -> AxiomVerdict {
    let mut worst: Option<(f64, &SecondOrderDist, UncertaintyReport)> = None;
    for q in finite {
        if q.coordinates().iter().any(|c| c.variance() == f64::INFINITY) {
            return v.inconclusive("comparison set contains an infinite-variance configuration");
        }
        match measures::measure(q, v.measure) {
            Ok(r) => {
                let gap = difference(r.eu, top.eu);
                if worst.as_ref().is_none_or(|w| gap > w.0) {
                    worst = Some((gap, q, r));
                }
            }
            Err(e) => return v.inconclusive(e.to_string()),
        }
    }
    let Some((gap, q, r)) = worst else {
        return v.inconclusive("empty comparison set");
    };
    let tol = tolerance(&[top, &r]);
    v.tolerance_used = tol;
    let values = vec![("eu_infinite".to_string(), top.eu), ("eu_finite".to_string(), r.eu)];
    let input = CheckInput::Bound {
        infinite: q_infinite.clone(),
        finite: q.clone(),
    };
    if gap > tol {
        v.note = format!("EU(infinite) = {:.6} < EU(finite) = {:.6}", top.eu, r.eu);
        v.with_witness(Status::Violated, input, values)
    } else {
        v.note = format!("EU(infinite) = {:.6} dominates {} configurations", top.eu, finite.len());
        v.with_witness(Status::Holds, input, values)
    }
}

/// A3: aleatoric uncertainty ordered like the first-order variance.
pub fn check_a3(measure: MeasureKind, triple: &DiracTriple) -> AxiomVerdict {
    let mut v = AxiomVerdict::new(Axiom::A3, Target::Au, measure, triple.family());
    if !triple.is_ordered() {
        return v.inconclusive("triple is not ordered by first-order variance");
    }
    let au = |p: &ParamPoint| measures::measure(&SecondOrderDist::dirac(p), measure).map(|r| r.au);
    let (l, m, u) = match (au(&triple.theta_l), au(&triple.theta), au(&triple.theta_u)) {
        (Ok(l), Ok(m), Ok(u)) => (l, m, u),
        _ => return v.inconclusive("AU of a Dirac configuration failed"),
    };
    let tol = CLOSED_FORM_TOL;
    let status = if u >= m - tol && m >= l - tol {
        Status::Holds
    } else {
        Status::Violated
    };
    v.note = format!("AU = ({l:.6}, {m:.6}, {u:.6})");
    v.with_witness(
        status,
        CheckInput::Triple { triple: triple.clone() },
        vec![("au_l".into(), l), ("au".into(), m), ("au_u".into(), u)],
    )
}

/// A4 for one target (TU or EU): weak `after ≥ before − tol`, strict
/// `after > before + tol`.
pub fn check_a4(
    measure: MeasureKind,
    q: &SecondOrderDist,
    spread: &SpreadSpec,
    strict: bool,
    target: Target,
) -> AxiomVerdict {
    let axiom = if strict { Axiom::A4Strict } else { Axiom::A4Weak };
    let mut v = AxiomVerdict::new(axiom, target, measure, q.family());
    let spread_q = match q.mean_preserving_spread(spread) {
        Ok(s) => s,
        Err(e) => return v.inconclusive(format!("spread rejected: {e}")),
    };
    let (before, after) = match (measures::measure(q, measure), measures::measure(&spread_q, measure)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return v.inconclusive(e.to_string()),
    };
    let tol = tolerance(&[&before, &after]);
    v.tolerance_used = tol;
    let (b, a) = (target.single(&before), target.single(&after));
    let change = difference(a, b);
    let ok = if strict { change > tol } else { change >= -tol };
    v.note = format!("{target}: {b:.6} -> {a:.6}");
    let mut values = named("before_", &before);
    values.extend(named("after_", &after));
    v.with_witness(
        if ok { Status::Holds } else { Status::Violated },
        CheckInput::Spread {
            q: q.clone(),
            spread: spread.clone(),
        },
        values,
    )
}

/// A5: EU unchanged by a location shift.
pub fn check_a5(measure: MeasureKind, q: &SecondOrderDist, z: &ShiftVector) -> AxiomVerdict {
    let family = q.family();
    let mut v = AxiomVerdict::new(Axiom::A5, Target::Eu, measure, family).scoped(linear_mean_scope(measure, family));
    let shifted = match q.location_shift(z) {
        Ok(s) => s,
        Err(e) => return v.inconclusive(format!("shift rejected: {e}")),
    };
    let (before, after) = match (measures::measure(q, measure), measures::measure(&shifted, measure)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return v.inconclusive(e.to_string()),
    };
    let tol = tolerance(&[&before, &after]);
    v.tolerance_used = tol;
    let change = difference(after.eu, before.eu);
    v.note = format!("EU: {:.6} -> {:.6}", before.eu, after.eu);
    v.with_witness(
        if change.abs() <= tol { Status::Holds } else { Status::Violated },
        CheckInput::Shift {
            q: q.clone(),
            shift: z.clone(),
        },
        vec![("eu_before".into(), before.eu), ("eu_after".into(), after.eu)],
    )
}

/// Re-evaluates a verdict's witness from scratch.
pub fn recheck(verdict: &AxiomVerdict) -> Result<AxiomVerdict> {
    let w = verdict
        .witness
        .as_ref()
        .ok_or_else(|| UqError::Usage("verdict has no witness".into()))?;
    let m = verdict.measure;
    let out = match (&w.input, verdict.axiom) {
        (CheckInput::Single { q }, Axiom::A0) => check_a0(m, q.family(), std::slice::from_ref(q), verdict.target),
        (CheckInput::Single { q }, Axiom::A1) => {
            if q.is_dirac() {
                check_a1(m, q.family(), std::slice::from_ref(q), &[])
            } else {
                check_a1(m, q.family(), &[], std::slice::from_ref(q))
            }
        }
        (CheckInput::Single { q }, Axiom::A2Lower) => check_a2_lower(m, q.family(), std::slice::from_ref(q)),
        (CheckInput::Bound { infinite, finite }, Axiom::A2Upper) => {
            check_a2_upper(m, infinite, std::slice::from_ref(finite))
        }
        (CheckInput::Triple { triple }, Axiom::A3) => check_a3(m, triple),
        (CheckInput::Spread { q, spread }, Axiom::A4Weak) => check_a4(m, q, spread, false, verdict.target),
        (CheckInput::Spread { q, spread }, Axiom::A4Strict) => check_a4(m, q, spread, true, verdict.target),
        (CheckInput::Shift { q, shift }, Axiom::A5) => check_a5(m, q, shift),
        (input, axiom) => {
            return Err(UqError::Usage(format!("witness {input:?} does not belong to {axiom}")));
        }
    };
    Ok(out)
}

/// The verdict matrix claimed for the default catalog, per
/// `(measure, axiom, target)`. Rows without a claim return `None`.
pub fn expected_status(measure: MeasureKind, axiom: Axiom, target: Target) -> Option<Status> {
    use Axiom::*;
    use Status::*;
    use Target::*;
    match (measure, axiom, target) {
        (MeasureKind::Entropy, A0, Eu) => Some(Holds),
        (MeasureKind::Entropy, A0, _) => Some(Violated),
        (MeasureKind::Entropy, A1, Eu) => Some(Holds),
        (MeasureKind::Entropy, A2Lower, Eu) => Some(Holds),
        (MeasureKind::Entropy, A2Upper, Eu) => Some(Violated),
        (MeasureKind::Entropy, A3, Au) => Some(Holds),
        (MeasureKind::Entropy, A4Weak, Tu) => Some(Holds),
        (MeasureKind::Entropy, A4Strict, Tu) => Some(Violated),
        (MeasureKind::Entropy, A5, Eu) => Some(Violated),
        (MeasureKind::Variance, A0, _) => Some(Holds),
        (MeasureKind::Variance, A1, Eu) => Some(Violated),
        (MeasureKind::Variance, A2Lower, Eu) => Some(Holds),
        (MeasureKind::Variance, A2Upper, Eu) => Some(Holds),
        (MeasureKind::Variance, A3, Au) => Some(Holds),
        (MeasureKind::Variance, A4Strict, Tu | Eu) => Some(Violated),
        (MeasureKind::Variance, A5, Eu) => Some(Holds),
        _ => None,
    }
}

/// Aggregate of all verdicts for one `(measure, axiom, target)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub measure: MeasureKind,
    pub axiom: Axiom,
    pub target: Target,
    /// `violated` if any in-scope verdict is violated, else `inconclusive`
    /// if any is inconclusive (or none is in scope), else `holds`.
    pub status: Status,
    pub expected: Option<Status>,
    pub verdicts: usize,
    pub in_scope: usize,
}

impl SummaryRow {
    /// False only when a claimed status exists and differs.
    pub fn matches(&self) -> bool {
        self.expected.is_none_or(|e| e == self.status)
    }
}

/// Aggregates verdicts in a fixed row order.
pub fn summarize(verdicts: &[AxiomVerdict]) -> Vec<SummaryRow> {
    let mut rows: BTreeMap<(usize, Axiom, Target), SummaryRow> = BTreeMap::new();
    for v in verdicts {
        let key = (v.measure as usize, v.axiom, v.target);
        let row = rows.entry(key).or_insert_with(|| SummaryRow {
            measure: v.measure,
            axiom: v.axiom,
            target: v.target,
            status: Status::Holds,
            expected: expected_status(v.measure, v.axiom, v.target),
            verdicts: 0,
            in_scope: 0,
        });
        row.verdicts += 1;
        if !v.in_scope {
            continue;
        }
        row.in_scope += 1;
        row.status = match (row.status, v.status) {
            (Status::Violated, _) | (_, Status::Violated) => Status::Violated,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Holds,
        };
    }
    rows.into_values()
        .map(|mut r| {
            if r.in_scope == 0 {
                r.status = Status::Inconclusive;
            }
            r
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRequest {
    pub catalog: Catalog,
    pub measures: Vec<MeasureKind>,
    /// Seeds the random configurations drawn by catalog entries.
    pub seed: u64,
}

impl SuiteRequest {
    pub fn default_suite(seed: u64) -> Self {
        SuiteRequest {
            catalog: default_catalog(),
            measures: MeasureKind::ALL.to_vec(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub summary: Vec<SummaryRow>,
    pub verdicts: Vec<AxiomVerdict>,
}

impl SuiteReport {
    /// Rows whose status differs from the claimed matrix.
    pub fn deviations(&self) -> Vec<&SummaryRow> {
        self.summary.iter().filter(|r| !r.matches()).collect()
    }
}

/// Runs every catalog entry for every requested measure. Entries run in
/// parallel; verdicts keep catalog order.
pub fn run_suite(req: &SuiteRequest) -> SuiteReport {
    let verdicts: Vec<AxiomVerdict> = req
        .catalog
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, entry)| {
            req.measures
                .iter()
                .filter(|m| entry.applies_to(**m))
                .flat_map(|m| entry.run(*m, req.seed, i as u64))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    SuiteReport {
        summary: summarize(&verdicts),
        verdicts,
    }
}

/// Zero-variance versions of a batch: the Dirac at each mean.
pub(crate) fn collapse(batch: &[SecondOrderDist]) -> Vec<SecondOrderDist> {
    batch
        .iter()
        .filter_map(|q| q.mean_params().ok())
        .map(|p| SecondOrderDist::dirac(&p))
        .collect()
}

pub(crate) fn has_infinite_variance(q: &SecondOrderDist) -> bool {
    q.coordinates().iter().any(|c: &Coordinate| c.variance() == f64::INFINITY)
}
