//! The configurations the axiom checks run on: a built-in default catalog,
//! a TOML format for custom catalogs, and a seeded generator of random
//! second-order distributions.
//!
//! ```toml
//! [[entry]]
//! check = "a2"
//! measure = "entropy"          # or "variance"; omitted means both
//! family = "exponential"
//! infinite = { law = "pareto", alpha = 1.5 }
//! finite = [{ law = "invgamma", alpha = 2.1, beta = 0.5 }]
//!
//! [[entry]]
//! check = "a4"
//! family = "gaussian"
//! second_order = { law = "dirac", mu = 0, sigma2 = 1 }
//! spread = { sigma2 = { split = 0.5 } }   # or { width = w }
//! ```

use std::f64::consts::E;

use rand::Rng;
use toml::Value;

use super::{
    check_a0, check_a1, check_a2_lower, check_a2_upper, check_a3, check_a4, check_a5, collapse,
    has_infinite_variance, AxiomVerdict, DiracTriple, Target,
};
use crate::config::{as_f64, parse_family, parse_second_order, TableReader};
use crate::error::{Result, UqError};
use crate::expfam::{Family, ParamPoint};
use crate::measures::MeasureKind;
use crate::numerics::RandomnessContract;
use crate::second_order::{Law1d, Perturbation, SecondOrderDist, ShiftVector, SpreadSpec};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// Every explicitly listed configuration, including the results of the
    /// listed spreads and shifts. Randomly generated ones are not included.
    pub fn configurations(&self) -> Vec<SecondOrderDist> {
        let mut out = Vec::new();
        for e in &self.entries {
            match &e.check {
                Check::A0 { batch, .. } => out.extend(batch.iter().cloned()),
                Check::A1 { witnesses, .. } => out.extend(witnesses.iter().cloned()),
                Check::A2 { infinite, finite } => {
                    out.push(infinite.clone());
                    out.extend(finite.iter().cloned());
                }
                Check::A3 { triple } => out.extend(triple.points().map(SecondOrderDist::dirac)),
                Check::A4 { q, spread } => {
                    out.push(q.clone());
                    out.extend(q.mean_preserving_spread(spread).ok());
                }
                Check::A5 { q, shift } => {
                    out.push(q.clone());
                    out.extend(q.location_shift(shift).ok());
                }
            }
        }
        out
    }
}

/// One check and the measures it runs under (`None` = both).
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub measures: Option<Vec<MeasureKind>>,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// Non-negativity over `batch` plus `random` generated configurations.
    A0 { family: Family, batch: Vec<SecondOrderDist>, random: usize },
    /// EU = 0 exactly on Diracs: `diracs` random Dirac measures, then the
    /// `witnesses` and `random` generated non-Dirac configurations.
    A1 {
        family: Family,
        witnesses: Vec<SecondOrderDist>,
        random: usize,
        diracs: usize,
    },
    /// Both bounds; the lower bound uses the Diracs at the means of `finite`.
    A2 {
        infinite: SecondOrderDist,
        finite: Vec<SecondOrderDist>,
    },
    A3 { triple: DiracTriple },
    /// Weak and strict, for TU and EU.
    A4 { q: SecondOrderDist, spread: SpreadSpec },
    A5 { q: SecondOrderDist, shift: ShiftVector },
}

impl CatalogEntry {
    pub fn new(check: Check) -> Self {
        CatalogEntry { measures: None, check }
    }

    pub fn only(mut self, m: MeasureKind) -> Self {
        self.measures = Some(vec![m]);
        self
    }

    pub fn applies_to(&self, m: MeasureKind) -> bool {
        self.measures.as_ref().is_none_or(|ms| ms.contains(&m))
    }

    /// Verdicts for one measure; `index` selects the random stream.
    pub fn run(&self, measure: MeasureKind, seed: u64, index: u64) -> Vec<AxiomVerdict> {
        let mut rng = RandomnessContract::new(seed, index).rng();
        match &self.check {
            Check::A0 { family, batch, random } => {
                let mut all = batch.clone();
                all.extend((0..*random).map(|_| random_config(*family, &mut rng, false)));
                [Target::All, Target::Tu, Target::Au, Target::Eu]
                    .into_iter()
                    .map(|t| check_a0(measure, *family, &all, t))
                    .collect()
            }
            Check::A1 {
                family,
                witnesses,
                random,
                diracs,
            } => {
                let dirac_set: Vec<SecondOrderDist> =
                    (0..*diracs).map(|_| random_dirac(*family, &mut rng)).collect();
                let mut others = witnesses.clone();
                others.extend((0..*random).map(|_| random_config(*family, &mut rng, true)));
                vec![check_a1(measure, *family, &dirac_set, &others)]
            }
            Check::A2 { infinite, finite } => vec![
                check_a2_lower(measure, infinite.family(), &collapse(finite)),
                check_a2_upper(measure, infinite, finite),
            ],
            Check::A3 { triple } => vec![check_a3(measure, triple)],
            Check::A4 { q, spread } => [false, true]
                .into_iter()
                .flat_map(|strict| [Target::Tu, Target::Eu].map(|t| check_a4(measure, q, spread, strict, t)))
                .collect(),
            Check::A5 { q, shift } => vec![check_a5(measure, q, shift)],
        }
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn random_dirac<R: Rng + ?Sized>(family: Family, rng: &mut R) -> SecondOrderDist {
    let theta = match family {
        Family::Gaussian => ParamPoint::gaussian(uniform(rng, -3.0, 3.0), log_uniform(rng, 0.01, 10.0)),
        Family::Exponential => ParamPoint::exponential(log_uniform(rng, 0.1, 10.0)),
        Family::Poisson => ParamPoint::poisson(log_uniform(rng, 0.1, 10.0)),
    };
    SecondOrderDist::dirac(&theta.expect("generated inside Θ"))
}

/// A positive-support law over a rate or variance coordinate.
fn random_positive_law<R: Rng + ?Sized>(rng: &mut R) -> Law1d {
    match rng.random_range(0..6) {
        0 => Law1d::PointMass {
            value: log_uniform(rng, 0.1, 10.0),
        },
        1 => {
            let lower = log_uniform(rng, 0.05, 3.0);
            Law1d::Uniform {
                lower,
                upper: lower + log_uniform(rng, 0.05, 5.0),
            }
        }
        2 => {
            let lower = log_uniform(rng, 0.2, 3.0);
            Law1d::Trapezoid {
                lower,
                upper: lower + log_uniform(rng, 0.05, 3.0),
                half_width: lower * uniform(rng, 0.05, 0.9),
            }
        }
        3 => Law1d::Gamma {
            shape: uniform(rng, 0.5, 5.0),
            rate: uniform(rng, 0.5, 4.0),
        },
        4 => Law1d::InverseGamma {
            alpha: uniform(rng, 1.2, 5.0),
            beta: log_uniform(rng, 0.2, 3.0),
        },
        _ => Law1d::Pareto {
            alpha: uniform(rng, 1.2, 4.0),
        },
    }
}

fn random_location_law<R: Rng + ?Sized>(rng: &mut R) -> Law1d {
    let centre = uniform(rng, -3.0, 3.0);
    match rng.random_range(0..3) {
        0 => Law1d::PointMass { value: centre },
        1 => {
            let w = uniform(rng, 0.1, 2.0);
            Law1d::Uniform {
                lower: centre - w,
                upper: centre + w,
            }
        }
        _ => Law1d::GaussianLaw {
            mean: centre,
            var: log_uniform(rng, 0.05, 4.0),
        },
    }
}

/// A random second-order distribution for `family` with finite mean
/// parameters, drawn from Diracs, ensembles, NIG (Gaussian only) and
/// products of tabulated 1-D laws. With `non_dirac`, draws are repeated
/// until the result has positive variance.
pub fn random_config<R: Rng + ?Sized>(family: Family, rng: &mut R, non_dirac: bool) -> SecondOrderDist {
    loop {
        let q = match (family, rng.random_range(0..4)) {
            (_, 0) => random_dirac(family, rng),
            (Family::Gaussian, 1) => {
                let m = rng.random_range(2..=10);
                let members = (0..m)
                    .map(|_| vec![uniform(rng, -3.0, 3.0), log_uniform(rng, 0.05, 5.0)])
                    .collect();
                SecondOrderDist::mixture(family, members).expect("generated inside Θ")
            }
            (_, 1) => {
                let m = rng.random_range(2..=10);
                let members = (0..m).map(|_| vec![log_uniform(rng, 0.1, 10.0)]).collect();
                SecondOrderDist::mixture(family, members).expect("generated inside Θ")
            }
            (Family::Gaussian, 2) => SecondOrderDist::nig(
                uniform(rng, -2.0, 2.0),
                log_uniform(rng, 0.2, 5.0),
                uniform(rng, 1.2, 6.0),
                log_uniform(rng, 0.1, 3.0),
            )
            .expect("valid NIG"),
            (Family::Gaussian, _) => {
                let mu = random_location_law(rng);
                let s2 = random_positive_law(rng);
                SecondOrderDist::product(family, vec![mu, s2]).expect("generated inside Θ")
            }
            (_, _) => SecondOrderDist::product(family, vec![random_positive_law(rng)]).expect("generated inside Θ"),
        };
        if !(non_dirac && q.is_dirac()) {
            return q;
        }
    }
}

fn product(family: Family, marginals: Vec<Law1d>) -> SecondOrderDist {
    SecondOrderDist::product(family, marginals).expect("catalog laws are valid")
}

fn point(v: f64) -> Law1d {
    Law1d::PointMass { value: v }
}

fn uni(a: f64, b: f64) -> Law1d {
    Law1d::Uniform { lower: a, upper: b }
}

fn dirac(family: Family, theta: &[f64]) -> SecondOrderDist {
    SecondOrderDist::dirac(&ParamPoint::new(family, theta.to_vec()).expect("catalog points are valid"))
}

fn triple(family: Family, pts: [&[f64]; 3]) -> DiracTriple {
    let p = |v: &[f64]| ParamPoint::new(family, v.to_vec()).expect("catalog points are valid");
    DiracTriple::new(p(pts[0]), p(pts[1]), p(pts[2])).expect("catalog triples are ordered")
}

/// Number of random configurations per A0 entry.
pub const A0_RANDOM: usize = 500;
/// Number of random non-Dirac configurations per A1 entry.
pub const A1_RANDOM: usize = 200;
/// Number of random Dirac configurations per A1 entry.
pub const A1_DIRACS: usize = 100;

/// The built-in catalog: both measures, all three families.
pub fn default_catalog() -> Catalog {
    use Family::*;
    let mut entries = Vec::new();

    // A0
    for (family, batch) in [
        (Gaussian, vec![dirac(Gaussian, &[0.0, 0.01])]),
        (Exponential, vec![dirac(Exponential, &[2.0 * E])]),
        (Poisson, vec![dirac(Poisson, &[0.5])]),
    ] {
        entries.push(CatalogEntry::new(Check::A0 {
            family,
            batch,
            random: A0_RANDOM,
        }));
    }

    // A1: the variance measure's counterexample is a fixed mean with a
    // spread-out variance parameter.
    let a1_witness = product(Gaussian, vec![point(0.0), Law1d::Gamma { shape: 2.0, rate: 2.0 }]);
    for family in Family::ALL {
        let witnesses = if family == Gaussian { vec![a1_witness.clone()] } else { vec![] };
        entries.push(CatalogEntry::new(Check::A1 {
            family,
            witnesses,
            random: A1_RANDOM,
            diracs: A1_DIRACS,
        }));
    }

    // A2
    let pareto = Law1d::Pareto { alpha: 1.5 };
    let rate_finite = |family| {
        vec![
            product(family, vec![Law1d::InverseGamma { alpha: 2.1, beta: 0.5 }]),
            product(family, vec![Law1d::Gamma { shape: 2.0, rate: 2.0 }]),
            product(family, vec![uni(1.0, 3.0)]),
            dirac(family, &[1.0]),
        ]
    };
    entries.push(CatalogEntry::new(Check::A2 {
        infinite: product(Gaussian, vec![pareto.clone(), point(1.0)]),
        finite: vec![
            SecondOrderDist::nig(0.0, 1.0, 3.0, 1.0).expect("valid NIG"),
            SecondOrderDist::mixture(Gaussian, vec![vec![-2.0, 1.0], vec![2.0, 1.0]]).expect("valid mixture"),
            product(Gaussian, vec![uni(-1.0, 1.0), uni(1.0, 3.0)]),
            dirac(Gaussian, &[0.0, 1.0]),
        ],
    }));
    for family in [Exponential, Poisson] {
        entries.push(CatalogEntry::new(Check::A2 {
            infinite: product(family, vec![pareto.clone()]),
            finite: rate_finite(family),
        }));
    }

    // A3: along the direction in which the first-order variance grows
    entries.push(CatalogEntry::new(Check::A3 {
        triple: triple(Gaussian, [&[0.0, 1.0], &[0.0, 2.0], &[0.0, 3.0]]),
    }));
    entries.push(CatalogEntry::new(Check::A3 {
        triple: triple(Exponential, [&[3.0], &[2.0], &[1.0]]),
    }));
    entries.push(CatalogEntry::new(Check::A3 {
        triple: triple(Poisson, [&[1.0], &[2.0], &[3.0]]),
    }));

    // A4
    let g01 = dirac(Gaussian, &[0.0, 1.0]);
    let g_uniform = product(Gaussian, vec![point(0.0), uni(1.0, 3.0)]);
    for (q, spread) in [
        (g01.clone(), SpreadSpec::single(2, 1, Perturbation::SymmetricDiracSplit(0.5))),
        (g01, SpreadSpec::single(2, 0, Perturbation::SymmetricDiracSplit(2.0))),
        (g_uniform.clone(), SpreadSpec::single(2, 1, Perturbation::UniformWidth(0.5))),
    ] {
        entries.push(CatalogEntry::new(Check::A4 { q, spread }));
    }
    for family in [Exponential, Poisson] {
        entries.push(CatalogEntry::new(Check::A4 {
            q: dirac(family, &[2.0]),
            spread: SpreadSpec::single(1, 0, Perturbation::SymmetricDiracSplit(1.0)),
        }));
        entries.push(CatalogEntry::new(Check::A4 {
            q: product(family, vec![uni(1.0, 3.0)]),
            spread: SpreadSpec::single(1, 0, Perturbation::UniformWidth(0.5)),
        }));
    }

    // A5
    entries.push(CatalogEntry::new(Check::A5 {
        q: g_uniform,
        shift: ShiftVector(vec![0.0, 2.0]),
    }));
    entries.push(CatalogEntry::new(Check::A5 {
        q: SecondOrderDist::mixture(Gaussian, vec![vec![-2.0, 1.0], vec![2.0, 1.0]]).expect("valid mixture"),
        shift: ShiftVector(vec![5.0, 0.0]),
    }));
    entries.push(CatalogEntry::new(Check::A5 {
        q: SecondOrderDist::nig(0.0, 1.0, 3.0, 1.0).expect("valid NIG"),
        shift: ShiftVector(vec![1.0, 0.0]),
    }));
    for family in [Exponential, Poisson] {
        entries.push(CatalogEntry::new(Check::A5 {
            q: product(family, vec![uni(1.0, 3.0)]),
            shift: ShiftVector(vec![2.0]),
        }));
    }

    Catalog { entries }
}

fn parse_measures(r: &mut TableReader<'_>) -> Result<Option<Vec<MeasureKind>>> {
    let key = r.key("measure");
    match r.opt_str("measure")? {
        None | Some("both") => Ok(None),
        Some(s) => s
            .parse()
            .map(|m| Some(vec![m]))
            .map_err(|_| UqError::config(key, format!("unknown measure `{s}`"))),
    }
}

fn parse_q_list(family: Family, r: &mut TableReader<'_>, name: &str) -> Result<Vec<SecondOrderDist>> {
    let key = r.key(name);
    match r.get(name) {
        None => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, v)| parse_second_order(family, v, &format!("{key}[{i}]")))
            .collect(),
        Some(_) => Err(UqError::config(key, "expected an array of law tables")),
    }
}

fn parse_count(r: &mut TableReader<'_>, name: &str, default: usize) -> Result<usize> {
    Ok(r.opt_u64(name)?.map_or(default, |v| v as usize))
}

fn per_coordinate<'v>(family: Family, value: &'v Value, key: &str) -> Result<Vec<Option<&'v Value>>> {
    let table = value.as_table().ok_or_else(|| UqError::config(key, "expected a table keyed by parameter name"))?;
    if let Some(k) = table.keys().find(|k| family.coordinate_index(k).is_none()) {
        return Err(UqError::config(format!("{key}.{k}"), format!("not a {family} parameter")));
    }
    Ok(family.param_names().iter().map(|n| table.get(*n)).collect())
}

fn parse_spread(family: Family, value: &Value, key: &str) -> Result<SpreadSpec> {
    let coords = per_coordinate(family, value, key)?;
    let mut out = Vec::with_capacity(coords.len());
    for (i, c) in coords.into_iter().enumerate() {
        let ckey = format!("{key}.{}", family.param_names()[i]);
        let p = match c {
            None => Perturbation::None,
            Some(v) => {
                let mut r = TableReader::new(v, &ckey)?;
                let p = match (r.opt_f64("split")?, r.opt_f64("width")?) {
                    (Some(d), None) => Perturbation::SymmetricDiracSplit(d),
                    (None, Some(w)) => Perturbation::UniformWidth(w),
                    _ => return Err(UqError::config(ckey, "give exactly one of `split` or `width`")),
                };
                r.finish()?;
                p
            }
        };
        out.push(p);
    }
    Ok(SpreadSpec(out))
}

fn parse_shift(family: Family, value: &Value, key: &str) -> Result<ShiftVector> {
    let coords = per_coordinate(family, value, key)?;
    let z = coords
        .into_iter()
        .enumerate()
        .map(|(i, c)| match c {
            None => Ok(0.0),
            Some(v) => as_f64(v, &format!("{key}.{}", family.param_names()[i])),
        })
        .collect::<Result<_>>()?;
    Ok(ShiftVector(z))
}

fn parse_triple(family: Family, r: &mut TableReader<'_>) -> Result<DiracTriple> {
    let key = r.key("triple");
    let arr = r
        .require("triple")?
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| UqError::config(&key, "expected three parameter vectors [low, mid, high]"))?;
    let pts = arr
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let k = format!("{key}[{i}]");
            let vals = crate::config::f64_array(v, &k)?;
            ParamPoint::new(family, vals).map_err(|e| UqError::config(k, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut it = pts.into_iter();
    let (l, m, u) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    DiracTriple::new(l, m, u).map_err(|e| UqError::config(key, e.to_string()))
}

fn parse_entry(value: &Value, prefix: &str) -> Result<CatalogEntry> {
    let mut r = TableReader::new(value, prefix)?;
    let check_key = r.key("check");
    let check_name = r.str("check")?;
    let measures = parse_measures(&mut r)?;
    let family = parse_family(&mut r)?;
    let q_of = |r: &mut TableReader<'_>| -> Result<SecondOrderDist> {
        let key = r.key("second_order");
        parse_second_order(family, r.require("second_order")?, &key)
    };
    let check = match check_name {
        "a0" => Check::A0 {
            family,
            batch: parse_q_list(family, &mut r, "batch")?,
            random: parse_count(&mut r, "random", 0)?,
        },
        "a1" => Check::A1 {
            family,
            witnesses: parse_q_list(family, &mut r, "witnesses")?,
            random: parse_count(&mut r, "random", 0)?,
            diracs: parse_count(&mut r, "diracs", 0)?,
        },
        "a2" => {
            let key = r.key("infinite");
            let infinite = parse_second_order(family, r.require("infinite")?, &key)?;
            if !has_infinite_variance(&infinite) {
                return Err(UqError::config(key, "needs a marginal with infinite variance"));
            }
            Check::A2 {
                infinite,
                finite: parse_q_list(family, &mut r, "finite")?,
            }
        }
        "a3" => Check::A3 {
            triple: parse_triple(family, &mut r)?,
        },
        "a4" => {
            let q = q_of(&mut r)?;
            let key = r.key("spread");
            let spread = parse_spread(family, r.require("spread")?, &key)?;
            Check::A4 { q, spread }
        }
        "a5" => {
            let q = q_of(&mut r)?;
            let key = r.key("shift");
            let shift = parse_shift(family, r.require("shift")?, &key)?;
            Check::A5 { q, shift }
        }
        other => return Err(UqError::config(check_key, format!("unknown check `{other}`"))),
    };
    r.finish()?;
    Ok(CatalogEntry { measures, check })
}

/// Parses a catalog file; errors name the offending key.
pub fn parse_catalog(src: &str) -> Result<Catalog> {
    let root: toml::Table = toml::from_str(src).map_err(|e| UqError::config("catalog", e.message().to_string()))?;
    let mut r = TableReader::from_table(&root, "");
    let entries = match r.get("entry") {
        None => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, v)| parse_entry(v, &format!("entry[{i}]")))
            .collect::<Result<_>>()?,
        Some(_) => return Err(UqError::config("entry", "expected [[entry]] tables")),
    };
    r.finish()?;
    Ok(Catalog { entries })
}
