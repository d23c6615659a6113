//! `uqreg sweep`: closed-form measures over a 2-D parameter grid.
//!
//! ```toml
//! representation = "nig"              # nig | ensemble2
//! fixed = { gamma = 0, upsilon = 0.5 }
//! axis1 = { param = "alpha", min = 1.5, max = 5, steps = 20 }
//! axis2 = { param = "beta", min = 0.5, max = 3, steps = 20 }
//! ```
//!
//! `nig` parameters are `gamma, upsilon, alpha, beta` (defaults 0, 1, 2, 1).
//! `ensemble2` is a two-member Gaussian ensemble with parameters
//! `mu1, mu2, sigma2_1, sigma2_2` (defaults 0, 0, 1, 1).

use uqreg::config::TableReader;
use uqreg::measures::{compute, Estimator, EstimatorPolicy, MeasureRequest};
use uqreg::{Family, MeasureKind, SecondOrderDist, UqError};

use crate::format::Csv;

pub const SWEEP_HEADER: [&str; 6] = ["axis1", "axis2", "au_var", "eu_var", "au_ent", "eu_ent"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Nig,
    Ensemble2,
}

impl Representation {
    pub fn params(self) -> &'static [&'static str] {
        match self {
            Representation::Nig => &["gamma", "upsilon", "alpha", "beta"],
            Representation::Ensemble2 => &["mu1", "mu2", "sigma2_1", "sigma2_2"],
        }
    }

    fn defaults(self) -> [f64; 4] {
        match self {
            Representation::Nig => [0.0, 1.0, 2.0, 1.0],
            Representation::Ensemble2 => [0.0, 0.0, 1.0, 1.0],
        }
    }

    /// Exclusive lower bound of each parameter, if any.
    fn lower_bound(self, i: usize) -> Option<f64> {
        match (self, i) {
            (Representation::Nig, 1) | (Representation::Nig, 3) => Some(0.0),
            (Representation::Nig, 2) => Some(1.0),
            (Representation::Ensemble2, 2) | (Representation::Ensemble2, 3) => Some(0.0),
            _ => None,
        }
    }

    fn build(self, p: [f64; 4]) -> Result<SecondOrderDist, UqError> {
        match self {
            Representation::Nig => SecondOrderDist::nig(p[0], p[1], p[2], p[3]),
            Representation::Ensemble2 => SecondOrderDist::mixture(Family::Gaussian, vec![vec![p[0], p[2]], vec![p[1], p[3]]]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: usize,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.max } else { self.min + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub representation: Representation,
    pub fixed: [f64; 4],
    pub axis1: Axis,
    pub axis2: Axis,
}

fn parse_axis(rep: Representation, value: &toml::Value, prefix: &str) -> Result<Axis, UqError> {
    let mut r = TableReader::new(value, prefix)?;
    let pkey = r.key("param");
    let name = r.str("param")?;
    let param = rep
        .params()
        .iter()
        .position(|p| *p == name)
        .ok_or_else(|| UqError::config(&pkey, format!("unknown parameter `{name}`; expected one of {}", rep.params().join(", "))))?;
    let min_key = r.key("min");
    let (min, max) = (r.f64("min")?, r.f64("max")?);
    let steps_key = r.key("steps");
    let steps = r.opt_u64("steps")?.unwrap_or(11) as usize;
    r.finish()?;
    if steps == 0 {
        return Err(UqError::config(steps_key, "must be at least 1"));
    }
    if !(min.is_finite() && max.is_finite() && min <= max) {
        return Err(UqError::config(min_key, "need finite min ≤ max"));
    }
    if let Some(lb) = rep.lower_bound(param) {
        if min <= lb {
            return Err(UqError::config(min_key, format!("`{name}` must stay above {lb}")));
        }
    }
    Ok(Axis { param, min, max, steps })
}

impl SweepSpec {
    pub fn parse(src: &str) -> Result<Self, UqError> {
        let table: toml::Table = toml::from_str(src).map_err(|e| UqError::config("spec", e.message()))?;
        let mut r = TableReader::from_table(&table, "");
        let rkey = r.key("representation");
        let representation = match r.str("representation")? {
            "nig" => Representation::Nig,
            "ensemble2" => Representation::Ensemble2,
            other => return Err(UqError::config(rkey, format!("unknown representation `{other}`"))),
        };
        let mut fixed = representation.defaults();
        if let Some(v) = r.get("fixed") {
            let mut f = TableReader::new(v, "fixed")?;
            for (i, name) in representation.params().iter().enumerate() {
                if let Some(x) = f.opt_f64(name)? {
                    if representation.lower_bound(i).is_some_and(|lb| x <= lb) {
                        return Err(UqError::config(f.key(name), "outside the parameter domain"));
                    }
                    fixed[i] = x;
                }
            }
            f.finish()?;
        }
        let axis1 = parse_axis(representation, r.require("axis1")?, "axis1")?;
        let axis2 = parse_axis(representation, r.require("axis2")?, "axis2")?;
        if axis1.param == axis2.param {
            return Err(UqError::config("axis2.param", "the two axes must sweep different parameters"));
        }
        r.finish()?;
        Ok(SweepSpec {
            representation,
            fixed,
            axis1,
            axis2,
        })
    }

    /// One row per grid cell, `axis1` outer; closed forms only.
    pub fn table(&self) -> Result<Csv, UqError> {
        let mut csv = Csv::new(&SWEEP_HEADER);
        for a in self.axis1.values() {
            for b in self.axis2.values() {
                let mut p = self.fixed;
                p[self.axis1.param] = a;
                p[self.axis2.param] = b;
                let q = self.representation.build(p)?;
                let v = closed_form(&q, MeasureKind::Variance)?;
                let h = closed_form(&q, MeasureKind::Entropy)?;
                csv.row(&[a, b, v.0, v.1, h.0, h.1]);
            }
        }
        Ok(csv)
    }
}

/// `(au, eu)`, refusing anything that needed a numerical estimator.
fn closed_form(q: &SecondOrderDist, kind: MeasureKind) -> Result<(f64, f64), UqError> {
    let r = compute(&MeasureRequest::new(q.clone(), kind).with_policy(EstimatorPolicy::PreferClosedForm))?;
    if r.estimator.au != Estimator::ClosedForm || r.estimator.eu != Estimator::ClosedForm {
        return Err(UqError::Unsupported(format!("{kind} measures have no closed form here")));
    }
    Ok((r.au, r.eu))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NIG: &str = "representation = 'nig'\naxis1 = { param = 'alpha', min = 2, max = 4, steps = 3 }\naxis2 = { param = 'beta', min = 1, max = 3, steps = 3 }";

    #[test]
    fn nig_cells() {
        let spec = SweepSpec::parse(NIG).unwrap();
        let csv = spec.table().unwrap();
        let lines: Vec<&str> = csv.as_str().lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER.join(","));
        assert_eq!(lines.len(), 10);
        // alpha = 2, beta = 1, upsilon = 1, gamma = 0
        assert!(lines[1].starts_with("2,1,1,1,1.20754"), "{}", lines[1]);
    }

    #[test]
    fn domain_and_axis_errors() {
        let key = |src: &str| match SweepSpec::parse(src).unwrap_err() {
            UqError::Config { key, .. } => key,
            e => panic!("{e:?}"),
        };
        assert_eq!(key(&NIG.replace("min = 2", "min = 0.5")), "axis1.min");
        assert_eq!(key(&NIG.replace("'beta', min = 1", "'alpha', min = 3")), "axis2.param");
        assert_eq!(key(&NIG.replace("'beta'", "'delta'")), "axis2.param");
        assert_eq!(key(&NIG.replace("'nig'", "'gp'")), "representation");
    }
}
