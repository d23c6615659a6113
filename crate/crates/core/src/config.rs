//! Parsing of second-order law specifications from TOML tables.
//!
//! A law is a table with a `law` key and named parameters:
//!
//! ```toml
//! [second_order]
//! law = "nig"
//! gamma = 0.0
//! upsilon = 1.0
//! alpha = 2.0
//! beta = 1.0
//! ```
//!
//! One-parameter families accept a 1-D law directly (`law = "pareto"`,
//! `alpha = 1.5`). Products list one sub-table per coordinate, keyed by
//! parameter name (`mu`, `sigma2`, `lambda`). Mixtures take either
//! `members = [[μ, σ²], ...]` or one array per coordinate. Every error names
//! the offending key.

use std::collections::BTreeSet;

use toml::Value;

use crate::error::{Result, UqError};
use crate::expfam::Family;
use crate::second_order::{Law1d, SecondOrderDist, SecondOrderLaw};

/// Law names accepted in configuration files.
pub const LAW_NAMES: [&str; 10] = [
    "dirac", "mixture", "nig", "product", "uniform", "trapezoid", "pareto", "invgamma", "gamma", "gausslaw",
];

/// Read access to a TOML table that remembers which keys were consumed.
pub struct TableReader<'a> {
    table: &'a toml::Table,
    prefix: String,
    used: BTreeSet<&'a str>,
}

impl<'a> TableReader<'a> {
    pub fn new(value: &'a Value, prefix: &str) -> Result<Self> {
        match value.as_table() {
            Some(table) => Ok(TableReader {
                table,
                prefix: prefix.to_string(),
                used: BTreeSet::new(),
            }),
            None => Err(UqError::config(prefix, "expected a table")),
        }
    }

    pub fn from_table(table: &'a toml::Table, prefix: &str) -> Self {
        TableReader {
            table,
            prefix: prefix.to_string(),
            used: BTreeSet::new(),
        }
    }

    /// Dotted path of `name` inside this table.
    pub fn key(&self, name: &str) -> String {
        if self.prefix.is_empty() {
            name.to_string()
        } else {
            format!("{}.{name}", self.prefix)
        }
    }

    pub fn has(&self, name: &str) -> bool {
        self.table.contains_key(name)
    }

    pub fn get(&mut self, name: &str) -> Option<&'a Value> {
        let (k, v) = self.table.get_key_value(name)?;
        self.used.insert(k.as_str());
        Some(v)
    }

    pub fn require(&mut self, name: &str) -> Result<&'a Value> {
        let key = self.key(name);
        self.get(name).ok_or_else(|| UqError::config(key, "missing"))
    }

    pub fn f64(&mut self, name: &str) -> Result<f64> {
        let key = self.key(name);
        as_f64(self.require(name)?, &key)
    }

    pub fn opt_f64(&mut self, name: &str) -> Result<Option<f64>> {
        let key = self.key(name);
        self.get(name).map(|v| as_f64(v, &key)).transpose()
    }

    pub fn str(&mut self, name: &str) -> Result<&'a str> {
        let key = self.key(name);
        self.require(name)?
            .as_str()
            .ok_or_else(|| UqError::config(key, "expected a string"))
    }

    pub fn opt_str(&mut self, name: &str) -> Result<Option<&'a str>> {
        let key = self.key(name);
        match self.get(name) {
            None => Ok(None),
            Some(v) => v.as_str().map(Some).ok_or_else(|| UqError::config(key, "expected a string")),
        }
    }

    pub fn opt_u64(&mut self, name: &str) -> Result<Option<u64>> {
        let key = self.key(name);
        match self.get(name) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(UqError::config(key, "expected a nonnegative integer")),
        }
    }

    pub fn f64_array(&mut self, name: &str) -> Result<Vec<f64>> {
        let key = self.key(name);
        f64_array(self.require(name)?, &key)
    }

    /// Fails on the first key that was never read.
    pub fn finish(self) -> Result<()> {
        for k in self.table.keys() {
            if !self.used.contains(k.as_str()) {
                return Err(UqError::config(self.key(k), "unknown key"));
            }
        }
        Ok(())
    }
}

pub fn as_f64(v: &Value, key: &str) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(UqError::config(key, "expected a number")),
    }
}

pub fn f64_array(v: &Value, key: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| UqError::config(key, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| as_f64(x, &format!("{key}[{i}]")))
        .collect()
}

fn domain_to_config(key: &str) -> impl Fn(UqError) -> UqError + '_ {
    move |e| match e {
        UqError::Config { .. } => e,
        other => UqError::config(key, other.to_string()),
    }
}

/// Parses a 1-D law table such as `{ law = "uniform", lower = 1, upper = 3 }`.
pub fn parse_law1d(value: &Value, prefix: &str) -> Result<Law1d> {
    let mut r = TableReader::new(value, prefix)?;
    let name = r.str("law")?;
    let law = law1d_body(&mut r, name)?;
    r.finish()?;
    law.validate().map_err(domain_to_config(prefix))?;
    Ok(law)
}

fn law1d_body(r: &mut TableReader<'_>, name: &str) -> Result<Law1d> {
    Ok(match name {
        "dirac" => Law1d::PointMass { value: r.f64("value")? },
        "uniform" => Law1d::Uniform {
            lower: r.f64("lower")?,
            upper: r.f64("upper")?,
        },
        "trapezoid" => Law1d::Trapezoid {
            lower: r.f64("lower")?,
            upper: r.f64("upper")?,
            half_width: r.f64("half_width")?,
        },
        "pareto" => Law1d::Pareto { alpha: r.f64("alpha")? },
        "invgamma" => Law1d::InverseGamma {
            alpha: r.f64("alpha")?,
            beta: r.f64("beta")?,
        },
        "gamma" => Law1d::Gamma {
            shape: r.f64("shape")?,
            rate: r.f64("rate")?,
        },
        "gausslaw" => Law1d::GaussianLaw {
            mean: r.f64("mean")?,
            var: r.f64("var")?,
        },
        other => return Err(UqError::config(r.key("law"), format!("unknown law `{other}`"))),
    })
}

/// Parses a second-order law table for `family`; `prefix` is the dotted
/// path of the table, used in error messages.
pub fn parse_second_order(family: Family, value: &Value, prefix: &str) -> Result<SecondOrderDist> {
    let mut r = TableReader::new(value, prefix)?;
    let names = family.param_names();
    let name = match r.opt_str("law")? {
        Some(n) => n,
        None if names.iter().any(|n| r.has(n)) => "product",
        None => return Err(UqError::config(r.key("law"), "missing")),
    };
    let law = match name {
        "dirac" => {
            let theta = if r.has("theta") {
                r.f64_array("theta")?
            } else if family.param_dim() == 1 && r.has("value") {
                vec![r.f64("value")?]
            } else {
                names.iter().map(|n| r.f64(n)).collect::<Result<_>>()?
            };
            SecondOrderLaw::Dirac { theta }
        }
        "mixture" => {
            let members = if r.has("members") {
                let key = r.key("members");
                let arr = r
                    .require("members")?
                    .as_array()
                    .ok_or_else(|| UqError::config(&key, "expected an array of parameter vectors"))?;
                arr.iter()
                    .enumerate()
                    .map(|(i, m)| f64_array(m, &format!("{key}[{i}]")))
                    .collect::<Result<Vec<_>>>()?
            } else {
                let cols: Vec<Vec<f64>> = names.iter().map(|n| r.f64_array(n)).collect::<Result<_>>()?;
                let m = cols[0].len();
                if let Some(i) = cols.iter().position(|c| c.len() != m) {
                    return Err(UqError::config(r.key(names[i]), format!("expected {m} entries")));
                }
                (0..m).map(|j| cols.iter().map(|c| c[j]).collect()).collect()
            };
            SecondOrderLaw::Mixture { members }
        }
        "nig" => SecondOrderLaw::Nig {
            gamma: r.f64("gamma")?,
            upsilon: r.f64("upsilon")?,
            alpha: r.f64("alpha")?,
            beta: r.f64("beta")?,
        },
        "product" => {
            let marginals = names
                .iter()
                .map(|n| {
                    let key = r.key(n);
                    parse_law1d(r.require(n)?, &key)
                })
                .collect::<Result<_>>()?;
            SecondOrderLaw::Product { marginals }
        }
        other if family.param_dim() == 1 && LAW_NAMES.contains(&other) => SecondOrderLaw::Product {
            marginals: vec![law1d_body(&mut r, other)?],
        },
        other if LAW_NAMES.contains(&other) => {
            return Err(UqError::config(
                r.key("law"),
                format!("`{other}` is a 1-D law; give one sub-table per coordinate ({})", names.join(", ")),
            ))
        }
        other => return Err(UqError::config(r.key("law"), format!("unknown law `{other}`"))),
    };
    r.finish()?;
    SecondOrderDist::new(family, law).map_err(domain_to_config(prefix))
}

/// Parses the `family` key of a table.
pub fn parse_family(r: &mut TableReader<'_>) -> Result<Family> {
    let key = r.key("family");
    let name = r.str("family")?;
    name.parse()
        .map_err(|_| UqError::config(key, format!("unknown family `{name}`")))
}
