//! `uqreg measure`: measures for one configuration file.
//!
//! ```toml
//! family = "gaussian"
//! measure = "both"            # entropy | variance | both
//! estimator = "closed_form"   # closed_form | monte_carlo | quadrature
//! seed = 0
//! mc_samples = 100000
//! marginal_samples = 10000    # optional nested-MC marginal entropy
//! output = "human"            # human | json-record | csv
//!
//! [second_order]
//! law = "nig"
//! gamma = 0
//! upsilon = 1
//! alpha = 2
//! beta = 1
//! ```

use std::fmt::Write as _;

use uqreg::config::{parse_family, parse_second_order, TableReader};
use uqreg::measures::{compute, EstimatorPolicy, MeasureRequest, MIN_MC_SAMPLES};
use uqreg::numerics::{QuadratureSpec, RandomnessContract};
use uqreg::{Family, MeasureKind, SecondOrderDist, UncertaintyReport, UqError};

use crate::exit::CliError;
use crate::format::{g9, Csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorChoice {
    ClosedForm,
    MonteCarlo,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Human,
    JsonRecord,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub family: Family,
    pub second_order: SecondOrderDist,
    pub measures: Vec<MeasureKind>,
    pub estimator: EstimatorChoice,
    pub seed: u64,
    pub mc_samples: usize,
    pub marginal_samples: Option<usize>,
    pub output: OutputFormat,
}

pub const DEFAULT_MC_SAMPLES: usize = 100_000;

/// Parses the measure filter `entropy`, `variance` or `both`.
pub fn parse_measures(s: &str) -> Option<Vec<MeasureKind>> {
    match s {
        "both" => Some(MeasureKind::ALL.to_vec()),
        other => other.parse().ok().map(|m| vec![m]),
    }
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self, UqError> {
        let table: toml::Table = toml::from_str(src).map_err(|e| UqError::config("config", e.message()))?;
        let mut r = TableReader::from_table(&table, "");
        let family = parse_family(&mut r)?;
        let so_key = r.key("second_order");
        let second_order = parse_second_order(family, r.require("second_order")?, &so_key)?;

        let measure_key = r.key("measure");
        let measures = match r.opt_str("measure")? {
            None => MeasureKind::ALL.to_vec(),
            Some(s) => parse_measures(s).ok_or_else(|| UqError::config(measure_key, format!("unknown measure `{s}`")))?,
        };
        let est_key = r.key("estimator");
        let estimator = match r.opt_str("estimator")?.unwrap_or("closed_form") {
            "closed_form" => EstimatorChoice::ClosedForm,
            "monte_carlo" => EstimatorChoice::MonteCarlo,
            "quadrature" => EstimatorChoice::Quadrature,
            other => return Err(UqError::config(est_key, format!("unknown estimator `{other}`"))),
        };
        let seed = r.opt_u64("seed")?.unwrap_or(0);
        let mc_key = r.key("mc_samples");
        let mc_samples = r.opt_u64("mc_samples")?.map_or(DEFAULT_MC_SAMPLES, |v| v as usize);
        if estimator == EstimatorChoice::MonteCarlo && mc_samples < MIN_MC_SAMPLES {
            return Err(UqError::config(mc_key, format!("must be at least {MIN_MC_SAMPLES}")));
        }
        let marginal_key = r.key("marginal_samples");
        let marginal_samples = r.opt_u64("marginal_samples")?.map(|v| v as usize);
        if marginal_samples.is_some_and(|n| n < MIN_MC_SAMPLES) {
            return Err(UqError::config(marginal_key, format!("must be at least {MIN_MC_SAMPLES}")));
        }
        let out_key = r.key("output");
        let output = match r.opt_str("output")?.unwrap_or("human") {
            "human" => OutputFormat::Human,
            "json-record" | "json" => OutputFormat::JsonRecord,
            "csv" => OutputFormat::Csv,
            other => return Err(UqError::config(out_key, format!("unknown output `{other}`"))),
        };
        r.finish()?;
        Ok(RunConfig {
            family,
            second_order,
            measures,
            estimator,
            seed,
            mc_samples,
            marginal_samples,
            output,
        })
    }

    fn request(&self, kind: MeasureKind, index: u64) -> MeasureRequest {
        let rng = RandomnessContract::new(self.seed, index);
        let policy = match self.estimator {
            EstimatorChoice::ClosedForm => EstimatorPolicy::PreferClosedForm,
            EstimatorChoice::MonteCarlo => EstimatorPolicy::ForceMonteCarlo {
                samples: self.mc_samples,
                rng,
            },
            EstimatorChoice::Quadrature => EstimatorPolicy::ForceQuadrature(QuadratureSpec::default()),
        };
        let req = MeasureRequest::new(self.second_order.clone(), kind).with_policy(policy);
        match (kind, self.marginal_samples) {
            (MeasureKind::Entropy, Some(n)) => req.with_marginal(n, rng.substream(1)),
            _ => req,
        }
    }

    pub fn reports(&self) -> Result<Vec<UncertaintyReport>, UqError> {
        self.measures
            .iter()
            .map(|&m| compute(&self.request(m, m as u64)))
            .collect()
    }
}

pub const MEASURE_CSV_HEADER: [&str; 9] = ["measure", "tu", "au", "eu", "tu_marginal", "se_tu", "se_au", "se_eu", "additivity_gap"];

/// Renders reports in the configured output format.
pub fn render(reports: &[UncertaintyReport], format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Human => {
            for r in reports {
                writeln!(out, "{} ({})", r.measure, r.estimator).unwrap();
                let rows = [
                    ("TU", Some(r.tu), r.se_tu),
                    ("AU", Some(r.au), r.se_au),
                    ("EU", Some(r.eu), r.se_eu),
                    ("TU marginal", r.tu_marginal, None),
                    ("additivity gap", Some(r.additivity_gap), None),
                ];
                for (name, v, se) in rows {
                    let Some(v) = v else { continue };
                    match se {
                        Some(se) => writeln!(out, "  {name:<15} {} ± {}", g9(v), g9(se)),
                        None => writeln!(out, "  {name:<15} {}", g9(v)),
                    }
                    .unwrap();
                }
            }
        }
        OutputFormat::JsonRecord => {
            for r in reports {
                out.push_str(&serde_json::to_string(r).expect("reports serialise"));
                out.push('\n');
            }
        }
        OutputFormat::Csv => {
            // the measure column is text, so rows are assembled by hand
            out.push_str(Csv::new(&MEASURE_CSV_HEADER).as_str());
            for r in reports {
                let opt = |v: Option<f64>| v.map(g9).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.measure,
                    g9(r.tu),
                    g9(r.au),
                    g9(r.eu),
                    opt(r.tu_marginal),
                    opt(r.se_tu),
                    opt(r.se_au),
                    opt(r.se_eu),
                    g9(r.additivity_gap)
                )
                .unwrap();
            }
        }
    }
    out
}

/// Runs a parsed configuration and returns the rendered output.
pub fn cmd_measure(cfg: &RunConfig) -> Result<String, CliError> {
    Ok(render(&cfg.reports()?, cfg.output))
}
