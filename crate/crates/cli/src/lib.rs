//! Command-line front end for `uqreg`.
//!
//! Exit codes: 0 success, 1 deviation from the expected axiom verdicts (or
//! a reproducer disagreeing with its oracle), 2 usage or configuration
//! error, 3 numerical or I/O failure. `UQREG_SEED` overrides any seed.

pub mod exit;
pub mod format;
pub mod run;
pub mod sweep;
pub mod toy;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use uqreg::axioms::{parse_catalog, reproduce_counterexample, run_suite, ReproReport, Status, SuiteReport, SuiteRequest, REPRO_IDS};

use crate::exit::{CliError, ExitStatus};
use crate::format::g9;
use crate::run::{cmd_measure, parse_measures, RunConfig};
use crate::sweep::SweepSpec;
use crate::toy::SyntheticEnsembleSpec;

pub const SEED_ENV: &str = "UQREG_SEED";

#[derive(Debug, Parser)]
#[command(name = "uqreg", version, about = "Uncertainty measures for exponential-family predictions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute TU/AU/EU for one configuration file.
    Measure {
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
    },
    /// Run the axiom suite and write a verdict report (JSON if the path ends
    /// in `.json`, a text table otherwise).
    Axioms {
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long, default_value = "both", value_parser = ["entropy", "variance", "both"])]
        measure: String,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reproduce a known counterexample, or `all` of them.
    Repro {
        id: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Synthetic-ensemble comparison of both measures along a 1-D grid.
    Toy {
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Closed-form measures over a 2-D parameter grid.
    Sweep {
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// `UQREG_SEED` if set, else `fallback`.
pub fn effective_seed(fallback: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{SEED_ENV} must be an unsigned integer, got `{s}`"))),
        Err(_) => Ok(fallback),
    }
}

/// Text rendering of a suite report: summary table, then witnesses.
pub fn render_suite(report: &SuiteReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<9} {:<10} {:<6} {:<13} {:<13} {:>8} {:>8}",
        "measure", "axiom", "target", "status", "expected", "verdicts", "in_scope"
    )
    .unwrap();
    for r in &report.summary {
        let flag = if r.matches() { "" } else { "  DEVIATION" };
        writeln!(
            out,
            "{:<9} {:<10} {:<6} {:<13} {:<13} {:>8} {:>8}{flag}",
            r.measure.name(),
            r.axiom.name(),
            r.target.name(),
            r.status.name(),
            r.expected.map_or("-", Status::name),
            r.verdicts,
            r.in_scope
        )
        .unwrap();
    }
    writeln!(out, "\ndeviations: {}", report.deviations().len()).unwrap();
    let violated: Vec<_> = report.verdicts.iter().filter(|v| v.status == Status::Violated && v.in_scope).collect();
    if !violated.is_empty() {
        writeln!(out, "\nwitnesses").unwrap();
    }
    for v in violated {
        write!(out, "  {} {} {} {}:", v.measure.name(), v.axiom.name(), v.target.name(), v.family).unwrap();
        if let Some(w) = &v.witness {
            for (k, x) in &w.values {
                write!(out, " {k}={}", g9(x.0)).unwrap();
            }
        }
        if !v.note.is_empty() {
            write!(out, " ({})", v.note).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Text rendering of one reproducer report.
pub fn render_repro(r: &ReproReport) -> String {
    let mut out = String::new();
    writeln!(out, "{}: {}", r.id, if r.agrees { "agrees" } else { "DISAGREES" }).unwrap();
    writeln!(out, "  {}", r.description).unwrap();
    for v in &r.values {
        match &v.oracle {
            Some(o) => {
                let se = o.standard_error.map(|s| format!(" ± {}", g9(s))).unwrap_or_default();
                writeln!(
                    out,
                    "  {:<20} {:>16}   oracle {}{se} ({:?}, n={})  {}",
                    v.name,
                    g9(v.closed_form),
                    g9(o.value),
                    o.method,
                    o.n_or_subdivisions,
                    if v.agrees { "ok" } else { "MISMATCH" }
                )
                .unwrap();
            }
            None => writeln!(out, "  {:<20} {:>16}", v.name, g9(v.closed_form)).unwrap(),
        }
    }
    for (k, f) in &r.flags {
        writeln!(out, "  {k:<34} {f}").unwrap();
    }
    out
}

fn cmd_axioms(catalog: Option<&Path>, measure: &str, output: &Path, seed: u64) -> Result<ExitStatus, CliError> {
    let measures = parse_measures(measure).ok_or_else(|| CliError::usage(format!("unknown measure `{measure}`")))?;
    let mut req = SuiteRequest::default_suite(effective_seed(seed)?);
    req.measures = measures;
    if let Some(path) = catalog {
        req.catalog = parse_catalog(&read(path)?)?;
    }
    let report = run_suite(&req);
    let text = if output.extension().is_some_and(|e| e == "json") {
        let mut s = serde_json::to_string_pretty(&report).expect("reports serialise");
        s.push('\n');
        s
    } else {
        render_suite(&report)
    };
    write(output, &text)?;
    let deviations = report.deviations().len();
    println!("{} verdicts, {} summary rows, {deviations} deviations", report.verdicts.len(), report.summary.len());
    Ok(if deviations == 0 { ExitStatus::Ok } else { ExitStatus::Deviation })
}

fn cmd_repro(id: &str, seed: u64, json: bool) -> Result<ExitStatus, CliError> {
    let ids: Vec<&str> = if id == "all" { REPRO_IDS.to_vec() } else { vec![id] };
    let seed = effective_seed(seed)?;
    let reports = ids
        .iter()
        .map(|id| reproduce_counterexample(id, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let text = if json {
        let mut s = serde_json::to_string_pretty(&reports).expect("reports serialise");
        s.push('\n');
        s
    } else {
        reports.iter().map(render_repro).collect::<Vec<_>>().join("\n")
    };
    print!("{text}");
    Ok(if reports.iter().all(|r| r.agrees) { ExitStatus::Ok } else { ExitStatus::Deviation })
}

/// Runs a parsed command line.
pub fn dispatch(cli: Cli) -> Result<ExitStatus, CliError> {
    match cli.command {
        Command::Measure { config } => {
            let mut cfg = RunConfig::parse(&read(&config)?)?;
            cfg.seed = effective_seed(cfg.seed)?;
            let out = cmd_measure(&cfg)?;
            std::io::stdout()
                .write_all(out.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            Ok(ExitStatus::Ok)
        }
        Command::Axioms {
            catalog,
            measure,
            output,
            seed,
        } => cmd_axioms(catalog.as_deref(), &measure, &output, seed),
        Command::Repro { id, seed, json } => cmd_repro(&id, seed, json),
        Command::Toy { config, output } => {
            let mut spec = SyntheticEnsembleSpec::parse(&read(&config)?)?;
            spec.seed = effective_seed(spec.seed)?;
            spec.table()?.write_to(&output)?;
            Ok(ExitStatus::Ok)
        }
        Command::Sweep { config, output } => {
            SweepSpec::parse(&read(&config)?)?.table()?.write_to(&output)?;
            Ok(ExitStatus::Ok)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Usage.code() } else { ExitStatus::Ok.code() };
        }
    };
    match dispatch(cli) {
        Ok(s) => s.code(),
        Err(e) => {
            eprintln!("uqreg: {e}");
            e.status.code()
        }
    }
}
