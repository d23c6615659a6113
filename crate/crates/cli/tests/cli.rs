use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use uqreg::UncertaintyReport;

fn uqreg(args: &[&str], dir: &Path, seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_uqreg"));
    cmd.args(args).current_dir(dir).env_remove("UQREG_SEED");
    if let Some(s) = seed {
        cmd.env("UQREG_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn setup(files: &[(&str, &str)]) -> TempDir {
    let tmp = TempDir::new().unwrap();
    for (name, text) in files {
        std::fs::write(tmp.path().join(name), text).unwrap();
    }
    tmp
}

const NIG: &str = "family = 'gaussian'\nsecond_order = { law = 'nig', gamma = 0, upsilon = 1, alpha = 2, beta = 1 }\n";

#[test]
fn measure_nig_human() {
    let tmp = setup(&[("nig.toml", NIG)]);
    let out = uqreg(&["measure", "-c", "nig.toml"], tmp.path(), None);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for needle in ["1.41893853", "1.20754637", "0.711392168", "additivity gap"] {
        assert!(text.contains(needle), "{needle} missing from\n{text}");
    }
}

#[test]
fn measure_csv_and_json() {
    let csv = "family = 'exponential'\noutput = 'csv'\nsecond_order = { law = 'pareto', alpha = 1.5 }\n";
    let json = csv.replace("'csv'", "'json-record'");
    let tmp = setup(&[("c.toml", csv), ("j.toml", &json)]);

    let text = stdout(&uqreg(&["measure", "-c", "c.toml"], tmp.path(), None));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("measure,tu,au,eu,tu_marginal,se_tu,se_au,se_eu,additivity_gap"));
    let entropy = lines.next().unwrap();
    assert!(entropy.starts_with("entropy,") && entropy.contains("0.368054378"), "{entropy}");
    assert!(!text.contains('\r'));

    let text = stdout(&uqreg(&["measure", "-c", "j.toml"], tmp.path(), None));
    let reports: Vec<UncertaintyReport> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reports.len(), 2);
    assert!((reports[0].eu - 0.368054378).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_2() {
    let tmp = setup(&[
        ("bad_family.toml", "family = 'laplace'\nsecond_order = { law = 'dirac' }\n"),
        ("bad_catalog.toml", "[[entry]]\ncheck = 'a0'\nfamily = 'gaussian'\nbatch = [{ law = 'cauchy' }]\n"),
        ("bad_sweep.toml", "representation = 'nig'\naxis1 = { param = 'alpha', min = 0.5, max = 3 }\naxis2 = { param = 'beta', min = 1, max = 2 }\n"),
    ]);
    let dir = tmp.path();
    assert_eq!(code(&uqreg(&["measure", "-c", "bad_family.toml"], dir, None)), 2);
    assert_eq!(code(&uqreg(&["axioms", "--catalog", "bad_catalog.toml", "-o", "x.txt"], dir, None)), 2);
    assert_eq!(code(&uqreg(&["repro", "prop99"], dir, None)), 2);
    assert_eq!(code(&uqreg(&["sweep", "-c", "bad_sweep.toml", "-o", "s.csv"], dir, None)), 2);
    assert_eq!(code(&uqreg(&["frobnicate"], dir, None)), 2);
    assert_eq!(code(&uqreg(&["measure", "-c", "bad_family.toml"], dir, Some("abc"))), 2);
}

#[test]
fn io_failures_exit_3() {
    let tmp = setup(&[("toy.toml", "")]);
    let dir = tmp.path();
    assert_eq!(code(&uqreg(&["toy", "-c", "toy.toml", "-o", "missing/dir/t.csv"], dir, None)), 3);
    assert_eq!(code(&uqreg(&["measure", "-c", "nope.toml"], dir, None)), 3);
}

#[test]
fn unexpected_verdict_exits_1() {
    // a Dirac mass has zero variance EU, and with nothing else in the catalog
    // the variance A1 row reads "holds" where "violated" is expected
    let catalog = "[[entry]]\ncheck = 'a1'\nmeasure = 'variance'\nfamily = 'gaussian'\nwitnesses = [{ law = 'dirac', mu = 0, sigma2 = 1 }]\nrandom = 0\ndiracs = 0\n";
    let tmp = setup(&[("cat.toml", catalog)]);
    let out = uqreg(&["axioms", "--catalog", "cat.toml", "--measure", "variance", "-o", "v.txt"], tmp.path(), None);
    let report = std::fs::read_to_string(tmp.path().join("v.txt")).unwrap_or_default();
    assert_eq!(code(&out), 1, "{}\n{report}", String::from_utf8_lossy(&out.stderr));
    assert!(report.contains("DEVIATION"), "{report}");
}

#[test]
fn axioms_default_run() {
    let tmp = setup(&[]);
    let out = uqreg(&["axioms", "-o", "a.txt"], tmp.path(), None);
    assert_eq!(code(&out), 0);
    let report = std::fs::read_to_string(tmp.path().join("a.txt")).unwrap();
    assert!(report.contains("deviations: 0"));
    assert!(!report.contains("DEVIATION"));
}

#[test]
fn repro_all_agrees() {
    let tmp = setup(&[]);
    let out = uqreg(&["repro", "all"], tmp.path(), None);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.matches(": agrees").count(), 5, "{text}");
}

#[test]
fn seed_override() {
    let mc = "family = 'gaussian'\nestimator = 'monte_carlo'\nmc_samples = 5000\nseed = 1\nsecond_order = { law = 'nig', gamma = 0, upsilon = 1, alpha = 3, beta = 1 }\n";
    let other = mc.replace("seed = 1", "seed = 2");
    let tmp = setup(&[("a.toml", mc), ("b.toml", &other)]);
    let dir = tmp.path();
    let run = |f: &str, s: Option<&str>| stdout(&uqreg(&["measure", "-c", f], dir, s));
    assert_ne!(run("a.toml", None), run("b.toml", None));
    assert_eq!(run("a.toml", Some("9")), run("b.toml", Some("9")));
}

#[test]
fn toy_headers_and_identical_members() {
    let flat = "mean = { curve = 'flat', jitter = 0 }\nvariance = { curve = 'constant', level = 2, jitter = 0 }\ngrid = { n_points = 5 }\n";
    let tmp = setup(&[("flat.toml", flat)]);
    let out = uqreg(&["toy", "-c", "flat.toml", "-o", "t.csv"], tmp.path(), None);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(tmp.path().join("t.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,au_var,eu_var,tu_var,au_ent,eu_ent,tu_ent"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert_eq!((r[1], r[2], r[5]), (2.0, 0.0, 0.0), "{r:?}");
    }
}

#[test]
fn sweep_cells() {
    let nig = "representation = 'nig'\naxis1 = { param = 'alpha', min = 2, max = 3, steps = 2 }\naxis2 = { param = 'beta', min = 1, max = 2, steps = 2 }\n";
    let ens = "representation = 'ensemble2'\naxis1 = { param = 'sigma2_1', min = 0.5, max = 1, steps = 2 }\naxis2 = { param = 'sigma2_2', min = 0.5, max = 1, steps = 2 }\n";
    let tmp = setup(&[("nig.toml", nig), ("ens.toml", ens), ("m.toml", NIG)]);
    let dir = tmp.path();
    assert_eq!(code(&uqreg(&["sweep", "-c", "nig.toml", "-o", "n.csv"], dir, None)), 0);
    let text = std::fs::read_to_string(dir.join("n.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis1,axis2,au_var,eu_var,au_ent,eu_ent");
    assert_eq!(lines.len(), 5);
    // α = 2, β = 1 is the measure example above
    let cell: Vec<&str> = lines[1].split(',').collect();
    let measured = stdout(&uqreg(&["measure", "-c", "m.toml"], dir, None));
    assert_eq!(&cell[..4], ["2", "1", "1", "1"]);
    assert!(measured.contains(cell[4]) && measured.contains(cell[5]), "{cell:?}\n{measured}");

    assert_eq!(code(&uqreg(&["sweep", "-c", "ens.toml", "-o", "e.csv"], dir, None)), 0);
    let text = std::fs::read_to_string(dir.join("e.csv")).unwrap();
    for row in text.lines().skip(1) {
        let eu_var: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(eu_var, 0.0, "{row}");
    }
}
