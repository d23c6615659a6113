//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines are always printed: `cargo test --test acceptance`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;
use tempfile::TempDir;
use uqreg::axioms::default_catalog;
use uqreg::measures::{measure, MeasureKind};
use uqreg::numerics::RandomnessContract;
use uqreg::oracle::{mc_entropy_decomposition, mc_expected_kl, mc_variance_decomposition, OracleEstimate};
use uqreg::{Family, SecondOrderDist};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

const N: usize = 100_000;

fn uqreg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uqreg"))
        .args(args)
        .current_dir(dir)
        .env_remove("UQREG_SEED")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> Result<String, String> {
    if out.status.code() == Some(0) {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(label: &str, closed: f64, o: OracleEstimate, k: f64) -> Result<(), String> {
    ensure(o.agrees_with(closed, k, 1e-12), || {
        format!("{label}: closed form {closed}, oracle {} ± {}", o.value, o.se())
    })
}

/// `values[name]` of a reproducer report, closed form and oracle pairs.
fn repro_values(report: &Value) -> BTreeMap<String, Vec<(f64, Option<Value>)>> {
    let mut out: BTreeMap<String, Vec<(f64, Option<Value>)>> = BTreeMap::new();
    for v in report["values"].as_array().unwrap() {
        out.entry(v["name"].as_str().unwrap().to_string())
            .or_default()
            .push((v["closed_form"].as_f64().unwrap(), v.get("oracle").filter(|o| !o.is_null()).cloned()));
    }
    out
}

fn repro_json(id: &str, dir: &Path) -> Result<Value, String> {
    let text = ok(&uqreg(&["repro", id, "--json"], dir))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(v[0].clone())
}

fn csv_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty csv")?.split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse::<f64>().map_err(|e| format!("{x}: {e}"))).collect())
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

fn criterion_1(dir: &Path) -> Check {
    std::fs::write(
        dir.join("pareto.toml"),
        "family = 'exponential'\nmeasure = 'entropy'\nsecond_order = { law = 'pareto', alpha = 1.5 }\n",
    )
    .unwrap();
    let t = Instant::now();
    ok(&uqreg(&["measure", "-c", "pareto.toml"], dir))?;
    let closed_time = t.elapsed();
    let t = Instant::now();
    let r = repro_json("prop4_pareto_invgamma", dir)?;
    let mc_time = t.elapsed();
    let values = repro_values(&r);
    let ep = values["eu_pareto"][0].0;
    let ei = values["eu_invgamma"][0].0;
    ensure((ep - 0.368054).abs() <= 1e-4, || format!("EU pareto {ep}"))?;
    ensure((ei - 0.519076).abs() <= 1e-4, || format!("EU invgamma {ei}"))?;
    ensure(r["flags"]["a2_upper_violated"] == Value::Bool(true), || "A2_upper not violated".into())?;
    ensure(r["flags"]["invgamma_variance_finite"] == Value::Bool(true), || "IG variance".into())?;
    ensure(r["agrees"] == Value::Bool(true), || format!("oracle disagreement: {r}"))?;
    ensure(closed_time < Duration::from_secs(1), || format!("closed form took {closed_time:?}"))?;
    ensure(mc_time < Duration::from_secs(30), || format!("MC confirmation took {mc_time:?}"))?;
    Ok(format!(
        "EU pareto {ep:.6}, EU invgamma {ei:.6}, A2_upper violated; closed form {closed_time:.2?}, MC {mc_time:.2?}"
    ))
}

fn criterion_2(dir: &Path) -> Check {
    let r = repro_json("prop1_negative_entropy", dir)?;
    let values = repro_values(&r);
    let au = values["au_sharp"][0].0;
    let tu = values["tu_pareto"][0].0;
    let eu = values["eu_pareto"][0].0;
    ensure((au + 2f64.ln()).abs() <= 1e-9, || format!("AU {au}"))?;
    ensure((tu - (1.0 - 3f64.ln())).abs() <= 1e-9, || format!("TU {tu}"))?;
    ensure(tu < eu, || format!("TU {tu} ≥ EU {eu}"))?;
    ensure(r["flags"]["a0_violated"] == Value::Bool(true), || "check_a0 did not flag AU".into())?;
    ensure(r["agrees"] == Value::Bool(true), || format!("oracle disagreement: {r}"))?;
    Ok(format!("AU(δ_2e) = {au:.9}, TU {tu:.6} < EU {eu:.6}, flagged by check_a0"))
}

/// Largest |closed − oracle| / SE over the four NIG checks at one point.
fn nig_point(gamma: f64, upsilon: f64, alpha: f64, beta: f64, seed: RandomnessContract, assert: bool) -> Result<f64, String> {
    let q = SecondOrderDist::nig(gamma, upsilon, alpha, beta).map_err(|e| e.to_string())?;
    let label = format!("NIG({gamma}, {upsilon}, {alpha}, {beta})");
    let v = measure(&q, MeasureKind::Variance).map_err(|e| e.to_string())?;
    ensure((v.au - beta / (alpha - 1.0)).abs() <= 1e-12, || format!("{label} AU formula"))?;
    ensure((v.eu - beta / (upsilon * (alpha - 1.0))).abs() <= 1e-12, || format!("{label} EU formula"))?;
    let h = measure(&q, MeasureKind::Entropy).map_err(|e| e.to_string())?;
    let d = mc_variance_decomposition(&q, seed.substream(0), N).map_err(|e| e.to_string())?;
    let hd = mc_entropy_decomposition(&q, seed.substream(1), N).map_err(|e| e.to_string())?;
    let kl = mc_expected_kl(&q, seed.substream(2), N).map_err(|e| e.to_string())?;
    let pairs = [
        ("variance AU", v.au, d.aleatoric),
        ("variance EU", v.eu, d.epistemic),
        ("entropy AU", h.au, hd.h_conditional),
        ("entropy EU", h.eu, kl),
    ];
    let mut worst: f64 = 0.0;
    for (what, c, o) in pairs {
        if assert {
            within(&format!("{label} {what}"), c, o, 4.0)?;
        }
        worst = worst.max((c - o.value).abs() / o.se());
    }
    Ok(worst)
}

const NIG_SHAPES: [(f64, f64, f64); 4] = [(0.0, 1.0, 1.0), (1.5, 0.3, 2.0), (-2.0, 4.0, 0.5), (0.5, 1.7, 3.0)];

fn criterion_3() -> Check {
    // For α ≤ 2 the sampled σ² and the KL integrand have infinite variance,
    // so a standard error does not exist; those points are reported only.
    let mut n = 0;
    let mut worst: f64 = 0.0;
    for (i, alpha) in [2.25, 2.5, 3.0, 4.0, 5.0].into_iter().enumerate() {
        for (j, (gamma, upsilon, beta)) in NIG_SHAPES.into_iter().enumerate() {
            let seed = RandomnessContract::new(3, (10 * i + j) as u64);
            worst = worst.max(nig_point(gamma, upsilon, alpha, beta, seed, true)?);
            n += 1;
        }
    }
    let mut heavy: f64 = 0.0;
    for (i, alpha) in [1.25, 1.5].into_iter().enumerate() {
        for (j, (gamma, upsilon, beta)) in NIG_SHAPES.into_iter().enumerate() {
            let seed = RandomnessContract::new(3, (100 + 10 * i + j) as u64);
            heavy = heavy.max(nig_point(gamma, upsilon, alpha, beta, seed, false)?);
        }
    }
    Ok(format!(
        "{n} NIG grid points, α ∈ [2.25, 5]; largest deviation {worst:.2} SE \
         (α ∈ {{1.25, 1.5}}, no finite SE, not asserted: {heavy:.1} nominal SE)"
    ))
}

fn criterion_4() -> Check {
    use rand::Rng;
    let mut rng = RandomnessContract::new(4, 0).rng();
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let m = rng.random_range(2..=10);
        let mut mus: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mean = mus.iter().sum::<f64>() / m as f64;
        mus.iter_mut().for_each(|x| *x -= mean);
        let members: Vec<Vec<f64>> = mus.iter().map(|&mu| vec![mu, rng.random_range(0.05f64..4.0)]).collect();
        let q = SecondOrderDist::mixture(Family::Gaussian, members).map_err(|e| e.to_string())?;
        let seed = RandomnessContract::new(4, 1 + i);
        let v = measure(&q, MeasureKind::Variance).map_err(|e| e.to_string())?;
        ensure(v.additivity_gap == 0.0, || format!("ensemble {i}: gap {}", v.additivity_gap))?;
        let d = mc_variance_decomposition(&q, seed.substream(0), N).map_err(|e| e.to_string())?;
        within(&format!("ensemble {i} variance AU"), v.au, d.aleatoric, 4.0)?;
        within(&format!("ensemble {i} variance EU"), v.eu, d.epistemic, 4.0)?;
        let h = measure(&q, MeasureKind::Entropy).map_err(|e| e.to_string())?;
        let hd = mc_entropy_decomposition(&q, seed.substream(1), N).map_err(|e| e.to_string())?;
        within(&format!("ensemble {i} entropy AU"), h.au, hd.h_conditional, 4.0)?;
        let kl = mc_expected_kl(&q, seed.substream(2), N).map_err(|e| e.to_string())?;
        within(&format!("ensemble {i} entropy EU"), h.eu, kl, 4.0)?;
        for (c, o) in [(v.au, d.aleatoric), (h.au, hd.h_conditional), (h.eu, kl)] {
            worst = worst.max((c - o.value).abs() / o.se());
        }
    }
    Ok(format!("50 zero-mean ensembles; additivity gap 0; largest deviation {worst:.2} SE"))
}

fn criterion_5(dir: &Path) -> Check {
    let out = uqreg(&["axioms", "-o", "axioms.json"], dir);
    ok(&out)?;
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("axioms.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let status = |measure: &str, axiom: &str, target: &str| -> Option<String> {
        report["summary"].as_array()?.iter().find_map(|r| {
            (r["measure"] == measure && r["axiom"] == axiom && r["target"] == target)
                .then(|| r["status"].as_str().unwrap().to_string())
        })
    };
    let expected = [
        ("entropy", "A0", "eu", "holds"),
        ("entropy", "A0", "au", "violated"),
        ("entropy", "A0", "tu", "violated"),
        ("entropy", "A1", "eu", "holds"),
        ("entropy", "A2_lower", "eu", "holds"),
        ("entropy", "A2_upper", "eu", "violated"),
        ("entropy", "A3", "au", "holds"),
        ("entropy", "A4_weak", "tu", "holds"),
        ("entropy", "A4_strict", "tu", "violated"),
        ("entropy", "A5", "eu", "violated"),
        ("variance", "A0", "all", "holds"),
        ("variance", "A1", "eu", "violated"),
        ("variance", "A2_lower", "eu", "holds"),
        ("variance", "A2_upper", "eu", "holds"),
        ("variance", "A3", "au", "holds"),
        ("variance", "A4_strict", "tu", "violated"),
        ("variance", "A5", "eu", "holds"),
    ];
    for (m, a, t, want) in expected {
        let got = status(m, a, t);
        ensure(got.as_deref() == Some(want), || format!("{m} {a} {t}: {got:?}, expected {want}"))?;
    }
    Ok(format!("{} rows of the verdict matrix match, exit 0", expected.len()))
}

fn criterion_6(dir: &Path) -> Check {
    let r = repro_json("prop8_shift", dir)?;
    let values = repro_values(&r);
    let mut parts = Vec::new();
    for (name, want) in [("eu_before", 0.022615), ("eu_after", 0.005309)] {
        let (closed, oracle) = &values[name][0];
        ensure((closed - want).abs() <= 1e-6, || format!("{name} {closed}"))?;
        let o = oracle.as_ref().ok_or(format!("{name} has no oracle"))?;
        ensure(o["method"] == "quadrature", || format!("{name} oracle is {}", o["method"]))?;
        let ov = o["value"].as_f64().unwrap();
        ensure((ov - closed).abs() <= 1e-6, || format!("{name} quadrature {ov}"))?;
        parts.push(format!("{name} {closed:.6}"));
    }
    ensure(values["shift"][0].0 == 2.0, || "shift".into())?;
    Ok(format!("{}, quadrature within 1e-6", parts.join(", ")))
}

fn criterion_7(dir: &Path) -> Check {
    std::fs::write(dir.join("toy.toml"), "").unwrap();
    ok(&uqreg(&["toy", "-c", "toy.toml", "-o", "toy.csv"], dir))?;
    let (header, rows) = csv_rows(&dir.join("toy.csv"))?;
    ensure(header.join(",") == "x,au_var,eu_var,tu_var,au_ent,eu_ent,tu_ent", || format!("{header:?}"))?;
    let negative = rows.iter().filter(|r| r[4] < 0.0).count();
    ensure(negative >= 1, || "no grid point with au_ent < 0".into())?;
    ensure(rows.iter().all(|r| r[1] > 0.0), || "au_var not positive everywhere".into())?;
    ensure(rows.iter().all(|r| r[2] >= 0.0 && r[5] >= 0.0), || "negative EU".into())?;
    Ok(format!("{negative} of {} grid points have au_ent < 0; au_var > 0 and EU ≥ 0 everywhere", rows.len()))
}

fn criterion_8(dir: &Path) -> Check {
    let (alphas, betas) = ([1.5, 2.0, 3.0, 5.0], [0.25, 0.5, 1.0, 2.0, 4.0]);
    let upsilon = 0.5;
    for alpha in alphas {
        let eu = |beta: f64, kind| {
            measure(&SecondOrderDist::nig(0.0, upsilon, alpha, beta).unwrap(), kind).unwrap().eu
        };
        let e0 = eu(betas[0], MeasureKind::Entropy);
        for beta in betas {
            let e = eu(beta, MeasureKind::Entropy);
            ensure((e - e0).abs() <= 1e-12, || format!("eu_ent at α={alpha}: {e0} vs {e} at β={beta}"))?;
            let v = eu(beta, MeasureKind::Variance);
            let slope = 1.0 / (upsilon * (alpha - 1.0));
            ensure((v - slope * beta).abs() <= 1e-12 * v.max(1.0), || format!("eu_var not linear at α={alpha}"))?;
        }
    }
    // the CLI sweep writes the same closed forms
    std::fs::write(
        dir.join("sweep.toml"),
        "representation = 'nig'\nfixed = { gamma = 0, upsilon = 0.5 }\naxis1 = { param = 'alpha', min = 1.5, max = 5, steps = 8 }\naxis2 = { param = 'beta', min = 0.5, max = 4, steps = 8 }\n",
    )
    .unwrap();
    ok(&uqreg(&["sweep", "-c", "sweep.toml", "-o", "sweep.csv"], dir))?;
    let (header, rows) = csv_rows(&dir.join("sweep.csv"))?;
    ensure(header.join(",") == "axis1,axis2,au_var,eu_var,au_ent,eu_ent", || format!("{header:?}"))?;
    for chunk in rows.chunks(8) {
        ensure(chunk.iter().all(|r| r[5] == chunk[0][5]), || format!("eu_ent varies at α={}", chunk[0][0]))?;
        let slope = chunk[0][3] / chunk[0][1];
        ensure(
            chunk.iter().all(|r| (r[3] - slope * r[1]).abs() <= 1e-8 * r[3]),
            || format!("eu_var not linear in β at α={}", chunk[0][0]),
        )?;
    }
    Ok(format!("eu_ent constant in β to 1e-12 over {} α values; eu_var = β/(υ(α−1)); sweep CSV agrees", alphas.len()))
}

fn criterion_9() -> Check {
    let configs = default_catalog().configurations();
    let mut worst_resid: f64 = 0.0;
    let mut worst_mi: f64 = f64::INFINITY;
    for (i, q) in configs.iter().enumerate() {
        let seed = RandomnessContract::new(9, i as u64);
        let v = mc_variance_decomposition(q, seed.substream(0), N).map_err(|e| e.to_string())?;
        let se = v.combined_se();
        ensure(v.residual().abs() <= 4.0 * se + 1e-9, || format!("{q:?}: residual {} vs SE {se}", v.residual()))?;
        if se > 0.0 {
            worst_resid = worst_resid.max(v.residual().abs() / se);
        }
        let h = mc_entropy_decomposition(q, seed.substream(1), N).map_err(|e| e.to_string())?;
        let mi = h.mutual_info;
        ensure(mi.value >= -3.0 * mi.se(), || format!("{q:?}: MI {} ± {}", mi.value, mi.se()))?;
        if mi.se() > 0.0 {
            worst_mi = worst_mi.min(mi.value / mi.se());
        }
    }
    Ok(format!(
        "{} catalog configurations; worst residual {worst_resid:.2} SE, lowest MI {worst_mi:.2} SE",
        configs.len()
    ))
}

fn criterion_10(dir: &Path) -> Check {
    std::fs::write(
        dir.join("mc.toml"),
        "family = 'gaussian'\nestimator = 'monte_carlo'\nseed = 5\nmc_samples = 20000\nmarginal_samples = 2000\noutput = 'json-record'\nsecond_order = { law = 'nig', gamma = 0, upsilon = 1, alpha = 3, beta = 1 }\n",
    )
    .unwrap();
    std::fs::write(dir.join("toy.toml"), "seed = 11\n").unwrap();
    std::fs::write(
        dir.join("sweep2.toml"),
        "representation = 'ensemble2'\naxis1 = { param = 'sigma2_1', min = 0.5, max = 2, steps = 4 }\naxis2 = { param = 'sigma2_2', min = 0.5, max = 2, steps = 4 }\n",
    )
    .unwrap();
    let runs: [(&[&str], Option<&str>); 6] = [
        (&["measure", "-c", "mc.toml"], None),
        (&["axioms", "-o", "ax.txt", "--seed", "4"], Some("ax.txt")),
        (&["axioms", "-o", "ax.json", "--seed", "4"], Some("ax.json")),
        (&["repro", "all", "--seed", "2"], None),
        (&["toy", "-c", "toy.toml", "-o", "t.csv"], Some("t.csv")),
        (&["sweep", "-c", "sweep2.toml", "-o", "s.csv"], Some("s.csv")),
    ];
    for (args, file) in runs {
        let capture = || -> Result<Vec<u8>, String> {
            let out = uqreg(args, dir);
            ok(&out)?;
            let mut bytes = out.stdout.clone();
            if let Some(f) = file {
                bytes.extend(std::fs::read(dir.join(f)).map_err(|e| e.to_string())?);
            }
            Ok(bytes)
        };
        let (a, b) = (capture()?, capture()?);
        ensure(a == b, || format!("`uqreg {}` differs between runs", args.join(" ")))?;
    }
    Ok("measure (Monte Carlo), axioms (text, json), repro all, toy and sweep are byte-identical across runs".into())
}

fn main() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let criteria: Vec<Criterion> = vec![
        ("Pareto vs inverse-gamma EU and A2_upper", Box::new(|| criterion_1(dir))),
        ("negative entropy and TU < EU", Box::new(|| criterion_2(dir))),
        ("NIG closed forms vs Monte Carlo", Box::new(criterion_3)),
        ("ensemble closed forms vs Monte Carlo", Box::new(criterion_4)),
        ("axiom verdict matrix", Box::new(|| criterion_5(dir))),
        ("location shift lowers entropy EU", Box::new(|| criterion_6(dir))),
        ("synthetic ensemble shows negative entropy AU", Box::new(|| criterion_7(dir))),
        ("NIG sweep: eu_ent flat in β, eu_var linear", Box::new(|| criterion_8(dir))),
        ("oracle self-consistency on the catalog", Box::new(criterion_9)),
        ("determinism", Box::new(|| criterion_10(dir))),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria pass", criteria.len());
}
