use uqreg::axioms::default_catalog;
use uqreg::expfam::entropy;
use uqreg::measures::{measure, MeasureKind};
use uqreg::numerics::RandomnessContract;
use uqreg::oracle::{mc_entropy_decomposition, mc_expected_kl, mc_variance_decomposition, OracleEstimate};
use uqreg::{Family, Law1d, ParamPoint, SecondOrderDist};

const N: usize = 100_000;

fn rng(stream: u64) -> RandomnessContract {
    RandomnessContract::new(20_240_601, stream)
}

fn product(family: Family, laws: Vec<Law1d>) -> SecondOrderDist {
    SecondOrderDist::product(family, laws).unwrap()
}

fn examples() -> Vec<(&'static str, SecondOrderDist)> {
    use Family::*;
    use Law1d::*;
    vec![
        (
            "gaussian ensemble",
            SecondOrderDist::mixture(Gaussian, vec![vec![-2.0, 1.0], vec![2.0, 1.0]]).unwrap(),
        ),
        (
            "gaussian ensemble, unequal variances",
            SecondOrderDist::mixture(Gaussian, vec![vec![-1.0, 0.2], vec![0.5, 1.5], vec![0.5, 0.7]]).unwrap(),
        ),
        ("nig", SecondOrderDist::nig(0.0, 1.0, 3.0, 1.0).unwrap()),
        ("nig, skewed", SecondOrderDist::nig(1.0, 2.0, 4.0, 0.5).unwrap()),
        (
            "gaussian product",
            product(Gaussian, vec![GaussianLaw { mean: 0.0, var: 1.0 }, InverseGamma { alpha: 3.0, beta: 2.0 }]),
        ),
        (
            "gaussian uniform product",
            product(Gaussian, vec![Uniform { lower: -1.0, upper: 1.0 }, Uniform { lower: 1.0, upper: 3.0 }]),
        ),
        (
            "gaussian known mean",
            product(Gaussian, vec![PointMass { value: 0.0 }, Gamma { shape: 2.0, rate: 2.0 }]),
        ),
        ("exponential gamma", product(Exponential, vec![Gamma { shape: 3.0, rate: 2.0 }])),
        ("exponential invgamma", product(Exponential, vec![InverseGamma { alpha: 2.1, beta: 0.5 }])),
        ("exponential uniform", product(Exponential, vec![Uniform { lower: 1.0, upper: 3.0 }])),
        (
            "exponential trapezoid",
            product(Exponential, vec![Trapezoid { lower: 1.0, upper: 3.0, half_width: 0.5 }]),
        ),
        ("exponential pareto", product(Exponential, vec![Pareto { alpha: 1.5 }])),
        (
            "exponential ensemble",
            SecondOrderDist::mixture(Exponential, vec![vec![1.0], vec![3.0]]).unwrap(),
        ),
        ("poisson gamma", product(Poisson, vec![Gamma { shape: 3.0, rate: 1.0 }])),
        ("poisson uniform", product(Poisson, vec![Uniform { lower: 1.0, upper: 5.0 }])),
        ("poisson invgamma", product(Poisson, vec![InverseGamma { alpha: 5.0, beta: 4.0 }])),
        ("poisson ensemble", SecondOrderDist::mixture(Poisson, vec![vec![1.0], vec![4.0]]).unwrap()),
    ]
}

fn assert_within(label: &str, closed: f64, oracle: OracleEstimate, k: f64) {
    assert!(
        oracle.agrees_with(closed, k, 1e-12),
        "{label}: closed form {closed}, oracle {} ± {}",
        oracle.value,
        oracle.se()
    );
}

#[test]
fn entropy_closed_forms_match_monte_carlo() {
    for (i, (name, q)) in examples().into_iter().enumerate() {
        let r = measure(&q, MeasureKind::Entropy).unwrap();
        let d = mc_entropy_decomposition(&q, rng(i as u64), N).unwrap();
        assert_within(&format!("{name} AU"), r.au, d.h_conditional, 4.0);
        let kl = mc_expected_kl(&q, rng(100 + i as u64), N).unwrap();
        assert_within(&format!("{name} EU"), r.eu, kl, 4.0);
    }
}

#[test]
fn variance_closed_forms_match_monte_carlo() {
    for (i, (name, q)) in examples().into_iter().enumerate() {
        if name == "exponential pareto" {
            continue; // finite, but the outcome has no fourth moment
        }
        let r = measure(&q, MeasureKind::Variance).unwrap();
        let d = mc_variance_decomposition(&q, rng(200 + i as u64), N).unwrap();
        assert_within(&format!("{name} AU"), r.au, d.aleatoric, 4.0);
        assert_within(&format!("{name} EU"), r.eu, d.epistemic, 4.0);
        assert_within(&format!("{name} TU"), r.tu, d.total, 4.0);
        assert_eq!(r.additivity_gap, 0.0);
    }
}

#[test]
fn first_order_entropy_matches_monte_carlo() {
    let points = [
        ParamPoint::gaussian(0.0, 1.0),
        ParamPoint::gaussian(3.0, 0.01),
        ParamPoint::exponential(0.3),
        ParamPoint::exponential(2.0 * std::f64::consts::E),
        ParamPoint::poisson(0.2),
        ParamPoint::poisson(7.5),
        ParamPoint::poisson(200.0),
    ];
    for (i, theta) in points.into_iter().enumerate() {
        let theta = theta.unwrap();
        let d = mc_entropy_decomposition(&SecondOrderDist::dirac(&theta), rng(300 + i as u64), N).unwrap();
        assert_within(&format!("{theta:?}"), entropy(&theta), d.h_conditional, 3.0);
    }
}

/// Mean and variance of `xs` with the standard errors of both.
fn moments_with_se(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (m, (m2 / n).sqrt(), m2, ((m4 - m2 * m2) / n).sqrt())
}

#[test]
fn sampled_parameters_match_marginal_moments() {
    use Family::*;
    use Law1d::*;
    let qs = vec![
        product(Exponential, vec![Gamma { shape: 0.7, rate: 2.0 }]),
        product(Exponential, vec![InverseGamma { alpha: 5.0, beta: 2.0 }]),
        product(Exponential, vec![Pareto { alpha: 5.0 }]),
        product(Poisson, vec![Trapezoid { lower: 1.0, upper: 3.0, half_width: 0.8 }]),
        product(Gaussian, vec![GaussianLaw { mean: -1.0, var: 2.0 }, Uniform { lower: 0.5, upper: 4.0 }]),
        SecondOrderDist::nig(0.5, 1.5, 6.0, 2.0).unwrap(),
        SecondOrderDist::mixture(Gaussian, vec![vec![-1.0, 0.5], vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap(),
    ];
    for (i, q) in qs.into_iter().enumerate() {
        let mm = q.marginal_moments();
        let draws = q.sample_params(rng(400 + i as u64), N).unwrap();
        for c in 0..q.family().param_dim() {
            let xs: Vec<f64> = draws.iter().map(|p| p.values()[c]).collect();
            let (m, m_se, v, v_se) = moments_with_se(&xs);
            assert!((m - mm.mean[c]).abs() <= 4.0 * m_se, "{q:?} coord {c}: mean {m} vs {}", mm.mean[c]);
            assert!(
                (v - mm.variance[c]).abs() <= 4.0 * v_se + 1e-12,
                "{q:?} coord {c}: variance {v} vs {}",
                mm.variance[c]
            );
        }
    }
}

#[test]
fn oracles_are_self_consistent_on_catalog() {
    for (i, q) in default_catalog().configurations().into_iter().enumerate() {
        let v = mc_variance_decomposition(&q, rng(500 + i as u64), N).unwrap();
        assert!(v.residual().abs() <= 4.0 * v.combined_se() + 1e-9, "{q:?}: {v:?}");
        let h = mc_entropy_decomposition(&q, rng(600 + i as u64), N).unwrap();
        assert!(h.mutual_info.value >= -3.0 * h.mutual_info.se(), "{q:?}: {h:?}");
    }
}
