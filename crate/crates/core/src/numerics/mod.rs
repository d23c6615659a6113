//! Special functions, random streams and 1-D quadrature shared by the other
//! modules.

mod quadrature;
mod rng;
mod special;

pub use quadrature::{integrate_1d, integrate_piecewise, QuadratureSpec};
pub(crate) use quadrature::integrate_piecewise_counted;
pub use rng::RandomnessContract;
pub use special::{digamma, log_gamma};

/// Mean and standard error of equally sized batch estimates.
pub(crate) fn batch_mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean of `values`; returns the shared value exactly when all entries agree.
pub(crate) fn exact_mean(values: &[f64]) -> f64 {
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return first;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Two-pass population variance (divides by `n`).
pub(crate) fn population_variance(values: &[f64]) -> f64 {
    let mean = exact_mean(values);
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64
}
