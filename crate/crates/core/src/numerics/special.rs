//! Digamma and log-gamma for positive real arguments.
//!
//! Both functions shift the argument upward with the recurrence
//! `Γ(x + 1) = x Γ(x)` until it reaches the asymptotic region `x ≥ 10`, then
//! evaluate the Stirling / Bernoulli series there.

use crate::error::{Result, UqError};

const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// `½ log(2π)`
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return Err(UqError::Domain(format!("{name} requires x > 0, got {x}")));
    }
    Ok(())
}

/// The digamma function ψ(x) = d/dx log Γ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < ASYMPTOTIC_THRESHOLD {
        shift += 1.0 / x;
        x += 1.0;
    }
    // ψ(x) ~ ln x − 1/(2x) − Σ B_{2k} / (2k x^{2k}), seven terms.
    let inv2 = 1.0 / (x * x);
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    Ok(x.ln() - 0.5 / x - series - shift)
}

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive("log_gamma", x)?;
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    let mut x = x;
    let mut product = 1.0;
    while x < ASYMPTOTIC_THRESHOLD {
        product *= x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2
                        * (1.0 / 1260.0
                            - inv2
                                * (1.0 / 1680.0
                                    - inv2
                                        * (1.0 / 1188.0
                                            - inv2 * (691.0 / 360_360.0 - inv2 / 156.0))))));
    let stirling = (x - 0.5) * x.ln() - x + HALF_LN_2PI + series;
    Ok(stirling - product.ln())
}
