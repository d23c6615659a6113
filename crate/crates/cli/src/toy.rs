//! `uqreg toy`: a synthetic Gaussian ensemble over a 1-D input grid,
//! comparing variance- and entropy-based measures pointwise.
//!
//! Member `m` predicts
//! `μ_m(x) = f(x) + s·(a_m cos x + b_m sin x)` and
//! `log σ²_m(x) = log v(x) + t·c_m`, with `a_m, b_m, c_m ~ N(0, 1)` drawn
//! from the seed. Every key is optional:
//!
//! ```toml
//! seed = 7
//! members = 5
//! grid = { x_min = -3, x_max = 3, n_points = 61 }
//! mean = { curve = "sine", jitter = 0.3 }          # sine | cubic | flat
//! variance = { curve = "bowl", level = 0.01, slope = 0.1, jitter = 0.2 }
//! ```
//!
//! Variance curves: `constant` is `level`, `bowl` is `level + slope·x²`,
//! `increasing` is `level·exp(slope·(x − x_min))`.

use rand::Rng;
use rand_distr::StandardNormal;
use uqreg::config::TableReader;
use uqreg::measures::measure;
use uqreg::numerics::RandomnessContract;
use uqreg::{Family, MeasureKind, SecondOrderDist, UqError};

use crate::format::Csv;

pub const TOY_HEADER: [&str; 7] = ["x", "au_var", "eu_var", "tu_var", "au_ent", "eu_ent", "tu_ent"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanCurve {
    Sine,
    Cubic,
    Flat,
}

impl MeanCurve {
    fn eval(self, x: f64) -> f64 {
        match self {
            MeanCurve::Sine => x.sin(),
            MeanCurve::Cubic => 0.1 * x.powi(3),
            MeanCurve::Flat => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceCurve {
    Constant(f64),
    Bowl { level: f64, slope: f64 },
    Increasing { level: f64, slope: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticEnsembleSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub members: usize,
    pub mean_curve: MeanCurve,
    pub mean_jitter_scale: f64,
    pub variance_curve: VarianceCurve,
    pub variance_jitter_logscale: f64,
    pub seed: u64,
}

impl Default for SyntheticEnsembleSpec {
    fn default() -> Self {
        SyntheticEnsembleSpec {
            x_min: -3.0,
            x_max: 3.0,
            n_points: 61,
            members: 5,
            mean_curve: MeanCurve::Sine,
            mean_jitter_scale: 0.3,
            variance_curve: VarianceCurve::Bowl { level: 0.01, slope: 0.1 },
            variance_jitter_logscale: 0.2,
            seed: 7,
        }
    }
}

fn nonneg(r: &mut TableReader<'_>, name: &str, default: f64) -> Result<f64, UqError> {
    let v = r.opt_f64(name)?.unwrap_or(default);
    if !(v.is_finite() && v >= 0.0) {
        return Err(UqError::config(r.key(name), "must be finite and nonnegative"));
    }
    Ok(v)
}

impl SyntheticEnsembleSpec {
    pub fn parse(src: &str) -> Result<Self, UqError> {
        let d = SyntheticEnsembleSpec::default();
        let table: toml::Table = toml::from_str(src).map_err(|e| UqError::config("spec", e.message()))?;
        let mut r = TableReader::from_table(&table, "");
        let seed = r.opt_u64("seed")?.unwrap_or(d.seed);
        let members_key = r.key("members");
        let members = r.opt_u64("members")?.map_or(d.members, |v| v as usize);
        if members < 2 {
            return Err(UqError::config(members_key, "an ensemble needs at least 2 members"));
        }

        let (mut x_min, mut x_max, mut n_points) = (d.x_min, d.x_max, d.n_points);
        if let Some(v) = r.get("grid") {
            let mut g = TableReader::new(v, "grid")?;
            x_min = g.opt_f64("x_min")?.unwrap_or(x_min);
            x_max = g.opt_f64("x_max")?.unwrap_or(x_max);
            let n_key = g.key("n_points");
            n_points = g.opt_u64("n_points")?.map_or(n_points, |v| v as usize);
            if n_points < 2 {
                return Err(UqError::config(n_key, "need at least 2 grid points"));
            }
            if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
                return Err(UqError::config("grid", "need finite x_min < x_max"));
            }
            g.finish()?;
        }

        let (mut mean_curve, mut mean_jitter_scale) = (d.mean_curve, d.mean_jitter_scale);
        if let Some(v) = r.get("mean") {
            let mut m = TableReader::new(v, "mean")?;
            let key = m.key("curve");
            mean_curve = match m.opt_str("curve")? {
                None | Some("sine") => MeanCurve::Sine,
                Some("cubic") => MeanCurve::Cubic,
                Some("flat") => MeanCurve::Flat,
                Some(other) => return Err(UqError::config(key, format!("unknown mean curve `{other}`"))),
            };
            mean_jitter_scale = nonneg(&mut m, "jitter", mean_jitter_scale)?;
            m.finish()?;
        }

        let (mut variance_curve, mut variance_jitter_logscale) = (d.variance_curve, d.variance_jitter_logscale);
        if let Some(v) = r.get("variance") {
            let mut t = TableReader::new(v, "variance")?;
            let key = t.key("curve");
            let curve = t.opt_str("curve")?.unwrap_or("bowl");
            let level_key = t.key("level");
            let default_level = if curve == "bowl" { 0.01 } else { 1.0 };
            let level = t.opt_f64("level")?.unwrap_or(default_level);
            if !(level.is_finite() && level > 0.0) {
                return Err(UqError::config(level_key, "variance level must be positive"));
            }
            let default_slope = if curve == "increasing" { 0.5 } else { 0.1 };
            let slope = nonneg(&mut t, "slope", default_slope)?;
            variance_curve = match curve {
                "constant" => VarianceCurve::Constant(level),
                "bowl" => VarianceCurve::Bowl { level, slope },
                "increasing" => VarianceCurve::Increasing { level, slope },
                other => return Err(UqError::config(key, format!("unknown variance curve `{other}`"))),
            };
            variance_jitter_logscale = nonneg(&mut t, "jitter", variance_jitter_logscale)?;
            t.finish()?;
        }
        r.finish()?;
        Ok(SyntheticEnsembleSpec {
            x_min,
            x_max,
            n_points,
            members,
            mean_curve,
            mean_jitter_scale,
            variance_curve,
            variance_jitter_logscale,
            seed,
        })
    }

    fn variance_at(&self, x: f64) -> f64 {
        match self.variance_curve {
            VarianceCurve::Constant(c) => c,
            VarianceCurve::Bowl { level, slope } => level + slope * x * x,
            VarianceCurve::Increasing { level, slope } => level * (slope * (x - self.x_min)).exp(),
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let step = (self.x_max - self.x_min) / (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|i| if i + 1 == self.n_points { self.x_max } else { self.x_min + step * i as f64 })
            .collect()
    }

    /// The ensemble at each grid point, as `(x, Q_x)`.
    pub fn ensembles(&self) -> Result<Vec<(f64, SecondOrderDist)>, UqError> {
        let mut rng = RandomnessContract::new(self.seed, 0).rng();
        let coeffs: Vec<[f64; 3]> = (0..self.members)
            .map(|_| std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal)))
            .collect();
        self.grid()
            .into_iter()
            .map(|x| {
                let members = coeffs
                    .iter()
                    .map(|[a, b, c]| {
                        let mu = self.mean_curve.eval(x) + self.mean_jitter_scale * (a * x.cos() + b * x.sin());
                        let s2 = self.variance_at(x) * (self.variance_jitter_logscale * c).exp();
                        vec![mu, s2]
                    })
                    .collect();
                Ok((x, SecondOrderDist::mixture(Family::Gaussian, members)?))
            })
            .collect()
    }

    /// One row per grid point, columns as in [`TOY_HEADER`].
    pub fn table(&self) -> Result<Csv, UqError> {
        let mut csv = Csv::new(&TOY_HEADER);
        for (x, q) in self.ensembles()? {
            let v = measure(&q, MeasureKind::Variance)?;
            let h = measure(&q, MeasureKind::Entropy)?;
            csv.row(&[x, v.au, v.eu, v.tu, h.au, h.eu, h.tu]);
        }
        Ok(csv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_spec_is_default() {
        assert_eq!(SyntheticEnsembleSpec::parse("").unwrap(), SyntheticEnsembleSpec::default());
    }

    #[test]
    fn identical_members_have_no_epistemic_uncertainty() {
        let spec = SyntheticEnsembleSpec::parse(
            "mean = { curve = 'flat', jitter = 0 }\nvariance = { curve = 'constant', level = 1, jitter = 0 }",
        )
        .unwrap();
        for (_, q) in spec.ensembles().unwrap() {
            assert_eq!(measure(&q, MeasureKind::Variance).unwrap().eu, 0.0);
            assert_eq!(measure(&q, MeasureKind::Entropy).unwrap().eu, 0.0);
        }
    }

    #[test]
    fn bad_specs() {
        assert!(SyntheticEnsembleSpec::parse("members = 1").is_err());
        assert!(SyntheticEnsembleSpec::parse("mean = { curve = 'zigzag' }").is_err());
        assert!(SyntheticEnsembleSpec::parse("variance = { curve = 'constant', level = 0 }").is_err());
        assert!(SyntheticEnsembleSpec::parse("grid = { x_min = 1, x_max = 0 }").is_err());
    }
}
