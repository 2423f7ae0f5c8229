//! Parameterized distributions used by the simulators.
//!
//! A [`DistributionSpec`] is plain data (it can live in config files); it is
//! validated once into a [`Sampler`] which does the drawing.

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::Rng;
use rand_distr::{Bernoulli, Gamma, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Shape/scale parameterization: mean = shape * scale.
    Gamma { shape: f64, scale: f64 },
    Poisson { rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    UniformReal { low: f64, high: f64 },
    /// Inclusive on both ends.
    UniformInt { low: i64, high: i64 },
    Bernoulli { p: f64 },
    /// Draws the index of the chosen weight.
    Categorical { weights: Vec<f64> },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match *self {
            DistributionSpec::Gamma { shape, scale } => {
                if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) {
                    return bad(format!("gamma needs shape > 0 and scale > 0, got ({shape}, {scale})"));
                }
            }
            DistributionSpec::Poisson { rate } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return bad(format!("poisson needs rate > 0, got {rate}"));
                }
            }
            DistributionSpec::LogNormal { mu, sigma } => {
                if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
                    return bad(format!("lognormal needs finite mu and sigma > 0, got ({mu}, {sigma})"));
                }
            }
            DistributionSpec::UniformReal { low, high } => {
                if !(low.is_finite() && high.is_finite() && low <= high) {
                    return bad(format!("uniform_real needs low <= high, got [{low}, {high}]"));
                }
            }
            DistributionSpec::UniformInt { low, high } => {
                if low > high {
                    return bad(format!("uniform_int needs low <= high, got [{low}, {high}]"));
                }
            }
            DistributionSpec::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("bernoulli needs p in [0, 1], got {p}"));
                }
            }
            DistributionSpec::Categorical { ref weights } => {
                if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return bad("categorical needs a non-empty table of non-negative weights".into());
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("categorical weights must sum to 1, got {total}"));
                }
            }
        }
        Ok(())
    }

    /// Analytic mean.
    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Gamma { shape, scale } => shape * scale,
            DistributionSpec::Poisson { rate } => rate,
            DistributionSpec::LogNormal { mu, sigma } => (mu + sigma * sigma / 2.0).exp(),
            DistributionSpec::UniformReal { low, high } => (low + high) / 2.0,
            DistributionSpec::UniformInt { low, high } => (low + high) as f64 / 2.0,
            DistributionSpec::Bernoulli { p } => p,
            DistributionSpec::Categorical { ref weights } => {
                weights.iter().enumerate().map(|(i, w)| i as f64 * w).sum()
            }
        }
    }

    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        let inner = match *self {
            DistributionSpec::Gamma { shape, scale } => {
                Inner::Gamma(Gamma::new(shape, scale).map_err(|e| Error::Config(e.to_string()))?)
            }
            DistributionSpec::Poisson { rate } => {
                Inner::Poisson(Poisson::new(rate).map_err(|e| Error::Config(e.to_string()))?)
            }
            DistributionSpec::LogNormal { mu, sigma } => {
                Inner::LogNormal(LogNormal::new(mu, sigma).map_err(|e| Error::Config(e.to_string()))?)
            }
            DistributionSpec::UniformReal { low, high } if low == high => Inner::Constant(low),
            DistributionSpec::UniformReal { low, high } => Inner::UniformReal(
                Uniform::new_inclusive(low, high).map_err(|e| Error::Config(e.to_string()))?,
            ),
            DistributionSpec::UniformInt { low, high } => Inner::UniformInt(
                Uniform::new_inclusive(low, high).map_err(|e| Error::Config(e.to_string()))?,
            ),
            DistributionSpec::Bernoulli { p } => {
                Inner::Bernoulli(Bernoulli::new(p).map_err(|e| Error::Config(e.to_string()))?)
            }
            DistributionSpec::Categorical { ref weights } => Inner::Categorical(
                WeightedIndex::new(weights).map_err(|e| Error::Config(e.to_string()))?,
            ),
        };
        Ok(Sampler { inner })
    }
}

#[derive(Debug, Clone)]
enum Inner {
    Gamma(Gamma<f64>),
    Poisson(Poisson<f64>),
    LogNormal(LogNormal<f64>),
    Constant(f64),
    UniformReal(Uniform<f64>),
    UniformInt(Uniform<i64>),
    Bernoulli(Bernoulli),
    Categorical(WeightedIndex<f64>),
}

/// A validated distribution ready to draw from.
#[derive(Debug, Clone)]
pub struct Sampler {
    inner: Inner,
}

impl Sampler {
    /// Draws one value. Integer-valued kinds return whole numbers.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.inner {
            Inner::Gamma(d) => d.sample(rng),
            Inner::Poisson(d) => d.sample(rng),
            Inner::LogNormal(d) => d.sample(rng),
            Inner::Constant(v) => *v,
            Inner::UniformReal(d) => d.sample(rng),
            Inner::UniformInt(d) => d.sample(rng) as f64,
            Inner::Bernoulli(d) => {
                if d.sample(rng) {
                    1.0
                } else {
                    0.0
                }
            }
            Inner::Categorical(d) => d.sample(rng) as f64,
        }
    }

    /// Draws a non-negative count; only meaningful for integer-valued kinds.
    pub fn draw_count<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.draw(rng).max(0.0) as usize
    }

    pub fn draw_flag<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        self.draw(rng) != 0.0
    }
}

/// One-shot draw from an unvalidated spec.
pub fn sample<R: Rng + ?Sized>(spec: &DistributionSpec, rng: &mut R) -> Result<f64> {
    Ok(spec.sampler()?.draw(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::make_rng;
    use statrs::distribution::{ContinuousCDF, Discrete, Gamma as GammaRef, LogNormal as LogNormalRef, Poisson as PoissonRef};

    const N: usize = 100_000;

    fn draws(spec: &DistributionSpec, label: &str) -> Vec<f64> {
        let s = spec.sampler().unwrap();
        let mut rng = make_rng(7, label);
        (0..N).map(|_| s.draw(&mut rng)).collect()
    }

    fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn gamma_account_age_mean() {
        let spec = DistributionSpec::Gamma { shape: 2.0, scale: 180.0 };
        let xs = draws(&spec, "gamma");
        assert!((mean(&xs) - 360.0).abs() < 5.0, "mean {}", mean(&xs));
        let reference = GammaRef::new(2.0, 1.0 / 180.0).unwrap();
        assert!(ks_distance(xs, |x| reference.cdf(x)) < 0.01);
    }

    #[test]
    fn lognormal_booking_value_mean_is_analytic() {
        let spec = DistributionSpec::LogNormal { mu: 6.1, sigma: 0.7 };
        let analytic = (6.1f64 + 0.49 / 2.0).exp();
        assert!((spec.mean() - analytic).abs() < 1e-9);
        assert!((analytic - 569.64).abs() < 0.01);
        let xs = draws(&spec, "lognormal");
        assert!((mean(&xs) - analytic).abs() < 10.0, "mean {}", mean(&xs));
        let reference = LogNormalRef::new(6.1, 0.7).unwrap();
        assert!(ks_distance(xs, |x| reference.cdf(x)) < 0.01);
    }

    #[test]
    fn degenerate_uniform_is_exact() {
        let spec = DistributionSpec::UniformReal { low: 4.6, high: 4.6 };
        let mut rng = make_rng(1, "u");
        assert_eq!(sample(&spec, &mut rng).unwrap(), 4.6);
    }

    #[test]
    fn uniform_real_ks() {
        let spec = DistributionSpec::UniformReal { low: 4.6, high: 5.0 };
        let xs = draws(&spec, "uniform");
        assert!(ks_distance(xs, |x| ((x - 4.6) / 0.4).clamp(0.0, 1.0)) < 0.01);
    }

    fn pmf_distance(xs: &[f64], pmf: impl Fn(u64) -> f64, support: u64) -> f64 {
        let mut counts = vec![0usize; support as usize + 1];
        for &x in xs {
            let k = x as usize;
            if k <= support as usize {
                counts[k] += 1;
            }
        }
        (0..=support)
            .map(|k| (counts[k as usize] as f64 / xs.len() as f64 - pmf(k)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn poisson_bookings_pmf() {
        let spec = DistributionSpec::Poisson { rate: 2.2 };
        let xs = draws(&spec, "poisson");
        let reference = PoissonRef::new(2.2).unwrap();
        assert!(pmf_distance(&xs, |k| reference.pmf(k), 15) < 0.01);
        assert!((mean(&xs) - 2.2).abs() < 0.03);
    }

    #[test]
    fn bernoulli_and_categorical_pmf() {
        let xs = draws(&DistributionSpec::Bernoulli { p: 0.18 }, "bern");
        assert!(pmf_distance(&xs, |k| if k == 1 { 0.18 } else { 0.82 }, 1) < 0.01);

        let weights = vec![0.2, 0.15, 0.1, 0.08, 0.47];
        let xs = draws(&DistributionSpec::Categorical { weights: weights.clone() }, "cat");
        assert!(pmf_distance(&xs, |k| weights[k as usize], 4) < 0.01);
    }

    #[test]
    fn uniform_int_is_inclusive() {
        let xs = draws(&DistributionSpec::UniformInt { low: 1, high: 4 }, "ui");
        assert!(pmf_distance(&xs, |k| if (1..=4).contains(&k) { 0.25 } else { 0.0 }, 5) < 0.01);
    }

    #[test]
    fn invalid_parameters_are_config_errors() {
        let bad = [
            DistributionSpec::Gamma { shape: 0.0, scale: 1.0 },
            DistributionSpec::Poisson { rate: -1.0 },
            DistributionSpec::LogNormal { mu: 0.0, sigma: 0.0 },
            DistributionSpec::UniformReal { low: 2.0, high: 1.0 },
            DistributionSpec::UniformInt { low: 3, high: 1 },
            DistributionSpec::Bernoulli { p: 1.5 },
            DistributionSpec::Categorical { weights: vec![0.5, 0.4] },
        ];
        for spec in bad {
            assert!(matches!(spec.sampler(), Err(Error::Config(_))), "{spec:?}");
        }
    }
}
