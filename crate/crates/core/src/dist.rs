//! Continuous distributions used for population quantities and simulation.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF};

/// A univariate continuous distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum Dist {
    Normal {
        mean: f64,
        sd: f64,
    },
    StudentT {
        df: f64,
    },
    Exponential {
        rate: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Beta {
        a: f64,
        b: f64,
    },
    /// Law of `-X`.
    Negated {
        inner: Box<Dist>,
    },
    /// Finite mixture with nonnegative weights summing to one.
    Mixture {
        components: Vec<(f64, Dist)>,
    },
}

impl Dist {
    pub fn normal(mean: f64, sd: f64) -> Self {
        Dist::Normal { mean, sd }
    }

    pub fn negated(self) -> Self {
        Dist::Negated {
            inner: Box::new(self),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Dist::Normal { mean, sd } => statrs::distribution::Normal::new(*mean, *sd)
                .expect("valid normal")
                .cdf(x),
            Dist::StudentT { df } => statrs::distribution::StudentsT::new(0.0, 1.0, *df)
                .expect("valid t")
                .cdf(x),
            Dist::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Dist::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Dist::Beta { a, b } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    statrs::distribution::Beta::new(*a, *b)
                        .expect("valid beta")
                        .cdf(x)
                }
            }
            Dist::Negated { inner } => 1.0 - inner.cdf(-x),
            Dist::Mixture { components } => components.iter().map(|(w, d)| w * d.cdf(x)).sum(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Dist::Normal { mean, sd } => statrs::distribution::Normal::new(*mean, *sd)
                .expect("valid normal")
                .pdf(x),
            Dist::StudentT { df } => statrs::distribution::StudentsT::new(0.0, 1.0, *df)
                .expect("valid t")
                .pdf(x),
            Dist::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Dist::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Dist::Beta { a, b } => {
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    statrs::distribution::Beta::new(*a, *b)
                        .expect("valid beta")
                        .pdf(x)
                }
            }
            Dist::Negated { inner } => inner.pdf(-x),
            Dist::Mixture { components } => components.iter().map(|(w, d)| w * d.pdf(x)).sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Dist::Normal { mean, sd } => {
                mean + sd * rng.sample::<f64, _>(rand_distr::StandardNormal)
            }
            Dist::StudentT { df } => rand_distr::StudentT::new(*df).expect("valid t").sample(rng),
            Dist::Exponential { rate } => {
                rand_distr::Exp::new(*rate).expect("valid exp").sample(rng)
            }
            Dist::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Dist::Beta { a, b } => rand_distr::Beta::new(*a, *b)
                .expect("valid beta")
                .sample(rng),
            Dist::Negated { inner } => -inner.sample(rng),
            Dist::Mixture { components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (w, d) in components {
                    acc += w;
                    if u < acc {
                        return d.sample(rng);
                    }
                }
                components.last().expect("non-empty mixture").1.sample(rng)
            }
        }
    }
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn phi_inv(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}
