//! Edge-distribution families.
//!
//! Each family maps the linear predictor `pi_ij = beta_i + beta_j + z_ij' gamma`
//! to the edge mean `mu(pi)`, with analytic derivatives up to third order, the
//! edge variance, and a sampler.
//!
//! The predictor is clamped to `[-PI_CLAMP, PI_CLAMP]` before any evaluation so
//! `exp` cannot overflow; the clamp is applied identically to the mean and its
//! derivatives.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Poisson};
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};

/// Bound applied to the linear predictor before exponentiation.
pub const PI_CLAMP: f64 = 35.0;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeFamily {
    /// Bernoulli edges with sigmoid link.
    Logistic,
    /// Poisson counts with log link.
    Poisson,
    /// Bernoulli edges with standard normal CDF link.
    Probit,
}

impl EdgeFamily {
    pub const ALL: [EdgeFamily; 3] = [EdgeFamily::Logistic, EdgeFamily::Poisson, EdgeFamily::Probit];

    pub fn name(self) -> &'static str {
        match self {
            EdgeFamily::Logistic => "logistic",
            EdgeFamily::Poisson => "poisson",
            EdgeFamily::Probit => "probit",
        }
    }

    /// Whether the edge law is an exponential family in the natural parameter
    /// `pi`, in which case `mu' = Var(a)` and the moment equations are the
    /// likelihood equations.
    pub fn is_exponential(self) -> bool {
        !matches!(self, EdgeFamily::Probit)
    }

    /// Binary families only produce edges in `{0, 1}`.
    pub fn is_binary(self) -> bool {
        !matches!(self, EdgeFamily::Poisson)
    }

    pub fn mu(self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.mean(x))
    }

    pub fn mu_derivative(self, x: f64, order: u8) -> Result<f64> {
        check_finite(x)?;
        match order {
            1 => Ok(self.d1(x)),
            2 => Ok(self.d2(x)),
            3 => Ok(self.d3(x)),
            _ => Err(Error::Domain(format!("derivative order {order} not in {{1,2,3}}"))),
        }
    }

    pub fn edge_variance(self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.variance(x))
    }

    /// Mean without the finiteness check.
    #[inline]
    pub fn mean(self, x: f64) -> f64 {
        let x = clamp(x);
        match self {
            EdgeFamily::Logistic => sigmoid(x),
            EdgeFamily::Poisson => x.exp(),
            EdgeFamily::Probit => normal_cdf(x),
        }
    }

    #[inline]
    pub fn d1(self, x: f64) -> f64 {
        let x = clamp(x);
        match self {
            EdgeFamily::Logistic => sigmoid(x) * sigmoid(-x),
            EdgeFamily::Poisson => x.exp(),
            EdgeFamily::Probit => normal_pdf(x),
        }
    }

    #[inline]
    pub fn d2(self, x: f64) -> f64 {
        let x = clamp(x);
        match self {
            EdgeFamily::Logistic => {
                let (s, t) = (sigmoid(x), sigmoid(-x));
                s * t * (t - s)
            }
            EdgeFamily::Poisson => x.exp(),
            EdgeFamily::Probit => -x * normal_pdf(x),
        }
    }

    #[inline]
    pub fn d3(self, x: f64) -> f64 {
        let x = clamp(x);
        match self {
            EdgeFamily::Logistic => {
                let (s, t) = (sigmoid(x), sigmoid(-x));
                // 1 - 6s + 6s^2 written as (t - s)^2 - 2st to avoid cancellation
                s * t * ((t - s) * (t - s) - 2.0 * s * t)
            }
            EdgeFamily::Poisson => x.exp(),
            EdgeFamily::Probit => (x * x - 1.0) * normal_pdf(x),
        }
    }

    #[inline]
    pub fn variance(self, x: f64) -> f64 {
        let x = clamp(x);
        match self {
            EdgeFamily::Logistic => sigmoid(x) * sigmoid(-x),
            EdgeFamily::Poisson => x.exp(),
            EdgeFamily::Probit => normal_cdf(x) * normal_cdf(-x),
        }
    }

    /// One edge draw with mean `mu(x)`.
    pub fn sample_edge<R: Rng + ?Sized>(self, x: f64, rng: &mut R) -> f64 {
        let m = self.mean(x);
        match self {
            EdgeFamily::Logistic | EdgeFamily::Probit => {
                let b = Bernoulli::new(m.clamp(0.0, 1.0)).expect("probability in [0,1]");
                if b.sample(rng) {
                    1.0
                } else {
                    0.0
                }
            }
            EdgeFamily::Poisson => Poisson::new(m).expect("positive finite rate").sample(rng),
        }
    }
}

impl fmt::Display for EdgeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EdgeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logistic" => Ok(EdgeFamily::Logistic),
            "poisson" => Ok(EdgeFamily::Poisson),
            "probit" => Ok(EdgeFamily::Probit),
            other => Err(Error::Config(format!("unknown family '{other}'"))),
        }
    }
}

#[inline]
fn clamp(x: f64) -> f64 {
    x.clamp(-PI_CLAMP, PI_CLAMP)
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite linear predictor {x}")))
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF via the complementary error function.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Quantile of the standard normal distribution.
pub fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().inverse_cdf(p)
}
