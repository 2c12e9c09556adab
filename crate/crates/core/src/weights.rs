//! Edge-weight laws and i.i.d. weight sampling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeWeightMap, Graph};
use crate::seed::Seed;

/// Declarative weight law.
///
/// `ParetoCeil(alpha)` draws `X` with `P(X > x) = x^-alpha` on `[1, inf)` and
/// returns `ceil(X)`, so that `P(w >= k) = (k-1)^-alpha` for integers `k >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightDistributionSpec {
    Constant(u64),
    ParetoCeil(f64),
}

impl WeightDistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Constant(0) => Err(Error::invalid("constant weight must be >= 1")),
            Self::ParetoCeil(a) if !(a.is_finite() && a > 0.0) => Err(Error::invalid(format!(
                "pareto tail exponent must be positive, got {a}"
            ))),
            _ => Ok(()),
        }
    }

    /// Maps a uniform `u` in `[0, 1)` to a weight.
    #[inline]
    pub fn quantile(&self, u: f64) -> u64 {
        match *self {
            Self::Constant(w0) => w0,
            Self::ParetoCeil(alpha) => {
                let x = (1.0 - u).powf(-1.0 / alpha).ceil();
                // 2^63 caps the (astronomically unlikely) overflow of the cast
                if x >= 9.2e18 {
                    1 << 63
                } else {
                    (x as u64).max(1)
                }
            }
        }
    }

    /// `P(w >= k)`.
    pub fn tail(&self, k: u64) -> f64 {
        match *self {
            Self::Constant(w0) => (k <= w0) as u64 as f64,
            Self::ParetoCeil(alpha) => {
                if k <= 1 {
                    1.0
                } else {
                    ((k - 1) as f64).powf(-alpha)
                }
            }
        }
    }

    /// `z_K = P(w <= K)`.
    pub fn cdf(&self, k: u64) -> f64 {
        1.0 - self.tail(k + 1)
    }

    /// Exact mean, or `None` when it is infinite (`alpha <= 1`).
    ///
    /// For the ceiled Pareto law the mean is `1 + sum_{k>=1} k^-alpha`; the sum
    /// is taken directly up to a cutoff and the remainder is closed with an
    /// Euler-Maclaurin tail whose error is below `1e-12` for the cutoff used.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            Self::Constant(w0) => Some(w0 as f64),
            Self::ParetoCeil(alpha) if alpha <= 1.0 => None,
            Self::ParetoCeil(alpha) => {
                const CUTOFF: u64 = 2000;
                let head: f64 = (1..=CUTOFF).rev().map(|k| (k as f64).powf(-alpha)).sum();
                let n = CUTOFF as f64;
                let tail =
                    n.powf(1.0 - alpha) / (alpha - 1.0) - 0.5 * n.powf(-alpha) + alpha / 12.0 * n.powf(-alpha - 1.0);
                Some(1.0 + head + tail)
            }
        }
    }

    /// Smallest `K >= 1` with `P(w <= K) >= 0.5`.
    pub fn default_cutoff(&self) -> u64 {
        match *self {
            Self::Constant(w0) => w0,
            // 1 - K^-alpha >= 1/2  <=>  K >= 2^(1/alpha)
            Self::ParetoCeil(alpha) => {
                let mut k = 2f64.powf(1.0 / alpha).ceil().max(1.0) as u64;
                while self.cdf(k) < 0.5 {
                    k += 1;
                }
                while k > 1 && self.cdf(k - 1) >= 0.5 {
                    k -= 1;
                }
                k
            }
        }
    }
}

impl fmt::Display for WeightDistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(w0) => write!(f, "constant:{w0}"),
            Self::ParetoCeil(a) => write!(f, "pareto:{a}"),
        }
    }
}

impl FromStr for WeightDistributionSpec {
    type Err = Error;

    /// Parses `constant:<w0>` or `pareto:<alpha>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("weight law {s:?} is not of the form name:param")))?;
        let spec = match name.trim().to_ascii_lowercase().as_str() {
            "constant" | "const" => Self::Constant(
                param
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad constant weight {param:?}")))?,
            ),
            "pareto" | "pareto-ceil" | "paretoceil" => Self::ParetoCeil(
                param
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad pareto exponent {param:?}")))?,
            ),
            other => return Err(Error::invalid(format!("unknown weight law {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl TryFrom<String> for WeightDistributionSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WeightDistributionSpec> for String {
    fn from(d: WeightDistributionSpec) -> String {
        d.to_string()
    }
}

/// One i.i.d. draw per edge, keyed by the unordered endpoint pair.
pub fn sample_weights(g: &Graph, dist: &WeightDistributionSpec, seed: &Seed) -> Result<EdgeWeightMap> {
    dist.validate()?;
    let key = seed.key();
    let weights = g
        .edges()
        .iter()
        .map(|&(u, v)| dist.quantile(Seed::pair_unit(key, u, v)))
        .collect();
    Ok(EdgeWeightMap::from_vec_unchecked(weights))
}
