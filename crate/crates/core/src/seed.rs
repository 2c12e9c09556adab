//! Hierarchical, replayable seeding.
//!
//! A [`Seed`] is a master value plus a derivation path. The path is folded
//! into a 64-bit key with the SplitMix64 finalizer; per-pair randomness is a
//! further hash of that key with the unordered vertex pair, so generation does
//! not depend on iteration order.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub path: Vec<u64>,
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Seed {
            master,
            path: Vec::new(),
        }
    }

    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Seed {
            master: self.master,
            path,
        }
    }

    pub fn key(&self) -> u64 {
        let mut k = mix64(self.master.wrapping_add(GOLDEN));
        for &step in &self.path {
            k = mix64(k ^ mix64(step.wrapping_add(GOLDEN)));
        }
        k
    }

    /// General-purpose stream for sequential draws (orders, colourings).
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key())
    }

    /// Hash of this seed with an unordered vertex pair.
    #[inline]
    pub fn pair_hash(key: u64, u: usize, v: usize) -> u64 {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        mix64(key ^ mix64(((a as u64) << 32 | b as u64).wrapping_add(GOLDEN)))
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision for the pair.
    #[inline]
    pub fn pair_unit(key: u64, u: usize, v: usize) -> f64 {
        (Self::pair_hash(key, u, v) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.master)?;
        for step in &self.path {
            write!(f, "/{step}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Seed {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('/');
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| crate::Error::invalid(format!("bad seed component {t:?} in {s:?}")))
        };
        let master = parse(parts.next().unwrap_or(""))?;
        let path = parts.map(parse).collect::<Result<Vec<_>, _>>()?;
        Ok(Seed { master, path })
    }
}
