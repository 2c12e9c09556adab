//! Good copies, good colourings and the threshold exponent for the number of
//! colours at which good colourings stop being typical.
//!
//! A copy `T` of the pattern is M-good under the vertex colouring `θ` when
//! `w(u,v) <= |θ(u) - θ(v)| <= M` on every edge of `T`; a colouring is good
//! when the host contains at least one M-good copy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::colouring::Colouring;
use crate::error::{Error, Result};
use crate::graph::{EdgeWeightMap, Graph};
use crate::patterns::{enumerate_copies, Copy, PatternGraph};
use crate::scalar::Scalar;
use crate::seed::Seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    /// Number of colours.
    pub r: u64,
    pub theta: f64,
    pub beta: f64,
    /// Weight cutoff defining `G_K`.
    #[serde(rename = "K")]
    pub k: u64,
    /// Goodness window.
    #[serde(rename = "M")]
    pub m: u64,
}

impl ThresholdParams {
    /// `r = ceil(n^theta)`, `M = v0 (K + 1)` unless overridden.
    pub fn new(n: usize, theta: f64, beta: f64, k: u64, m: Option<u64>, gamma: &PatternGraph) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("K must be >= 1"));
        }
        let m = m.unwrap_or(default_window(gamma, k));
        if m == 0 {
            return Err(Error::invalid("M must be >= 1"));
        }
        Ok(ThresholdParams {
            r: colour_count(n, theta)?,
            theta,
            beta,
            k,
            m,
        })
    }
}

/// `r = ceil(n^theta)`, at least 1.
pub fn colour_count(n: usize, theta: f64) -> Result<u64> {
    if !theta.is_finite() || theta < 0.0 {
        return Err(Error::invalid(format!("theta must be finite and >= 0, got {theta}")));
    }
    Ok(((n as f64).powf(theta).ceil() as u64).max(1))
}

/// The window `v0 (K + 1)` for which arithmetic-progression copies are good.
pub fn default_window(gamma: &PatternGraph, k: u64) -> u64 {
    gamma.v0() as u64 * (k + 1)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub copies: u64,
    pub good_copies: u64,
    /// Arithmetic-progression copies inside `G_K`, when a cutoff was supplied.
    pub y_count: Option<u64>,
    pub z_count: u64,
    pub good: bool,
}

/// `(v0 - e0 beta) / (v0 - 1)`, defined for `1/e0 < beta < v0/e0`.
pub fn theta_threshold<S: Scalar>(v0: u64, e0: u64, beta: S) -> Result<S> {
    if v0 < 2 || e0 == 0 {
        return Err(Error::invalid(format!(
            "need v0 >= 2 and e0 >= 1, got v0={v0}, e0={e0}"
        )));
    }
    let (v, e) = (S::from_count(v0), S::from_count(e0));
    let lower = S::one() / e.clone();
    let upper = v.clone() / e.clone();
    if !(beta > lower && beta < upper) {
        return Err(Error::invalid(format!(
            "beta {beta:?} outside ({:.6}, {:.6})",
            lower.to_f64(),
            upper.to_f64()
        )));
    }
    Ok((v - e * beta) / (S::from_count(v0 - 1)))
}

/// Spanning subgraph of the edges with weight at most `k`.
pub fn restrict_to_gk(g: &Graph, w: &EdgeWeightMap, k: u64) -> Result<(Graph, EdgeWeightMap)> {
    if k == 0 {
        return Err(Error::invalid("K must be >= 1"));
    }
    let (gk, origin) = g.filter_edges(|e| w.by_index(e) <= k);
    Ok((gk, w.restrict(&origin)))
}

/// Every edge of the copy satisfies `w(u,v) <= |θ(u) - θ(v)| <= M`.
pub fn is_good_copy(g: &Graph, t: &Copy, w: &EdgeWeightMap, colours: &Colouring, m: u64) -> bool {
    t.edges.iter().all(|&(u, v)| {
        let diff = colours.colour(u).abs_diff(colours.colour(v));
        let weight = w.get(g, u, v).expect("copy edge belongs to the host");
        weight <= diff && diff <= m
    })
}

/// Copies with their edge weights resolved, reused across many colourings.
#[derive(Clone, Debug)]
pub struct CopyTable {
    v0: usize,
    // flattened per copy: v0 host vertices, then e0 (u, v, weight) triples
    vertices: Vec<usize>,
    edges: Vec<(usize, usize, u64)>,
    e0: usize,
}

impl CopyTable {
    pub fn build(g: &Graph, w: &EdgeWeightMap, gamma: &PatternGraph) -> Self {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for copy in enumerate_copies(g, gamma) {
            vertices.extend_from_slice(&copy.vertices);
            for &(u, v) in &copy.edges {
                edges.push((u, v, w.get(g, u, v).expect("copy edge belongs to the host")));
            }
        }
        CopyTable {
            v0: gamma.v0(),
            vertices,
            edges,
            e0: gamma.e0(),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len() / self.v0
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn copy_vertices(&self, i: usize) -> &[usize] {
        &self.vertices[i * self.v0..(i + 1) * self.v0]
    }

    fn copy_edges(&self, i: usize) -> &[(usize, usize, u64)] {
        &self.edges[i * self.e0..(i + 1) * self.e0]
    }

    fn good(&self, i: usize, colours: &[u64], m: u64) -> bool {
        self.copy_edges(i).iter().all(|&(u, v, wt)| {
            let d = colours[u].abs_diff(colours[v]);
            wt <= d && d <= m
        })
    }

    fn within_window(&self, i: usize, colours: &[u64], m: u64) -> bool {
        let vs = self.copy_vertices(i);
        let lo = vs.iter().map(|&v| colours[v]).min().unwrap_or(0);
        let hi = vs.iter().map(|&v| colours[v]).max().unwrap_or(0);
        hi - lo <= m
    }

    /// Colours of the copy, sorted, form `c, c+(K+1), ..., c+(v0-1)(K+1)`.
    fn is_progression(&self, i: usize, colours: &[u64], k: u64, scratch: &mut Vec<u64>) -> bool {
        scratch.clear();
        scratch.extend(self.copy_vertices(i).iter().map(|&v| colours[v]));
        scratch.sort_unstable();
        scratch.windows(2).all(|p| p[1] - p[0] == k + 1)
    }

    pub fn count_good(&self, colours: &Colouring, m: u64) -> u64 {
        (0..self.len()).filter(|&i| self.good(i, colours.as_slice(), m)).count() as u64
    }

    pub fn any_good(&self, colours: &Colouring, m: u64) -> bool {
        (0..self.len()).any(|i| self.good(i, colours.as_slice(), m))
    }

    pub fn count_within_window(&self, colours: &Colouring, m: u64) -> u64 {
        (0..self.len())
            .filter(|&i| self.within_window(i, colours.as_slice(), m))
            .count() as u64
    }

    /// Progression copies that lie in `G_K` (all edge weights at most `k`).
    pub fn count_progressions(&self, colours: &Colouring, k: u64) -> u64 {
        let mut scratch = Vec::with_capacity(self.v0);
        (0..self.len())
            .filter(|&i| {
                self.copy_edges(i).iter().all(|&(_, _, wt)| wt <= k)
                    && self.is_progression(i, colours.as_slice(), k, &mut scratch)
            })
            .count() as u64
    }

    /// Copies, good copies at `m`, window count at `m`, and, with a cutoff,
    /// the progression count.
    pub fn report(&self, colours: &Colouring, m: u64, k: Option<u64>) -> GoodnessReport {
        let good_copies = self.count_good(colours, m);
        GoodnessReport {
            copies: self.len() as u64,
            good_copies,
            y_count: k.map(|k| self.count_progressions(colours, k)),
            z_count: self.count_within_window(colours, m),
            good: good_copies > 0,
        }
    }
}

fn check_colouring(g: &Graph, colours: &Colouring) -> Result<()> {
    if colours.len() != g.n() {
        return Err(Error::invalid(format!(
            "colouring covers {} vertices, graph has {}",
            colours.len(),
            g.n()
        )));
    }
    Ok(())
}

/// Full goodness counts for one colouring. `z_count` uses the same `m`.
pub fn colouring_is_good(
    g: &Graph,
    w: &EdgeWeightMap,
    gamma: &PatternGraph,
    colours: &Colouring,
    m: u64,
) -> Result<GoodnessReport> {
    check_colouring(g, colours)?;
    Ok(CopyTable::build(g, w, gamma).report(colours, m, None))
}

/// Stops at the first good copy.
pub fn has_good_copy(g: &Graph, w: &EdgeWeightMap, gamma: &PatternGraph, colours: &Colouring, m: u64) -> Result<bool> {
    check_colouring(g, colours)?;
    Ok(enumerate_copies(g, gamma).any(|t| is_good_copy(g, &t, w, colours, m)))
}

/// Lower and upper counters around the good-copy count at `M = v0 (K + 1)`.
pub fn sandwich_report(
    g: &Graph,
    w: &EdgeWeightMap,
    gamma: &PatternGraph,
    colours: &Colouring,
    k: u64,
) -> Result<GoodnessReport> {
    check_colouring(g, colours)?;
    if k == 0 {
        return Err(Error::invalid("K must be >= 1"));
    }
    Ok(CopyTable::build(g, w, gamma).report(colours, default_window(gamma, k), Some(k)))
}

/// Copies of `gamma` in the K-restricted graph whose colours form an
/// arithmetic progression with difference `K + 1`.
pub fn count_y_lower(gk: &Graph, gamma: &PatternGraph, colours: &Colouring, k: u64) -> Result<u64> {
    check_colouring(gk, colours)?;
    let mut scratch = Vec::with_capacity(gamma.v0());
    Ok(enumerate_copies(gk, gamma)
        .filter(|t| {
            scratch.clear();
            scratch.extend(t.vertices.iter().map(|&v| colours.colour(v)));
            scratch.sort_unstable();
            scratch.windows(2).all(|p| p[1] - p[0] == k + 1)
        })
        .count() as u64)
}

/// Copies whose colours are pairwise within `m`.
pub fn count_z_upper(g: &Graph, gamma: &PatternGraph, colours: &Colouring, m: u64) -> Result<u64> {
    check_colouring(g, colours)?;
    Ok(enumerate_copies(g, gamma)
        .filter(|t| {
            let cs = t.vertices.iter().map(|&v| colours.colour(v));
            let lo = cs.clone().min().unwrap_or(0);
            let hi = cs.max().unwrap_or(0);
            hi - lo <= m
        })
        .count() as u64)
}

/// Uniform colouring `V -> {1..r}`.
pub fn uniform_colouring(n: usize, r: u64, rng: &mut impl Rng) -> Colouring {
    Colouring::from_vec_unchecked((0..n).map(|_| rng.random_range(1..=r)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionEstimate {
    pub fraction: f64,
    pub stderr: f64,
    pub good: u64,
    pub trials: u64,
}

impl FractionEstimate {
    pub fn from_counts(good: u64, trials: u64) -> Self {
        let f = good as f64 / trials as f64;
        FractionEstimate {
            fraction: f,
            stderr: (f * (1.0 - f) / trials as f64).sqrt(),
            good,
            trials,
        }
    }
}

/// Fraction of `trials` i.i.d. uniform colourings with `r` colours that are
/// good, with its binomial standard error.
pub fn estimate_good_fraction(
    g: &Graph,
    w: &EdgeWeightMap,
    gamma: &PatternGraph,
    r: u64,
    m: u64,
    trials: u64,
    seed: &Seed,
) -> Result<FractionEstimate> {
    if trials == 0 || r == 0 {
        return Err(Error::invalid("trials and r must be >= 1"));
    }
    let table = CopyTable::build(g, w, gamma);
    Ok(estimate_with_table(&table, g.n(), r, m, trials, seed))
}

pub fn estimate_with_table(table: &CopyTable, n: usize, r: u64, m: u64, trials: u64, seed: &Seed) -> FractionEstimate {
    let mut rng = seed.rng();
    let mut good = 0;
    for _ in 0..trials {
        let colours = uniform_colouring(n, r, &mut rng);
        if table.any_good(&colours, m) {
            good += 1;
        }
    }
    FractionEstimate::from_counts(good, trials)
}
