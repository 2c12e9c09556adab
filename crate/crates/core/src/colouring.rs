//! Weighted colourings: `f : V -> {1, 2, ...}` with `|f(u) - f(v)| >= w(u,v)`
//! on every edge. The quantity minimized is the largest colour used (a span),
//! not the number of distinct colours.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeWeightMap, Graph, Vertex};
use crate::seed::Seed;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Colouring(Vec<u64>);

impl Colouring {
    pub fn new(colours: Vec<u64>) -> Result<Self> {
        if let Some(v) = colours.iter().position(|&c| c == 0) {
            return Err(Error::invalid(format!("vertex {v} has colour 0; colours start at 1")));
        }
        Ok(Colouring(colours))
    }

    pub(crate) fn from_vec_unchecked(colours: Vec<u64>) -> Self {
        Colouring(colours)
    }

    #[inline]
    pub fn colour(&self, v: Vertex) -> u64 {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_colour(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// One `v colour` line per vertex.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, c) in self.0.iter().enumerate() {
            let _ = writeln!(out, "{v} {c}");
        }
        out
    }

    pub fn read_text(reader: impl BufRead) -> Result<Self> {
        let mut colours = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Parse {
                line: i + 1,
                msg: format!("expected `v colour`, got {line:?}"),
            };
            let mut it = line.split_whitespace();
            let v: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            let c: u64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() || v != colours.len() {
                return Err(bad());
            }
            colours.push(c);
        }
        Colouring::new(colours)
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        Self::read_text(text.as_bytes())
    }
}

fn check_domain(g: &Graph, f: &Colouring) -> Result<()> {
    if f.len() != g.n() {
        return Err(Error::invalid(format!(
            "colouring covers {} vertices, graph has {}",
            f.len(),
            g.n()
        )));
    }
    Ok(())
}

/// True iff every edge satisfies `|f(u) - f(v)| >= w(u,v)`.
pub fn verify_weighted(g: &Graph, w: &EdgeWeightMap, f: &Colouring) -> Result<bool> {
    check_domain(g, f)?;
    if w.len() != g.m() {
        return Err(Error::invalid("weight map does not match graph"));
    }
    Ok(g.edges()
        .iter()
        .enumerate()
        .all(|(i, &(u, v))| f.colour(u).abs_diff(f.colour(v)) >= w.by_index(i)))
}

/// `J_v`: total weight of the edges at each vertex.
pub fn vertex_weight_sums(g: &Graph, w: &EdgeWeightMap) -> Vec<u64> {
    (0..g.n())
        .map(|v| {
            g.incident(v)
                .fold(0u64, |acc, (_, e)| acc.saturating_add(w.by_index(e)))
        })
        .collect()
}

/// `M_v`: heaviest edge at `v`, 0 for an isolated vertex.
pub fn max_incident_weight(g: &Graph, w: &EdgeWeightMap, v: Vertex) -> u64 {
    g.incident(v).map(|(_, e)| w.by_index(e)).max().unwrap_or(0)
}

/// `1 + max_v sum_{u~v} (2 w(u,v) - 1)`; reduces to `Δ + 1` for unit weights.
pub fn local_average_bound(g: &Graph, w: &EdgeWeightMap) -> u64 {
    let worst = (0..g.n())
        .map(|v| {
            g.incident(v).fold(0u64, |acc, (_, e)| {
                acc.saturating_add((2 * w.by_index(e)).saturating_sub(1))
            })
        })
        .max()
        .unwrap_or(0);
    worst.saturating_add(1)
}

/// Smallest positive colour outside every interval `[c - (w-1), c + (w-1)]`
/// contributed by an already coloured neighbour.
fn smallest_free(intervals: &mut [(u64, u64)]) -> u64 {
    intervals.sort_unstable();
    let mut candidate = 1u64;
    for &(lo, hi) in intervals.iter() {
        if lo > candidate {
            break;
        }
        candidate = candidate.max(hi.saturating_add(1));
    }
    candidate
}

/// Greedy over `order`, skipping vertices with `active[v] == false` both as
/// targets and as constraints.
fn greedy_masked(
    g: &Graph,
    w: &EdgeWeightMap,
    order: impl IntoIterator<Item = Vertex>,
    active: Option<&[bool]>,
) -> Vec<u64> {
    let mut colours = vec![0u64; g.n()];
    let mut intervals = Vec::new();
    for u in order {
        if active.is_some_and(|a| !a[u]) {
            continue;
        }
        intervals.clear();
        for (v, e) in g.incident(u) {
            let c = colours[v];
            if c == 0 || active.is_some_and(|a| !a[v]) {
                continue;
            }
            let reach = w.by_index(e) - 1;
            intervals.push((c.saturating_sub(reach).max(1), c.saturating_add(reach)));
        }
        colours[u] = smallest_free(&mut intervals);
    }
    colours
}

fn check_permutation(n: usize, order: &[Vertex]) -> Result<()> {
    if order.len() != n {
        return Err(Error::invalid(format!(
            "order has {} entries, graph has {n} vertices",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::invalid(format!("order is not a permutation (vertex {v})")));
        }
    }
    Ok(())
}

/// Interval-exclusion greedy: each vertex in `order` takes the smallest
/// positive integer not within `w - 1` of a coloured neighbour's colour.
pub fn greedy_colour(g: &Graph, w: &EdgeWeightMap, order: &[Vertex]) -> Result<Colouring> {
    check_permutation(g.n(), order)?;
    Ok(Colouring(greedy_masked(g, w, order.iter().copied(), None)))
}

/// Greedy in vertex-id order.
pub fn greedy_colour_default(g: &Graph, w: &EdgeWeightMap) -> Colouring {
    Colouring(greedy_masked(g, w, 0..g.n(), None))
}

/// Uniformly random vertex order drawn from `seed`.
pub fn random_order(n: usize, seed: &Seed) -> Vec<Vertex> {
    let mut order: Vec<Vertex> = (0..n).collect();
    order.shuffle(&mut seed.rng());
    order
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStageReport {
    pub bad_vertices: Vec<Vertex>,
    #[serde(rename = "L")]
    pub budget: u64,
    /// `M_v` of each bad vertex, in the order of `bad_vertices`.
    #[serde(skip)]
    pub bad_max_weights: Vec<u64>,
    #[serde(rename = "M_tot")]
    pub m_tot: u64,
    pub max_colour: u64,
}

/// Two-stage colouring: vertices with `J_v > mu n p (1+eps)^2` are bad; the
/// rest are coloured greedily inside `{1..L}` with `L = 2 ceil(mu n p (1+eps)^2) + 1`,
/// and the j-th bad vertex gets `L + 2 (M_{v_1} + ... + M_{v_j})`.
///
/// The result is checked with [`verify_weighted`]; a failure is reported as
/// [`Error::Contract`] rather than returned.
pub fn two_stage_colour(
    g: &Graph,
    w: &EdgeWeightMap,
    mu: f64,
    p: f64,
    eps: f64,
) -> Result<(Colouring, TwoStageReport)> {
    if !(mu.is_finite() && mu >= 1.0) {
        return Err(Error::invalid(format!("mean weight must be finite and >= 1, got {mu}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability {p} outside [0,1]")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::invalid(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let n = g.n();
    let cutoff = mu * n as f64 * p * (1.0 + eps) * (1.0 + eps);
    let budget = 2 * cutoff.ceil() as u64 + 1;

    let sums = vertex_weight_sums(g, w);
    let good: Vec<bool> = sums.iter().map(|&j| (j as f64) <= cutoff).collect();
    let mut colours = greedy_masked(g, w, 0..n, Some(&good));

    let good_max = (0..n).filter(|&v| good[v]).map(|v| colours[v]).max().unwrap_or(0);
    if good_max > budget {
        return Err(Error::Contract(format!(
            "good-part greedy used colour {good_max} above budget {budget}"
        )));
    }

    let bad_vertices: Vec<Vertex> = (0..n).filter(|&v| !good[v]).collect();
    let bad_max_weights: Vec<u64> = bad_vertices.iter().map(|&v| max_incident_weight(g, w, v)).collect();
    let mut running = 0u64;
    for (&v, &mv) in bad_vertices.iter().zip(&bad_max_weights) {
        running = running.saturating_add(mv);
        colours[v] = budget.saturating_add(running.saturating_mul(2));
    }
    let m_tot = running;

    let colouring = Colouring(colours);
    if !verify_weighted(g, w, &colouring)? {
        return Err(Error::Contract(
            "two-stage colouring is not a proper weighted colouring".into(),
        ));
    }
    let max_colour = colouring.max_colour();
    let report = TwoStageReport {
        bad_vertices,
        budget,
        bad_max_weights,
        m_tot,
        max_colour,
    };
    Ok((colouring, report))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactOutcome {
    Optimal {
        chi_w: u64,
        colouring: Colouring,
    },
    /// The node budget ran out; `best` is the incumbent, an upper bound only.
    Inconclusive {
        best: u64,
        colouring: Colouring,
    },
}

impl ExactOutcome {
    pub fn value(&self) -> u64 {
        match self {
            ExactOutcome::Optimal { chi_w, .. } => *chi_w,
            ExactOutcome::Inconclusive { best, .. } => *best,
        }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, ExactOutcome::Optimal { .. })
    }

    pub fn colouring(&self) -> &Colouring {
        match self {
            ExactOutcome::Optimal { colouring, .. } | ExactOutcome::Inconclusive { colouring, .. } => colouring,
        }
    }
}

struct BranchAndBound<'a> {
    order: Vec<Vertex>,
    // for each position in `order`, earlier positions adjacent to it with the edge weight
    back: Vec<Vec<(usize, u64)>>,
    colours: Vec<u64>,
    best: u64,
    best_colours: Vec<u64>,
    nodes: u64,
    budget: u64,
    _g: &'a Graph,
}

impl BranchAndBound<'_> {
    /// Returns false when the budget is exhausted.
    fn search(&mut self, depth: usize, partial_max: u64) -> bool {
        if depth == self.order.len() {
            if partial_max < self.best {
                self.best = partial_max;
                self.best_colours = self.colours.clone();
            }
            return true;
        }
        // Any optimal colouring can be reflected c -> X + 1 - c, so the
        // first vertex can be restricted to the lower half of the range.
        let limit = if depth == 0 { self.best / 2 } else { self.best - 1 };
        let mut c = 1u64;
        while c <= limit && c < self.best {
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            // a clash with neighbour colour `other` rules out everything
            // below `other + wt`, so jump straight there
            let clash = self.back[depth]
                .iter()
                .find(|&&(pos, wt)| c.abs_diff(self.colours[pos]) < wt)
                .map(|&(pos, wt)| self.colours[pos] + wt);
            match clash {
                Some(next) => c = next,
                None => {
                    self.colours[depth] = c;
                    if !self.search(depth + 1, partial_max.max(c)) {
                        return false;
                    }
                    c += 1;
                }
            }
        }
        true
    }
}

/// Exact weighted colouring number by depth-first branch and bound.
///
/// Vertices are branched in descending `J_v` order; the incumbent starts at
/// the better of two greedy runs and any branch whose colour would reach the
/// incumbent is cut. `budget` caps the number of colour trials.
pub fn exact_chi_w(g: &Graph, w: &EdgeWeightMap, budget: u64) -> ExactOutcome {
    let n = g.n();
    let sums = vertex_weight_sums(g, w);
    let mut order: Vec<Vertex> = (0..n).collect();
    order.sort_by(|&a, &b| sums[b].cmp(&sums[a]).then(a.cmp(&b)));

    let by_id = greedy_colour_default(g, w);
    let by_weight = Colouring(greedy_masked(g, w, order.iter().copied(), None));
    let seed_colouring = if by_weight.max_colour() < by_id.max_colour() {
        by_weight
    } else {
        by_id
    };
    if n == 0 {
        return ExactOutcome::Optimal {
            chi_w: 0,
            colouring: seed_colouring,
        };
    }

    let mut position = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let back = order
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            g.incident(v)
                .filter(|&(u, _)| position[u] < i)
                .map(|(u, e)| (position[u], w.by_index(e)))
                .collect()
        })
        .collect();

    let incumbent = seed_colouring.max_colour();
    let mut bb = BranchAndBound {
        order,
        back,
        colours: vec![0; n],
        best: incumbent,
        best_colours: Vec::new(),
        nodes: 0,
        budget,
        _g: g,
    };
    let finished = bb.search(0, 0);

    let colouring = if bb.best_colours.is_empty() {
        seed_colouring
    } else {
        let mut colours = vec![0u64; n];
        for (pos, &v) in bb.order.iter().enumerate() {
            colours[v] = bb.best_colours[pos];
        }
        Colouring(colours)
    };
    if finished {
        ExactOutcome::Optimal {
            chi_w: bb.best,
            colouring,
        }
    } else {
        ExactOutcome::Inconclusive {
            best: bb.best,
            colouring,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(weight: u64) -> (Graph, EdgeWeightMap) {
        let g = Graph::complete(3);
        let w = EdgeWeightMap::constant(&g, weight).unwrap();
        (g, w)
    }

    fn single_edge(weight: u64) -> (Graph, EdgeWeightMap) {
        let g = Graph::complete(2);
        let w = EdgeWeightMap::constant(&g, weight).unwrap();
        (g, w)
    }

    fn star(weights: [u64; 3]) -> (Graph, EdgeWeightMap) {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let w = EdgeWeightMap::new(&g, weights.to_vec()).unwrap();
        (g, w)
    }

    #[test]
    fn verify_examples() {
        let (g, w) = single_edge(3);
        assert!(verify_weighted(&g, &w, &Colouring::new(vec![1, 4]).unwrap()).unwrap());
        assert!(!verify_weighted(&g, &w, &Colouring::new(vec![1, 3]).unwrap()).unwrap());
        let (g, w) = triangle(1);
        assert!(verify_weighted(&g, &w, &Colouring::new(vec![1, 2, 3]).unwrap()).unwrap());
        assert!(verify_weighted(&g, &w, &Colouring::new(vec![1, 2]).unwrap()).is_err());
    }

    #[test]
    fn colouring_rejects_zero() {
        assert!(Colouring::new(vec![1, 0]).is_err());
    }

    #[test]
    fn local_bound_examples() {
        let (g, w) = triangle(2);
        assert_eq!(local_average_bound(&g, &w), 7);
        let g = Graph::empty(4);
        assert_eq!(local_average_bound(&g, &EdgeWeightMap::constant(&g, 1).unwrap()), 1);
        let g = Graph::path(5);
        assert_eq!(local_average_bound(&g, &EdgeWeightMap::constant(&g, 1).unwrap()), 3);
    }

    #[test]
    fn greedy_triangle_weight_two() {
        let (g, w) = triangle(2);
        let f = greedy_colour(&g, &w, &[0, 1, 2]).unwrap();
        assert_eq!(f.as_slice(), &[1, 3, 5]);
        assert!(verify_weighted(&g, &w, &f).unwrap());
    }

    #[test]
    fn greedy_empty_graph() {
        let g = Graph::empty(4);
        let w = EdgeWeightMap::constant(&g, 1).unwrap();
        let f = greedy_colour(&g, &w, &[3, 1, 0, 2]).unwrap();
        assert_eq!(f.as_slice(), &[1, 1, 1, 1]);
    }

    #[test]
    fn greedy_fills_gaps() {
        // neighbours at 1 (w=1) and 5 (w=2): free colours are 2, 3, 7, ...
        let g = Graph::from_edges(3, [(0, 2), (1, 2)]).unwrap();
        let w = EdgeWeightMap::new(&g, vec![1, 2]).unwrap();
        let f = greedy_colour(&g, &w, &[0, 1, 2]).unwrap();
        assert_eq!(f.as_slice(), &[1, 1, 3]);
        let mut intervals = vec![(4, 6), (1, 1)];
        assert_eq!(smallest_free(&mut intervals), 2);
        let mut intervals = vec![(1, 3), (2, 6), (8, 9)];
        assert_eq!(smallest_free(&mut intervals), 7);
    }

    #[test]
    fn greedy_rejects_bad_order() {
        let (g, w) = triangle(1);
        assert!(greedy_colour(&g, &w, &[0, 1]).is_err());
        assert!(greedy_colour(&g, &w, &[0, 1, 1]).is_err());
        assert!(greedy_colour(&g, &w, &[0, 1, 3]).is_err());
    }

    #[test]
    fn weight_sums_and_max_incident() {
        let (g, w) = triangle(2);
        assert_eq!(vertex_weight_sums(&g, &w), vec![4, 4, 4]);
        let (g, w) = star([1, 2, 3]);
        assert_eq!(vertex_weight_sums(&g, &w), vec![6, 1, 2, 3]);
        assert_eq!(max_incident_weight(&g, &w, 0), 3);
        let (g, w) = single_edge(7);
        assert_eq!(max_incident_weight(&g, &w, 0), 7);
        assert_eq!(max_incident_weight(&g, &w, 1), 7);
        let g = Graph::empty(2);
        let w = EdgeWeightMap::constant(&g, 1).unwrap();
        assert_eq!(max_incident_weight(&g, &w, 0), 0);
    }

    #[test]
    fn exact_closed_forms() {
        for w0 in 1..=6 {
            let (g, w) = single_edge(w0);
            assert_eq!(
                exact_chi_w(&g, &w, u64::MAX),
                ExactOutcome::Optimal {
                    chi_w: 1 + w0,
                    colouring: exact_chi_w(&g, &w, u64::MAX).colouring().clone()
                }
            );
        }
        let (g, w) = triangle(2);
        let out = exact_chi_w(&g, &w, u64::MAX);
        assert_eq!(out.value(), 5);
        assert!(out.is_optimal());
        assert!(verify_weighted(&g, &w, out.colouring()).unwrap());
    }

    #[test]
    fn exact_budget_exhaustion() {
        let g = Graph::cycle(7);
        let w = EdgeWeightMap::constant(&g, 1).unwrap();
        match exact_chi_w(&g, &w, 1) {
            ExactOutcome::Inconclusive { best, colouring } => {
                assert!(best >= 3);
                assert!(verify_weighted(&g, &w, &colouring).unwrap());
            }
            other => panic!("expected inconclusive, got {other:?}"),
        }
        assert_eq!(exact_chi_w(&g, &w, u64::MAX).value(), 3);
    }

    #[test]
    fn two_stage_without_bad_vertices() {
        let g = Graph::cycle(6);
        let w = EdgeWeightMap::constant(&g, 1).unwrap();
        // mu n p (1+eps)^2 = 6 * 0.5 * 1.21 > 2 = every J_v
        let (f, rep) = two_stage_colour(&g, &w, 1.0, 0.5, 0.1).unwrap();
        assert!(rep.bad_vertices.is_empty());
        assert_eq!(rep.m_tot, 0);
        assert_eq!(f, greedy_colour_default(&g, &w));
        assert!(rep.max_colour <= rep.budget);
    }

    #[test]
    fn two_stage_bad_centre() {
        let (g, w) = star([1, 2, 3]);
        // cutoff = 1 * 4 * 0.5 * 1.69 = 3.38: only the centre (J=6) is bad
        let (f, rep) = two_stage_colour(&g, &w, 1.0, 0.5, 0.3).unwrap();
        assert_eq!(rep.budget, 2 * 4 + 1);
        assert_eq!(rep.bad_vertices, vec![0]);
        assert_eq!(rep.m_tot, 3);
        assert_eq!(rep.max_colour, rep.budget + 2 * rep.m_tot);
        assert_eq!(f.as_slice(), &[15, 1, 1, 1]);
    }

    #[test]
    fn two_stage_all_bad() {
        let (g, w) = star([4, 2, 3]);
        // cutoff 1.69: every vertex is bad
        let (f, rep) = two_stage_colour(&g, &w, 1.0, 0.25, 0.3).unwrap();
        assert_eq!(rep.budget, 5);
        assert_eq!(rep.bad_vertices, vec![0, 1, 2, 3]);
        assert_eq!(rep.bad_max_weights, vec![4, 4, 2, 3]);
        assert_eq!(rep.m_tot, 13);
        assert_eq!(f.as_slice(), &[13, 21, 25, 31]);
        assert_eq!(rep.max_colour, rep.budget + 2 * rep.m_tot);
    }

    #[test]
    fn two_stage_unit_weights_marks_high_degree() {
        // J_v = deg(v); cutoff = 1 * 8 * 0.25 * 1.69 = 3.38
        let g = Graph::from_edges(8, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (5, 6)]).unwrap();
        let w = EdgeWeightMap::constant(&g, 1).unwrap();
        let (f, rep) = two_stage_colour(&g, &w, 1.0, 0.25, 0.3).unwrap();
        assert_eq!(rep.bad_vertices, vec![0]);
        assert!(verify_weighted(&g, &w, &f).unwrap());
    }

    #[test]
    fn two_stage_rejects_bad_params() {
        let (g, w) = triangle(1);
        assert!(two_stage_colour(&g, &w, 0.5, 0.5, 0.1).is_err());
        assert!(two_stage_colour(&g, &w, 1.0, 0.5, 0.5).is_err());
        assert!(two_stage_colour(&g, &w, 1.0, 0.5, 0.0).is_err());
        assert!(two_stage_colour(&g, &w, 1.0, 1.5, 0.1).is_err());
    }

    #[test]
    fn report_json_fields() {
        let (g, w) = star([1, 2, 3]);
        let (_, rep) = two_stage_colour(&g, &w, 1.0, 0.5, 0.3).unwrap();
        let json = serde_json::to_string(&rep).unwrap();
        assert_eq!(json, r#"{"bad_vertices":[0],"L":9,"M_tot":3,"max_colour":15}"#);
    }

    #[test]
    fn colouring_text_round_trip() {
        let f = Colouring::new(vec![3, 1, 2]).unwrap();
        assert_eq!(f.to_text(), "0 3\n1 1\n2 2\n");
        assert_eq!(Colouring::parse_text(&f.to_text()).unwrap(), f);
        assert!(Colouring::parse_text("1 3\n").is_err());
        assert!(Colouring::parse_text("0 0\n").is_err());
    }
}
