//! Simple undirected graphs, Binomial random graph generation and the
//! edge-list text format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::Seed;

pub type Vertex = usize;

/// Simple undirected graph on `0..n`.
///
/// Edges are kept sorted lexicographically with `u < v`; the edge index is the
/// position in that list and is what [`EdgeWeightMap`] is aligned to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    adj: Vec<Vec<Vertex>>,
    // parallel to `adj`: the edge index of each neighbour entry
    adj_edge: Vec<Vec<usize>>,
    index: HashMap<(Vertex, Vertex), usize>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            adj_edge: vec![Vec::new(); n],
            index: HashMap::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::from_sorted_unchecked(n, edges.collect())
    }

    pub fn path(n: usize) -> Self {
        Self::from_sorted_unchecked(n, (1..n).map(|v| (v - 1, v)).collect())
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges = vec![];
        for v in 1..n {
            edges.push((v - 1, v));
        }
        if n >= 3 {
            edges.push((0, n - 1));
        }
        Self::from_edges(n, edges).expect("cycle is simple")
    }

    /// Builds a graph from arbitrary edge pairs, rejecting self-loops,
    /// duplicates and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate edge ({},{})", w[0].0, w[0].1)));
        }
        Ok(Self::from_sorted_unchecked(n, list))
    }

    fn from_sorted_unchecked(n: usize, edges: Vec<(Vertex, Vertex)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut adj_edge = vec![Vec::new(); n];
        let mut index = HashMap::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            adj[u].push(v);
            adj_edge[u].push(i);
            adj[v].push(u);
            adj_edge[v].push(i);
            index.insert((u, v), i);
        }
        // Edges arrive in lexicographic order, so for each u the larger
        // neighbours are already sorted; the smaller ones come in increasing
        // order of their own id. Together each list is sorted.
        Graph {
            n,
            edges,
            adj,
            adj_edge,
            index,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Sorted neighbour list.
    #[inline]
    pub fn neighbours(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    /// `(neighbour, edge index)` pairs for `v`.
    pub fn incident(&self, v: Vertex) -> impl Iterator<Item = (Vertex, usize)> + '_ {
        self.adj[v].iter().copied().zip(self.adj_edge[v].iter().copied())
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn edge_index(&self, u: Vertex, v: Vertex) -> Option<usize> {
        self.index.get(&(u.min(v), u.max(v))).copied()
    }

    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_index(u, v).is_some()
    }

    /// Spanning subgraph keeping the edges for which `keep(edge_index)` holds.
    /// Returns the subgraph and, for each kept edge, its index in `self`.
    pub fn filter_edges(&self, mut keep: impl FnMut(usize) -> bool) -> (Graph, Vec<usize>) {
        let mut kept = Vec::new();
        let mut origin = Vec::new();
        for (i, &e) in self.edges.iter().enumerate() {
            if keep(i) {
                kept.push(e);
                origin.push(i);
            }
        }
        (Self::from_sorted_unchecked(self.n, kept), origin)
    }

    /// Serializes to the edge-list format: `n m` then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 + self.m() * 12);
        let _ = writeln!(out, "{} {}", self.n, self.m());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn read_edge_list(reader: impl BufRead) -> Result<Self> {
        let mut lines = data_lines(reader);
        let (line_no, header) = lines.next().transpose()?.ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let [n, m] = parse_fields::<2>(&header, line_no)?;
        let mut edges = Vec::with_capacity(m as usize);
        for item in lines {
            let (line_no, line) = item?;
            let [u, v] = parse_fields::<2>(&line, line_no)?;
            edges.push((u as usize, v as usize));
        }
        if edges.len() as u64 != m {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::from_edges(n as usize, edges)
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        Self::read_edge_list(text.as_bytes())
    }
}

/// Non-blank lines with their 1-based line numbers.
fn data_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| {
            l.map(|l| (i + 1, l)).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

fn parse_fields<const K: usize>(line: &str, line_no: usize) -> Result<[u64; K]> {
    let mut out = [0u64; K];
    let mut it = line.split_whitespace();
    for slot in out.iter_mut() {
        let tok = it.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("expected {K} integers"),
        })?;
        *slot = tok.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("not a non-negative integer: {tok:?}"),
        })?;
    }
    if it.next().is_some() {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("expected {K} integers"),
        });
    }
    Ok(out)
}

/// Positive integer weight per edge, aligned with [`Graph::edges`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeWeightMap {
    weights: Vec<u64>,
}

impl EdgeWeightMap {
    pub fn new(g: &Graph, weights: Vec<u64>) -> Result<Self> {
        if weights.len() != g.m() {
            return Err(Error::invalid(format!(
                "{} weights for a graph with {} edges",
                weights.len(),
                g.m()
            )));
        }
        if let Some(i) = weights.iter().position(|&w| w == 0) {
            let (u, v) = g.edges()[i];
            return Err(Error::invalid(format!("edge ({u},{v}) has weight 0")));
        }
        Ok(EdgeWeightMap { weights })
    }

    pub fn constant(g: &Graph, w0: u64) -> Result<Self> {
        Self::new(g, vec![w0; g.m()])
    }

    pub fn from_fn(g: &Graph, mut f: impl FnMut(Vertex, Vertex) -> u64) -> Result<Self> {
        Self::new(g, g.edges().iter().map(|&(u, v)| f(u, v)).collect())
    }

    pub(crate) fn from_vec_unchecked(weights: Vec<u64>) -> Self {
        EdgeWeightMap { weights }
    }

    #[inline]
    pub fn by_index(&self, edge: usize) -> u64 {
        self.weights[edge]
    }

    pub fn get(&self, g: &Graph, u: Vertex, v: Vertex) -> Option<u64> {
        g.edge_index(u, v).map(|i| self.weights[i])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// Restriction to a subgraph produced by [`Graph::filter_edges`].
    pub fn restrict(&self, origin: &[usize]) -> Self {
        EdgeWeightMap {
            weights: origin.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    /// Serializes as one `u v w` line per edge, in graph edge order.
    pub fn to_text(&self, g: &Graph) -> String {
        let mut out = String::with_capacity(self.weights.len() * 16);
        for (&(u, v), w) in g.edges().iter().zip(&self.weights) {
            let _ = writeln!(out, "{u} {v} {w}");
        }
        out
    }

    pub fn read_text(g: &Graph, reader: impl BufRead) -> Result<Self> {
        let mut weights = Vec::with_capacity(g.m());
        for item in data_lines(reader) {
            let (line_no, line) = item?;
            let [u, v, w] = parse_fields::<3>(&line, line_no)?;
            let expected = g.edges().get(weights.len()).copied();
            let (u, v) = (u as usize, v as usize);
            if expected != Some((u.min(v), u.max(v))) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("edge ({u},{v}) does not match graph edge {expected:?}"),
                });
            }
            weights.push(w);
        }
        Self::new(g, weights)
    }

    pub fn parse_text(g: &Graph, text: &str) -> Result<Self> {
        Self::read_text(g, text.as_bytes())
    }
}

/// Binomial random graph: each pair `u < v` is an edge iff its pair hash under
/// `seed` falls below `p`.
pub fn gen_gnp(n: usize, p: f64, seed: &Seed) -> Result<Graph> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability {p} outside [0,1]")));
    }
    let key = seed.key();
    let rows: Vec<Vec<(Vertex, Vertex)>> = (0..n)
        .into_par_iter()
        .map(|u| {
            (u + 1..n)
                .filter(|&v| Seed::pair_unit(key, u, v) < p)
                .map(|v| (u, v))
                .collect()
        })
        .collect();
    Ok(Graph::from_sorted_unchecked(n, rows.concat()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeStats {
    pub degrees: Vec<usize>,
    pub max_degree: usize,
}

pub fn degree_stats(g: &Graph) -> DegreeStats {
    let degrees: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    DegreeStats { degrees, max_degree }
}
