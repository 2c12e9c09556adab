//! Small pattern graphs and enumeration of their copies in a host graph.

use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::scalar::Scalar;

/// Largest pattern the brute-force routines accept.
pub const MAX_PATTERN_VERTICES: usize = 10;

/// Labelled pattern graph with cached invariants.
#[derive(Clone, Debug)]
pub struct PatternGraph {
    name: String,
    graph: Graph,
    automorphisms: Vec<Vec<Vertex>>,
    density: Ratio<i64>,
    // pattern vertices in the order the copy search assigns them
    search_order: Vec<Vertex>,
}

impl PatternGraph {
    pub fn new(name: impl Into<String>, graph: Graph) -> Result<Self> {
        let v0 = graph.n();
        if v0 == 0 || v0 > MAX_PATTERN_VERTICES {
            return Err(Error::invalid(format!(
                "pattern must have between 1 and {MAX_PATTERN_VERTICES} vertices, got {v0}"
            )));
        }
        let automorphisms = automorphisms(&graph);
        let density = max_density_of(&graph);
        let search_order = search_order(&graph);
        Ok(PatternGraph {
            name: name.into(),
            graph,
            automorphisms,
            density,
            search_order,
        })
    }

    /// Built-in patterns: `k2`, `path3`, `triangle`, `c4`, `k4`.
    pub fn named(name: &str) -> Result<Self> {
        let graph = match name.to_ascii_lowercase().as_str() {
            "k2" | "edge" => Graph::complete(2),
            "path3" | "p3" => Graph::path(3),
            "triangle" | "k3" => Graph::complete(3),
            "c4" => Graph::cycle(4),
            "k4" => Graph::complete(4),
            other => return Err(Error::invalid(format!("unknown pattern {other:?}"))),
        };
        Self::new(name.to_ascii_lowercase(), graph)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn v0(&self) -> usize {
        self.graph.n()
    }

    pub fn e0(&self) -> usize {
        self.graph.m()
    }

    pub fn automorphism_count(&self) -> u64 {
        self.automorphisms.len() as u64
    }

    pub fn automorphisms(&self) -> &[Vec<Vertex>] {
        &self.automorphisms
    }

    pub fn max_subgraph_density(&self) -> Ratio<i64> {
        self.density
    }

    /// `e(H)/v(H) <= e0/v0` for every subgraph `H`.
    pub fn is_balanced(&self) -> bool {
        self.density == Ratio::new(self.e0() as i64, self.v0() as i64)
    }
}

impl FromStr for PatternGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::named(s)
    }
}

/// Maximum of `e(S)/|S|` over nonempty vertex subsets `S`.
///
/// Restricting to induced subgraphs loses nothing: for a fixed vertex set the
/// induced edge set has the most edges.
fn max_density_of(g: &Graph) -> Ratio<i64> {
    let v0 = g.n();
    let mut best = Ratio::from_integer(0);
    for mask in 1u32..(1 << v0) {
        let inside = g
            .edges()
            .iter()
            .filter(|&&(u, v)| mask >> u & 1 == 1 && mask >> v & 1 == 1)
            .count();
        let d = Ratio::new(inside as i64, mask.count_ones() as i64);
        if d > best {
            best = d;
        }
    }
    best
}

pub fn max_subgraph_density(gamma: &PatternGraph) -> Ratio<i64> {
    gamma.max_subgraph_density()
}

pub fn is_balanced(gamma: &PatternGraph) -> bool {
    gamma.is_balanced()
}

pub fn automorphism_count(gamma: &PatternGraph) -> u64 {
    gamma.automorphism_count()
}

/// All adjacency-preserving permutations, by backtracking over partial maps.
fn automorphisms(g: &Graph) -> Vec<Vec<Vertex>> {
    fn extend(g: &Graph, perm: &mut Vec<Vertex>, used: &mut [bool], out: &mut Vec<Vec<Vertex>>) {
        let i = perm.len();
        if i == g.n() {
            out.push(perm.clone());
            return;
        }
        for image in 0..g.n() {
            if used[image] || g.degree(image) != g.degree(i) {
                continue;
            }
            if (0..i).all(|j| g.has_edge(i, j) == g.has_edge(image, perm[j])) {
                used[image] = true;
                perm.push(image);
                extend(g, perm, used, out);
                perm.pop();
                used[image] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(g, &mut Vec::with_capacity(g.n()), &mut vec![false; g.n()], &mut out);
    out
}

/// Assignment order for the copy search: each connected component in BFS
/// order from its highest-degree vertex, so that every vertex after the first
/// of its component has an already placed neighbour.
fn search_order(g: &Graph) -> Vec<Vertex> {
    let n = g.n();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let root = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v)))
            .expect("unplaced vertex exists");
        placed[root] = true;
        let start = order.len();
        order.push(root);
        let mut head = start;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &u in g.neighbours(v) {
                if !placed[u] {
                    placed[u] = true;
                    order.push(u);
                }
            }
        }
    }
    order
}

/// A copy of a pattern in a host graph.
///
/// `vertices[i]` is the host vertex playing pattern vertex `i`; the copy's
/// identity is its vertex set together with its edge set, and the
/// enumeration yields one representative per identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Copy {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(Vertex, Vertex)>,
}

impl Copy {
    /// Vertex set and sorted edge set; equal keys mean the same copy.
    pub fn identity(&self) -> (Vec<Vertex>, Vec<(Vertex, Vertex)>) {
        let mut vs = self.vertices.clone();
        vs.sort_unstable();
        let mut es = self.edges.clone();
        es.sort_unstable();
        (vs, es)
    }
}

/// Lazy backtracking search over injective edge-preserving maps from the
/// pattern into the host; a map is emitted only if it is the lexicographically
/// smallest in its automorphism orbit.
pub struct CopyIter<'a> {
    host: &'a Graph,
    gamma: &'a PatternGraph,
    // image[pattern vertex]
    image: Vec<Option<Vertex>>,
    // per search depth: candidate host vertices and the cursor into them
    candidates: Vec<Vec<Vertex>>,
    cursor: Vec<usize>,
    used: Vec<bool>,
    depth: usize,
    done: bool,
}

impl<'a> CopyIter<'a> {
    fn new(host: &'a Graph, gamma: &'a PatternGraph) -> Self {
        let v0 = gamma.v0();
        let done = v0 > host.n();
        let mut it = CopyIter {
            host,
            gamma,
            image: vec![None; v0],
            candidates: vec![Vec::new(); v0],
            cursor: vec![0; v0],
            used: vec![false; host.n()],
            depth: 0,
            done,
        };
        if !done {
            it.fill_candidates(0);
        }
        it
    }

    fn fill_candidates(&mut self, depth: usize) {
        let pv = self.gamma.search_order[depth];
        let anchor = self
            .gamma
            .graph
            .neighbours(pv)
            .iter()
            .filter_map(|&q| self.image[q])
            .min_by_key(|&h| self.host.degree(h));
        self.candidates[depth] = match anchor {
            Some(h) => self.host.neighbours(h).to_vec(),
            None => (0..self.host.n()).collect(),
        };
        self.cursor[depth] = 0;
    }

    fn fits(&self, pv: Vertex, h: Vertex) -> bool {
        !self.used[h]
            && self.host.degree(h) >= self.gamma.graph.degree(pv)
            && self
                .gamma
                .graph
                .neighbours(pv)
                .iter()
                .all(|&q| self.image[q].is_none_or(|hq| self.host.has_edge(h, hq)))
    }

    fn is_canonical(&self) -> bool {
        let phi: Vec<Vertex> = self.image.iter().map(|x| x.expect("complete map")).collect();
        self.gamma
            .automorphisms
            .iter()
            .all(|sigma| sigma.iter().map(|&s| phi[s]).cmp(phi.iter().copied()) != std::cmp::Ordering::Less)
    }

    fn emit(&self) -> Copy {
        let vertices: Vec<Vertex> = self.image.iter().map(|x| x.expect("complete map")).collect();
        let edges = self
            .gamma
            .graph
            .edges()
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (vertices[a], vertices[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        Copy { vertices, edges }
    }
}

impl Iterator for CopyIter<'_> {
    type Item = Copy;

    fn next(&mut self) -> Option<Copy> {
        let v0 = self.gamma.v0();
        while !self.done {
            let depth = self.depth;
            let pv = self.gamma.search_order[depth];
            // undo the assignment left at this depth by the previous step
            if let Some(h) = self.image[pv].take() {
                self.used[h] = false;
            }
            let mut advanced = false;
            while self.cursor[depth] < self.candidates[depth].len() {
                let h = self.candidates[depth][self.cursor[depth]];
                self.cursor[depth] += 1;
                if self.fits(pv, h) {
                    self.image[pv] = Some(h);
                    self.used[h] = true;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                if depth == 0 {
                    self.done = true;
                    return None;
                }
                self.depth -= 1;
                continue;
            }
            if depth + 1 == v0 {
                if self.is_canonical() {
                    return Some(self.emit());
                }
            } else {
                self.depth += 1;
                self.fill_candidates(self.depth);
            }
        }
        None
    }
}

/// Every copy of `gamma` in `g`, each exactly once.
pub fn enumerate_copies<'a>(g: &'a Graph, gamma: &'a PatternGraph) -> CopyIter<'a> {
    CopyIter::new(g, gamma)
}

pub fn count_copies(g: &Graph, gamma: &PatternGraph) -> u64 {
    enumerate_copies(g, gamma).count() as u64
}

/// `E N_Γ(G(n,p)) = n (n-1) ... (n-v0+1) / |Aut(Γ)| * p^e0`.
pub fn expected_copy_count<S: Scalar>(n: u64, p: S, gamma: &PatternGraph) -> Result<S> {
    let v0 = gamma.v0() as u64;
    if v0 > n {
        return Err(Error::invalid(format!("pattern has {v0} vertices, host only {n}")));
    }
    let mut placements = S::one();
    for i in 0..v0 {
        placements = placements * S::from_count(n - i);
    }
    Ok(placements / S::from_count(gamma.automorphism_count()) * p.powu(gamma.e0() as u32))
}
