//! Graph data model: directed pseudorange graphs, the undirected multigraphs
//! they induce, simple graphs, GNSS graphs and decompositions.
//!
//! Vertices are dense indices `0..n`. Arc and edge order is preserved
//! everywhere because it fixes the row order of every rigidity matrix.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::DenseMatrix;

/// Index of an agent in `0..n`.
pub type VertexId = usize;

/// Anything that joins two vertices. Directed arcs report `(tail, head)`.
pub trait Endpoints {
    fn endpoints(&self) -> (VertexId, VertexId);
}

/// A one-way pseudorange constraint from `tail` (emitter) to `head` (receiver).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arc {
    pub tail: VertexId,
    pub head: VertexId,
}

impl Arc {
    pub fn new(tail: VertexId, head: VertexId) -> Self {
        Self { tail, head }
    }

    pub fn reversed(self) -> Self {
        Self::new(self.head, self.tail)
    }

    pub fn edge(self) -> Edge {
        Edge::new(self.tail, self.head)
    }
}

impl Endpoints for Arc {
    fn endpoints(&self) -> (VertexId, VertexId) {
        (self.tail, self.head)
    }
}

/// An unordered pair, stored with `u < v`. The stored order doubles as the
/// default orientation (smaller id is the tail).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    u: VertexId,
    v: VertexId,
}

impl Edge {
    /// Normalizes the pair so that `u() <= v()`. Self-loops are rejected by
    /// the graph constructors, not here.
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            Self { u: a, v: b }
        } else {
            Self { u: b, v: a }
        }
    }

    pub fn u(self) -> VertexId {
        self.u
    }

    pub fn v(self) -> VertexId {
        self.v
    }

    pub fn contains(self, w: VertexId) -> bool {
        self.u == w || self.v == w
    }
}

impl Endpoints for Edge {
    fn endpoints(&self) -> (VertexId, VertexId) {
        (self.u, self.v)
    }
}

impl Endpoints for (VertexId, VertexId) {
    fn endpoints(&self) -> (VertexId, VertexId) {
        *self
    }
}

fn check_pair(n: usize, a: VertexId, b: VertexId) -> Result<()> {
    if a >= n || b >= n {
        return Err(Error::InvalidGraph(format!(
            "pair ({a}, {b}) references a vertex outside 0..{n}"
        )));
    }
    if a == b {
        return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
    }
    Ok(())
}

/// Simple directed graph of pseudorange measurements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedPseudorangeGraph {
    n: usize,
    arcs: Vec<Arc>,
}

impl DirectedPseudorangeGraph {
    pub fn new(n: usize, arcs: Vec<Arc>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(arcs.len());
        for arc in &arcs {
            check_pair(n, arc.tail, arc.head)?;
            if !seen.insert(*arc) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate arc {} -> {}",
                    arc.tail, arc.head
                )));
            }
        }
        Ok(Self { n, arcs })
    }

    pub fn from_pairs(n: usize, pairs: &[(VertexId, VertexId)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(t, h)| Arc::new(t, h)).collect())
    }

    /// Every ordered pair of distinct vertices.
    pub fn complete_symmetric(n: usize) -> Self {
        let arcs = (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| Arc::new(u, v)))
            .collect();
        Self { n, arcs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn contains(&self, arc: Arc) -> bool {
        self.arcs.contains(&arc)
    }

    /// Reverses the arcs whose indices are listed. Fails if a reversal would
    /// duplicate an existing arc.
    pub fn reverse_arcs(&self, indices: &[usize]) -> Result<Self> {
        let mut arcs = self.arcs.clone();
        for &i in indices {
            arcs[i] = arcs[i].reversed();
        }
        Self::new(self.n, arcs)
    }

    pub fn reverse_all(&self) -> Self {
        Self {
            n: self.n,
            arcs: self.arcs.iter().map(|a| a.reversed()).collect(),
        }
    }

    pub fn with_arc(&self, arc: Arc) -> Result<Self> {
        let mut arcs = self.arcs.clone();
        arcs.push(arc);
        Self::new(self.n, arcs)
    }

    pub fn underlying(&self) -> UndirectedMultigraph {
        underlying_multigraph(self)
    }

    /// Simple graph of the pairs joined by at least one arc.
    pub fn support(&self) -> SimpleGraph {
        let m = self.underlying();
        let mut edges = m.double_edges().to_vec();
        edges.extend_from_slice(m.single_edges());
        SimpleGraph { n: self.n, edges }
    }
}

/// Undirected multigraph induced by a directed pseudorange graph. Each pair has
/// multiplicity 0, 1 (`single`) or 2 (`double`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedMultigraph {
    n: usize,
    single: Vec<Edge>,
    double: Vec<Edge>,
}

impl UndirectedMultigraph {
    pub fn new(n: usize, single: Vec<Edge>, double: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in single.iter().chain(&double) {
            check_pair(n, e.u, e.v)?;
            if !seen.insert(*e) {
                return Err(Error::InvalidGraph(format!(
                    "pair {{{}, {}}} listed twice",
                    e.u, e.v
                )));
            }
        }
        Ok(Self { n, single, double })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn single_edges(&self) -> &[Edge] {
        &self.single
    }

    pub fn double_edges(&self) -> &[Edge] {
        &self.double
    }

    /// The multiset of edges: single edges once, double edges twice.
    pub fn elements(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.single.len() + 2 * self.double.len());
        for &e in &self.double {
            out.push(e);
            out.push(e);
        }
        out.extend_from_slice(&self.single);
        out
    }

    pub fn element_count(&self) -> usize {
        self.single.len() + 2 * self.double.len()
    }
}

/// Simple undirected graph with ordered edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl SimpleGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            check_pair(n, e.u, e.v)?;
            if !seen.insert(*e) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {{{}, {}}}",
                    e.u, e.v
                )));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn from_pairs(n: usize, pairs: &[(VertexId, VertexId)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(a, b)| Edge::new(a, b)).collect())
    }

    /// Builds a graph from pairs, silently dropping repeated pairs.
    pub(crate) fn from_edges_dedup(n: usize, edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut seen = HashSet::new();
        let edges = edges.into_iter().filter(|e| seen.insert(*e)).collect();
        Self { n, edges }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        Self::complete_on(n, &(0..n).collect::<Vec<_>>())
    }

    /// Complete graph on a subset of the vertices, edges in lexicographic order.
    pub fn complete_on(n: usize, vertices: &[VertexId]) -> Self {
        let mut edges = Vec::new();
        for (i, &a) in vertices.iter().enumerate() {
            for &b in &vertices[i + 1..] {
                edges.push(Edge::new(a, b));
            }
        }
        Self { n, edges }
    }

    /// Path visiting `vertices` in the given order.
    pub fn path_on(n: usize, vertices: &[VertexId]) -> Self {
        let edges = vertices.windows(2).map(|w| Edge::new(w[0], w[1])).collect();
        Self { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges.iter().copied().collect()
    }

    pub fn is_connected(&self) -> bool {
        connected_components(self).len() <= 1
    }
}

/// Pseudorange arcs, distance edges and synchronization edges on one vertex set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GnssGraph {
    pub gamma: DirectedPseudorangeGraph,
    pub g_d: SimpleGraph,
    pub g_s: SimpleGraph,
}

impl GnssGraph {
    pub fn new(
        gamma: DirectedPseudorangeGraph,
        g_d: SimpleGraph,
        g_s: SimpleGraph,
    ) -> Result<Self> {
        if g_d.n() != gamma.n() || g_s.n() != gamma.n() {
            return Err(Error::InvalidGraph(format!(
                "vertex counts differ: pseudorange {}, distance {}, sync {}",
                gamma.n(),
                g_d.n(),
                g_s.n()
            )));
        }
        Ok(Self { gamma, g_d, g_s })
    }

    /// A GNSS graph with only pseudorange constraints.
    pub fn from_pseudorange(gamma: DirectedPseudorangeGraph) -> Self {
        let n = gamma.n();
        Self {
            gamma,
            g_d: SimpleGraph::empty(n),
            g_s: SimpleGraph::empty(n),
        }
    }

    pub fn n(&self) -> usize {
        self.gamma.n()
    }

    /// Total constraint count, i.e. the row count of the GNSS rigidity matrix.
    pub fn constraint_count(&self) -> usize {
        self.gamma.len() + self.g_d.len() + self.g_s.len()
    }
}

/// A split of a multigraph's edges into a distance graph and a sync graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub g_d: SimpleGraph,
    pub g_s: SimpleGraph,
}

/// Double edges are the pairs carrying both arcs; single edges carry exactly one.
pub fn underlying_multigraph(gamma: &DirectedPseudorangeGraph) -> UndirectedMultigraph {
    let arcs: HashSet<Arc> = gamma.arcs().iter().copied().collect();
    let mut placed = HashSet::new();
    let mut single = Vec::new();
    let mut double = Vec::new();
    for arc in gamma.arcs() {
        let e = arc.edge();
        if !placed.insert(e) {
            continue;
        }
        if arcs.contains(&arc.reversed()) {
            double.push(e);
        } else {
            single.push(e);
        }
    }
    UndirectedMultigraph {
        n: gamma.n(),
        single,
        double,
    }
}

/// Vertex-by-edge incidence matrix. Column `k` has `-1` at the smaller
/// endpoint of edge `k` and `+1` at the larger one.
pub fn incidence_matrix(g: &SimpleGraph) -> DenseMatrix {
    let mut b = DenseMatrix::zeros(g.n(), g.len());
    for (k, e) in g.edges().iter().enumerate() {
        b[(e.u, k)] = -1.0;
        b[(e.v, k)] = 1.0;
    }
    b
}

/// Union-find over `0..n` with path halving and union by size.
#[derive(Clone, Debug)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `false` when `a` and `b` were already in the same set.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Blocks of the vertex partition, each sorted, ordered by smallest member.
pub fn connected_components(g: &SimpleGraph) -> Vec<Vec<VertexId>> {
    let mut sets = DisjointSets::new(g.n());
    for e in g.edges() {
        sets.union(e.u, e.v);
    }
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut blocks: Vec<Vec<VertexId>> = Vec::new();
    for v in 0..g.n() {
        let root = sets.find(v);
        let slot = *index.entry(root).or_insert_with(|| {
            blocks.push(Vec::new());
            blocks.len() - 1
        });
        blocks[slot].push(v);
    }
    blocks
}

pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// Iterator over all `2^|E1|` decompositions of a multigraph. Bit `i` of the
/// counter sends single edge `i` to the sync graph.
#[derive(Clone, Debug)]
pub struct Decompositions<'a> {
    m: &'a UndirectedMultigraph,
    next: u64,
    end: u64,
}

impl Iterator for Decompositions<'_> {
    type Item = Decomposition;

    fn next(&mut self) -> Option<Decomposition> {
        if self.next >= self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        let mut e_d = self.m.double.clone();
        let mut e_s = self.m.double.clone();
        for (i, &e) in self.m.single.iter().enumerate() {
            if mask >> i & 1 == 1 {
                e_s.push(e);
            } else {
                e_d.push(e);
            }
        }
        Some(Decomposition {
            g_d: SimpleGraph {
                n: self.m.n,
                edges: e_d,
            },
            g_s: SimpleGraph {
                n: self.m.n,
                edges: e_s,
            },
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Decompositions<'_> {}

/// Exhaustive enumeration, refused beyond `limit` single edges.
pub fn enumerate_decompositions(
    m: &UndirectedMultigraph,
    limit: usize,
) -> Result<Decompositions<'_>> {
    let singles = m.single.len();
    if singles > limit || singles >= 63 {
        return Err(Error::EnumerationLimit { singles, limit });
    }
    Ok(Decompositions {
        m,
        next: 0,
        end: 1u64 << singles,
    })
}

/// Checks `E_D ∪ E_S = E1 ∪ E2` and `E_D ∩ E_S = E2`.
pub fn validate_decomposition(m: &UndirectedMultigraph, d: &Decomposition) -> bool {
    if d.g_d.n() != m.n() || d.g_s.n() != m.n() {
        return false;
    }
    let e_d = d.g_d.edge_set();
    let e_s = d.g_s.edge_set();
    let e2: BTreeSet<Edge> = m.double.iter().copied().collect();
    let all: BTreeSet<Edge> = m.single.iter().chain(&m.double).copied().collect();
    let union: BTreeSet<Edge> = e_d.union(&e_s).copied().collect();
    let inter: BTreeSet<Edge> = e_d.intersection(&e_s).copied().collect();
    union == all && inter == e2
}

/// On-disk graph document. `arcs` order is the canonical row order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub arcs: Vec<[usize; 2]>,
    #[serde(default)]
    pub edges_distance: Vec<[usize; 2]>,
    #[serde(default)]
    pub edges_sync: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph file serializes")
    }

    pub fn to_gnss_graph(&self) -> Result<GnssGraph> {
        let pairs = |v: &[[usize; 2]]| v.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>();
        GnssGraph::new(
            DirectedPseudorangeGraph::from_pairs(self.n, &pairs(&self.arcs))?,
            SimpleGraph::from_pairs(self.n, &pairs(&self.edges_distance))?,
            SimpleGraph::from_pairs(self.n, &pairs(&self.edges_sync))?,
        )
    }

    pub fn from_gnss_graph(g: &GnssGraph) -> Self {
        let edges = |s: &SimpleGraph| s.edges().iter().map(|e| [e.u, e.v]).collect();
        Self {
            n: g.n(),
            arcs: g.gamma.arcs().iter().map(|a| [a.tail, a.head]).collect(),
            edges_distance: edges(&g.g_d),
            edges_sync: edges(&g.g_s),
        }
    }
}
