//! Immutable graphs on `[n] = {1, ..., n}` with a distinguished vertex set `Q`.
//!
//! Vertices are 1-based at the API boundary. Internally row `i` of the
//! adjacency bit-matrix belongs to vertex `i + 1`.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{iter_words, words_for, BitSet};

pub type Vertex = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} is outside [1, {n}]")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("a graph needs at least one vertex")]
    NoVertices,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A sorted, duplicate-free list of vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn new(members: impl IntoIterator<Item = Vertex>) -> Self {
        let mut v: Vec<Vertex> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    /// `{lo, ..., hi}`; empty when `hi < lo`.
    pub fn range(lo: Vertex, hi: Vertex) -> Self {
        VertexSet((lo..=hi).collect())
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().merge(&other.0).dedup().copied().collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.iter().filter(|&v| !other.contains(v)).collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| !other.contains(v))
    }

    pub fn max(&self) -> Option<Vertex> {
        self.0.last().copied()
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        VertexSet::new(iter)
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().join(","))
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    stride: usize,
    rows: Vec<u64>,
    neighbors: Vec<Vec<Vertex>>,
    q_set: VertexSet,
    q_mask: BitSet,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("q", &self.q_set)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// Builds a graph with exactly the given edges. Duplicate edges (in either
    /// orientation) are merged.
    pub fn build(n: usize, edges: &[(Vertex, Vertex)], q_set: VertexSet) -> Result<Graph, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        Self::build_allow_empty(n, edges, q_set)
    }

    fn build_allow_empty(n: usize, edges: &[(Vertex, Vertex)], q_set: VertexSet) -> Result<Graph, GraphError> {
        let check = |v: Vertex| {
            if v == 0 || v as usize > n {
                Err(GraphError::VertexOutOfRange { vertex: v, n })
            } else {
                Ok(())
            }
        };
        for &(x, y) in edges {
            check(x)?;
            check(y)?;
            if x == y {
                return Err(GraphError::SelfLoop(x));
            }
        }
        for v in q_set.iter() {
            check(v)?;
        }
        let stride = words_for(n);
        let mut rows = vec![0u64; n * stride];
        for &(x, y) in edges {
            let (i, j) = (x as usize - 1, y as usize - 1);
            rows[i * stride + (j >> 6)] |= 1 << (j & 63);
            rows[j * stride + (i >> 6)] |= 1 << (i & 63);
        }
        Ok(Self::from_rows(n, rows, q_set))
    }

    /// Trusted constructor: `rows` must be symmetric with a zero diagonal.
    pub(crate) fn from_rows(n: usize, rows: Vec<u64>, q_set: VertexSet) -> Graph {
        let stride = words_for(n);
        debug_assert_eq!(rows.len(), n * stride);
        let neighbors = (0..n)
            .map(|i| {
                iter_words(&rows[i * stride..(i + 1) * stride])
                    .map(|j| j as Vertex + 1)
                    .collect()
            })
            .collect();
        let mut q_mask = BitSet::new(n);
        for v in q_set.iter() {
            q_mask.insert(v as usize - 1);
        }
        Graph {
            n,
            stride,
            rows,
            neighbors,
            q_set,
            q_mask,
        }
    }

    /// An edgeless graph on `[n]`.
    pub fn edgeless(n: usize, q_set: VertexSet) -> Result<Graph, GraphError> {
        Self::build(n, &[], q_set)
    }

    /// The complete graph on `[n]`.
    pub fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (1..=n as Vertex).tuple_combinations().collect();
        Self::build(n.max(1), &edges, VertexSet::empty()).expect("valid complete graph")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True only for the `n = 0` output of [`Graph::induced_subgraph`] on an empty set.
    pub fn is_empty_sentinel(&self) -> bool {
        self.n == 0
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        1..=self.n as Vertex
    }

    #[inline]
    pub fn is_edge(&self, x: Vertex, y: Vertex) -> bool {
        if x == 0 || y == 0 || x as usize > self.n || y as usize > self.n {
            return false;
        }
        let (i, j) = (x as usize - 1, y as usize - 1);
        (self.rows[i * self.stride + (j >> 6)] >> (j & 63)) & 1 == 1
    }

    pub fn neighbors(&self, x: Vertex) -> &[Vertex] {
        &self.neighbors[x as usize - 1]
    }

    pub fn degree(&self, x: Vertex) -> usize {
        self.neighbors[x as usize - 1].len()
    }

    /// Adjacency row of `x` as 0-based bit words.
    #[inline]
    pub(crate) fn row(&self, x: Vertex) -> &[u64] {
        let i = x as usize - 1;
        &self.rows[i * self.stride..(i + 1) * self.stride]
    }

    pub(crate) fn stride(&self) -> usize {
        self.stride
    }

    pub fn q_set(&self) -> &VertexSet {
        &self.q_set
    }

    /// Membership in `Q` as a 0-based bitset.
    pub(crate) fn q_mask(&self) -> &BitSet {
        &self.q_mask
    }

    #[inline]
    pub fn in_q(&self, x: Vertex) -> bool {
        self.q_mask.contains(x as usize - 1)
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.vertices()
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// The fixed edge set on `Q`.
    pub fn q_edges(&self) -> Vec<(Vertex, Vertex)> {
        self.edges().filter(|&(u, v)| self.in_q(u) && self.in_q(v)).collect()
    }

    /// Number of neighbors of `x` inside `set` (0-based bitset).
    #[inline]
    pub(crate) fn degree_into(&self, x: Vertex, set: &[u64]) -> u32 {
        self.row(x).iter().zip(set).map(|(a, b)| (a & b).count_ones()).sum()
    }

    /// Same graph with the extra edges added.
    pub fn with_extra_edges(&self, extra: &[(Vertex, Vertex)]) -> Result<Graph, GraphError> {
        let mut edges: Vec<_> = self.edges().collect();
        edges.extend_from_slice(extra);
        Self::build(self.n, &edges, self.q_set.clone())
    }

    /// Same edges, different distinguished set.
    pub fn with_q(&self, q_set: VertexSet) -> Result<Graph, GraphError> {
        if let Some(v) = q_set.iter().find(|&v| v == 0 || v as usize > self.n) {
            return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
        }
        Ok(Self::from_rows(self.n, self.rows.clone(), q_set))
    }

    /// Induced subgraph on `s`, relabeled to `1..=|s|` in increasing order.
    /// `Q`-membership is preserved. Returns the relabeling `new - 1 -> old`.
    pub fn induced_subgraph(&self, s: &VertexSet) -> Result<(Graph, Vec<Vertex>), GraphError> {
        if let Some(v) = s.iter().find(|&v| v == 0 || v as usize > self.n) {
            return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
        }
        let old: Vec<Vertex> = s.iter().collect();
        let mut edges = Vec::new();
        for (a, &x) in old.iter().enumerate() {
            for (b, &y) in old.iter().enumerate().skip(a + 1) {
                if self.is_edge(x, y) {
                    edges.push((a as Vertex + 1, b as Vertex + 1));
                }
            }
        }
        let q = old
            .iter()
            .enumerate()
            .filter(|(_, &x)| self.in_q(x))
            .map(|(a, _)| a as Vertex + 1)
            .collect();
        let g = Self::build_allow_empty(old.len(), &edges, q)?;
        Ok((g, old))
    }

    /// Every `S` disjoint from `base` with `1 <= |S| <= k`, smaller sets first,
    /// lexicographic within a size.
    pub fn enumerate_extensions(&self, base: &VertexSet, k: usize) -> ExtensionSets {
        ExtensionSets::new(self.vertices().filter(|&v| !base.contains(v)).collect(), k)
    }

    /// As [`Graph::enumerate_extensions`], restricted to vertices accepted by `keep`.
    pub fn enumerate_extensions_filtered(
        &self,
        base: &VertexSet,
        k: usize,
        keep: impl Fn(Vertex) -> bool,
    ) -> ExtensionSets {
        ExtensionSets::new(self.vertices().filter(|&v| !base.contains(v) && keep(v)).collect(), k)
    }
}

/// Size-then-lexicographic enumeration of small subsets of a candidate list.
pub struct ExtensionSets {
    candidates: Vec<Vertex>,
    max_size: usize,
    // indices into `candidates` for the current combination
    idx: Vec<usize>,
    started: bool,
}

impl ExtensionSets {
    fn new(candidates: Vec<Vertex>, max_size: usize) -> Self {
        ExtensionSets {
            candidates,
            max_size,
            idx: Vec::new(),
            started: false,
        }
    }

    fn advance(&mut self) -> bool {
        let m = self.candidates.len();
        let k = self.idx.len();
        // rightmost position that can still move
        for pos in (0..k).rev() {
            if self.idx[pos] < m - (k - pos) {
                self.idx[pos] += 1;
                for p in pos + 1..k {
                    self.idx[p] = self.idx[p - 1] + 1;
                }
                return true;
            }
        }
        // next size
        if k < self.max_size && k < m {
            self.idx = (0..=k).collect();
            return true;
        }
        false
    }
}

impl Iterator for ExtensionSets {
    type Item = VertexSet;

    fn next(&mut self) -> Option<VertexSet> {
        if !self.started {
            self.started = true;
            if self.max_size == 0 || self.candidates.is_empty() {
                self.idx.clear();
                self.max_size = 0;
                return None;
            }
            self.idx = vec![0];
        } else if !self.advance() {
            return None;
        }
        Some(VertexSet(self.idx.iter().map(|&i| self.candidates[i]).collect()))
    }
}
