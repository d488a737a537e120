//! Rigid closures `cl_ell(X)`, the rigid kernel and rigid-chain extraction.
//!
//! A round of the closure looks for every `T`, disjoint from `X ∪ Q` with
//! `1 <= |T| <= ell`, such that `(X ∪ Q, X ∪ Q ∪ T)` is rigid in `G`. Two
//! facts cut the search down without changing its result:
//!
//! * every vertex `x` of a rigid `T` has at least
//!   [`AlphaParam::min_rigid_degree`] neighbours in `X ∪ Q ∪ T`, because
//!   `(X ∪ Q ∪ T \ {x}, X ∪ Q ∪ T)` must be dense; so candidates are peeled to
//!   the relative core first;
//! * `v - alpha e` is additive over the parts of `T` that share no edge, so
//!   the components of a rigid `T` are rigid and only sets connected in
//!   `G[T]` need to be examined.
//!
//! [`rigid_step_exhaustive`] skips both and is kept as the reference.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExtensionError;
use crate::alpha::{AlphaError, AlphaParam, ExtType, LocalExt};
use crate::bits::words_for;
use crate::graph::{Graph, Vertex, VertexSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelResult {
    pub kernel: VertexSet,
    pub rounds: usize,
    pub additions_per_round: Vec<VertexSet>,
    pub truncated: bool,
}

/// Upper bound on closure rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RoundCap {
    /// `n` rounds, enough for any fixed point.
    #[default]
    VertexCount,
    Fixed(usize),
}

impl RoundCap {
    /// `2^r` rounds for a sentence of quantifier depth `r`.
    pub fn for_quantifier_depth(r: u32) -> Self {
        RoundCap::Fixed(1usize.checked_shl(r).unwrap_or(usize::MAX))
    }

    pub fn resolve(self, n: usize) -> usize {
        match self {
            RoundCap::VertexCount => n,
            RoundCap::Fixed(k) => k,
        }
    }
}

pub(crate) fn check_ell(ell: usize, a: &AlphaParam) -> Result<(), ExtensionError> {
    if ell == 0 || ell > a.v_max() as usize {
        return Err(AlphaError::WindowExceeded {
            v: ell as u32,
            e: 0,
            v_max: a.v_max(),
            e_max: a.e_max(),
        }
        .into());
    }
    Ok(())
}

fn check_set(g: &Graph, x: &VertexSet) -> Result<(), ExtensionError> {
    match x.iter().find(|&v| v == 0 || v as usize > g.n()) {
        Some(v) => Err(ExtensionError::VertexOutOfRange { vertex: v, n: g.n() }),
        None => Ok(()),
    }
}

fn mask_of(n: usize, vs: impl IntoIterator<Item = Vertex>) -> Vec<u64> {
    let mut m = vec![0u64; words_for(n)];
    for v in vs {
        let i = v as usize - 1;
        m[i >> 6] |= 1 << (i & 63);
    }
    m
}

#[inline]
fn has(mask: &[u64], v: Vertex) -> bool {
    let i = v as usize - 1;
    (mask[i >> 6] >> (i & 63)) & 1 == 1
}

/// Outcome of one scan for rigid extensions over a base.
#[derive(Debug, Clone, Default)]
pub(crate) struct RigidScan {
    pub union: VertexSet,
    /// Smallest rigid set, lexicographically first among those.
    pub first: Option<VertexSet>,
    /// Connected candidate sets examined.
    pub examined: u64,
}

impl RigidScan {
    fn merge(mut self, other: RigidScan) -> RigidScan {
        self.union = self.union.union(&other.union);
        self.first = match (self.first, other.first) {
            (Some(a), Some(b)) => Some(if (b.len(), &b) < (a.len(), &a) { b } else { a }),
            (a, b) => a.or(b),
        };
        self.examined += other.examined;
        self
    }
}

struct Scanner<'g> {
    g: &'g Graph,
    base: Vec<u64>,
    /// peeled candidate vertices
    cand: Vec<u64>,
    ell: usize,
    alpha: &'g AlphaParam,
    min_deg: u32,
}

impl<'g> Scanner<'g> {
    fn new(g: &'g Graph, base: &VertexSet, allowed: Option<&VertexSet>, ell: usize, alpha: &'g AlphaParam) -> Self {
        let n = g.n();
        let base_mask = mask_of(n, base.iter().chain(g.q_set().iter()));
        let initial: Vec<Vertex> = match allowed {
            Some(s) => s.iter().filter(|&v| !has(&base_mask, v)).collect(),
            None => g.vertices().filter(|&v| !has(&base_mask, v)).collect(),
        };
        let min_deg = alpha.min_rigid_degree();
        let mut cand = mask_of(n, initial.iter().copied());
        let mut live: Vec<u64> = base_mask.iter().zip(&cand).map(|(a, b)| a | b).collect();
        // peel to the relative core
        let mut stack: Vec<Vertex> = initial
            .iter()
            .copied()
            .filter(|&v| g.degree_into(v, &live) < min_deg)
            .collect();
        while let Some(v) = stack.pop() {
            if !has(&cand, v) {
                continue;
            }
            let i = v as usize - 1;
            cand[i >> 6] &= !(1 << (i & 63));
            live[i >> 6] &= !(1 << (i & 63));
            for &u in g.neighbors(v) {
                if has(&cand, u) && g.degree_into(u, &live) < min_deg {
                    stack.push(u);
                }
            }
        }
        Scanner {
            g,
            base: base_mask,
            cand,
            ell,
            alpha,
            min_deg,
        }
    }

    fn starts(&self) -> Vec<Vertex> {
        crate::bits::iter_words(&self.cand).map(|i| i as Vertex + 1).collect()
    }

    fn check(&self, t: &[Vertex], out: &mut RigidScan) {
        out.examined += 1;
        let ok_degrees = t.iter().all(|&x| {
            let inside = t.iter().filter(|&&y| self.g.is_edge(x, y)).count() as u32;
            self.g.degree_into(x, &self.base) + inside >= self.min_deg
        });
        if !ok_degrees {
            return;
        }
        if LocalExt::from_graph_mask(self.g, &self.base, t).is_rigid(self.alpha) {
            let set = VertexSet::new(t.iter().copied());
            out.union = out.union.union(&set);
            if out.first.as_ref().is_none_or(|f| (set.len(), &set) < (f.len(), f)) {
                out.first = Some(set);
            }
        }
    }

    /// Connected sets whose least vertex is `start` (ESU enumeration).
    fn scan_from(&self, start: Vertex) -> RigidScan {
        let mut out = RigidScan::default();
        let ext: Vec<Vertex> = self
            .g
            .neighbors(start)
            .iter()
            .copied()
            .filter(|&u| u > start && has(&self.cand, u))
            .collect();
        let mut set = vec![start];
        self.extend(start, &mut set, ext, &mut out);
        out
    }

    fn extend(&self, start: Vertex, set: &mut Vec<Vertex>, mut ext: Vec<Vertex>, out: &mut RigidScan) {
        self.check(set, out);
        if set.len() == self.ell {
            return;
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in self.g.neighbors(w) {
                if u > start
                    && has(&self.cand, u)
                    && !set.contains(&u)
                    && u != w
                    && !next.contains(&u)
                    && !set.iter().any(|&s| self.g.is_edge(s, u))
                {
                    next.push(u);
                }
            }
            set.push(w);
            self.extend(start, set, next, out);
            set.pop();
        }
    }

    fn scan(&self) -> RigidScan {
        self.starts()
            .into_par_iter()
            .map(|s| self.scan_from(s))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(RigidScan::default(), RigidScan::merge)
    }
}

pub(crate) fn scan_rigid(
    g: &Graph,
    base: &VertexSet,
    allowed: Option<&VertexSet>,
    ell: usize,
    a: &AlphaParam,
) -> RigidScan {
    Scanner::new(g, base, allowed, ell, a).scan()
}

/// Union of all `T` with `(X ∪ Q, X ∪ Q ∪ T)` rigid and `|T| <= ell`.
pub fn rigid_step(g: &Graph, x: &VertexSet, ell: usize, a: &AlphaParam) -> Result<VertexSet, ExtensionError> {
    check_ell(ell, a)?;
    check_set(g, x)?;
    Ok(scan_rigid(g, x, None, ell, a).union)
}

/// [`rigid_step`] by plain enumeration of every candidate set. Slow.
pub fn rigid_step_exhaustive(
    g: &Graph,
    x: &VertexSet,
    ell: usize,
    a: &AlphaParam,
) -> Result<VertexSet, ExtensionError> {
    check_ell(ell, a)?;
    check_set(g, x)?;
    let base = x.union(g.q_set());
    let mut union = VertexSet::empty();
    for t in g.enumerate_extensions(&base, ell) {
        if LocalExt::from_graph(g, &base, t.as_slice()).is_rigid(a) {
            union = union.union(&t);
        }
    }
    Ok(union)
}

/// Least fixed point of `X_{j+1} = X_j ∪ (rigid extensions of X_j of size <= ell)`.
/// Stops after `cap` rounds with `truncated` set if no fixed point was reached.
pub fn closure(
    g: &Graph,
    x: &VertexSet,
    ell: usize,
    a: &AlphaParam,
    cap: RoundCap,
) -> Result<KernelResult, ExtensionError> {
    check_ell(ell, a)?;
    check_set(g, x)?;
    let cap = cap.resolve(g.n());
    let mut current = x.clone();
    let mut additions_per_round = Vec::new();
    let mut truncated = false;
    loop {
        let added = scan_rigid(g, &current, None, ell, a).union;
        if added.is_empty() {
            break;
        }
        if additions_per_round.len() == cap {
            truncated = true;
            break;
        }
        current = current.union(&added);
        additions_per_round.push(added);
    }
    Ok(KernelResult {
        kernel: current,
        rounds: additions_per_round.len(),
        additions_per_round,
        truncated,
    })
}

/// `closure(G, ∅, ell*)`; rigidity is judged over `Q`.
pub fn rigid_kernel(g: &Graph, ell_star: usize, a: &AlphaParam, cap: RoundCap) -> Result<KernelResult, ExtensionError> {
    closure(g, &VertexSet::empty(), ell_star, a, cap)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub ell: usize,
    pub vertices: VertexSet,
    pub v: u32,
    pub e: u32,
}

impl ChainEntry {
    pub fn ext_type(&self) -> ExtType {
        ExtType { v: self.v, e: self.e }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RigidChain {
    pub entries: Vec<ChainEntry>,
    /// False if some kernel vertices could not be reached by rigid steps.
    pub complete: bool,
}

/// Decomposes the kernel greedily: each step takes the smallest (then
/// lexicographically first) `T` inside the unused kernel vertices that is
/// rigid over `Q` and the earlier steps.
pub fn extract_rigid_chain(
    g: &Graph,
    kr: &KernelResult,
    ell_star: usize,
    a: &AlphaParam,
) -> Result<RigidChain, ExtensionError> {
    check_ell(ell_star, a)?;
    check_set(g, &kr.kernel)?;
    let mut used = VertexSet::empty();
    let mut entries = Vec::new();
    loop {
        let remaining = kr.kernel.difference(&used).difference(g.q_set());
        if remaining.is_empty() {
            return Ok(RigidChain {
                entries,
                complete: true,
            });
        }
        let Some(t) = scan_rigid(g, &used, Some(&remaining), ell_star, a).first else {
            return Ok(RigidChain {
                entries,
                complete: false,
            });
        };
        let base = used.union(g.q_set());
        let ty = LocalExt::from_graph(g, &base, t.as_slice()).ext_type();
        entries.push(ChainEntry {
            ell: t.len(),
            vertices: t.clone(),
            v: ty.v,
            e: ty.e,
        });
        used = used.union(&t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;

    fn alpha() -> AlphaParam {
        AlphaParam::validate(79, 100, 8, 28).unwrap()
    }

    fn k4_on(a: Vertex, b: Vertex, c: Vertex, d: Vertex) -> Vec<(Vertex, Vertex)> {
        vec![(a, b), (a, c), (a, d), (b, c), (b, d), (c, d)]
    }

    #[test]
    fn edgeless_closure_is_identity() {
        let g = Graph::edgeless(10, VertexSet::empty()).unwrap();
        let x = VertexSet::new([2, 5]);
        let r = closure(&g, &x, 3, &alpha(), RoundCap::default()).unwrap();
        assert_eq!(r.kernel, x);
        assert_eq!(r.rounds, 0);
        assert!(!r.truncated);
    }

    #[test]
    fn planted_k4_joins_closure_of_a_vertex() {
        let mut edges = k4_on(3, 4, 5, 6);
        edges.extend([(1, 2), (6, 7)]);
        let g = Graph::build(9, &edges, VertexSet::empty()).unwrap();
        let r = closure(&g, &VertexSet::new([3]), 3, &alpha(), RoundCap::default()).unwrap();
        assert_eq!(r.kernel, VertexSet::new([3, 4, 5, 6]));
        assert_eq!(r.rounds, 1);
    }

    #[test]
    fn low_degree_outside_stays_out() {
        // a path hanging off X: each outside vertex has < 2 neighbours inward
        let g = Graph::build(6, &[(1, 2), (2, 3), (3, 4), (4, 5)], VertexSet::empty()).unwrap();
        let r = closure(&g, &VertexSet::new([1]), 4, &alpha(), RoundCap::default()).unwrap();
        assert_eq!(r.kernel, VertexSet::new([1]));
    }

    #[test]
    fn kernel_empty_at_ell_three() {
        let g = Graph::complete(7);
        let r = rigid_kernel(&g, 3, &alpha(), RoundCap::default()).unwrap();
        assert!(r.kernel.is_empty());
    }

    #[test]
    fn kernel_finds_k4_at_ell_four() {
        let g = Graph::build(8, &k4_on(2, 4, 6, 8), VertexSet::empty()).unwrap();
        let r = rigid_kernel(&g, 4, &alpha(), RoundCap::default()).unwrap();
        assert_eq!(r.kernel, VertexSet::new([2, 4, 6, 8]));
        let chain = extract_rigid_chain(&g, &r, 4, &alpha()).unwrap();
        assert!(chain.complete);
        assert_eq!(chain.entries.len(), 1);
        assert_eq!(chain.entries[0].ell, 4);
        assert_eq!(chain.entries[0].ext_type(), ExtType { v: 4, e: 6 });
    }

    #[test]
    fn two_k4s_give_two_chain_entries() {
        let mut edges = k4_on(1, 2, 3, 4);
        edges.extend(k4_on(5, 6, 7, 8));
        let g = Graph::build(10, &edges, VertexSet::empty()).unwrap();
        let r = rigid_kernel(&g, 4, &alpha(), RoundCap::default()).unwrap();
        let chain = extract_rigid_chain(&g, &r, 4, &alpha()).unwrap();
        let sets: Vec<_> = chain.entries.iter().map(|e| e.vertices.clone()).collect();
        assert_eq!(sets, vec![VertexSet::range(1, 4), VertexSet::range(5, 8)]);
        assert!(chain.entries.iter().all(|e| e.ext_type() == ExtType { v: 4, e: 6 }));
    }

    #[test]
    fn empty_kernel_gives_empty_chain() {
        let g = Graph::edgeless(4, VertexSet::empty()).unwrap();
        let r = rigid_kernel(&g, 4, &alpha(), RoundCap::default()).unwrap();
        let chain = extract_rigid_chain(&g, &r, 4, &alpha()).unwrap();
        assert!(chain.entries.is_empty() && chain.complete);
    }

    #[test]
    fn q_counts_as_base() {
        // vertex 3 has two neighbours in Q = {1, 2}: type (1, 2) is rigid
        let g = Graph::build(4, &[(1, 3), (2, 3), (3, 4)], VertexSet::new([1, 2])).unwrap();
        let r = rigid_kernel(&g, 1, &alpha(), RoundCap::default()).unwrap();
        assert_eq!(r.kernel, VertexSet::new([3]));
    }

    #[test]
    fn round_cap_truncates() {
        // a chain of triangles hanging off one another: each round adds one vertex
        let g = Graph::build(
            5,
            &[(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 5), (4, 5)],
            VertexSet::new([1, 2]),
        )
        .unwrap();
        let full = rigid_kernel(&g, 1, &alpha(), RoundCap::default()).unwrap();
        assert_eq!(full.kernel, VertexSet::new([3, 4, 5]));
        assert_eq!(full.rounds, 3);
        let capped = rigid_kernel(&g, 1, &alpha(), RoundCap::Fixed(2)).unwrap();
        assert!(capped.truncated);
        assert_eq!(capped.rounds, 2);
        assert_eq!(capped.kernel, VertexSet::new([3, 4]));
    }

    #[test]
    fn quantifier_depth_cap() {
        assert_eq!(RoundCap::for_quantifier_depth(3).resolve(100), 8);
    }

    #[test]
    fn ell_outside_window_is_error() {
        let g = Graph::edgeless(4, VertexSet::empty()).unwrap();
        assert!(closure(&g, &VertexSet::empty(), 9, &alpha(), RoundCap::default()).is_err());
        assert!(closure(&g, &VertexSet::empty(), 0, &alpha(), RoundCap::default()).is_err());
    }
}
