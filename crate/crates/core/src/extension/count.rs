//! Counting and enumerating extensions `g ⊇ f` of an embedding.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::ExtensionError;
use crate::alpha::PairSpec;
use crate::bits::iter_words;
use crate::graph::{Graph, Vertex};

/// Injective partial map from template vertices to ambient vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    map: BTreeMap<Vertex, Vertex>,
}

impl Embedding {
    pub fn new(pairs: impl IntoIterator<Item = (Vertex, Vertex)>) -> Self {
        Embedding {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn identity(vertices: impl IntoIterator<Item = Vertex>) -> Self {
        Self::new(vertices.into_iter().map(|v| (v, v)))
    }

    pub fn get(&self, v: Vertex) -> Option<Vertex> {
        self.map.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.map.iter().map(|(&a, &b)| (a, b))
    }
}

/// Where a new vertex's neighbour sits when the vertex is placed.
#[derive(Debug, Clone, Copy)]
enum Anchor {
    Fixed(Vertex),
    Placed(usize),
}

/// Placement order and adjacency constraints for a backtracking search.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    /// `order[d]` is the new vertex (local index) placed at depth `d`.
    order: Vec<usize>,
    /// Anchors of `order[d]`, with `Placed` referring to depths `< d`.
    anchors: Vec<Vec<Anchor>>,
    /// Ambient vertices that no new vertex may use.
    forbidden: Vec<Vertex>,
}

impl Plan {
    /// `fixed[i]`: ambient images of base neighbours of new vertex `i`;
    /// `inner[i]`: new neighbours of `i` (local indices).
    pub(crate) fn new(fixed: Vec<Vec<Vertex>>, inner: Vec<Vec<usize>>, forbidden: Vec<Vertex>) -> Plan {
        let k = fixed.len();
        let mut depth_of = vec![usize::MAX; k];
        let mut order = Vec::with_capacity(k);
        for d in 0..k {
            // most constrained next; ties to the smallest index
            let next = (0..k)
                .filter(|&i| depth_of[i] == usize::MAX)
                .max_by_key(|&i| {
                    let placed = inner[i].iter().filter(|&&j| depth_of[j] != usize::MAX).count();
                    (fixed[i].len() + placed, std::cmp::Reverse(i))
                })
                .expect("unplaced vertex remains");
            depth_of[next] = d;
            order.push(next);
        }
        let anchors = order
            .iter()
            .enumerate()
            .map(|(d, &i)| {
                fixed[i]
                    .iter()
                    .map(|&v| Anchor::Fixed(v))
                    .chain(
                        inner[i]
                            .iter()
                            .filter(|&&j| depth_of[j] < d)
                            .map(|&j| Anchor::Placed(depth_of[j])),
                    )
                    .collect()
            })
            .collect();
        Plan {
            order,
            anchors,
            forbidden,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.order.len()
    }
}

pub(crate) struct Backtracker<'g> {
    g: &'g Graph,
    plan: &'g Plan,
    used: Vec<u64>,
    /// images by depth
    placed: Vec<Vertex>,
    all: Vec<u64>,
}

impl<'g> Backtracker<'g> {
    pub(crate) fn new(g: &'g Graph, plan: &'g Plan) -> Self {
        let stride = g.stride();
        let mut used = vec![0u64; stride];
        for &v in &plan.forbidden {
            let i = v as usize - 1;
            used[i >> 6] |= 1 << (i & 63);
        }
        for (w, q) in used.iter_mut().zip(g.q_mask().words()) {
            *w |= q;
        }
        let mut all = vec![u64::MAX; stride];
        let tail = g.n() % 64;
        if tail != 0 {
            all[stride - 1] = (1u64 << tail) - 1;
        }
        Backtracker {
            g,
            plan,
            used,
            placed: Vec::with_capacity(plan.len()),
            all,
        }
    }

    fn candidates(&self, depth: usize) -> Vec<u64> {
        let mut cand = self.all.clone();
        for a in &self.plan.anchors[depth] {
            let v = match *a {
                Anchor::Fixed(v) => v,
                Anchor::Placed(d) => self.placed[d],
            };
            for (c, r) in cand.iter_mut().zip(self.g.row(v)) {
                *c &= r;
            }
        }
        for (c, u) in cand.iter_mut().zip(&self.used) {
            *c &= !u;
        }
        cand
    }

    fn mark(&mut self, v: Vertex, on: bool) {
        let i = v as usize - 1;
        if on {
            self.used[i >> 6] |= 1 << (i & 63);
        } else {
            self.used[i >> 6] &= !(1 << (i & 63));
        }
    }

    pub(crate) fn count(&mut self) -> u128 {
        if self.plan.len() == 0 {
            return 1;
        }
        self.count_from(0)
    }

    fn count_from(&mut self, depth: usize) -> u128 {
        let cand = self.candidates(depth);
        if depth + 1 == self.plan.len() {
            return cand.iter().map(|w| w.count_ones() as u128).sum();
        }
        let mut total = 0;
        for i in iter_words(&cand) {
            let v = i as Vertex + 1;
            self.mark(v, true);
            self.placed.push(v);
            total += self.count_from(depth + 1);
            self.placed.pop();
            self.mark(v, false);
        }
        total
    }

    /// Calls `visit` with the images of the new vertices (local index order)
    /// for every extension until it breaks.
    pub(crate) fn visit<F>(&mut self, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[Vertex]) -> ControlFlow<()>,
    {
        self.visit_from(0, visit)
    }

    fn visit_from<F>(&mut self, depth: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[Vertex]) -> ControlFlow<()>,
    {
        if depth == self.plan.len() {
            let mut images = vec![0; self.plan.len()];
            for (d, &i) in self.plan.order.iter().enumerate() {
                images[i] = self.placed[d];
            }
            return visit(&images);
        }
        let cand = self.candidates(depth);
        for i in iter_words(&cand) {
            let v = i as Vertex + 1;
            self.mark(v, true);
            self.placed.push(v);
            let flow = self.visit_from(depth + 1, visit);
            self.placed.pop();
            self.mark(v, false);
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Validates `f` against the pair and builds the search plan. New template
/// vertices are listed in increasing order.
fn plan_for(g: &Graph, f: &Embedding, p: &PairSpec) -> Result<(Plan, Vec<Vertex>), ExtensionError> {
    let t = p.ambient();
    let base = p.base();
    for v in base.iter() {
        let Some(img) = f.get(v) else {
            return Err(ExtensionError::NotCovering(v));
        };
        if img == 0 || img as usize > g.n() {
            return Err(ExtensionError::VertexOutOfRange { vertex: img, n: g.n() });
        }
        if t.in_q(v) && !g.in_q(img) {
            return Err(ExtensionError::QMisaligned {
                template: v,
                image: img,
            });
        }
    }
    if let Some((v, _)) = f.iter().find(|&(v, _)| !base.contains(v)) {
        return Err(ExtensionError::OutsideBase(v));
    }
    let mut images: Vec<Vertex> = f.iter().map(|(_, b)| b).collect();
    images.sort_unstable();
    if let Some(w) = images.windows(2).find(|w| w[0] == w[1]) {
        return Err(ExtensionError::NotInjective(w[0]));
    }
    let new: Vec<Vertex> = p.new_vertices().iter().collect();
    let fixed = new
        .iter()
        .map(|&x| {
            base.iter()
                .filter(|&y| t.is_edge(x, y))
                .map(|y| f.get(y).expect("base is covered"))
                .collect()
        })
        .collect();
    let inner = new
        .iter()
        .map(|&x| {
            new.iter()
                .enumerate()
                .filter(|(_, &y)| t.is_edge(x, y))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    Ok((Plan::new(fixed, inner, images), new))
}

/// Number of injective `g: H1 ∪ Q -> G` extending `f` such that every template
/// edge not inside `H0 ∪ Q` maps to an edge. New vertices map outside `Q`.
/// Non-edges are not required to map to non-edges.
pub fn count_extensions(g: &Graph, f: &Embedding, p: &PairSpec) -> Result<u128, ExtensionError> {
    let (plan, _) = plan_for(g, f, p)?;
    Ok(Backtracker::new(g, &plan).count())
}

/// Whether at least one extension exists.
pub fn has_extension(g: &Graph, f: &Embedding, p: &PairSpec) -> Result<bool, ExtensionError> {
    let (plan, _) = plan_for(g, f, p)?;
    let mut b = Backtracker::new(g, &plan);
    Ok(b.visit(&mut |_| ControlFlow::Break(())).is_break())
}

/// Calls `visit` with each extension as a full embedding of `H1 ∪ Q`,
/// until it breaks.
pub fn for_each_extension<F>(g: &Graph, f: &Embedding, p: &PairSpec, mut visit: F) -> Result<(), ExtensionError>
where
    F: FnMut(&Embedding) -> ControlFlow<()>,
{
    let (plan, new) = plan_for(g, f, p)?;
    let mut b = Backtracker::new(g, &plan);
    let _ = b.visit(&mut |images| {
        let full = Embedding::new(f.iter().chain(new.iter().copied().zip(images.iter().copied())));
        visit(&full)
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexSet;

    fn pair(n: usize, edges: &[(Vertex, Vertex)], h0: &[Vertex], h1: &[Vertex]) -> PairSpec {
        let g = Graph::build(n, edges, VertexSet::empty()).unwrap();
        PairSpec::new(
            g,
            VertexSet::new(h0.iter().copied()),
            VertexSet::new(h1.iter().copied()),
        )
        .unwrap()
    }

    #[test]
    fn identity_extension_counts_one() {
        let g = Graph::complete(4);
        let p = pair(2, &[(1, 2)], &[1, 2], &[1, 2]);
        assert_eq!(count_extensions(&g, &Embedding::new([(1, 3), (2, 4)]), &p).unwrap(), 1);
    }

    #[test]
    fn single_edge_counts_degree() {
        let g = Graph::build(6, &[(1, 2), (1, 3), (1, 5), (4, 5)], VertexSet::empty()).unwrap();
        let p = pair(2, &[(1, 2)], &[1], &[1, 2]);
        for u in 1..=6 {
            let c = count_extensions(&g, &Embedding::new([(1, u)]), &p).unwrap();
            assert_eq!(c, g.degree(u) as u128);
        }
    }

    #[test]
    fn triangle_in_k5() {
        let g = Graph::complete(5);
        let p = pair(3, &[(1, 2), (2, 3), (1, 3)], &[1], &[1, 2, 3]);
        assert_eq!(count_extensions(&g, &Embedding::new([(1, 1)]), &p).unwrap(), 12);
        assert!(has_extension(&g, &Embedding::new([(1, 1)]), &p).unwrap());
    }

    #[test]
    fn non_edges_are_not_enforced() {
        // path template a-b-c over a; K4 ambient: 3 * 2 ordered choices
        let g = Graph::complete(4);
        let p = pair(3, &[(1, 2), (2, 3)], &[1], &[1, 2, 3]);
        assert_eq!(count_extensions(&g, &Embedding::new([(1, 1)]), &p).unwrap(), 6);
    }

    #[test]
    fn new_vertices_avoid_q() {
        let g = Graph::build(3, &[(1, 2), (1, 3)], VertexSet::new([3])).unwrap();
        let p = pair(2, &[(1, 2)], &[1], &[1, 2]);
        assert_eq!(count_extensions(&g, &Embedding::new([(1, 1)]), &p).unwrap(), 1);
    }

    #[test]
    fn embedding_errors() {
        let g = Graph::complete(4);
        let p = pair(3, &[(1, 2), (2, 3)], &[1, 3], &[1, 2, 3]);
        assert_eq!(
            count_extensions(&g, &Embedding::new([(1, 1)]), &p),
            Err(ExtensionError::NotCovering(3))
        );
        assert_eq!(
            count_extensions(&g, &Embedding::new([(1, 2), (3, 2)]), &p),
            Err(ExtensionError::NotInjective(2))
        );
        assert_eq!(
            count_extensions(&g, &Embedding::new([(1, 1), (3, 2), (2, 4)]), &p),
            Err(ExtensionError::OutsideBase(2))
        );
    }

    #[test]
    fn q_alignment_enforced() {
        let t = Graph::build(2, &[(1, 2)], VertexSet::new([1])).unwrap();
        let p = PairSpec::new(t, VertexSet::empty(), VertexSet::new([2])).unwrap();
        let g = Graph::build(3, &[(1, 2), (2, 3)], VertexSet::new([2])).unwrap();
        assert_eq!(
            count_extensions(&g, &Embedding::new([(1, 1)]), &p),
            Err(ExtensionError::QMisaligned { template: 1, image: 1 })
        );
        assert_eq!(count_extensions(&g, &Embedding::new([(1, 2)]), &p).unwrap(), 2);
    }

    #[test]
    fn for_each_yields_full_maps() {
        let g = Graph::complete(3);
        let p = pair(2, &[(1, 2)], &[1], &[1, 2]);
        let mut seen = Vec::new();
        for_each_extension(&g, &Embedding::new([(1, 1)]), &p, |e| {
            seen.push(e.get(2).unwrap());
            ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(seen, vec![2, 3]);
    }
}
