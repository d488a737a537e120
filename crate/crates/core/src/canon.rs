//! Canonical forms of small vertex-coloured graphs by individualisation and
//! refinement. The form is the lexicographically least relabelled
//! `(colours, edges)` over all leaves of the search tree, so two inputs get
//! equal forms exactly when they are colour-preserving isomorphic.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub colors: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
}

struct Search<'a> {
    adj: &'a [Vec<bool>],
    colors: &'a [u32],
    leaves: usize,
    leaf_cap: usize,
    best: Option<CanonicalForm>,
}

/// Computes the canonical form of the graph on `0..colors.len()`.
/// Returns `None` if more than `leaf_cap` search leaves would be visited.
pub fn canonical_form(colors: &[u32], edges: &[(usize, usize)], leaf_cap: usize) -> Option<CanonicalForm> {
    let n = colors.len();
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        if a != b {
            adj[a][b] = true;
            adj[b][a] = true;
        }
    }
    let mut by_color: Vec<u32> = colors.to_vec();
    by_color.sort_unstable();
    by_color.dedup();
    let cells: Vec<Vec<usize>> = by_color
        .iter()
        .map(|&c| (0..n).filter(|&v| colors[v] == c).collect())
        .collect();
    let mut s = Search {
        adj: &adj,
        colors,
        leaves: 0,
        leaf_cap,
        best: None,
    };
    if s.descend(cells) {
        Some(s.best.unwrap_or(CanonicalForm {
            colors: Vec::new(),
            edges: Vec::new(),
        }))
    } else {
        None
    }
}

impl Search<'_> {
    fn refine(&self, mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        loop {
            let mut changed = false;
            let mut next = Vec::with_capacity(cells.len());
            for ci in 0..cells.len() {
                let cell = &cells[ci];
                if cell.len() == 1 {
                    next.push(cell.clone());
                    continue;
                }
                let mut keyed: Vec<(Vec<usize>, usize)> = cell
                    .iter()
                    .map(|&v| {
                        let sig = cells
                            .iter()
                            .map(|c| c.iter().filter(|&&u| self.adj[v][u]).count())
                            .collect();
                        (sig, v)
                    })
                    .collect();
                keyed.sort();
                let mut start = 0;
                for i in 1..=keyed.len() {
                    if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                        next.push(keyed[start..i].iter().map(|(_, v)| *v).collect());
                        changed |= start > 0 || i < keyed.len();
                        start = i;
                    }
                }
            }
            cells = next;
            if !changed {
                return cells;
            }
        }
    }

    /// Returns false when the leaf budget is exhausted.
    fn descend(&mut self, cells: Vec<Vec<usize>>) -> bool {
        let cells = self.refine(cells);
        let Some(target) = cells.iter().position(|c| c.len() > 1) else {
            self.leaf(&cells);
            self.leaves += 1;
            return self.leaves <= self.leaf_cap;
        };
        for &v in &cells[target].clone() {
            let mut next = Vec::with_capacity(cells.len() + 1);
            next.extend_from_slice(&cells[..target]);
            next.push(vec![v]);
            next.push(cells[target].iter().copied().filter(|&u| u != v).collect());
            next.extend_from_slice(&cells[target + 1..]);
            if !self.descend(next) {
                return false;
            }
        }
        true
    }

    fn leaf(&mut self, cells: &[Vec<usize>]) {
        let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
        let mut pos = vec![0u32; order.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i as u32;
        }
        let colors = order.iter().map(|&v| self.colors[v]).collect();
        let mut edges = Vec::new();
        for u in 0..order.len() {
            for v in u + 1..order.len() {
                if self.adj[u][v] {
                    let (x, y) = (pos[u], pos[v]);
                    edges.push((x.min(y), x.max(y)));
                }
            }
        }
        edges.sort_unstable();
        let form = CanonicalForm { colors, edges };
        if self.best.as_ref().is_none_or(|b| form < *b) {
            self.best = Some(form);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: usize = 100_000;

    fn form(colors: &[u32], edges: &[(usize, usize)]) -> CanonicalForm {
        canonical_form(colors, edges, CAP).unwrap()
    }

    #[test]
    fn relabelled_paths_agree() {
        let a = form(&[0; 4], &[(0, 1), (1, 2), (2, 3)]);
        let b = form(&[0; 4], &[(2, 0), (0, 3), (3, 1)]);
        assert_eq!(a, b);
    }

    #[test]
    fn path_and_star_differ() {
        let path = form(&[0; 4], &[(0, 1), (1, 2), (2, 3)]);
        let star = form(&[0; 4], &[(0, 1), (0, 2), (0, 3)]);
        assert_ne!(path, star);
    }

    #[test]
    fn colours_matter() {
        let a = form(&[0, 1], &[(0, 1)]);
        let b = form(&[1, 1], &[(0, 1)]);
        assert_ne!(a, b);
        // which endpoint carries the colour does not
        assert_eq!(form(&[1, 0], &[(0, 1)]), a);
    }

    #[test]
    fn regular_graphs_need_individualisation() {
        // C6 vs two triangles: both 2-regular
        let c6 = form(&[0; 6], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        let tt = form(&[0; 6], &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        assert_ne!(c6, tt);
        let c6b = form(&[0; 6], &[(0, 2), (2, 4), (4, 1), (1, 3), (3, 5), (5, 0)]);
        assert_eq!(c6, c6b);
    }

    #[test]
    fn leaf_cap_is_honoured() {
        // K6 has 720 automorphisms, every leaf is visited
        let edges: Vec<_> = (0..6).flat_map(|a| (a + 1..6).map(move |b| (a, b))).collect();
        assert!(canonical_form(&[0; 6], &edges, 10).is_none());
        assert!(canonical_form(&[0; 6], &edges, 1000).is_some());
    }

    #[test]
    fn empty_graph() {
        assert_eq!(form(&[], &[]).colors.len(), 0);
    }
}
