//! The two genericity events on a graph with distinguished set `Q`:
//!
//! * no-rigid-from-base: no `T` with `|T| <= ell*` makes `(Q, Q ∪ T)` rigid;
//! * generic-extension: a safe extension of any small `H0 ⊇ Q` can be
//!   realised by some `g` whose closure adds nothing beyond
//!   `g(H1) ∪ cl(H0)`.
//!
//! The first is decided exhaustively. The second is checked on a seeded
//! sample of (template, base) obligations.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closure::{check_ell, closure, scan_rigid, RoundCap};
use super::count::{Backtracker, Plan};
use super::ExtensionError;
use crate::alpha::{AlphaParam, ExtType, LocalExt};
use crate::canon::canonical_form;
use crate::graph::{Graph, Vertex, VertexSet};
use crate::sampler::stream;

const EVENT_STREAM: u64 = 0x0e1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    NoRigidFromBase,
    GenericExtension,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub h0: VertexSet,
    /// `H1` in ambient vertices when a realisation was found.
    pub h1: Option<VertexSet>,
    /// Template vertex -> ambient vertex.
    pub map: Vec<(Vertex, Vertex)>,
    pub template: Option<SafeTemplate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventReport {
    pub event: Event,
    pub holds: bool,
    pub witnesses_checked: u64,
    /// Nothing was checked, so `holds` is vacuous.
    pub vacuous: bool,
    pub counterexample: Option<Counterexample>,
}

/// Exhaustive check that no rigid `(Q, Q ∪ T)`, `|T| <= ell*`, occurs in `G`.
/// Rigidity survives adding edges, so this is the same as asking whether
/// some rigid template pair over `Q` embeds fixing `Q`.
pub fn check_no_rigid_from_base(g: &Graph, ell_star: usize, a: &AlphaParam) -> Result<EventReport, ExtensionError> {
    check_ell(ell_star, a)?;
    let scan = scan_rigid(g, &VertexSet::empty(), None, ell_star, a);
    let counterexample = scan.first.map(|t| {
        let h1 = t.union(g.q_set());
        Counterexample {
            h0: g.q_set().clone(),
            map: h1.iter().map(|v| (v, v)).collect(),
            h1: Some(h1),
            template: None,
        }
    });
    Ok(EventReport {
        event: Event::NoRigidFromBase,
        holds: counterexample.is_none(),
        witnesses_checked: scan.examined,
        vacuous: false,
        counterexample,
    })
}

/// A safe extension template: roots `0..roots` stand for vertices of `H0`,
/// new vertices are `roots..roots + new`. Edges join a new vertex to a root
/// or to another new vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SafeTemplate {
    pub roots: usize,
    pub new: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SafeTemplate {
    fn local(&self) -> LocalExt {
        let mut base_deg = vec![0u32; self.new];
        let mut inner = vec![0u32; self.new];
        for &(a, b) in &self.edges {
            match (a < self.roots, b < self.roots) {
                (true, false) => base_deg[b - self.roots] += 1,
                (false, true) => base_deg[a - self.roots] += 1,
                (false, false) => {
                    let (i, j) = (a - self.roots, b - self.roots);
                    inner[i] |= 1 << j;
                    inner[j] |= 1 << i;
                }
                (true, true) => {}
            }
        }
        LocalExt::new(base_deg, inner)
    }

    pub fn ext_type(&self) -> ExtType {
        self.local().ext_type()
    }
}

/// All safe templates with `roots + new <= ell*`, `new >= 1` and every root
/// used by some edge, one per isomorphism type (roots and new vertices are
/// permuted separately).
pub fn safe_catalog(ell_star: usize, a: &AlphaParam) -> Vec<SafeTemplate> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for new in 1..=ell_star {
        for roots in 0..=ell_star - new {
            let mut slots = Vec::new();
            for x in roots..roots + new {
                for r in 0..roots {
                    slots.push((r, x));
                }
                for y in x + 1..roots + new {
                    slots.push((x, y));
                }
            }
            for mask in 0u64..(1u64 << slots.len()) {
                let edges: Vec<(usize, usize)> = slots
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                if (0..roots).any(|r| !edges.iter().any(|&(x, _)| x == r)) {
                    continue;
                }
                let t = SafeTemplate { roots, new, edges };
                if !t.local().classify(a).safe {
                    continue;
                }
                let colors: Vec<u32> = (0..roots + new).map(|i| u32::from(i >= roots)).collect();
                let form = canonical_form(&colors, &t.edges, usize::MAX).expect("uncapped");
                if seen.insert(form.clone()) {
                    out.push(SafeTemplate {
                        roots,
                        new,
                        edges: form.edges.iter().map(|&(x, y)| (x as usize, y as usize)).collect(),
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Obligation {
    Met,
    /// No extension realises the template at all.
    NoExtension,
    /// Extensions exist but each tried one enlarges the closure.
    ClosureGrows {
        first_image: Vec<Vertex>,
    },
}

/// Checks one obligation: roots mapped to `root_images`, `H0 = Q ∪ roots`.
/// Tries at most `max_candidates` extensions.
pub fn generic_obligation(
    g: &Graph,
    ell_star: usize,
    a: &AlphaParam,
    template: &SafeTemplate,
    root_images: &[Vertex],
    max_candidates: usize,
) -> Result<Obligation, ExtensionError> {
    assert_eq!(template.roots, root_images.len());
    if template.new == 0 {
        return Ok(Obligation::Met);
    }
    let h0 = VertexSet::new(root_images.iter().copied()).union(g.q_set());
    let cl0 = closure(g, &h0, ell_star, a, RoundCap::default())?.kernel;
    let r = template.roots;
    let mut fixed = vec![Vec::new(); template.new];
    let mut inner = vec![Vec::new(); template.new];
    for &(x, y) in &template.edges {
        match (x < r, y < r) {
            (true, false) => fixed[y - r].push(root_images[x]),
            (false, true) => fixed[x - r].push(root_images[y]),
            (false, false) => {
                inner[x - r].push(y - r);
                inner[y - r].push(x - r);
            }
            (true, true) => {}
        }
    }
    let plan = Plan::new(fixed, inner, h0.iter().collect());
    let mut tried = 0usize;
    let mut first_image = None;
    let mut outcome: Result<bool, ExtensionError> = Ok(false);
    let _ = Backtracker::new(g, &plan).visit(&mut |images| {
        tried += 1;
        let h1 = h0.union(&VertexSet::new(images.iter().copied()));
        match closure(g, &h1, ell_star, a, RoundCap::default()) {
            Ok(res) if res.kernel == h1.union(&cl0) => {
                outcome = Ok(true);
                return ControlFlow::Break(());
            }
            Ok(_) => {}
            Err(e) => {
                outcome = Err(e);
                return ControlFlow::Break(());
            }
        }
        first_image.get_or_insert_with(|| images.to_vec());
        if tried >= max_candidates {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(match (outcome?, first_image) {
        (true, _) => Obligation::Met,
        (false, None) => Obligation::NoExtension,
        (false, Some(first_image)) => Obligation::ClosureGrows { first_image },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenericCheckOptions {
    pub budget: u64,
    pub seed: u64,
    /// Extensions tried per obligation before giving up.
    pub max_candidates: usize,
}

impl GenericCheckOptions {
    pub fn new(budget: u64, seed: u64) -> Self {
        GenericCheckOptions {
            budget,
            seed,
            max_candidates: 64,
        }
    }
}

/// Samples `budget` obligations (uniform template from [`safe_catalog`],
/// uniform distinct roots) and checks each with [`generic_obligation`].
pub fn check_generic_ext(
    g: &Graph,
    ell_star: usize,
    a: &AlphaParam,
    opts: GenericCheckOptions,
) -> Result<EventReport, ExtensionError> {
    let catalog = safe_catalog(ell_star, a);
    let n = g.n();
    let outcomes: Vec<Result<Option<Counterexample>, ExtensionError>> = (0..opts.budget)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(opts.seed, n as u64, s, EVENT_STREAM);
            let t = &catalog[rng.random_range(0..catalog.len())];
            if t.roots > n {
                return Ok(None);
            }
            let roots: Vec<Vertex> = sample(&mut rng, n, t.roots)
                .into_iter()
                .map(|i| i as Vertex + 1)
                .collect();
            let res = generic_obligation(g, ell_star, a, t, &roots, opts.max_candidates)?;
            let h0 = VertexSet::new(roots.iter().copied()).union(g.q_set());
            let root_map = roots.iter().enumerate().map(|(i, &v)| (i as Vertex, v));
            Ok(match res {
                Obligation::Met => None,
                Obligation::NoExtension => Some(Counterexample {
                    h0,
                    h1: None,
                    map: root_map.collect(),
                    template: Some(t.clone()),
                }),
                Obligation::ClosureGrows { first_image } => Some(Counterexample {
                    h1: Some(h0.union(&VertexSet::new(first_image.iter().copied()))),
                    h0,
                    map: root_map
                        .chain(
                            first_image
                                .iter()
                                .enumerate()
                                .map(|(i, &v)| ((t.roots + i) as Vertex, v)),
                        )
                        .collect(),
                    template: Some(t.clone()),
                }),
            })
        })
        .collect();
    let mut counterexample = None;
    for o in outcomes {
        if let Some(c) = o? {
            counterexample.get_or_insert(c);
        }
    }
    Ok(EventReport {
        event: Event::GenericExtension,
        holds: counterexample.is_none(),
        witnesses_checked: opts.budget,
        vacuous: opts.budget == 0,
        counterexample,
    })
}
