use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{binomial_sigma, ExperimentError, RecordHeader};
use crate::alpha::{classify_pair, AlphaParam, PairSpec};
use crate::extension::{has_extension, Embedding};
use crate::graph::{Graph, Vertex, VertexSet};
use crate::sampler::{edge_probability, sample_conditioned, QSpec, SampleConfig, SampleError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidRate {
    pub n: usize,
    pub trials: u64,
    pub hits: u64,
    /// `E[number of extension images]`: injective maps times `p^e`, divided
    /// by the automorphisms of `H1` fixing the base pointwise.
    pub first_moment_bound: f64,
}

impl RigidRate {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.hits as f64 / self.trials as f64
        }
    }

    pub fn sigma(&self) -> f64 {
        binomial_sigma(self.first_moment_bound.min(1.0), self.trials)
    }

    pub fn record(&self, alpha: &AlphaParam, seed: u64) -> Value {
        let header = RecordHeader {
            experiment: "rigid-rate",
            alpha,
            ell_star: None,
            seed,
        };
        header.record(
            Some(self.n),
            self.trials,
            json!({
                "hits": self.hits,
                "rate": self.rate(),
                "first_moment_bound": self.first_moment_bound,
            }),
        )
    }
}

/// Permutations of the new vertices of `p` that, extended by the identity on
/// the base, preserve the template's edges.
pub fn automorphisms_fixing_base(p: &PairSpec) -> u64 {
    let t = p.ambient();
    let new: Vec<Vertex> = p.new_vertices().iter().collect();
    let base = p.base();
    new.iter()
        .copied()
        .permutations(new.len())
        .filter(|perm| {
            let img = |v: Vertex| new.iter().position(|&x| x == v).map_or(v, |i| perm[i]);
            new.iter().all(|&x| {
                base.iter().all(|y| t.is_edge(x, y) == t.is_edge(img(x), y))
                    && new.iter().all(|&y| t.is_edge(x, y) == t.is_edge(img(x), img(y)))
            })
        })
        .count() as u64
}

/// The pair with `H0` moved onto `1..=|H0|` and `Q` set to `H0 ∪ Q`; the
/// base, and so the classification, is unchanged.
fn pinned(pair: &PairSpec) -> Result<(PairSpec, QSpec), ExperimentError> {
    let t = pair.ambient();
    let base = pair.base();
    let new = pair.new_vertices();
    let order: Vec<Vertex> = base.iter().chain(new.iter()).collect();
    let label = |v: Vertex| order.iter().position(|&x| x == v).expect("vertex of H1 ∪ Q") as Vertex + 1;
    let edges: Vec<(Vertex, Vertex)> = t
        .edges()
        .filter(|&(x, y)| order.contains(&x) && order.contains(&y))
        .map(|(x, y)| (label(x), label(y)))
        .collect();
    let q = VertexSet::range(1, base.len() as Vertex);
    let g = Graph::build(order.len(), &edges, q.clone())?;
    let h0 = q.clone();
    let h1 = VertexSet::range(1, order.len() as Vertex);
    let relabelled = PairSpec::new(g, h0, h1)?;
    let q_edges = edges
        .into_iter()
        .filter(|&(x, y)| q.contains(x) && q.contains(y))
        .collect();
    Ok((relabelled, QSpec { set: q, edges: q_edges }))
}

/// [`rigid_hit_rate`] with a caller-supplied sampler; it receives the
/// configuration (with the pinned `Q`) of each trial.
pub fn rigid_hit_rate_with<F>(
    pair: &PairSpec,
    a: &AlphaParam,
    n: usize,
    trials: u64,
    seed: u64,
    sampler: F,
) -> Result<RigidRate, ExperimentError>
where
    F: Fn(&SampleConfig) -> Result<Graph, SampleError> + Sync,
{
    let class = classify_pair(pair, a)?;
    if class.ext_type.v == 0 {
        return Err(ExperimentError::TrivialPair);
    }
    if !class.rigid {
        return Err(ExperimentError::NotRigid);
    }
    let (p, q) = pinned(pair)?;
    let f = Embedding::identity(p.base().iter());
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<bool, ExperimentError> {
            let g = sampler(&SampleConfig::new(n, a.clone(), seed, t).with_q(q.clone()))?;
            Ok(has_extension(&g, &f, &p)?)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|&b| b)
        .count() as u64;
    let k = class.ext_type.v as usize;
    let free = n.saturating_sub(p.base().len());
    let maps: f64 = (0..k).map(|i| free.saturating_sub(i) as f64).product();
    let bound = maps * edge_probability(n, a).powi(class.ext_type.e as i32) / automorphisms_fixing_base(&p) as f64;
    Ok(RigidRate {
        n,
        trials,
        hits,
        first_moment_bound: bound,
    })
}

/// Fraction of samples in which a rigid pair extends: `H0 ∪ Q` is pinned to
/// the vertices `1..=|H0 ∪ Q|` with its template edges, everything else is
/// random.
pub fn rigid_hit_rate(
    pair: &PairSpec,
    a: &AlphaParam,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<RigidRate, ExperimentError> {
    rigid_hit_rate_with(pair, a, n, trials, seed, sample_conditioned)
}
