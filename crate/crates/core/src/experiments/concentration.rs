use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{check_increasing, ExperimentError, RecordHeader};
use crate::alpha::{classify_pair, AlphaParam, ExtType, PairSpec};
use crate::extension::{count_extensions, Embedding};
use crate::graph::Vertex;
use crate::sampler::{sample_conditioned, stream, QSpec, SampleConfig};

const EMBED_STREAM: u64 = 0xc0c;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcPoint {
    pub n: usize,
    pub embeddings: u64,
    /// Counts at or below `n^(v - alpha e - eps)`.
    pub below: u64,
    /// Counts at or above `n^(v - alpha e + eps)`.
    pub above: u64,
    pub mean_count: f64,
}

impl ConcPoint {
    pub fn violations(&self) -> u64 {
        self.below + self.above
    }

    pub fn fraction(&self) -> f64 {
        if self.embeddings == 0 {
            0.0
        } else {
            self.violations() as f64 / self.embeddings as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcReport {
    pub pair: String,
    pub ext_type: ExtType,
    pub band_eps: f64,
    pub trials: u64,
    pub embeddings_per_trial: u64,
    pub points: Vec<ConcPoint>,
    /// No embeddings were drawn.
    pub empty: bool,
}

impl ConcReport {
    pub fn records(&self, alpha: &AlphaParam, seed: u64) -> Vec<Value> {
        let header = RecordHeader {
            experiment: "concentration",
            alpha,
            ell_star: None,
            seed,
        };
        self.points
            .iter()
            .map(|p| {
                header.record(
                    Some(p.n),
                    self.trials,
                    json!({
                        "pair": self.pair,
                        "v": self.ext_type.v,
                        "e": self.ext_type.e,
                        "band_eps": self.band_eps,
                        "embeddings": p.embeddings,
                        "below": p.below,
                        "above": p.above,
                        "fraction_outside": p.fraction(),
                        "mean_count": p.mean_count,
                        "empty": self.empty,
                    }),
                )
            })
            .collect()
    }
}

/// For each `n`, samples `trials` graphs (with the template's `Q` and its
/// edges fixed), draws `embeddings_per_trial` uniform injective maps of
/// `H0 \ Q` into `[n] \ Q` per graph and tallies extension counts outside
/// the open band `(n^(v - alpha e - eps), n^(v - alpha e + eps))`.
pub fn concentration_report(
    pair: &PairSpec,
    a: &AlphaParam,
    ns: &[usize],
    trials: u64,
    embeddings_per_trial: u64,
    band_eps: f64,
    seed: u64,
) -> Result<ConcReport, ExperimentError> {
    check_increasing(ns)?;
    let class = classify_pair(pair, a)?;
    if !class.safe {
        return Err(ExperimentError::NotSafe);
    }
    let t = class.ext_type;
    let value = t.v as f64 - a.as_f64() * t.e as f64;
    let q = QSpec::from_graph(pair.ambient());
    let movable: Vec<Vertex> = pair.h0().difference(&q.set).iter().collect();
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let lo = (n as f64).powf(value - band_eps);
        let hi = (n as f64).powf(value + band_eps);
        let outside: Vec<Vertex> = (1..=n as Vertex).filter(|&v| !q.set.contains(v)).collect();
        if outside.len() < movable.len() {
            return Err(crate::graph::GraphError::VertexOutOfRange {
                vertex: pair.ambient().n() as Vertex,
                n,
            }
            .into());
        }
        let per_trial: Vec<(u64, u64, f64)> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<(u64, u64, f64), ExperimentError> {
                let cfg = SampleConfig::new(n, a.clone(), seed, trial).with_q(q.clone());
                let g = sample_conditioned(&cfg)?;
                let mut rng = stream(seed, n as u64, trial, EMBED_STREAM);
                let (mut below, mut above, mut total) = (0, 0, 0.0);
                for _ in 0..embeddings_per_trial {
                    let picks = sample(&mut rng, outside.len(), movable.len());
                    let f = Embedding::new(
                        q.set
                            .iter()
                            .map(|v| (v, v))
                            .chain(movable.iter().zip(picks.iter()).map(|(&v, i)| (v, outside[i]))),
                    );
                    let count = count_extensions(&g, &f, pair)? as f64;
                    total += count;
                    if count <= lo {
                        below += 1;
                    } else if count >= hi {
                        above += 1;
                    }
                }
                Ok((below, above, total))
            })
            .collect::<Result<_, _>>()?;
        let embeddings = trials * embeddings_per_trial;
        let total: f64 = per_trial.iter().map(|r| r.2).sum();
        points.push(ConcPoint {
            n,
            embeddings,
            below: per_trial.iter().map(|r| r.0).sum(),
            above: per_trial.iter().map(|r| r.1).sum(),
            mean_count: if embeddings == 0 {
                0.0
            } else {
                total / embeddings as f64
            },
        });
    }
    Ok(ConcReport {
        pair: format!("{} -> {}", pair.h0(), pair.h1()),
        ext_type: t,
        band_eps,
        trials,
        embeddings_per_trial,
        points,
        empty: trials == 0 || embeddings_per_trial == 0,
    })
}
