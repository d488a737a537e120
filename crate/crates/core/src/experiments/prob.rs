use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{check_increasing, rule_of_three, wilson_interval, ExperimentError, RecordHeader, Z95};
use crate::alpha::AlphaParam;
use crate::logic::{Compiled, Formula};
use crate::sampler::{sample_graph, SampleConfig};

/// Default cap on the estimated work `n^depth` of one evaluation.
pub const DEFAULT_EVAL_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbPoint {
    pub n: usize,
    pub hits: u64,
    pub trials: u64,
}

impl ProbPoint {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.hits as f64 / self.trials as f64
        }
    }

    pub fn wilson(&self) -> (f64, f64) {
        wilson_interval(self.hits, self.trials, Z95)
    }

    /// One-sided 95% upper bound when no trial hit.
    pub fn upper_bound_if_censored(&self) -> Option<f64> {
        (self.hits == 0).then(|| rule_of_three(self.trials))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbCurve {
    pub points: Vec<ProbPoint>,
    pub alpha: AlphaParam,
    pub formula_text: String,
    pub master_seed: u64,
}

impl ProbCurve {
    pub fn records(&self) -> Vec<Value> {
        let header = RecordHeader {
            experiment: "estimate",
            alpha: &self.alpha,
            ell_star: None,
            seed: self.master_seed,
        };
        self.points
            .iter()
            .map(|p| {
                let (lo, hi) = p.wilson();
                header.record(
                    Some(p.n),
                    p.trials,
                    json!({
                        "formula": self.formula_text,
                        "hits": p.hits,
                        "rate": p.rate(),
                        "wilson_lo": lo,
                        "wilson_hi": hi,
                        "upper95_if_zero": p.upper_bound_if_censored(),
                    }),
                )
            })
            .collect()
    }
}

/// Estimates `Prob(G ⊨ psi)` at each `n` from `trials` independent samples.
/// `budget` caps the estimated work of a single evaluation at the largest `n`.
pub fn estimate_prob(
    psi: &Formula,
    a: &AlphaParam,
    ns: &[usize],
    trials: u64,
    seed: u64,
    budget: f64,
) -> Result<ProbCurve, ExperimentError> {
    let free = psi.free_vars();
    if !free.is_empty() {
        return Err(ExperimentError::NotSentence(free));
    }
    check_increasing(ns)?;
    let compiled = Compiled::new(psi);
    if let Some(&n) = ns.last() {
        compiled.check_budget(n, budget)?;
    }
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let outcomes: Vec<bool> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<bool, ExperimentError> {
                let g = sample_graph(&SampleConfig::new(n, a.clone(), seed, t))?;
                Ok(compiled.eval_positional(&g, &[])?)
            })
            .collect::<Result<_, _>>()?;
        points.push(ProbPoint {
            n,
            hits: outcomes.iter().filter(|&&b| b).count() as u64,
            trials,
        });
    }
    Ok(ProbCurve {
        points,
        alpha: a.clone(),
        formula_text: psi.to_string(),
        master_seed: seed,
    })
}
