//! Monte Carlo experiments on `G(n, n^(-alpha))`.
//!
//! Every experiment is a pure function of its inputs: trial `t` at size `n`
//! draws its graph from the stream of `(seed, n, t)`, trials run in parallel
//! and results are reduced in trial order. Reports turn into JSON-lines
//! records through their `records` methods.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::alpha::{AlphaError, AlphaParam};
use crate::extension::ExtensionError;
use crate::graph::GraphError;
use crate::logic::EvalError;
use crate::sampler::SampleError;

mod agree;
mod census;
mod concentration;
mod e1;
mod fit;
mod prob;
mod rigid_rate;

pub use agree::{agreement_experiment, AgreeGroup, AgreementReport};
pub use census::{kernel_census, CensusOptions, CensusPoint, KernelCensus};
pub use concentration::{concentration_report, ConcPoint, ConcReport};
pub use e1::{e1_bound, E1Bound};
pub use fit::{fit_decay, fit_samples, DecayFit, DecayModel, DecaySample, PolynomialFit, StretchedFit};
pub use prob::{estimate_prob, ProbCurve, ProbPoint, DEFAULT_EVAL_BUDGET};
pub use rigid_rate::{automorphisms_fixing_base, rigid_hit_rate, rigid_hit_rate_with, RigidRate};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("formula has free variables {0:?}; a sentence is required")]
    NotSentence(Vec<String>),
    #[error("sizes must be strictly increasing")]
    SizesNotIncreasing,
    #[error("the pair is not safe")]
    NotSafe,
    #[error("the pair is not rigid")]
    NotRigid,
    #[error("the pair has no new vertices")]
    TrivialPair,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Alpha(#[from] AlphaError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Normal quantile used for two-sided 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `hits` successes in `trials`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let t = trials as f64;
    let p = hits as f64 / t;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * t)) / (1.0 + z2 / t);
    let half = z * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / (1.0 + z2 / t);
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// One-sided 95% upper bound `3 / trials` on a rate with no hits.
pub fn rule_of_three(trials: u64) -> f64 {
    if trials == 0 {
        1.0
    } else {
        (3.0 / trials as f64).min(1.0)
    }
}

/// Standard deviation of the mean of `trials` Bernoulli(`p`) draws.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / trials as f64).sqrt()
}

fn check_increasing(ns: &[usize]) -> Result<(), ExperimentError> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::SizesNotIncreasing);
    }
    Ok(())
}

/// Shared fields of one JSON-lines record.
#[derive(Debug, Clone)]
pub struct RecordHeader<'a> {
    pub experiment: &'a str,
    pub alpha: &'a AlphaParam,
    pub ell_star: Option<usize>,
    pub seed: u64,
}

impl RecordHeader<'_> {
    /// `{experiment, n, alpha_num, alpha_den, ell_star, seed, trials}` merged
    /// with `fields`.
    pub fn record(&self, n: Option<usize>, trials: u64, fields: Value) -> Value {
        let mut m = Map::new();
        m.insert("experiment".into(), json!(self.experiment));
        m.insert("n".into(), json!(n));
        m.insert("alpha_num".into(), json!(self.alpha.num()));
        m.insert("alpha_den".into(), json!(self.alpha.den()));
        m.insert("ell_star".into(), json!(self.ell_star));
        m.insert("seed".into(), json!(self.seed));
        m.insert("trials".into(), json!(trials));
        if let Value::Object(extra) = fields {
            m.extend(extra);
        }
        Value::Object(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_rate() {
        let (lo, hi) = wilson_interval(30, 100, Z95);
        assert!(lo < 0.3 && 0.3 < hi);
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(100, 100, Z95);
        assert!(lo > 0.95 && hi == 1.0);
    }

    #[test]
    fn increasing_sizes() {
        assert!(check_increasing(&[5, 10, 20]).is_ok());
        assert!(check_increasing(&[5, 5]).is_err());
        assert!(check_increasing(&[]).is_ok());
    }
}
