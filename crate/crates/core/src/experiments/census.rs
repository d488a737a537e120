use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{check_increasing, ExperimentError, RecordHeader};
use crate::alpha::AlphaParam;
use crate::extension::{check_generic_ext, extract_rigid_chain, rigid_kernel, GenericCheckOptions, RoundCap};
use crate::sampler::{sample_graph, trial_seed, SampleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CensusOptions {
    /// Exponent of the size threshold `n^eps`; `None` means `zeta / 4`.
    pub eps: Option<f64>,
    /// Generic-extension samples per small-kernel graph; 0 skips the check.
    pub e2_budget: u64,
    pub round_cap: RoundCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusPoint {
    pub n: usize,
    pub trials: u64,
    /// Kernel size -> number of samples.
    pub histogram: BTreeMap<usize, u64>,
    pub threshold: f64,
    /// Samples whose kernel is larger than the threshold.
    pub e1_hits: u64,
    pub nonempty: u64,
    pub truncated: u64,
    pub mean_chain_len: f64,
    pub max_chain_len: usize,
    /// Small-kernel samples on which the generic-extension check ran.
    pub e2_checked: u64,
    pub e2_failures: u64,
}

impl CensusPoint {
    pub fn e1_frequency(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.e1_hits as f64 / self.trials as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCensus {
    pub alpha: AlphaParam,
    pub ell_star: usize,
    pub eps: f64,
    pub seed: u64,
    pub points: Vec<CensusPoint>,
}

impl KernelCensus {
    pub fn records(&self) -> Vec<Value> {
        let header = RecordHeader {
            experiment: "census",
            alpha: &self.alpha,
            ell_star: Some(self.ell_star),
            seed: self.seed,
        };
        self.points
            .iter()
            .map(|p| {
                let histogram: BTreeMap<String, u64> = p.histogram.iter().map(|(k, v)| (k.to_string(), *v)).collect();
                header.record(
                    Some(p.n),
                    p.trials,
                    json!({
                        "histogram": histogram,
                        "eps": self.eps,
                        "threshold": p.threshold,
                        "e1_hits": p.e1_hits,
                        "e1_frequency": p.e1_frequency(),
                        "nonempty": p.nonempty,
                        "truncated": p.truncated,
                        "mean_chain_len": p.mean_chain_len,
                        "max_chain_len": p.max_chain_len,
                        "e2_checked": p.e2_checked,
                        "e2_failures": p.e2_failures,
                    }),
                )
            })
            .collect()
    }
}

struct TrialOutcome {
    size: usize,
    truncated: bool,
    chain_len: usize,
    e2: Option<bool>,
}

/// Kernel sizes of `trials` samples at each `n`, with the frequency of
/// kernels above `n^eps` and, when `e2_budget > 0`, the failure rate of the
/// generic-extension check over the kernel among the remaining samples.
pub fn kernel_census(
    a: &AlphaParam,
    ell_star: usize,
    ns: &[usize],
    trials: u64,
    seed: u64,
    opts: CensusOptions,
) -> Result<KernelCensus, ExperimentError> {
    check_increasing(ns)?;
    let eps = opts.eps.unwrap_or(a.zeta_f64() / 4.0);
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let threshold = (n as f64).powf(eps);
        let outcomes: Vec<TrialOutcome> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<TrialOutcome, ExperimentError> {
                let g = sample_graph(&SampleConfig::new(n, a.clone(), seed, t))?;
                let kr = rigid_kernel(&g, ell_star, a, opts.round_cap)?;
                let chain = extract_rigid_chain(&g, &kr, ell_star, a)?;
                let size = kr.kernel.len();
                let e2 = if opts.e2_budget > 0 && (size as f64) <= threshold {
                    let over = g.with_q(kr.kernel.clone())?;
                    let check = GenericCheckOptions::new(opts.e2_budget, trial_seed(seed, n as u64, t));
                    Some(!check_generic_ext(&over, ell_star, a, check)?.holds)
                } else {
                    None
                };
                Ok(TrialOutcome {
                    size,
                    truncated: kr.truncated,
                    chain_len: chain.entries.len(),
                    e2,
                })
            })
            .collect::<Result<_, _>>()?;
        let mut histogram = BTreeMap::new();
        for o in &outcomes {
            *histogram.entry(o.size).or_insert(0) += 1;
        }
        let count = |pred: &dyn Fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| pred(o)).count() as u64;
        points.push(CensusPoint {
            n,
            trials,
            histogram,
            threshold,
            e1_hits: count(&|o| o.size as f64 > threshold),
            nonempty: count(&|o| o.size > 0),
            truncated: count(&|o| o.truncated),
            mean_chain_len: if trials == 0 {
                0.0
            } else {
                outcomes.iter().map(|o| o.chain_len as f64).sum::<f64>() / trials as f64
            },
            max_chain_len: outcomes.iter().map(|o| o.chain_len).max().unwrap_or(0),
            e2_checked: count(&|o| o.e2.is_some()),
            e2_failures: count(&|o| o.e2 == Some(true)),
        });
    }
    Ok(KernelCensus {
        alpha: a.clone(),
        ell_star,
        eps,
        seed,
        points,
    })
}
