use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ExperimentError, RecordHeader};
use crate::alpha::AlphaParam;
use crate::canon::{canonical_form, CanonicalForm};
use crate::extension::{rigid_kernel, RoundCap};
use crate::graph::{Graph, VertexSet};
use crate::logic::{Compiled, Formula};
use crate::sampler::{sample_graph, SampleConfig};

/// Search leaves allowed per canonical form before falling back to an
/// invariant key.
const LEAF_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum GroupKey {
    Exact(CanonicalForm),
    /// Vertex count, Q count and sorted degree sequence: coarser than
    /// isomorphism, used only when the canonical search is cut off.
    Approximate(usize, usize, Vec<usize>),
}

fn key_of(g: &Graph, support: &VertexSet) -> Result<GroupKey, ExperimentError> {
    let (sub, _) = g.induced_subgraph(support)?;
    let colors: Vec<u32> = sub.vertices().map(|v| u32::from(sub.in_q(v))).collect();
    let edges: Vec<(usize, usize)> = sub.edges().map(|(x, y)| (x as usize - 1, y as usize - 1)).collect();
    Ok(match canonical_form(&colors, &edges, LEAF_CAP) {
        Some(form) => GroupKey::Exact(form),
        None => {
            let mut degrees: Vec<usize> = sub.vertices().map(|v| sub.degree(v)).collect();
            degrees.sort_unstable();
            GroupKey::Approximate(sub.n(), sub.q_set().len(), degrees)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreeGroup {
    pub kernel_size: usize,
    pub kernel_edges: usize,
    pub trials: u64,
    pub true_count: u64,
    /// Grouped by an invariant rather than by isomorphism type.
    pub approximate: bool,
}

impl AgreeGroup {
    pub fn constant(&self) -> bool {
        self.true_count == 0 || self.true_count == self.trials
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub n: usize,
    pub trials: u64,
    pub ell_star: usize,
    pub formula_text: String,
    /// Samples whose kernel computation hit the round cap.
    pub excluded: u64,
    pub groups: Vec<AgreeGroup>,
    pub empty_kernel_trials: u64,
    pub empty_kernel_true: u64,
}

impl AgreementReport {
    pub fn counted(&self) -> u64 {
        self.trials - self.excluded
    }

    /// Share of counted samples whose truth value is the majority value of
    /// their group; 1 exactly when every group is constant.
    pub fn agreement_fraction(&self) -> f64 {
        if self.counted() == 0 {
            return 1.0;
        }
        let majority: u64 = self
            .groups
            .iter()
            .map(|g| g.true_count.max(g.trials - g.true_count))
            .sum();
        majority as f64 / self.counted() as f64
    }

    pub fn all_constant(&self) -> bool {
        self.groups.iter().all(AgreeGroup::constant)
    }

    pub fn records(&self, alpha: &AlphaParam, seed: u64) -> Vec<Value> {
        let header = RecordHeader {
            experiment: "agree",
            alpha,
            ell_star: Some(self.ell_star),
            seed,
        };
        let groups: Vec<Value> = self
            .groups
            .iter()
            .map(|g| {
                json!({
                    "kernel_size": g.kernel_size,
                    "kernel_edges": g.kernel_edges,
                    "trials": g.trials,
                    "true_count": g.true_count,
                    "constant": g.constant(),
                    "approximate": g.approximate,
                })
            })
            .collect();
        vec![header.record(
            Some(self.n),
            self.trials,
            json!({
                "formula": self.formula_text,
                "excluded": self.excluded,
                "groups": groups,
                "agreement_fraction": self.agreement_fraction(),
                "all_constant": self.all_constant(),
                "empty_kernel_trials": self.empty_kernel_trials,
                "empty_kernel_true": self.empty_kernel_true,
            }),
        )]
    }
}

/// Samples `trials` graphs, computes each rigid kernel, groups samples by
/// the isomorphism type of the structure induced on the kernel (and `Q`),
/// and records the truth value of `psi` per group.
#[allow(clippy::too_many_arguments)]
pub fn agreement_experiment(
    psi: &Formula,
    a: &AlphaParam,
    ell_star: usize,
    n: usize,
    trials: u64,
    seed: u64,
    round_cap: RoundCap,
    budget: f64,
) -> Result<AgreementReport, ExperimentError> {
    let free = psi.free_vars();
    if !free.is_empty() {
        return Err(ExperimentError::NotSentence(free));
    }
    let compiled = Compiled::new(psi);
    compiled.check_budget(n, budget)?;
    type Outcome = Option<(GroupKey, usize, usize, bool)>;
    let outcomes: Vec<Outcome> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Outcome, ExperimentError> {
            let g = sample_graph(&SampleConfig::new(n, a.clone(), seed, t))?;
            let kr = rigid_kernel(&g, ell_star, a, round_cap)?;
            if kr.truncated {
                return Ok(None);
            }
            let support = kr.kernel.union(g.q_set());
            let key = key_of(&g, &support)?;
            let (sub, _) = g.induced_subgraph(&support)?;
            Ok(Some((
                key,
                kr.kernel.len(),
                sub.edge_count(),
                compiled.eval_positional(&g, &[])?,
            )))
        })
        .collect::<Result<_, _>>()?;
    let mut groups: BTreeMap<GroupKey, AgreeGroup> = BTreeMap::new();
    let (mut excluded, mut empty_trials, mut empty_true) = (0, 0, 0);
    for o in outcomes {
        let Some((key, size, edges, truth)) = o else {
            excluded += 1;
            continue;
        };
        if size == 0 {
            empty_trials += 1;
            empty_true += u64::from(truth);
        }
        let approximate = matches!(key, GroupKey::Approximate(..));
        let g = groups.entry(key).or_insert(AgreeGroup {
            kernel_size: size,
            kernel_edges: edges,
            trials: 0,
            true_count: 0,
            approximate,
        });
        g.trials += 1;
        g.true_count += u64::from(truth);
    }
    Ok(AgreementReport {
        n,
        trials,
        ell_star,
        formula_text: psi.to_string(),
        excluded,
        groups: groups.into_values().collect(),
        empty_kernel_trials: empty_trials,
        empty_kernel_true: empty_true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::DEFAULT_EVAL_BUDGET;
    use crate::logic::parse_formula;

    fn alpha() -> AlphaParam {
        AlphaParam::validate(79, 100, 8, 28).unwrap()
    }

    #[test]
    fn tautology_groups_are_constant_true() {
        let f = parse_formula("forall x. x = x").unwrap();
        let r = agreement_experiment(&f, &alpha(), 4, 80, 30, 1, RoundCap::default(), DEFAULT_EVAL_BUDGET).unwrap();
        assert!(r.all_constant());
        assert!(r.groups.iter().all(|g| g.true_count == g.trials));
        assert_eq!(r.agreement_fraction(), 1.0);
    }

    #[test]
    fn single_trial_is_constant() {
        let f = parse_formula("exists x. exists y. R(x,y)").unwrap();
        let r = agreement_experiment(&f, &alpha(), 4, 80, 1, 7, RoundCap::default(), DEFAULT_EVAL_BUDGET).unwrap();
        assert_eq!(r.groups.len(), 1);
        assert!(r.all_constant());
    }
}
