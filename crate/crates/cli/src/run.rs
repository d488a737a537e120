//! Executes one subcommand and writes its JSON-lines records.

use std::fs;
use std::io::Write;
use std::path::Path;

use extcalc::experiments::{
    agreement_experiment, concentration_report, e1_bound, estimate_prob, fit_decay, kernel_census, rigid_hit_rate,
    CensusOptions, ExperimentError, ProbCurve, ProbPoint,
};
use extcalc::extension::{
    check_generic_ext, check_no_rigid_from_base, closure, count_extensions, extract_rigid_chain, rigid_kernel,
    Embedding, ExtensionError, GenericCheckOptions, KernelResult, RigidChain, RoundCap,
};
use extcalc::format::{parse_graph, parse_pair};
use extcalc::logic::{parse_formula, EvalError, Formula, ParseError};
use extcalc::sampler::{sample_graph, SampleConfig, SampleError};
use extcalc::{classify_pair, AlphaError, Graph, GraphError, PairSpec, VertexSet};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{Command, ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    File { path: String, source: GraphError },
    #[error("formula: {0}")]
    Formula(#[from] ParseError),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Alpha(#[from] AlphaError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("writing output: {0}")]
    Output(std::io::Error),
}

impl RunError {
    /// 3 when `alpha` hits its window, 1 when a work budget is exhausted or
    /// output fails, 2 for every other invalid request.
    pub fn exit_code(&self) -> i32 {
        let alpha = match self {
            RunError::Alpha(a) | RunError::Config(ConfigError::Alpha(a)) => Some(a),
            RunError::Extension(ExtensionError::Alpha(a)) => Some(a),
            RunError::Experiment(ExperimentError::Alpha(a)) => Some(a),
            RunError::Experiment(ExperimentError::Extension(ExtensionError::Alpha(a))) => Some(a),
            _ => None,
        };
        if let Some(AlphaError::WindowHit { .. }) = alpha {
            return 3;
        }
        match self {
            RunError::Eval(EvalError::BudgetExceeded { .. })
            | RunError::Experiment(ExperimentError::Eval(EvalError::BudgetExceeded { .. }))
            | RunError::Io { .. }
            | RunError::Output(_) => 1,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_graph(path: &Path) -> Result<Graph, RunError> {
    parse_graph(&read(path)?).map_err(|source| RunError::File {
        path: path.display().to_string(),
        source,
    })
}

fn load_pair(path: &Path) -> Result<PairSpec, RunError> {
    parse_pair(&read(path)?).map_err(|source| RunError::File {
        path: path.display().to_string(),
        source,
    })
}

fn formula(cfg: &RunConfig) -> Result<Formula, RunError> {
    Ok(parse_formula(cfg.require("formula", &cfg.formula)?)?)
}

fn round_cap(cfg: &RunConfig) -> RoundCap {
    cfg.round_cap.map_or(RoundCap::VertexCount, RoundCap::Fixed)
}

fn kernel_record(cfg: &RunConfig, n: usize, trial: Option<u64>, kr: &KernelResult, chain: &RigidChain) -> Value {
    json!({
        "experiment": "kernel",
        "n": n,
        "trial": trial,
        "alpha_num": cfg.alpha.num(),
        "alpha_den": cfg.alpha.den(),
        "ell_star": cfg.ell_star,
        "seed": cfg.seed,
        "kernel": kr.kernel,
        "rounds": kr.rounds,
        "truncated": kr.truncated,
        "chain": chain.entries,
        "chain_complete": chain.complete,
    })
}

/// Reads `estimate` records (as written by this tool) into a curve.
fn read_curve(cfg: &RunConfig, text: &str) -> Result<ProbCurve, RunError> {
    let mut points = Vec::new();
    let mut formula_text = String::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line).map_err(|e| RunError::Input(format!("line {}: {e}", i + 1)))?;
        if v["experiment"] != "estimate" {
            continue;
        }
        let field = |k: &str| {
            v[k].as_u64()
                .ok_or_else(|| RunError::Input(format!("line {}: `{k}` missing", i + 1)))
        };
        points.push(ProbPoint {
            n: field("n")? as usize,
            hits: field("hits")?,
            trials: field("trials")?,
        });
        formula_text = v["formula"].as_str().unwrap_or_default().to_string();
    }
    points.sort_by_key(|p| p.n);
    Ok(ProbCurve {
        points,
        alpha: cfg.alpha.clone(),
        formula_text,
        master_seed: cfg.seed,
    })
}

/// `(x, y)` of a record for plotting: `n` against the headline statistic of
/// its experiment.
fn plot_point(v: &Value) -> Option<(f64, f64)> {
    let key = match v["experiment"].as_str()? {
        "estimate" | "rigid-rate" => "rate",
        "concentration" => "fraction_outside",
        "census" => "e1_frequency",
        "e1-bound" => "log_seq_count",
        "agree" => "agreement_fraction",
        _ => return None,
    };
    Some((v["n"].as_f64()?, v[key].as_f64()?))
}

/// Runs `cfg.command`, writing the config record and then the results.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), RunError> {
    if cfg.command == Command::PlotData {
        let text = read(cfg.require("input", &cfg.input)?)?;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let v: Value = serde_json::from_str(line).map_err(|e| RunError::Input(e.to_string()))?;
            if let Some((x, y)) = plot_point(&v) {
                writeln!(out, "{x} {y}").map_err(RunError::Output)?;
            }
        }
        return Ok(());
    }
    let mut emit = |v: Value| -> Result<(), RunError> { writeln!(out, "{v}").map_err(RunError::Output) };
    emit(cfg.record())?;
    let a = &cfg.alpha;
    match cfg.command {
        Command::Classify => {
            let p = load_pair(cfg.require("pair", &cfg.pair)?)?;
            let c = classify_pair(&p, a)?;
            emit(json!({
                "experiment": "classify",
                "h0": p.h0(),
                "h1": p.h1(),
                "v": c.ext_type.v,
                "e": c.ext_type.e,
                "value": c.value.to_string(),
                "dense": c.dense,
                "sparse": c.sparse,
                "safe": c.safe,
                "rigid": c.rigid,
                "hinged": c.hinged,
            }))?;
        }
        Command::Closure => {
            let g = load_graph(cfg.require("graph", &cfg.graph)?)?;
            let x = VertexSet::new(cfg.set.iter().copied());
            let kr = closure(&g, &x, cfg.ell_star, a, round_cap(cfg))?;
            emit(json!({
                "experiment": "closure",
                "n": g.n(),
                "alpha_num": a.num(),
                "alpha_den": a.den(),
                "ell_star": cfg.ell_star,
                "set": x,
                "kernel": kr.kernel,
                "rounds": kr.rounds,
                "additions_per_round": kr.additions_per_round,
                "truncated": kr.truncated,
            }))?;
        }
        Command::Kernel => {
            if let Some(path) = &cfg.graph {
                let g = load_graph(path)?;
                let kr = rigid_kernel(&g, cfg.ell_star, a, round_cap(cfg))?;
                let chain = extract_rigid_chain(&g, &kr, cfg.ell_star, a)?;
                emit(kernel_record(cfg, g.n(), None, &kr, &chain))?;
            } else {
                for &n in cfg.require_ns()? {
                    use rayon::prelude::*;
                    let results: Vec<(KernelResult, RigidChain)> = (0..cfg.trials)
                        .into_par_iter()
                        .map(|t| -> Result<_, RunError> {
                            let g = sample_graph(&SampleConfig::new(n, a.clone(), cfg.seed, t))?;
                            let kr = rigid_kernel(&g, cfg.ell_star, a, round_cap(cfg))?;
                            let chain = extract_rigid_chain(&g, &kr, cfg.ell_star, a)?;
                            Ok((kr, chain))
                        })
                        .collect::<Result<_, _>>()?;
                    for (t, (kr, chain)) in results.iter().enumerate() {
                        emit(kernel_record(cfg, n, Some(t as u64), kr, chain))?;
                    }
                }
            }
        }
        Command::CountExt => {
            let g = load_graph(cfg.require("graph", &cfg.graph)?)?;
            let p = load_pair(cfg.require("pair", &cfg.pair)?)?;
            let f = Embedding::new(cfg.map.iter().copied());
            let count = count_extensions(&g, &f, &p)?;
            emit(json!({
                "experiment": "count-ext",
                "n": g.n(),
                "map": cfg.map,
                "count": count.to_string(),
            }))?;
        }
        Command::CheckEvents => {
            let g = load_graph(cfg.require("graph", &cfg.graph)?)?;
            let no_rigid = check_no_rigid_from_base(&g, cfg.ell_star, a)?;
            let generic = check_generic_ext(&g, cfg.ell_star, a, GenericCheckOptions::new(cfg.budget, cfg.seed))?;
            for r in [no_rigid, generic] {
                let mut v = serde_json::to_value(&r).expect("reports serialise");
                v["experiment"] = json!("check-events");
                v["n"] = json!(g.n());
                emit(v)?;
            }
        }
        Command::Estimate => {
            let psi = formula(cfg)?;
            let curve = estimate_prob(&psi, a, cfg.require_ns()?, cfg.trials, cfg.seed, cfg.eval_budget)?;
            for r in curve.records() {
                emit(r)?;
            }
        }
        Command::Concentration => {
            let p = load_pair(cfg.require("pair", &cfg.pair)?)?;
            let rep = concentration_report(&p, a, cfg.require_ns()?, cfg.trials, cfg.embeddings, cfg.band, cfg.seed)?;
            for r in rep.records(a, cfg.seed) {
                emit(r)?;
            }
        }
        Command::RigidRate => {
            let p = load_pair(cfg.require("pair", &cfg.pair)?)?;
            for &n in cfg.require_ns()? {
                emit(rigid_hit_rate(&p, a, n, cfg.trials, cfg.seed)?.record(a, cfg.seed))?;
            }
        }
        Command::Census => {
            let opts = CensusOptions {
                eps: cfg.eps,
                e2_budget: cfg.e2_budget,
                round_cap: round_cap(cfg),
            };
            let census = kernel_census(a, cfg.ell_star, cfg.require_ns()?, cfg.trials, cfg.seed, opts)?;
            for r in census.records() {
                emit(r)?;
            }
        }
        Command::E1Bound => {
            let eps = cfg.eps.unwrap_or(a.zeta_f64() / 4.0);
            for &n in cfg.require_ns()? {
                let b = e1_bound(n as f64, eps, cfg.ell_star, a.zeta_f64());
                emit(json!({
                    "experiment": "e1-bound",
                    "n": n,
                    "alpha_num": a.num(),
                    "alpha_den": a.den(),
                    "ell_star": cfg.ell_star,
                    "eps": eps,
                    "zeta": a.zeta_f64(),
                    "log_seq_count": b.log_seq_count,
                    "log_simplified": b.log_simplified,
                    "log_expected": b.log_expected,
                }))?;
            }
        }
        Command::Fit => {
            let curve = read_curve(cfg, &read(cfg.require("input", &cfg.input)?)?)?;
            let mut v = fit_decay(&curve).record();
            v["n"] = json!(curve.points.iter().map(|p| p.n).collect::<Vec<_>>());
            emit(v)?;
        }
        Command::Agree => {
            let psi = formula(cfg)?;
            for &n in cfg.require_ns()? {
                let rep = agreement_experiment(
                    &psi,
                    a,
                    cfg.ell_star,
                    n,
                    cfg.trials,
                    cfg.seed,
                    round_cap(cfg),
                    cfg.eval_budget,
                )?;
                for r in rep.records(a, cfg.seed) {
                    emit(r)?;
                }
            }
        }
        Command::PlotData => unreachable!("handled above"),
    }
    Ok(())
}
