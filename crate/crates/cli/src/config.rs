//! Run configuration: command-line flags layered over an optional
//! `key = value` file, resolved and validated before anything runs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use extcalc::alpha::default_window;
use extcalc::{AlphaError, AlphaParam, Vertex};
use thiserror::Error;

/// Environment variable read for the default worker-thread count.
pub const THREADS_ENV: &str = "EXTCALC_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    Closure,
    Kernel,
    CountExt,
    CheckEvents,
    Estimate,
    Concentration,
    RigidRate,
    Census,
    E1Bound,
    Fit,
    Agree,
    PlotData,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Alpha(#[from] AlphaError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

/// Flags as typed on the command line; every value is optional so that a
/// config file can supply it instead.
#[derive(Debug, Parser)]
#[command(name = "extcalc", version, about = "Extension calculus of sparse random graphs")]
pub struct Cli {
    /// Subcommand to run.
    pub command: Command,
    /// `key = value` file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Edge exponent as `num/den`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Certificate window `v_max,e_max`.
    #[arg(long)]
    pub window: Option<String>,
    /// Size bound on rigid extensions.
    #[arg(long)]
    pub ell: Option<String>,
    /// Comma-separated graph sizes.
    #[arg(long)]
    pub n: Option<String>,
    /// Samples per graph size.
    #[arg(long)]
    pub trials: Option<String>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<String>,
    /// First-order sentence or formula.
    #[arg(long)]
    pub formula: Option<String>,
    /// Pair template file.
    #[arg(long)]
    pub pair: Option<String>,
    /// Graph file.
    #[arg(long)]
    pub graph: Option<String>,
    /// Comma-separated vertex set (closure base).
    #[arg(long)]
    pub set: Option<String>,
    /// Base embedding `template:image,...` for count-ext.
    #[arg(long)]
    pub map: Option<String>,
    /// Sampled obligations for the generic-extension check.
    #[arg(long)]
    pub budget: Option<String>,
    /// Cap on the estimated work of one formula evaluation.
    #[arg(long = "eval-budget")]
    pub eval_budget: Option<String>,
    /// Band exponent for concentration.
    #[arg(long)]
    pub band: Option<String>,
    /// Embeddings drawn per graph for concentration.
    #[arg(long)]
    pub embeddings: Option<String>,
    /// Threshold exponent for census and e1-bound.
    #[arg(long)]
    pub eps: Option<String>,
    /// Generic-extension samples per small-kernel graph in census.
    #[arg(long = "e2-budget")]
    pub e2_budget: Option<String>,
    /// JSON-lines input for fit and plot-data.
    #[arg(long)]
    pub input: Option<String>,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub output: Option<String>,
    /// Maximum number of closure rounds (default: n).
    #[arg(long = "round-cap")]
    pub round_cap: Option<String>,
    /// Worker threads; does not change any output.
    #[arg(long)]
    pub threads: Option<String>,
}

const KEYS: &[&str] = &[
    "alpha",
    "window",
    "ell",
    "n",
    "trials",
    "seed",
    "formula",
    "pair",
    "graph",
    "set",
    "map",
    "budget",
    "eval-budget",
    "band",
    "embeddings",
    "eps",
    "e2-budget",
    "input",
    "output",
    "round-cap",
    "threads",
];

impl Cli {
    fn flags(&self) -> BTreeMap<&'static str, String> {
        let values = [
            &self.alpha,
            &self.window,
            &self.ell,
            &self.n,
            &self.trials,
            &self.seed,
            &self.formula,
            &self.pair,
            &self.graph,
            &self.set,
            &self.map,
            &self.budget,
            &self.eval_budget,
            &self.band,
            &self.embeddings,
            &self.eps,
            &self.e2_budget,
            &self.input,
            &self.output,
            &self.round_cap,
            &self.threads,
        ];
        KEYS.iter()
            .zip(values)
            .filter_map(|(k, v)| v.clone().map(|v| (*k, v)))
            .collect()
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<&'static str, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return invalid(format!("config line {}: expected `key = value`", i + 1));
        };
        let k = k.trim().replace('_', "-");
        let Some(key) = KEYS.iter().find(|&&known| known == k) else {
            return invalid(format!("config line {}: unknown key `{k}`", i + 1));
        };
        out.insert(*key, v.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: AlphaParam,
    pub ell_star: usize,
    pub ns: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub formula: Option<String>,
    pub pair: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub set: Vec<Vertex>,
    pub map: Vec<(Vertex, Vertex)>,
    pub budget: u64,
    pub eval_budget: f64,
    pub band: f64,
    pub embeddings: u64,
    pub eps: Option<f64>,
    pub e2_budget: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub round_cap: Option<usize>,
    pub threads: Option<usize>,
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim()
        .parse()
        .or_else(|_| invalid(format!("`{key}` expects a number, got `{v}`")))
}

fn positive<T: std::str::FromStr + PartialOrd + Default>(key: &str, v: &str) -> Result<T, ConfigError> {
    let x: T = number(key, v)?;
    if x <= T::default() {
        return invalid(format!("`{key}` must be positive, got `{v}`"));
    }
    Ok(x)
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| number(key, s))
        .collect()
}

impl RunConfig {
    /// Merges `file` (lower priority) with the flags of `cli` and validates.
    /// `env_threads` is the value of [`THREADS_ENV`], if set.
    pub fn resolve(
        cli: &Cli,
        file: BTreeMap<&'static str, String>,
        env_threads: Option<String>,
    ) -> Result<RunConfig, ConfigError> {
        let mut raw = file;
        raw.extend(cli.flags());
        let get = |k: &str| raw.get(k).map(String::as_str);

        let ell_star: usize = get("ell").map(|v| positive("ell", v)).transpose()?.unwrap_or(4);
        let (v_max, e_max) = match get("window") {
            Some(w) => {
                let parts: Vec<u32> = list("window", w)?;
                let [v, e] = parts[..] else {
                    return invalid("`window` expects `v_max,e_max`");
                };
                (v, e)
            }
            None => default_window(ell_star as u32, 0),
        };
        let Some(alpha_text) = get("alpha") else {
            return invalid("`alpha` is required");
        };
        let (num, den) = AlphaParam::parse_fraction(alpha_text)?;
        let alpha = AlphaParam::validate(num, den, v_max, e_max)?;

        let ns: Vec<usize> = get("n").map(|v| list("n", v)).transpose()?.unwrap_or_default();
        if ns.contains(&0) {
            return invalid("`n` values must be positive");
        }
        let threads = match get("threads").map(str::to_string).or(env_threads) {
            Some(t) => Some(positive("threads", &t)?),
            None => None,
        };
        let map = match get("map") {
            Some(m) => m
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|p| match p.split_once(':') {
                    Some((a, b)) => Ok((number("map", a)?, number("map", b)?)),
                    None => invalid(format!("`map` entry `{p}` is not `template:image`")),
                })
                .collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        Ok(RunConfig {
            command: cli.command,
            alpha,
            ell_star,
            ns,
            trials: get("trials").map(|v| positive("trials", v)).transpose()?.unwrap_or(100),
            seed: get("seed").map(|v| number("seed", v)).transpose()?.unwrap_or(0),
            formula: get("formula").map(str::to_string),
            pair: get("pair").map(PathBuf::from),
            graph: get("graph").map(PathBuf::from),
            set: get("set").map(|v| list("set", v)).transpose()?.unwrap_or_default(),
            map,
            budget: get("budget").map(|v| number("budget", v)).transpose()?.unwrap_or(100),
            eval_budget: get("eval-budget")
                .map(|v| positive("eval-budget", v))
                .transpose()?
                .unwrap_or(extcalc::experiments::DEFAULT_EVAL_BUDGET),
            band: get("band").map(|v| positive("band", v)).transpose()?.unwrap_or(0.15),
            embeddings: get("embeddings")
                .map(|v| positive("embeddings", v))
                .transpose()?
                .unwrap_or(100),
            eps: get("eps").map(|v| positive("eps", v)).transpose()?,
            e2_budget: get("e2-budget")
                .map(|v| number("e2-budget", v))
                .transpose()?
                .unwrap_or(0),
            input: get("input").map(PathBuf::from),
            output: get("output").map(PathBuf::from),
            round_cap: get("round-cap").map(|v| number("round-cap", v)).transpose()?,
            threads,
        })
    }

    /// Sizes, or an error naming the command that needs them.
    pub fn require_ns(&self) -> Result<&[usize], ConfigError> {
        if self.ns.is_empty() {
            return invalid(format!("`{}` needs `n`", self.command.name()));
        }
        Ok(&self.ns)
    }

    pub fn require<'a, T>(&self, what: &str, v: &'a Option<T>) -> Result<&'a T, ConfigError> {
        match v {
            Some(x) => Ok(x),
            None => invalid(format!("`{}` needs `{what}`", self.command.name())),
        }
    }

    /// Resolved configuration as the first output record. The thread count
    /// and output path are left out: they never change the results.
    pub fn record(&self) -> serde_json::Value {
        let a = &self.alpha;
        serde_json::json!({
            "record": "config",
            "command": self.command.name(),
            "alpha_num": a.num(),
            "alpha_den": a.den(),
            "window": {"v_max": a.v_max(), "e_max": a.e_max()},
            "zeta": a.zeta_f64(),
            "zeta_num": a.zeta_scaled(),
            "zeta_den": a.den(),
            "zeta_at": a.zeta_at(),
            "ell_star": self.ell_star,
            "n": self.ns,
            "trials": self.trials,
            "seed": self.seed,
            "formula": self.formula,
            "pair": self.pair,
            "graph": self.graph,
            "set": self.set,
            "map": self.map,
            "budget": self.budget,
            "eval_budget": self.eval_budget,
            "band": self.band,
            "embeddings": self.embeddings,
            "eps": self.eps,
            "e2_budget": self.e2_budget,
            "input": self.input,
            "round_cap": self.round_cap,
        })
    }
}
