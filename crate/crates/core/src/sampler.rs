//! Seeded sampling of `G(n, p)` with `p = n^(-alpha)`, optionally with a
//! fixed subgraph on `Q`.
//!
//! Every trial draws from its own ChaCha8 stream seeded by
//! [`trial_seed`]`(master_seed, n, trial_index)`, so a trial's graph does not
//! depend on which thread runs it or on any other trial.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::alpha::AlphaParam;
use crate::bits::words_for;
use crate::graph::{Graph, GraphError, Vertex, VertexSet};

/// Stream tag for graph sampling; other consumers of per-trial randomness
/// use different tags so their draws never overlap the graph's.
pub const GRAPH_STREAM: u64 = 0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("cannot sample a graph on zero vertices")]
    NoVertices,
    #[error("conditioned sampling needs a Q specification")]
    MissingQSpec,
    #[error("plain sampling was given a Q specification; use sample_conditioned")]
    UnexpectedQSpec,
    #[error("Q edge ({0}, {1}) has an endpoint outside Q")]
    EdgeOutsideQ(Vertex, Vertex),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// SplitMix64 finaliser (Steele, Lea and Flood). A bijection on `u64` with
/// full avalanche.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial_index` at size `n`:
/// `splitmix64(splitmix64(splitmix64(master) ^ n) ^ trial_index)`.
pub fn trial_seed(master_seed: u64, n: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ n) ^ trial_index)
}

/// Independent stream for `(master, n, trial)` and a consumer tag.
pub fn stream(master_seed: u64, n: u64, trial_index: u64, tag: u64) -> ChaCha8Rng {
    let seed = trial_seed(master_seed, n, trial_index);
    ChaCha8Rng::seed_from_u64(if tag == GRAPH_STREAM {
        seed
    } else {
        splitmix64(seed ^ splitmix64(tag))
    })
}

/// `n^(-alpha)` in `f64`; relative error is at most a few ulps, far below
/// Monte Carlo resolution.
pub fn edge_probability(n: usize, alpha: &AlphaParam) -> f64 {
    if n <= 1 {
        return 1.0;
    }
    (-(alpha.as_f64()) * (n as f64).ln()).exp()
}

/// A fixed subgraph on the distinguished set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSpec {
    pub set: VertexSet,
    pub edges: Vec<(Vertex, Vertex)>,
}

impl QSpec {
    pub fn edgeless(set: VertexSet) -> Self {
        QSpec { set, edges: Vec::new() }
    }

    /// Reads `Q` and its edges from a graph (its `q_set` and `q_edges`).
    pub fn from_graph(g: &Graph) -> Self {
        QSpec {
            set: g.q_set().clone(),
            edges: g.q_edges(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub n: usize,
    pub alpha: AlphaParam,
    pub q_spec: Option<QSpec>,
    pub master_seed: u64,
    pub trial_index: u64,
}

impl SampleConfig {
    pub fn new(n: usize, alpha: AlphaParam, master_seed: u64, trial_index: u64) -> Self {
        SampleConfig {
            n,
            alpha,
            q_spec: None,
            master_seed,
            trial_index,
        }
    }

    pub fn with_q(mut self, q: QSpec) -> Self {
        self.q_spec = Some(q);
        self
    }

    pub fn edge_probability(&self) -> f64 {
        edge_probability(self.n, &self.alpha)
    }
}

/// Walks the pairs `(1,2), (1,3), ..., (1,n), (2,3), ...` in this fixed order
/// and sets each independently with probability `p`, by geometric skips.
fn sample_rows(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let stride = words_for(n);
    let mut rows = vec![0u64; n * stride];
    if n < 2 || p <= 0.0 {
        return rows;
    }
    let mut set = |i: usize, j: usize| {
        rows[i * stride + (j >> 6)] |= 1 << (j & 63);
        rows[j * stride + (i >> 6)] |= 1 << (i & 63);
    };
    if p >= 1.0 {
        for i in 0..n {
            for j in i + 1..n {
                set(i, j);
            }
        }
        return rows;
    }
    let log_q = (-p).ln_1p();
    // current pair is (i, j), 0-based with i < j
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let u: f64 = rng.random();
        // number of non-edges before the next edge
        let skip = ((-u).ln_1p() / log_q).floor();
        if !skip.is_finite() || skip > (n * n) as f64 {
            break;
        }
        let mut step = skip as usize + 1;
        // advance `step` pairs from (i, j)
        loop {
            let left_in_row = n - 1 - j;
            if step <= left_in_row {
                j += step;
                break;
            }
            step -= left_in_row;
            i += 1;
            if i >= n - 1 {
                return rows;
            }
            j = i;
        }
        set(i, j);
    }
    rows
}

/// Samples `G(n, n^(-alpha))`. Deterministic in `(master_seed, n, trial_index)`.
pub fn sample_graph(cfg: &SampleConfig) -> Result<Graph, SampleError> {
    if cfg.n == 0 {
        return Err(SampleError::NoVertices);
    }
    if cfg.q_spec.is_some() {
        return Err(SampleError::UnexpectedQSpec);
    }
    let mut rng = stream(cfg.master_seed, cfg.n as u64, cfg.trial_index, GRAPH_STREAM);
    let rows = sample_rows(cfg.n, cfg.edge_probability(), &mut rng);
    Ok(Graph::from_rows(cfg.n, rows, VertexSet::empty()))
}

/// Samples with `G ↾ Q` fixed to the given edge set; every other pair is
/// independent with probability `n^(-alpha)`. Uses the same random stream
/// as [`sample_graph`], so `Q = ∅` reproduces it exactly.
pub fn sample_conditioned(cfg: &SampleConfig) -> Result<Graph, SampleError> {
    let q = cfg.q_spec.as_ref().ok_or(SampleError::MissingQSpec)?;
    if cfg.n == 0 {
        return Err(SampleError::NoVertices);
    }
    let n = cfg.n;
    if let Some(v) = q.set.iter().find(|&v| v == 0 || v as usize > n) {
        return Err(GraphError::VertexOutOfRange { vertex: v, n }.into());
    }
    for &(x, y) in &q.edges {
        if !q.set.contains(x) || !q.set.contains(y) {
            return Err(SampleError::EdgeOutsideQ(x, y));
        }
        if x == y {
            return Err(GraphError::SelfLoop(x).into());
        }
    }
    let mut rng = stream(cfg.master_seed, n as u64, cfg.trial_index, GRAPH_STREAM);
    let mut rows = sample_rows(n, cfg.edge_probability(), &mut rng);
    let stride = words_for(n);
    let members: Vec<usize> = q.set.iter().map(|v| v as usize - 1).collect();
    for &a in &members {
        for &b in &members {
            rows[a * stride + (b >> 6)] &= !(1 << (b & 63));
        }
    }
    for &(x, y) in &q.edges {
        let (a, b) = (x as usize - 1, y as usize - 1);
        rows[a * stride + (b >> 6)] |= 1 << (b & 63);
        rows[b * stride + (a >> 6)] |= 1 << (a & 63);
    }
    Ok(Graph::from_rows(n, rows, q.set.clone()))
}
