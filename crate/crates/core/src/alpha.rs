//! Exact arithmetic for the edge exponent `alpha`, extension types `(v, e)`
//! and the dense / sparse / safe / rigid / hinged taxonomy.
//!
//! `alpha = num/den` is rational, so it stands in for an irrational exponent
//! only on a finite window of types: [`AlphaParam::validate`] certifies that
//! `v * den != e * num` for every `0 <= v <= v_max`, `0 <= e <= e_max` other
//! than `(0, 0)`, and records the gap `zeta = min |v - alpha * e|` over the
//! window. Every sign decision below is an integer comparison on
//! `v * den - e * num`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::words_for;
use crate::graph::{Graph, GraphError, Vertex, VertexSet};

/// Largest number of new vertices a local extension may have.
pub const MAX_LOCAL: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphaError {
    #[error("alpha = {num}/{den} is not in (0, 1)")]
    OutOfRange { num: i64, den: i64 },
    #[error("alpha must be written num/den with integers, got `{0}`")]
    BadFraction(String),
    #[error("window bounds must be at least 1 (v_max = {v_max}, e_max = {e_max})")]
    EmptyWindow { v_max: u32, e_max: u32 },
    #[error("alpha = {num}/{den} hits the window at (v, e) = ({v}, {e}): v - alpha*e = 0")]
    WindowHit { num: i64, den: i64, v: u32, e: u32 },
    #[error("type ({v}, {e}) lies outside the certified window (v <= {v_max}, e <= {e_max})")]
    WindowExceeded { v: u32, e: u32, v_max: u32, e_max: u32 },
    #[error("H0 is not a subset of H1")]
    NotNested,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Type `(v, e)` of an extension pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtType {
    pub v: u32,
    pub e: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaParam {
    num: i64,
    den: i64,
    v_max: u32,
    e_max: u32,
    /// `zeta * den`, an integer.
    zeta_scaled: i64,
    zeta_at: ExtType,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Binomial coefficient `C(m, 2)`.
pub fn pairs(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

impl AlphaParam {
    /// Certifies `num/den` on the window `v <= v_max, e <= e_max`.
    ///
    /// The fraction is reduced first. A window hit is reported at the
    /// lexicographically first `(v, e)`.
    pub fn validate(num: i64, den: i64, v_max: u32, e_max: u32) -> Result<Self, AlphaError> {
        if num <= 0 || den <= 0 || num >= den {
            return Err(AlphaError::OutOfRange { num, den });
        }
        if v_max == 0 || e_max == 0 {
            return Err(AlphaError::EmptyWindow { v_max, e_max });
        }
        let g = gcd(num, den);
        let (num, den) = (num / g, den / g);
        let mut best: Option<(i64, ExtType)> = None;
        for v in 0..=v_max {
            for e in 0..=e_max {
                if v == 0 && e == 0 {
                    continue;
                }
                let d = (v as i64 * den - e as i64 * num).abs();
                if d == 0 {
                    return Err(AlphaError::WindowHit { num, den, v, e });
                }
                if best.is_none_or(|(b, _)| d < b) {
                    best = Some((d, ExtType { v, e }));
                }
            }
        }
        let (zeta_scaled, zeta_at) = best.expect("window is non-empty");
        Ok(AlphaParam {
            num,
            den,
            v_max,
            e_max,
            zeta_scaled,
            zeta_at,
        })
    }

    /// Window `v_max = 2 ell*`, `e_max = C(2 ell* + |Q|, 2)`.
    pub fn with_default_window(num: i64, den: i64, ell_star: u32, q_size: usize) -> Result<Self, AlphaError> {
        let (v_max, e_max) = default_window(ell_star, q_size);
        Self::validate(num, den, v_max, e_max)
    }

    /// Parses `"num/den"`. Decimal notation is rejected.
    pub fn parse_fraction(text: &str) -> Result<(i64, i64), AlphaError> {
        let bad = || AlphaError::BadFraction(text.to_string());
        let (a, b) = text.trim().split_once('/').ok_or_else(bad)?;
        let num = a.trim().parse::<i64>().map_err(|_| bad())?;
        let den = b.trim().parse::<i64>().map_err(|_| bad())?;
        Ok((num, den))
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn v_max(&self) -> u32 {
        self.v_max
    }

    pub fn e_max(&self) -> u32 {
        self.e_max
    }

    pub fn zeta(&self) -> Ratio<i64> {
        Ratio::new(self.zeta_scaled, self.den)
    }

    /// `zeta * den`.
    pub fn zeta_scaled(&self) -> i64 {
        self.zeta_scaled
    }

    pub fn zeta_at(&self) -> ExtType {
        self.zeta_at
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn zeta_f64(&self) -> f64 {
        self.zeta_scaled as f64 / self.den as f64
    }

    /// `(v - alpha e) * den`.
    #[inline]
    pub fn scaled_value(&self, v: u32, e: u32) -> i64 {
        v as i64 * self.den - e as i64 * self.num
    }

    pub fn value(&self, t: ExtType) -> Ratio<i64> {
        Ratio::new(self.scaled_value(t.v, t.e), self.den)
    }

    pub fn covers(&self, t: ExtType) -> bool {
        t.v <= self.v_max && t.e <= self.e_max
    }

    /// Least `e` with `1 - alpha e < 0`: a vertex of a rigid extension needs at
    /// least this many neighbours in the rest of the extension and its base.
    pub fn min_rigid_degree(&self) -> u32 {
        (self.den / self.num + 1) as u32
    }
}

pub fn default_window(ell_star: u32, q_size: usize) -> (u32, u32) {
    let v_max = (2 * ell_star).max(1);
    let e_max = pairs(2 * ell_star as u64 + q_size as u64).clamp(1, u32::MAX as u64) as u32;
    (v_max, e_max)
}

/// An extension pair `(H0, H1)` inside an ambient graph that carries `Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSpec {
    ambient: Graph,
    h0: VertexSet,
    h1: VertexSet,
}

impl PairSpec {
    pub fn new(ambient: Graph, h0: VertexSet, h1: VertexSet) -> Result<Self, AlphaError> {
        let n = ambient.n();
        if let Some(v) = h1.iter().chain(h0.iter()).find(|&v| v == 0 || v as usize > n) {
            return Err(GraphError::VertexOutOfRange { vertex: v, n }.into());
        }
        if !h0.is_subset(&h1) {
            return Err(AlphaError::NotNested);
        }
        Ok(PairSpec { ambient, h0, h1 })
    }

    pub fn ambient(&self) -> &Graph {
        &self.ambient
    }

    pub fn h0(&self) -> &VertexSet {
        &self.h0
    }

    pub fn h1(&self) -> &VertexSet {
        &self.h1
    }

    /// `H0 ∪ Q`.
    pub fn base(&self) -> VertexSet {
        self.h0.union(self.ambient.q_set())
    }

    /// `H1 \ H0 \ Q`, the new vertices.
    pub fn new_vertices(&self) -> VertexSet {
        self.h1.difference(&self.base())
    }

    pub(crate) fn local(&self) -> LocalExt {
        let base = self.base();
        let new = self.new_vertices();
        LocalExt::from_graph(&self.ambient, &base, new.as_slice())
    }
}

/// `v = |H1 \ H0 \ Q|`, `e` = ambient edges inside `H1 ∪ Q` but not inside `H0 ∪ Q`.
pub fn ext_type(p: &PairSpec) -> ExtType {
    p.local().ext_type()
}

/// An extension of `k` new vertices over a base, reduced to what the
/// taxonomy needs: per-vertex edge counts into the base and the adjacency
/// among the new vertices as bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LocalExt {
    base_deg: Vec<u32>,
    inner: Vec<u32>,
}

impl LocalExt {
    pub(crate) fn new(base_deg: Vec<u32>, inner: Vec<u32>) -> Self {
        debug_assert!(base_deg.len() <= MAX_LOCAL);
        LocalExt { base_deg, inner }
    }

    pub(crate) fn from_graph(g: &Graph, base: &VertexSet, new: &[Vertex]) -> Self {
        let mut mask = vec![0u64; words_for(g.n())];
        for v in base.iter() {
            let i = v as usize - 1;
            mask[i >> 6] |= 1 << (i & 63);
        }
        Self::from_graph_mask(g, &mask, new)
    }

    /// `base` is a 0-based bitset of the base vertices.
    pub(crate) fn from_graph_mask(g: &Graph, base: &[u64], new: &[Vertex]) -> Self {
        let base_deg = new.iter().map(|&x| g.degree_into(x, base)).collect();
        let inner = new
            .iter()
            .map(|&x| {
                new.iter()
                    .enumerate()
                    .filter(|(_, &y)| g.is_edge(x, y))
                    .fold(0u32, |m, (j, _)| m | 1 << j)
            })
            .collect();
        LocalExt { base_deg, inner }
    }

    pub(crate) fn k(&self) -> usize {
        self.base_deg.len()
    }

    fn full(&self) -> u32 {
        ((1u64 << self.k()) - 1) as u32
    }

    /// Edges inside `mask ∪ base` with an endpoint in `mask`.
    pub(crate) fn weight(&self, mask: u32) -> u32 {
        let mut to_base = 0;
        let mut inside = 0;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            to_base += self.base_deg[i];
            inside += (self.inner[i] & mask).count_ones();
        }
        to_base + inside / 2
    }

    pub(crate) fn ext_type(&self) -> ExtType {
        ExtType {
            v: self.k() as u32,
            e: self.weight(self.full()),
        }
    }

    /// `(|A| - alpha w(A)) * den` for every subset `A` of the new vertices.
    /// The type of `(base ∪ A, base ∪ C)` is the difference of two entries.
    pub(crate) fn values(&self, a: &AlphaParam) -> Vec<i64> {
        (0..=self.full())
            .map(|m| a.scaled_value(m.count_ones(), self.weight(m)))
            .collect()
    }

    pub(crate) fn is_rigid(&self, a: &AlphaParam) -> bool {
        self.k() > 0 && rigid_within(&self.values(a), self.full())
    }

    pub(crate) fn classify(&self, a: &AlphaParam) -> Classification {
        let ext_type = self.ext_type();
        let full = self.full();
        let vals = self.values(a);
        let top = vals[full as usize];
        if self.k() == 0 {
            return Classification {
                ext_type,
                value: Ratio::new(0, 1),
                dense: false,
                sparse: false,
                safe: true,
                rigid: false,
                hinged: false,
            };
        }
        let safe = vals.iter().skip(1).all(|&v| v > 0);
        let rigid = rigid_within(&vals, full);
        let hinged = rigid && (1..full).filter(|&c| c & full == c).all(|c| !rigid_within(&vals, c));
        Classification {
            ext_type,
            value: a.value(ext_type),
            dense: top < 0,
            sparse: top > 0,
            safe,
            rigid,
            hinged,
        }
    }
}

/// Every proper subset `A` of `c` has `(A, c)` dense.
fn rigid_within(vals: &[i64], c: u32) -> bool {
    let top = vals[c as usize];
    // proper submasks of c, including 0
    let mut s = c;
    loop {
        s = s.wrapping_sub(1) & c;
        if vals[s as usize] <= top {
            return false;
        }
        if s == 0 {
            return true;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub ext_type: ExtType,
    /// `v - alpha e`, exact.
    pub value: Ratio<i64>,
    pub dense: bool,
    pub sparse: bool,
    pub safe: bool,
    pub rigid: bool,
    /// Rigid with no proper non-empty rigid sub-extension `(H0, S)`.
    pub hinged: bool,
}

/// Classifies `p` by enumerating intermediate sets between `H0 ∪ Q` and `H1 ∪ Q`.
///
/// A pair with no new vertices is treated as trivially safe and not rigid.
pub fn classify_pair(p: &PairSpec, a: &AlphaParam) -> Result<Classification, AlphaError> {
    let local = p.local();
    let t = local.ext_type();
    if !a.covers(t) || local.k() > MAX_LOCAL {
        return Err(AlphaError::WindowExceeded {
            v: t.v,
            e: t.e,
            v_max: a.v_max(),
            e_max: a.e_max(),
        });
    }
    Ok(local.classify(a))
}
