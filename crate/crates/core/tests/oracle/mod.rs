//! Slow reference implementations written straight from the definitions.
//! Shared by several test targets, so not every item is used by each.
#![allow(dead_code)]

use std::collections::BTreeSet;

use extcalc::logic::Formula;
use extcalc::{Graph, Vertex, VertexSet};
use rand::Rng;

pub type Set = BTreeSet<Vertex>;

pub fn set(vs: &VertexSet) -> Set {
    vs.iter().collect()
}

/// `(v, e)` of `(a, b)` over `Q`: vertices of `b ∪ Q` outside `a ∪ Q`, and
/// edges inside `b ∪ Q` with some endpoint outside `a ∪ Q`.
pub fn pair_type(g: &Graph, a: &Set, b: &Set) -> (i64, i64) {
    let q = set(g.q_set());
    let lo: Set = a.union(&q).copied().collect();
    let hi: Set = b.union(&q).copied().collect();
    let v = hi.difference(&lo).count() as i64;
    let e = g
        .edges()
        .filter(|&(x, y)| hi.contains(&x) && hi.contains(&y) && !(lo.contains(&x) && lo.contains(&y)))
        .count() as i64;
    (v, e)
}

/// `(v - alpha e) * den`.
pub fn scaled(g: &Graph, a: &Set, b: &Set, num: i64, den: i64) -> i64 {
    let (v, e) = pair_type(g, a, b);
    v * den - e * num
}

/// All subsets of `items`.
pub fn subsets(items: &[Vertex]) -> Vec<Set> {
    (0u32..1 << items.len())
        .map(|m| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveClass {
    pub v: i64,
    pub e: i64,
    pub dense: bool,
    pub sparse: bool,
    pub safe: bool,
    pub rigid: bool,
    pub hinged: bool,
}

fn is_rigid(g: &Graph, h0: &Set, h1: &Set, new: &[Vertex], num: i64, den: i64) -> bool {
    !new.is_empty()
        && subsets(new).iter().filter(|t| t.len() < new.len()).all(|t| {
            let s: Set = h0.union(t).copied().collect();
            scaled(g, &s, h1, num, den) < 0
        })
}

/// Classification of `(h0, h1)` by enumerating every intermediate set.
/// A pair without new vertices is safe and not rigid.
pub fn naive_classify(g: &Graph, h0: &Set, h1: &Set, num: i64, den: i64) -> NaiveClass {
    let q = set(g.q_set());
    let new: Vec<Vertex> = h1
        .iter()
        .filter(|v| !h0.contains(v) && !q.contains(v))
        .copied()
        .collect();
    let (v, e) = pair_type(g, h0, h1);
    let value = v * den - e * num;
    if new.is_empty() {
        return NaiveClass {
            v,
            e,
            dense: false,
            sparse: false,
            safe: true,
            rigid: false,
            hinged: false,
        };
    }
    let safe = subsets(&new).iter().filter(|t| !t.is_empty()).all(|t| {
        let s: Set = h0.union(t).copied().collect();
        scaled(g, h0, &s, num, den) > 0
    });
    let rigid = is_rigid(g, h0, h1, &new, num, den);
    let hinged = rigid
        && subsets(&new)
            .iter()
            .filter(|t| !t.is_empty() && t.len() < new.len())
            .all(|t| {
                let s: Set = h0.union(t).copied().collect();
                let inner: Vec<Vertex> = t.iter().copied().collect();
                !is_rigid(g, h0, &s, &inner, num, den)
            });
    NaiveClass {
        v,
        e,
        dense: value < 0,
        sparse: value > 0,
        safe,
        rigid,
        hinged,
    }
}

/// Lexicographically first `(v, e) != (0, 0)` minimising `|v den - e num|`.
pub fn naive_zeta(num: i64, den: i64, v_max: i64, e_max: i64) -> (i64, i64, i64) {
    let mut best = (i64::MAX, 0, 0);
    for v in 0..=v_max {
        for e in 0..=e_max {
            if (v, e) == (0, 0) {
                continue;
            }
            let d = (v * den - e * num).abs();
            if d < best.0 {
                best = (d, v, e);
            }
        }
    }
    best
}

/// A random graph on `n` vertices with edge probability `p` and `Q` of
/// size `q`, chosen uniformly.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, q: usize) -> Graph {
    let mut edges = Vec::new();
    for x in 1..=n as Vertex {
        for y in x + 1..=n as Vertex {
            if rng.random_bool(p) {
                edges.push((x, y));
            }
        }
    }
    let qs = rand::seq::index::sample(rng, n, q.min(n))
        .into_iter()
        .map(|i| i as Vertex + 1);
    Graph::build(n, &edges, VertexSet::new(qs)).unwrap()
}

/// Counts injective maps of the new vertices into `G` outside `Q` and the
/// image of `f`, such that every template edge with a new endpoint lands on
/// an edge. `f` maps every base vertex.
pub fn brute_count(g: &Graph, t: &Graph, base: &Set, new: &[Vertex], f: &[(Vertex, Vertex)]) -> u128 {
    let image = |x: Vertex, chosen: &[Vertex]| -> Vertex {
        match new.iter().position(|&y| y == x) {
            Some(i) => chosen[i],
            None => f.iter().find(|&&(a, _)| a == x).unwrap().1,
        }
    };
    let used: Set = f.iter().map(|&(_, b)| b).collect();
    let free: Vec<Vertex> = g.vertices().filter(|&v| !g.in_q(v) && !used.contains(&v)).collect();
    let template_edges: Vec<(Vertex, Vertex)> = t
        .edges()
        .filter(|&(x, y)| {
            let inside = |z: Vertex| base.contains(&z) || new.contains(&z);
            inside(x) && inside(y) && (new.contains(&x) || new.contains(&y))
        })
        .collect();
    let mut count = 0;
    let mut chosen = Vec::new();
    fn rec(k: usize, free: &[Vertex], chosen: &mut Vec<Vertex>, check: &dyn Fn(&[Vertex]) -> bool, count: &mut u128) {
        if chosen.len() == k {
            if check(chosen) {
                *count += 1;
            }
            return;
        }
        for &v in free {
            if !chosen.contains(&v) {
                chosen.push(v);
                rec(k, free, chosen, check, count);
                chosen.pop();
            }
        }
    }
    let check = |chosen: &[Vertex]| {
        template_edges
            .iter()
            .all(|&(x, y)| g.is_edge(image(x, chosen), image(y, chosen)))
    };
    rec(new.len(), &free, &mut chosen, &check, &mut count);
    count
}

/// Direct recursive semantics: every quantifier ranges over all of `[n]`.
pub fn naive_eval(g: &Graph, f: &Formula, env: &mut Vec<(String, Vertex)>) -> bool {
    let all: Vec<Vertex> = g.vertices().collect();
    naive_eval_in(g, &all, f, env)
}

/// As [`naive_eval`], with quantifiers ranging over `domain` only.
pub fn naive_eval_in(g: &Graph, domain: &[Vertex], f: &Formula, env: &mut Vec<(String, Vertex)>) -> bool {
    let look = |env: &Vec<(String, Vertex)>, x: &str| env.iter().rev().find(|(y, _)| y == x).unwrap().1;
    match f {
        Formula::Eq(x, y) => look(env, x) == look(env, y),
        Formula::Q(x) => g.in_q(look(env, x)),
        Formula::R(x, y) => g.is_edge(look(env, x), look(env, y)),
        Formula::Not(a) => !naive_eval_in(g, domain, a, env),
        Formula::And(a, b) => naive_eval_in(g, domain, a, env) && naive_eval_in(g, domain, b, env),
        Formula::Or(a, b) => naive_eval_in(g, domain, a, env) || naive_eval_in(g, domain, b, env),
        Formula::Exists(x, body) | Formula::Forall(x, body) => {
            let universal = matches!(f, Formula::Forall(..));
            for &v in domain {
                env.push((x.clone(), v));
                let r = naive_eval_in(g, domain, body, env);
                env.pop();
                if r != universal {
                    return !universal;
                }
            }
            universal
        }
    }
}
