//! Evaluation of formulas on graphs.
//!
//! A formula is compiled once: variables become slots, negations are pushed
//! to the atoms and `forall x. φ` becomes `not exists x. not φ`. Each `exists`
//! then looks at the atoms that must hold in its body (conjuncts, seen
//! through nested `exists`) and that mention only its own variable and
//! variables already bound. Those atoms are checked as soon as the variable
//! is placed, and a positive one restricts the candidates: `x = y` to one
//! vertex, `R(x,y)` to the neighbours of `y`, `Q(x)` to `Q`. Only
//! unrestricted quantifiers range over all `n` vertices.

use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::Formula;
use crate::graph::{Graph, Vertex, VertexSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("free variable {0:?} has no assigned vertex")]
    Unassigned(String),
    #[error("variable {var:?} is assigned vertex {vertex}, outside 1..={n}")]
    VertexOutOfRange { var: String, vertex: Vertex, n: usize },
    #[error("evaluation at n = {n} needs about n^{depth} steps, over the budget of {budget}")]
    BudgetExceeded { n: usize, depth: u32, budget: f64 },
}

pub type Assignment = BTreeMap<String, Vertex>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Atom {
    Eq(usize, usize),
    Q(usize),
    R(usize, usize),
}

impl Atom {
    fn slots(&self) -> [usize; 2] {
        match *self {
            Atom::Eq(a, b) | Atom::R(a, b) => [a, b],
            Atom::Q(a) => [a, a],
        }
    }

    fn holds(&self, g: &Graph, env: &[Vertex]) -> bool {
        match *self {
            Atom::Eq(a, b) => env[a] == env[b],
            Atom::Q(a) => g.in_q(env[a]),
            Atom::R(a, b) => g.is_edge(env[a], env[b]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Guard {
    All,
    Equal(usize),
    Neighbors(usize),
    QSet,
    Nothing,
}

#[derive(Debug, Clone)]
struct Quant {
    slot: usize,
    guard: Guard,
    filters: Vec<(Atom, bool)>,
    body: Node,
}

#[derive(Debug, Clone)]
enum Node {
    Lit(Atom, bool),
    And(Vec<Node>),
    Or(Vec<Node>),
    Exists(Box<Quant>),
    NotExists(Box<Quant>),
}

/// A formula prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Compiled {
    root: Node,
    free: Vec<String>,
    slots: usize,
    unguarded_depth: u32,
}

struct Builder {
    scope: Vec<(String, usize)>,
    slots: usize,
}

impl Builder {
    fn slot(&self, x: &str) -> usize {
        self.scope
            .iter()
            .rev()
            .find(|(name, _)| name == x)
            .map(|&(_, s)| s)
            .expect("free variables are pre-bound")
    }

    fn quant(&mut self, x: &str, body: &Formula, negated: bool) -> Box<Quant> {
        let slot = self.slots;
        self.slots += 1;
        self.scope.push((x.to_string(), slot));
        let body = self.node(body, negated);
        self.scope.pop();
        Box::new(Quant {
            slot,
            guard: Guard::All,
            filters: Vec::new(),
            body,
        })
    }

    /// Negation normal form of `f`, negated when `negated` is set.
    fn node(&mut self, f: &Formula, negated: bool) -> Node {
        match f {
            Formula::Eq(x, y) => Node::Lit(Atom::Eq(self.slot(x), self.slot(y)), !negated),
            Formula::Q(x) => Node::Lit(Atom::Q(self.slot(x)), !negated),
            Formula::R(x, y) => Node::Lit(Atom::R(self.slot(x), self.slot(y)), !negated),
            Formula::Not(g) => self.node(g, !negated),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let parts = vec![self.node(a, negated), self.node(b, negated)];
                if matches!(f, Formula::And(..)) != negated {
                    Node::And(parts)
                } else {
                    Node::Or(parts)
                }
            }
            Formula::Exists(x, g) => {
                let q = self.quant(x, g, false);
                if negated {
                    Node::NotExists(q)
                } else {
                    Node::Exists(q)
                }
            }
            Formula::Forall(x, g) => {
                let q = self.quant(x, g, true);
                if negated {
                    Node::Exists(q)
                } else {
                    Node::NotExists(q)
                }
            }
        }
    }
}

/// Literals that must hold whenever `node` does.
fn required(node: &Node, out: &mut Vec<(Atom, bool)>) {
    match node {
        Node::Lit(a, pos) => out.push((*a, *pos)),
        Node::And(parts) => parts.iter().for_each(|p| required(p, out)),
        Node::Exists(q) => required(&q.body, out),
        Node::Or(_) | Node::NotExists(_) => {}
    }
}

fn plan(node: &mut Node, bound: &mut Vec<bool>) {
    match node {
        Node::Lit(..) => {}
        Node::And(parts) | Node::Or(parts) => parts.iter_mut().for_each(|p| plan(p, bound)),
        Node::Exists(q) | Node::NotExists(q) => {
            let mut lits = Vec::new();
            required(&q.body, &mut lits);
            let slot = q.slot;
            let usable = |s: usize| s == slot || bound[s];
            q.filters = lits
                .into_iter()
                .filter(|(a, _)| a.slots().contains(&slot) && a.slots().iter().all(|&s| usable(s)))
                .collect();
            q.filters.dedup();
            let mut guard = Guard::All;
            let rank = |g: &Guard| match g {
                Guard::Nothing => 0,
                Guard::Equal(_) => 1,
                Guard::Neighbors(_) => 2,
                Guard::QSet => 3,
                Guard::All => 4,
            };
            for &(a, pos) in &q.filters {
                if !pos {
                    continue;
                }
                let other = |x: usize, y: usize| if x == slot { y } else { x };
                let cand = match a {
                    Atom::Eq(x, y) if x == y => continue,
                    Atom::Eq(x, y) => Guard::Equal(other(x, y)),
                    Atom::R(x, y) if x == y => Guard::Nothing,
                    Atom::R(x, y) => Guard::Neighbors(other(x, y)),
                    Atom::Q(_) => Guard::QSet,
                };
                if rank(&cand) < rank(&guard) {
                    guard = cand;
                }
            }
            q.guard = guard;
            bound[slot] = true;
            plan(&mut q.body, bound);
            bound[slot] = false;
        }
    }
}

fn unguarded_depth(node: &Node) -> u32 {
    match node {
        Node::Lit(..) => 0,
        Node::And(parts) | Node::Or(parts) => parts.iter().map(unguarded_depth).max().unwrap_or(0),
        Node::Exists(q) | Node::NotExists(q) => u32::from(q.guard == Guard::All) + unguarded_depth(&q.body),
    }
}

impl Compiled {
    pub fn new(f: &Formula) -> Compiled {
        let free = f.free_vars();
        let mut b = Builder {
            scope: free.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect(),
            slots: free.len(),
        };
        let mut root = b.node(f, false);
        let mut bound = vec![false; b.slots];
        bound[..free.len()].fill(true);
        plan(&mut root, &mut bound);
        Compiled {
            unguarded_depth: unguarded_depth(&root),
            root,
            free,
            slots: b.slots,
        }
    }

    pub fn free_vars(&self) -> &[String] {
        &self.free
    }

    /// Nesting depth of quantifiers that range over every vertex; evaluation
    /// takes on the order of `n^depth` steps on sparse graphs.
    pub fn unguarded_depth(&self) -> u32 {
        self.unguarded_depth
    }

    pub fn check_budget(&self, n: usize, budget: f64) -> Result<(), EvalError> {
        let work = (n.max(1) as f64).powi(self.unguarded_depth as i32);
        if work > budget {
            return Err(EvalError::BudgetExceeded {
                n,
                depth: self.unguarded_depth,
                budget,
            });
        }
        Ok(())
    }

    pub fn eval(&self, g: &Graph, assignment: &Assignment) -> Result<bool, EvalError> {
        let mut env = vec![0; self.slots];
        for (i, x) in self.free.iter().enumerate() {
            let v = *assignment.get(x).ok_or_else(|| EvalError::Unassigned(x.clone()))?;
            if v == 0 || v as usize > g.n() {
                return Err(EvalError::VertexOutOfRange {
                    var: x.clone(),
                    vertex: v,
                    n: g.n(),
                });
            }
            env[i] = v;
        }
        Ok(Eval { g, env }.node(&self.root))
    }

    /// Evaluates with the free variables, in [`Formula::free_vars`] order,
    /// bound to `values`.
    pub fn eval_positional(&self, g: &Graph, values: &[Vertex]) -> Result<bool, EvalError> {
        if let Some(x) = self.free.get(values.len()) {
            return Err(EvalError::Unassigned(x.clone()));
        }
        let assignment = self.free.iter().cloned().zip(values.iter().copied()).collect();
        self.eval(g, &assignment)
    }
}

struct Eval<'g> {
    g: &'g Graph,
    env: Vec<Vertex>,
}

impl Eval<'_> {
    fn node(&mut self, node: &Node) -> bool {
        match node {
            Node::Lit(a, pos) => a.holds(self.g, &self.env) == *pos,
            Node::And(parts) => parts.iter().all(|p| self.node(p)),
            Node::Or(parts) => parts.iter().any(|p| self.node(p)),
            Node::Exists(q) => self.exists(q),
            Node::NotExists(q) => !self.exists(q),
        }
    }

    fn try_vertex(&mut self, q: &Quant, v: Vertex) -> bool {
        self.env[q.slot] = v;
        q.filters.iter().all(|(a, pos)| a.holds(self.g, &self.env) == *pos) && self.node(&q.body)
    }

    fn exists(&mut self, q: &Quant) -> bool {
        let g = self.g;
        match q.guard {
            Guard::All => g.vertices().any(|v| self.try_vertex(q, v)),
            Guard::Equal(s) => {
                let v = self.env[s];
                self.try_vertex(q, v)
            }
            Guard::Neighbors(s) => g.neighbors(self.env[s]).iter().any(|&v| self.try_vertex(q, v)),
            Guard::QSet => g.q_set().iter().any(|v| self.try_vertex(q, v)),
            Guard::Nothing => false,
        }
    }
}

/// Truth of `f` in `G` under `assignment`, which must cover the free
/// variables of `f`. `Q` is membership in the distinguished set, `R` is
/// adjacency.
pub fn evaluate(g: &Graph, f: &Formula, assignment: &Assignment) -> Result<bool, EvalError> {
    Compiled::new(f).eval(g, assignment)
}

/// Truth of `f` in the substructure induced on `Q ∪ params`, with the free
/// variables of `f` (in order of first occurrence) bound to `params`.
pub fn evaluate_restricted(g: &Graph, params: &[Vertex], f: &Formula) -> Result<bool, EvalError> {
    let compiled = Compiled::new(f);
    if let Some(x) = compiled.free_vars().get(params.len()) {
        return Err(EvalError::Unassigned(x.clone()));
    }
    let support = VertexSet::new(params.iter().copied()).union(g.q_set());
    let (sub, old) = g.induced_subgraph(&support).map_err(|_| {
        let i = params.iter().position(|&v| v == 0 || v as usize > g.n()).unwrap_or(0);
        EvalError::VertexOutOfRange {
            var: compiled.free_vars().get(i).cloned().unwrap_or_default(),
            vertex: params[i],
            n: g.n(),
        }
    })?;
    let relabelled: Vec<Vertex> = params
        .iter()
        .map(|v| old.binary_search(v).expect("params lie in the support") as Vertex + 1)
        .collect();
    compiled.eval_positional(&sub, &relabelled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn eval(g: &Graph, s: &str) -> bool {
        evaluate(g, &parse_formula(s).unwrap(), &Assignment::new()).unwrap()
    }

    #[test]
    fn triangle_and_irreflexivity() {
        let g = Graph::build(3, &[(1, 2), (2, 3), (1, 3)], VertexSet::empty()).unwrap();
        assert!(eval(&g, "exists x. exists y. exists z. (R(x,y)&R(y,z)&R(x,z))"));
        assert!(!eval(&g, "exists x. R(x,x)"));
    }

    #[test]
    fn q_membership() {
        let g = Graph::edgeless(2, VertexSet::new([1])).unwrap();
        assert!(!eval(&g, "forall x. Q(x)"));
        assert!(eval(&g, "exists x. Q(x)"));
    }

    #[test]
    fn free_variables_must_be_assigned() {
        let g = Graph::edgeless(2, VertexSet::empty()).unwrap();
        let f = parse_formula("exists x. R(x,y)").unwrap();
        assert_eq!(
            evaluate(&g, &f, &Assignment::new()),
            Err(EvalError::Unassigned("y".into()))
        );
        let bad: Assignment = [("y".to_string(), 3)].into();
        assert!(matches!(
            evaluate(&g, &f, &bad),
            Err(EvalError::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn guards_see_through_existential_chains() {
        let k4 = parse_formula(
            "exists a. exists b. exists c. exists d. \
             (R(a,b) & R(a,c) & R(a,d) & R(b,c) & R(b,d) & R(c,d))",
        )
        .unwrap();
        assert_eq!(Compiled::new(&k4).unguarded_depth(), 1);
        let all = parse_formula("forall x. exists y. R(x,y)").unwrap();
        assert_eq!(Compiled::new(&all).unguarded_depth(), 1);
        let c = Compiled::new(&k4);
        assert!(c.check_budget(1000, 1e3).is_ok());
        assert!(c.check_budget(1001, 1e3).is_err());
    }

    #[test]
    fn shadowed_variables() {
        let g = Graph::build(3, &[(1, 2)], VertexSet::new([3])).unwrap();
        // inner x is a fresh variable
        assert!(eval(&g, "exists x. Q(x) & exists x. R(x,x) | ~Q(x)"));
        assert!(!eval(&g, "exists x. Q(x) & (exists x. R(x,x))"));
    }

    #[test]
    fn restricted_evaluation() {
        let g = Graph::build(3, &[(1, 2)], VertexSet::empty()).unwrap();
        let f = parse_formula("Q(x1)").unwrap();
        assert!(!evaluate_restricted(&g, &[1], &f).unwrap());
        // 1's only neighbour lies outside Q ∪ {1}
        let f = parse_formula("exists y. R(x1,y)").unwrap();
        assert!(!evaluate_restricted(&g, &[1], &f).unwrap());
        let full: Assignment = [("x1".to_string(), 1)].into();
        assert!(evaluate(&g, &f, &full).unwrap());
        // Q ∪ params = [n]
        let h = g.with_q(VertexSet::new([2, 3])).unwrap();
        assert!(evaluate_restricted(&h, &[1], &f).unwrap());
    }

    #[test]
    fn empty_substructure() {
        let g = Graph::edgeless(2, VertexSet::empty()).unwrap();
        assert!(!evaluate_restricted(&g, &[], &parse_formula("exists x. x = x").unwrap()).unwrap());
        assert!(evaluate_restricted(&g, &[], &parse_formula("forall x. Q(x)").unwrap()).unwrap());
    }
}
