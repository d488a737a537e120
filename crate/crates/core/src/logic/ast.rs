use std::fmt;

/// First-order formula over `{=, Q, R}`. Variables are names; a quantifier
/// binds every free occurrence of its variable in the body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(String, String),
    Q(String),
    R(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl std::ops::Not for Formula {
    type Output = Formula;

    fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, body: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(body))
    }

    pub fn forall(x: &str, body: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(body))
    }

    /// Free variables in order of first occurrence, left to right.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let mut note = |x: &String, bound: &Vec<String>| {
            if !bound.contains(x) && !out.contains(x) {
                out.push(x.clone());
            }
        };
        match self {
            Formula::Eq(x, y) | Formula::R(x, y) => {
                note(x, bound);
                note(y, bound);
            }
            Formula::Q(x) => note(x, bound),
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(x, f) | Formula::Forall(x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Maximum nesting of quantifiers; atoms have depth 0.
    pub fn qdepth(&self) -> u32 {
        match self {
            Formula::Eq(..) | Formula::Q(_) | Formula::R(..) => 0,
            Formula::Not(f) => f.qdepth(),
            Formula::And(a, b) | Formula::Or(a, b) => a.qdepth().max(b.qdepth()),
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.qdepth(),
        }
    }

    fn is_quant(&self) -> bool {
        matches!(self, Formula::Exists(..) | Formula::Forall(..))
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Canonical text: parsing it gives back the same tree. `&` and `|` chains
/// associate to the left; quantifiers are parenthesised whenever they are
/// not the whole formula or a quantifier body.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(x, y) => write!(f, "{x} = {y}"),
            Formula::Q(x) => write!(f, "Q({x})"),
            Formula::R(x, y) => write!(f, "R({x},{y})"),
            Formula::Not(g) => {
                f.write_str("~")?;
                let parens = matches!(**g, Formula::And(..) | Formula::Or(..)) || g.is_quant();
                g.fmt_operand(f, parens)
            }
            Formula::And(a, b) => {
                a.fmt_operand(f, matches!(**a, Formula::Or(..)) || a.is_quant())?;
                f.write_str(" & ")?;
                b.fmt_operand(f, matches!(**b, Formula::And(..) | Formula::Or(..)) || b.is_quant())
            }
            Formula::Or(a, b) => {
                a.fmt_operand(f, a.is_quant())?;
                f.write_str(" | ")?;
                b.fmt_operand(f, matches!(**b, Formula::Or(..)) || b.is_quant())
            }
            Formula::Exists(x, g) => write!(f, "exists {x}. {g}"),
            Formula::Forall(x, g) => write!(f, "forall {x}. {g}"),
        }
    }
}
