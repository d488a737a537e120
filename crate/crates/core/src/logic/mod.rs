//! First-order formulas over the vocabulary `{=, Q, R}`: syntax, parsing
//! and evaluation on graphs.

mod ast;
mod eval;
mod parser;

pub use ast::Formula;
pub use eval::{evaluate, evaluate_restricted, Assignment, Compiled, EvalError};
pub use parser::{parse_formula, ParseError};
