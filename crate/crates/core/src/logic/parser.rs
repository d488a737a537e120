//! Recursive-descent parser for formulas such as
//! `forall x. exists y. (R(x,y) & ~Q(y))`.
//!
//! Precedence is `~` over `&` over `|`; a quantifier's scope extends as far
//! right as possible. A quantified formula may appear wherever an atom can,
//! so `~exists x. x = x` and `Q(x) & forall y. R(x,y)` parse.

use thiserror::Error;

use super::ast::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    /// `position` counts tokens from 1; one past the last token means end
    /// of input.
    #[error("syntax error at token {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown predicate symbol {name:?} at token {position}")]
    UnknownPredicate { name: String, position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Var(String),
    Pred(String),
    Forall,
    Exists,
    Dot,
    Amp,
    Bar,
    Tilde,
    LParen,
    RParen,
    Equals,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Var(x) => format!("variable {x:?}"),
            Tok::Pred(p) => format!("predicate {p:?}"),
            Tok::Forall => "\"forall\"".into(),
            Tok::Exists => "\"exists\"".into(),
            Tok::Dot => "\".\"".into(),
            Tok::Amp => "\"&\"".into(),
            Tok::Bar => "\"|\"".into(),
            Tok::Tilde => "\"~\"".into(),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::Equals => "\"=\"".into(),
            Tok::Comma => "\",\"".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Tok>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '.' => Some(Tok::Dot),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Bar),
            '~' => Some(Tok::Tilde),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Equals),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            toks.push(t);
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            toks.push(match word.as_str() {
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                _ if c.is_ascii_lowercase() && word.chars().all(|d| d.is_ascii_lowercase() || d.is_ascii_digit()) => {
                    Tok::Var(word)
                }
                _ if c.is_ascii_uppercase() => Tok::Pred(word),
                _ => {
                    return Err(ParseError::Syntax {
                        position: toks.len() + 1,
                        message: format!("invalid identifier {word:?}"),
                    })
                }
            });
            continue;
        }
        return Err(ParseError::Syntax {
            position: toks.len() + 1,
            message: format!("unexpected character {c:?}"),
        });
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of input".into(),
        };
        Err(ParseError::Syntax {
            position: self.pos + 1,
            message: format!("expected {expected}, found {found}"),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(&t.describe())
        }
    }

    fn var(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Var(x)) => {
                let x = x.clone();
                self.pos += 1;
                Ok(x)
            }
            _ => self.error("a variable"),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conjunction()?;
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.term()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            f = Formula::and(f, self.term()?);
        }
        Ok(f)
    }

    fn term(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(!self.term()?)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Forall | Tok::Exists) => {
                let universal = self.peek() == Some(&Tok::Forall);
                self.pos += 1;
                let x = self.var()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(if universal {
                    Formula::forall(&x, body)
                } else {
                    Formula::exists(&x, body)
                })
            }
            Some(Tok::Var(_)) => {
                let x = self.var()?;
                self.expect(Tok::Equals)?;
                Ok(Formula::Eq(x, self.var()?))
            }
            Some(Tok::Pred(p)) => {
                let (name, position) = (p.clone(), self.pos + 1);
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let x = self.var()?;
                let f = match name.as_str() {
                    "Q" => Formula::Q(x),
                    "R" => {
                        self.expect(Tok::Comma)?;
                        Formula::R(x, self.var()?)
                    }
                    _ => return Err(ParseError::UnknownPredicate { name, position }),
                };
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ => self.error("a formula"),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return p.error("end of input");
    }
    Ok(f)
}
