//! Edge-list text format.
//!
//! ```text
//! n 5 q 1,2
//! 1 2
//! 2 3
//! ```
//!
//! The header line carries the vertex count and the comma-separated `Q`
//! (nothing after `q` when `Q` is empty). Pair templates add `h0 <ids>` and
//! `h1 <ids>` to the header. Blank lines and lines starting with `#` are
//! ignored.

use std::fmt::Write;

use itertools::Itertools;

use crate::alpha::PairSpec;
use crate::graph::{Graph, GraphError, Vertex, VertexSet};

fn ids(set: &VertexSet) -> String {
    set.iter().join(",")
}

fn header_field(out: &mut String, key: &str, set: &VertexSet) {
    out.push(' ');
    out.push_str(key);
    if !set.is_empty() {
        out.push(' ');
        out.push_str(&ids(set));
    }
}

fn body(g: &Graph, mut out: String) -> String {
    out.push('\n');
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("n {}", g.n());
    header_field(&mut out, "q", g.q_set());
    body(g, out)
}

pub fn write_pair(p: &PairSpec) -> String {
    let mut out = format!("n {}", p.ambient().n());
    header_field(&mut out, "q", p.ambient().q_set());
    header_field(&mut out, "h0", p.h0());
    header_field(&mut out, "h1", p.h1());
    body(p.ambient(), out)
}

struct Header {
    n: usize,
    q: VertexSet,
    h0: Option<VertexSet>,
    h1: Option<VertexSet>,
}

fn perr(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_ids(line: usize, s: &str) -> Result<VertexSet, GraphError> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<Vertex>()
                .map_err(|_| perr(line, format!("bad vertex id `{t}`")))
        })
        .collect()
}

fn is_key(t: &str) -> bool {
    matches!(t, "n" | "q" | "h0" | "h1")
}

fn parse_header(line: usize, text: &str) -> Result<Header, GraphError> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let mut n = None;
    let mut q = None;
    let mut h0 = None;
    let mut h1 = None;
    let mut i = 0;
    while i < toks.len() {
        let key = toks[i];
        if !is_key(key) {
            return Err(perr(line, format!("unexpected header token `{key}`")));
        }
        let value = toks.get(i + 1).filter(|t| !is_key(t)).copied();
        i += if value.is_some() { 2 } else { 1 };
        match key {
            "n" => {
                let v = value.ok_or_else(|| perr(line, "missing vertex count"))?;
                n = Some(
                    v.parse::<usize>()
                        .map_err(|_| perr(line, format!("bad vertex count `{v}`")))?,
                );
            }
            "q" => q = Some(parse_ids(line, value.unwrap_or(""))?),
            "h0" => h0 = Some(parse_ids(line, value.unwrap_or(""))?),
            _ => h1 = Some(parse_ids(line, value.unwrap_or(""))?),
        }
    }
    Ok(Header {
        n: n.ok_or_else(|| perr(line, "header lacks `n`"))?,
        q: q.unwrap_or_default(),
        h0,
        h1,
    })
}

fn parse_any(text: &str) -> Result<(Graph, Header), GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, htext) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let header = parse_header(hl, htext)?;
    let mut edges = Vec::new();
    for (ln, l) in lines {
        let mut it = l.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(perr(ln, "expected `u v`"));
        };
        let parse = |t: &str| {
            t.parse::<Vertex>()
                .map_err(|_| perr(ln, format!("bad vertex id `{t}`")))
        };
        edges.push((parse(a)?, parse(b)?));
    }
    let g = Graph::build(header.n, &edges, header.q.clone())?;
    Ok((g, header))
}

pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    parse_any(text).map(|(g, _)| g)
}

/// Parses a pair template. Missing `h0` means the empty set.
pub fn parse_pair(text: &str) -> Result<PairSpec, GraphError> {
    let (g, header) = parse_any(text)?;
    let h1 = header.h1.ok_or_else(|| perr(1, "pair template lacks `h1`"))?;
    PairSpec::new(g, header.h0.unwrap_or_default(), h1).map_err(|e| perr(1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = Graph::build(5, &[(2, 1), (3, 5)], VertexSet::new([1, 4])).unwrap();
        let text = write_graph(&g);
        assert_eq!(text, "n 5 q 1,4\n1 2\n3 5\n");
        assert_eq!(parse_graph(&text).unwrap(), g);
    }

    #[test]
    fn empty_q_header() {
        let g = Graph::build(2, &[(1, 2)], VertexSet::empty()).unwrap();
        let text = write_graph(&g);
        assert_eq!(text, "n 2 q\n1 2\n");
        assert_eq!(parse_graph(&text).unwrap(), g);
    }

    #[test]
    fn pair_round_trip() {
        let text = "# triangle over a\nn 3 q h0 1 h1 1,2,3\n1 2\n1 3\n2 3\n";
        let p = parse_pair(text).unwrap();
        assert_eq!(p.h0(), &VertexSet::new([1]));
        assert_eq!(p.h1(), &VertexSet::range(1, 3));
        assert_eq!(parse_pair(&write_pair(&p)).unwrap(), p);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_graph("").is_err());
        assert!(parse_graph("q 1\n").is_err());
        assert!(matches!(
            parse_graph("n 3\n1 x\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert_eq!(parse_graph("n 3\n2 2\n"), Err(GraphError::SelfLoop(2)));
        assert!(parse_pair("n 3 h0 1\n").is_err());
    }
}
