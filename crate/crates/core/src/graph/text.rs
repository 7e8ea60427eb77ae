//! Line-oriented graph description files.
//!
//! ```text
//! # comment
//! graph <name>
//! vertex <id>
//! iedge <id> <v_from> <v_to> <length>
//! eedge <id> <v>
//! tadpole <id> <v> <length>
//! wentzell <v> a=<float> c=<float>
//! wb <v> <edge-id>[:start|:finish] <float>
//! ```
//!
//! Declarations may appear in any order. `wb` entries for a tadpole without
//! an end suffix apply to both ends.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use super::{End, GraphBuilder, GraphError, MetricGraph};
use crate::wentzell::{Violation, WentzellData, WentzellError, WentzellSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    Graph(GraphError),
    Wentzell(Vec<Violation>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ParseError {
    /// 1-based line number, 0 when no single line is to blame.
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: ", self.line)?;
        }
        match &self.kind {
            ParseErrorKind::Syntax(msg) => f.write_str(msg),
            ParseErrorKind::Graph(e) => write!(f, "{e}"),
            ParseErrorKind::Wentzell(v) => {
                let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
                write!(f, "invalid Wentzell data: {}", msgs.join("; "))
            }
        }
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        kind: ParseErrorKind::Syntax(msg.into()),
    }
}

fn number(line: usize, tok: &str) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .map_err(|_| syntax(line, format!("expected a number, found `{tok}`")))
}

fn keyed(line: usize, tok: &str, key: &str) -> Result<f64, ParseError> {
    let value = tok
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| syntax(line, format!("expected `{key}=<float>`, found `{tok}`")))?;
    number(line, value)
}

/// Parses a graph file into a validated graph and its boundary data.
pub fn parse_graph(text: &str) -> Result<(MetricGraph, WentzellData), ParseError> {
    let mut name = String::from("unnamed");
    let mut builder_vertices = Vec::new();
    let mut builder_edges: Vec<(usize, Vec<String>)> = Vec::new();
    let mut spec = WentzellSpec::new();
    let mut has_tadpoles = false;
    // first line mentioning each id, for error reporting
    let mut mentions: HashMap<String, usize> = HashMap::new();
    let mut declared: HashMap<String, usize> = HashMap::new();
    let mut data_lines: HashMap<String, usize> = HashMap::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let expect = |n: usize| {
            if toks.len() == n {
                Ok(())
            } else {
                Err(syntax(
                    line,
                    format!("`{}` takes {} arguments, found {}", toks[0], n - 1, toks.len() - 1),
                ))
            }
        };
        let mut declare = |id: &str| {
            if declared.insert(id.to_string(), line).is_some() {
                Err(ParseError {
                    line,
                    kind: ParseErrorKind::Graph(GraphError::DuplicateId(id.to_string())),
                })
            } else {
                Ok(())
            }
        };
        match toks[0] {
            "graph" => {
                expect(2)?;
                name = toks[1].to_string();
            }
            "vertex" => {
                expect(2)?;
                declare(toks[1])?;
                builder_vertices.push(toks[1].to_string());
            }
            "iedge" => {
                expect(5)?;
                declare(toks[1])?;
                number(line, toks[4])?;
                for v in &toks[2..4] {
                    mentions.entry(v.to_string()).or_insert(line);
                }
                builder_edges.push((line, toks.iter().map(|s| s.to_string()).collect()));
            }
            "eedge" => {
                expect(3)?;
                declare(toks[1])?;
                mentions.entry(toks[2].to_string()).or_insert(line);
                builder_edges.push((line, toks.iter().map(|s| s.to_string()).collect()));
            }
            "tadpole" => {
                expect(4)?;
                declare(toks[1])?;
                number(line, toks[3])?;
                mentions.entry(toks[2].to_string()).or_insert(line);
                has_tadpoles = true;
                builder_edges.push((line, toks.iter().map(|s| s.to_string()).collect()));
            }
            "wentzell" => {
                if !(2..=4).contains(&toks.len()) {
                    return Err(syntax(line, "usage: wentzell <v> a=<float> c=<float>"));
                }
                let mut a = 0.0;
                let mut c = 0.0;
                for tok in &toks[2..] {
                    if tok.starts_with("a=") {
                        a = keyed(line, tok, "a")?;
                    } else {
                        c = keyed(line, tok, "c")?;
                    }
                }
                data_lines.entry(toks[1].to_string()).or_insert(line);
                spec.set_vertex(toks[1], a, c);
            }
            "wb" => {
                expect(4)?;
                let value = number(line, toks[3])?;
                let (edge, end) = match toks[2].split_once(':') {
                    Some((e, "start")) => (e, Some(End::Start)),
                    Some((e, "finish")) => (e, Some(End::Finish)),
                    Some((_, other)) => {
                        return Err(syntax(line, format!("unknown edge end `{other}`")))
                    }
                    None => (toks[2], None),
                };
                data_lines.entry(toks[1].to_string()).or_insert(line);
                spec.set_b(toks[1], edge, end, value);
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    let mut b = GraphBuilder::new(name);
    for v in &builder_vertices {
        b = b.vertex(v);
    }
    for (line, toks) in &builder_edges {
        b = match toks[0].as_str() {
            "iedge" => b.internal(&toks[1], &toks[2], &toks[3], number(*line, &toks[4])?),
            "eedge" => b.external(&toks[1], &toks[2]),
            _ => b.tadpole(&toks[1], &toks[2], number(*line, &toks[3])?),
        };
    }
    let built = if has_tadpoles {
        b.build_with_tadpoles()
    } else {
        b.build()
    };
    let g = built.map_err(|e| {
        let line = match &e {
            GraphError::UndeclaredVertex(v) => mentions.get(v).copied().unwrap_or(0),
            GraphError::Tadpole(id) | GraphError::InvalidLength { edge: id, .. } => {
                declared.get(id).copied().unwrap_or(0)
            }
            GraphError::IsolatedVertex(v) => declared.get(v).copied().unwrap_or(0),
            _ => 0,
        };
        ParseError {
            line,
            kind: ParseErrorKind::Graph(e),
        }
    })?;
    let data = WentzellData::from_spec(&spec, &g).map_err(|e| {
        let violations = match e {
            WentzellError::Invalid(v) => v,
            WentzellError::Graph(g) => {
                return ParseError {
                    line: 0,
                    kind: ParseErrorKind::Graph(g),
                }
            }
        };
        let line = violations
            .iter()
            .find_map(|v| match v {
                Violation::UnknownVertex(name)
                | Violation::SumMismatch { vertex: name, .. }
                | Violation::KillingWeightOne { vertex: name }
                | Violation::NonIncident { vertex: name, .. }
                | Violation::OutOfRange { vertex: name, .. }
                | Violation::DuplicateEntry { vertex: name, .. } => data_lines.get(name).copied(),
            })
            .unwrap_or(0);
        ParseError {
            line,
            kind: ParseErrorKind::Wentzell(violations),
        }
    })?;
    Ok((g, data))
}

/// Writes a graph and its data in the file format read by [`parse_graph`].
/// Lengths use the shortest representation that parses back to the same
/// `f64`.
pub fn write_graph(g: &MetricGraph, data: &WentzellData) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {}", g.name());
    for v in g.vertices() {
        let _ = writeln!(out, "vertex {}", g.vertex_name(v));
    }
    for e in g.edge_ids() {
        let edge = g.edge(e);
        let _ = match edge.kind {
            super::EdgeKind::Internal { from, to, length } if from == to => writeln!(
                out,
                "tadpole {} {} {:?}",
                edge.name,
                g.vertex_name(from),
                length
            ),
            super::EdgeKind::Internal { from, to, length } => writeln!(
                out,
                "iedge {} {} {} {:?}",
                edge.name,
                g.vertex_name(from),
                g.vertex_name(to),
                length
            ),
            super::EdgeKind::External { from } => {
                writeln!(out, "eedge {} {}", edge.name, g.vertex_name(from))
            }
        };
    }
    for v in g.vertices() {
        let d = data.vertex(v);
        let name = g.vertex_name(v);
        let _ = writeln!(out, "wentzell {name} a={:?} c={:?}", d.a, d.c);
        for (inc, b) in g.incidences(v).iter().zip(&d.b) {
            let edge = g.edge(inc.edge);
            let suffix = match (edge.is_tadpole(), inc.end) {
                (false, _) => "",
                (true, End::Start) => ":start",
                (true, End::Finish) => ":finish",
            };
            let _ = writeln!(out, "wb {name} {}{suffix} {:?}", edge.name, b);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_interval() {
        let text = "graph g\nvertex v1\nvertex v2\niedge i1 v1 v2 1.0\n\
                    wentzell v1 a=0 c=0\nwb v1 i1 1\nwentzell v2 a=0 c=1\n";
        let (g, data) = parse_graph(text).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.internal_edges().count(), 1);
        assert_eq!(g.external_edges().count(), 0);
        assert_eq!(data.c(g.vertex_id("v2").unwrap()), 1.0);
    }

    #[test]
    fn reports_undeclared_vertex_with_line() {
        let text = "vertex v1\nvertex v2\n# c\niedge i1 v1 v9 1.0\n";
        let err = parse_graph(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.to_string().contains("undeclared vertex v9"), "{err}");
    }

    #[test]
    fn reports_syntax_errors() {
        let err = parse_graph("vertex v1\niedge i1 v1 v1 abc\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_graph("frobnicate x\n").unwrap_err();
        assert!(err.to_string().contains("unknown directive"));
        let err = parse_graph("vertex v\nvertex v\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(err.kind, ParseErrorKind::Graph(GraphError::DuplicateId(_))));
    }

    #[test]
    fn reports_wentzell_violation() {
        let text = "vertex v\needge e1 v\needge e2 v\n\
                    wentzell v a=0.1 c=0.1\nwb v e1 0.5\nwb v e2 0.5\n";
        let err = parse_graph(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(matches!(err.kind, ParseErrorKind::Wentzell(_)));
    }

    #[test]
    fn write_then_parse_is_identity() {
        let text = "graph t\nvertex v\nvertex w\ntadpole t v 2.0\niedge i v w 1.4142135623730951\n\
                    eedge e w\nwentzell v a=0.1 c=0.2\nwb v t:start 0.3\nwb v t:finish 0.2\n\
                    wb v i 0.2\nwentzell w a=0 c=0\nwb w i 0.5\nwb w e 0.5\n";
        let (g, data) = parse_graph(text).unwrap();
        let (h, data2) = parse_graph(&write_graph(&g, &data)).unwrap();
        assert_eq!(g.canonical_form(), h.canonical_form());
        assert_eq!(data, data2);
    }
}
