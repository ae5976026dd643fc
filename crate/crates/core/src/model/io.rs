//! Plain-text model files.
//!
//! ```text
//! # comments and blank lines are ignored
//! nodes 4
//! cards 2 2 2 2
//! labels S L A C          (optional)
//! edge 0 1
//! edge 1 2
//! factor 0 1              (one block per maximal clique)
//! weight 1.5
//! table 1 1 0 1
//! ```
//!
//! Tables are flat in mixed-radix order over the factor's nodes, first listed
//! node least significant. The canonical form written by [`serialize`] lists
//! edges `i < j` in sorted order, factors in clique order, and reals in
//! shortest round-trip notation.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::model::{CliqueFactor, LogLinearModel};

#[derive(Clone, Debug, PartialEq)]
pub struct ModelDocument {
    pub model: LogLinearModel,
    pub labels: Option<Vec<String>>,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<(usize, &'a str)>,
}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        column,
        message: message.into(),
    })
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in content.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push((s + 1, &content[s..pos]));
                }
            } else if start.is_none() {
                start = Some(pos);
            }
        }
        if let Some(s) = start {
            tokens.push((s + 1, &content[s..]));
        }
        if !tokens.is_empty() {
            out.push(Line { number: i + 1, tokens });
        }
    }
    out
}

fn parse_usize(line: usize, (col, tok): (usize, &str)) -> Result<usize> {
    tok.parse()
        .or_else(|_| err(line, col, format!("expected a non-negative integer, found `{tok}`")))
}

fn parse_f64(line: usize, (col, tok): (usize, &str)) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(line, col, format!("expected a finite real, found `{tok}`")),
    }
}

pub fn parse(text: &str) -> Result<ModelDocument> {
    let lines = tokenize(text);
    let mut it = lines.iter().peekable();
    let mut expect = |kw: &str| -> Result<&Line> {
        match it.next() {
            Some(l) if l.tokens[0].1 == kw => Ok(l),
            Some(l) => err(l.number, l.tokens[0].0, format!("expected `{kw}`, found `{}`", l.tokens[0].1)),
            None => err(lines.last().map_or(1, |l| l.number + 1), 1, format!("unexpected end of file, expected `{kw}`")),
        }
    };
    let l = expect("nodes")?;
    if l.tokens.len() != 2 {
        return err(l.number, l.tokens[0].0, "`nodes` takes exactly one value");
    }
    let n = parse_usize(l.number, l.tokens[1])?;
    let l = expect("cards")?;
    if l.tokens.len() != n + 1 {
        return err(l.number, l.tokens[0].0, format!("`cards` needs {n} values, found {}", l.tokens.len() - 1));
    }
    let cards = l.tokens[1..]
        .iter()
        .map(|&t| parse_usize(l.number, t))
        .collect::<Result<Vec<_>>>()?;

    let mut labels = None;
    let mut graph = UndirectedGraph::new(n);
    let mut factors = Vec::new();
    let mut rest = lines.iter().skip(2).peekable();
    if let Some(l) = rest.peek() {
        if l.tokens[0].1 == "labels" {
            if l.tokens.len() != n + 1 {
                return err(l.number, l.tokens[0].0, format!("`labels` needs {n} names"));
            }
            labels = Some(l.tokens[1..].iter().map(|t| t.1.to_string()).collect());
            rest.next();
        }
    }
    while let Some(l) = rest.peek() {
        if l.tokens[0].1 != "edge" {
            break;
        }
        if l.tokens.len() != 3 {
            return err(l.number, l.tokens[0].0, "`edge` takes two node ids");
        }
        let a = parse_usize(l.number, l.tokens[1])?;
        let b = parse_usize(l.number, l.tokens[2])?;
        if let Err(Error::Input(m)) = graph.add_edge(a, b) {
            return err(l.number, l.tokens[1].0, m);
        }
        rest.next();
    }
    while let Some(l) = rest.next() {
        if l.tokens[0].1 != "factor" {
            return err(l.number, l.tokens[0].0, format!("expected `factor`, found `{}`", l.tokens[0].1));
        }
        let clique = l.tokens[1..]
            .iter()
            .map(|&t| parse_usize(l.number, t))
            .collect::<Result<Vec<_>>>()?;
        let header = l.number;
        let wl = match rest.next() {
            Some(w) if w.tokens[0].1 == "weight" && w.tokens.len() == 2 => w,
            Some(w) => return err(w.number, w.tokens[0].0, "expected `weight <real>`"),
            None => return err(header + 1, 1, "unexpected end of file, expected `weight`"),
        };
        let weight = parse_f64(wl.number, wl.tokens[1])?;
        let tl = match rest.next() {
            Some(t) if t.tokens[0].1 == "table" => t,
            Some(t) => return err(t.number, t.tokens[0].0, "expected `table`"),
            None => return err(wl.number + 1, 1, "unexpected end of file, expected `table`"),
        };
        let table = tl.tokens[1..]
            .iter()
            .map(|&t| parse_f64(tl.number, t))
            .collect::<Result<Vec<_>>>()?;
        factors.push((header, CliqueFactor { clique, weight, table }));
    }
    let first_factor_line = factors.first().map_or(1, |f| f.0);
    let model = LogLinearModel::new(graph, cards, factors.into_iter().map(|f| f.1).collect()).or_else(|e| match e {
        Error::Input(m) => err(first_factor_line, 1, m),
        other => Err(other),
    })?;
    Ok(ModelDocument { model, labels })
}

pub fn serialize(doc: &ModelDocument) -> String {
    let m = &doc.model;
    let mut s = String::new();
    writeln!(s, "nodes {}", m.node_count()).unwrap();
    let cards: Vec<String> = m.cards.iter().map(|c| c.to_string()).collect();
    writeln!(s, "cards {}", cards.join(" ")).unwrap();
    if let Some(labels) = &doc.labels {
        writeln!(s, "labels {}", labels.join(" ")).unwrap();
    }
    for (a, b) in m.graph().edges() {
        writeln!(s, "edge {a} {b}").unwrap();
    }
    for f in m.factors() {
        let ids: Vec<String> = f.clique.iter().map(|v| v.to_string()).collect();
        writeln!(s, "factor {}", ids.join(" ")).unwrap();
        writeln!(s, "weight {:?}", f.weight).unwrap();
        let vals: Vec<String> = f.table.iter().map(|v| format!("{v:?}")).collect();
        writeln!(s, "table {}", vals.join(" ")).unwrap();
    }
    s
}
