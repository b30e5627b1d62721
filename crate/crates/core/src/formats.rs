//! Plain-text dumps of graphs, reductions and unfoldings.
//!
//! ```text
//! graph <lo> <hi>
//! v <index> <color>
//! e <left-index> <color>
//! f <vertex> <image>        g <vertex> <image>
//! fe <left> <image-left>    ge <left> <image-left>
//! ```
//!
//! Lines starting with `#` are comments. Several unfoldings in one file are
//! separated by blank lines.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::graphs::{Color, ColoredGraph, Edge, GraphError, Reduction};
use crate::unfoldings::{GraphPair, Unfolding, UnfoldingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Missing(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Unfolding(#[from] UnfoldingError),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// Writes a graph in dump format.
pub struct GraphDump<'a>(pub &'a ColoredGraph);

impl fmt::Display for GraphDump<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.0;
        writeln!(f, "graph {} {}", g.lo(), g.hi())?;
        for (v, c) in g.vertices().zip(g.vertex_colors()) {
            writeln!(f, "v {v} {c}")?;
        }
        for (e, c) in g.edges().zip(g.edge_colors()) {
            writeln!(f, "e {} {c}", e.left)?;
        }
        Ok(())
    }
}

/// The maps of an unfolding or reduction dump, before a target is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapDump {
    pub domain: ColoredGraph,
    pub f: Vec<i64>,
    pub fe: Vec<Edge>,
    pub g: Vec<i64>,
    pub ge: Vec<Edge>,
}

impl MapDump {
    pub fn into_unfolding(self, pair: Arc<GraphPair>) -> Result<Unfolding, FormatError> {
        let n = self.domain.vertex_count();
        if self.g.len() != n || self.ge.len() + 1 != n {
            return Err(FormatError::Missing(
                "unfolding dump needs g and ge lines for every vertex and edge".into(),
            ));
        }
        Ok(Unfolding::new(
            pair,
            self.domain,
            self.f,
            self.fe,
            self.g,
            self.ge,
        )?)
    }

    /// The `f`/`fe` maps as a reduction into `target`.
    pub fn into_reduction(self, target: Arc<ColoredGraph>) -> Result<Reduction, FormatError> {
        Ok(Reduction::new(
            Arc::new(self.domain),
            target,
            self.f,
            self.fe,
        )?)
    }
}

fn tokens(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

fn int(line: usize, s: &str) -> Result<i64, FormatError> {
    s.parse()
        .map_err(|_| syntax(line, format!("expected an integer, got `{s}`")))
}

fn color(line: usize, s: &str) -> Result<Color, FormatError> {
    match s {
        "0" => Ok(Color::Zero),
        "1" => Ok(Color::One),
        _ => Err(syntax(line, format!("expected color 0 or 1, got `{s}`"))),
    }
}

/// Fills `slot[k - lo]` once per index.
fn put<T>(
    slots: &mut [Option<T>],
    lo: i64,
    k: i64,
    value: T,
    line: usize,
    what: &str,
) -> Result<(), FormatError> {
    let idx = k - lo;
    if idx < 0 || idx as usize >= slots.len() {
        return Err(syntax(line, format!("{what} index {k} outside the graph")));
    }
    let slot = &mut slots[idx as usize];
    if slot.is_some() {
        return Err(syntax(line, format!("duplicate {what} {k}")));
    }
    *slot = Some(value);
    Ok(())
}

fn complete<T>(slots: Vec<Option<T>>, lo: i64, what: &str) -> Result<Vec<T>, FormatError> {
    slots
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            s.ok_or_else(|| FormatError::Missing(format!("no {what} line for {}", lo + i as i64)))
        })
        .collect()
}

pub fn parse_graph(text: &str) -> Result<ColoredGraph, FormatError> {
    let dump = parse_maps(text)?;
    if !dump.f.is_empty() || !dump.g.is_empty() {
        return Err(FormatError::Missing("graph dump contains map lines".into()));
    }
    Ok(dump.domain)
}

/// Parses one graph with any `f`/`g`/`fe`/`ge` lines that follow it. Map
/// kinds that do not appear come back empty.
pub fn parse_maps(text: &str) -> Result<MapDump, FormatError> {
    let mut lines = tokens(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| FormatError::Missing("empty input, expected `graph lo hi`".into()))?;
    if header.len() != 3 || header[0] != "graph" {
        return Err(syntax(hl, "expected `graph <lo> <hi>`"));
    }
    let lo = int(hl, header[1])?;
    let hi = int(hl, header[2])?;
    if hi <= lo {
        return Err(GraphError::TooSmall { lo, hi }.into());
    }
    let nv = (hi - lo + 1) as usize;
    let mut vc = vec![None; nv];
    let mut ec = vec![None; nv - 1];
    let mut maps: BTreeMap<&str, Vec<Option<i64>>> = BTreeMap::new();
    for (line, t) in lines {
        if t.len() != 3 {
            return Err(syntax(line, format!("expected 3 fields, got {}", t.len())));
        }
        let k = int(line, t[1])?;
        match t[0] {
            "v" => put(&mut vc, lo, k, color(line, t[2])?, line, "vertex")?,
            "e" => put(&mut ec, lo, k, color(line, t[2])?, line, "edge")?,
            key @ ("f" | "g" | "fe" | "ge") => {
                let len = if key.len() == 1 { nv } else { nv - 1 };
                let slots = maps.entry(key).or_insert_with(|| vec![None; len]);
                put(slots, lo, k, int(line, t[2])?, line, key)?;
            }
            other => return Err(syntax(line, format!("unknown line kind `{other}`"))),
        }
    }
    let domain = ColoredGraph::new(lo, complete(vc, lo, "vertex")?, complete(ec, lo, "edge")?)?;
    let mut take = |key: &str| -> Result<Vec<i64>, FormatError> {
        match maps.remove(key) {
            Some(slots) => complete(slots, lo, key),
            None => Ok(Vec::new()),
        }
    };
    let f = take("f")?;
    let g = take("g")?;
    let fe = take("fe")?.into_iter().map(Edge::new).collect();
    let ge = take("ge")?.into_iter().map(Edge::new).collect();
    Ok(MapDump {
        domain,
        f,
        fe,
        g,
        ge,
    })
}

/// Splits on blank lines and parses each block.
pub fn parse_map_stream(text: &str) -> Result<Vec<MapDump>, FormatError> {
    let mut out = Vec::new();
    let mut block = String::new();
    for l in text.lines().chain(std::iter::once("")) {
        if l.trim().is_empty() {
            if tokens(&block).next().is_some() {
                out.push(parse_maps(&block)?);
            }
            block.clear();
        } else {
            block.push_str(l);
            block.push('\n');
        }
    }
    Ok(out)
}

pub fn parse_unfolding(text: &str, pair: Arc<GraphPair>) -> Result<Unfolding, FormatError> {
    parse_maps(text)?.into_unfolding(pair)
}

pub fn parse_unfoldings(text: &str, pair: Arc<GraphPair>) -> Result<Vec<Unfolding>, FormatError> {
    parse_map_stream(text)?
        .into_iter()
        .map(|d| d.into_unfolding(pair.clone()))
        .collect()
}

/// Writes a reduction as its source graph and `f`/`fe` lines.
pub struct ReductionDump<'a>(pub &'a Reduction);

impl fmt::Display for ReductionDump<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        write!(out, "{}", GraphDump(r.source()))?;
        let lo = r.source().lo();
        for (i, v) in r.vertex_images().iter().enumerate() {
            writeln!(out, "f {} {v}", lo + i as i64)?;
        }
        for (i, e) in r.edge_images().iter().enumerate() {
            writeln!(out, "fe {} {}", lo + i as i64, e.left)?;
        }
        Ok(())
    }
}
