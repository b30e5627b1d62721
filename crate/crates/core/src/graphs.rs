//! Colored interval graphs, the `G_n` construction and reductions.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::sequences::{IndexSequence, Parity, SequenceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("colored graph needs at least two vertices, got interval [{lo},{hi}]")]
    TooSmall { lo: i64, hi: i64 },
    #[error("expected {expected} {what} colors, got {got}")]
    ColorCount {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(
        "interval [{lo},{hi}] is not inside [{outer_lo},{outer_hi}] or has fewer than two vertices"
    )]
    OutOfRange {
        lo: i64,
        hi: i64,
        outer_lo: i64,
        outer_hi: i64,
    },
    #[error("truncation {hi} exceeds what the prefix determines (at most {max})")]
    OutOfWindow { hi: i64, max: i64 },
    #[error("map has {got} entries for {expected} source {what}")]
    MapNotTotal {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Zero,
    One,
}

impl Color {
    pub fn from_bit(bit: bool) -> Color {
        if bit {
            Color::One
        } else {
            Color::Zero
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Color::Zero => 0,
            Color::One => 1,
        }
    }

    pub fn flip(self) -> Color {
        match self {
            Color::Zero => Color::One,
            Color::One => Color::Zero,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Successor edge `(left, left + 1)`, keyed by its left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub left: i64,
}

impl Edge {
    pub fn new(left: i64) -> Edge {
        Edge { left }
    }

    /// Normalizes an unordered pair of adjacent vertices.
    pub fn between(a: i64, b: i64) -> Option<Edge> {
        if (a - b).abs() == 1 {
            Some(Edge { left: a.min(b) })
        } else {
            None
        }
    }

    pub fn right(self) -> i64 {
        self.left + 1
    }

    pub fn has_endpoint(self, v: i64) -> bool {
        v == self.left || v == self.left + 1
    }

    /// The other endpoint of `self` when `v` is one of its endpoints.
    pub fn other(self, v: i64) -> Option<i64> {
        if v == self.left {
            Some(self.left + 1)
        } else if v == self.left + 1 {
            Some(self.left)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.left, self.left + 1)
    }
}

/// Interval `[lo, hi]` of integers with {0,1} colors on vertices and on
/// successor edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColoredGraph {
    lo: i64,
    vertex_colors: Vec<Color>,
    edge_colors: Vec<Color>,
}

impl ColoredGraph {
    pub fn new(
        lo: i64,
        vertex_colors: Vec<Color>,
        edge_colors: Vec<Color>,
    ) -> Result<Self, GraphError> {
        if vertex_colors.len() < 2 {
            return Err(GraphError::TooSmall {
                lo,
                hi: lo + vertex_colors.len() as i64 - 1,
            });
        }
        if edge_colors.len() + 1 != vertex_colors.len() {
            return Err(GraphError::ColorCount {
                what: "edge",
                expected: vertex_colors.len() - 1,
                got: edge_colors.len(),
            });
        }
        Ok(ColoredGraph {
            lo,
            vertex_colors,
            edge_colors,
        })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.vertex_colors.len() as i64 - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_colors.len()
    }

    pub fn contains(&self, v: i64) -> bool {
        v >= self.lo && v <= self.hi()
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        e.left >= self.lo && e.left < self.hi()
    }

    pub fn vertex_color(&self, v: i64) -> Option<Color> {
        if self.contains(v) {
            Some(self.vertex_colors[(v - self.lo) as usize])
        } else {
            None
        }
    }

    pub fn edge_color(&self, e: Edge) -> Option<Color> {
        if self.contains_edge(e) {
            Some(self.edge_colors[(e.left - self.lo) as usize])
        } else {
            None
        }
    }

    pub fn vertex_colors(&self) -> &[Color] {
        &self.vertex_colors
    }

    pub fn edge_colors(&self) -> &[Color] {
        &self.edge_colors
    }

    pub fn vertices(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> {
        (self.lo..self.hi()).map(Edge::new)
    }

    /// Edges of the graph having `v` as an endpoint, left one first.
    pub fn incident_edges(&self, v: i64) -> impl Iterator<Item = Edge> + '_ {
        [Edge::new(v - 1), Edge::new(v)]
            .into_iter()
            .filter(move |e| self.contains(v) && self.contains_edge(*e))
    }

    /// The colored graph induced on `[lo2, hi2]`.
    pub fn induced_subgraph(&self, lo2: i64, hi2: i64) -> Result<ColoredGraph, GraphError> {
        if lo2 < self.lo || hi2 > self.hi() || hi2 - lo2 < 1 {
            return Err(GraphError::OutOfRange {
                lo: lo2,
                hi: hi2,
                outer_lo: self.lo,
                outer_hi: self.hi(),
            });
        }
        let a = (lo2 - self.lo) as usize;
        let b = (hi2 - self.lo) as usize;
        Ok(ColoredGraph {
            lo: lo2,
            vertex_colors: self.vertex_colors[a..=b].to_vec(),
            edge_colors: self.edge_colors[a..b].to_vec(),
        })
    }
}

/// `[0, 2 n_last - 1]`: the union of the arrows the prefix spells out.
pub fn default_truncation(seq: &IndexSequence) -> i64 {
    2 * seq.last() as i64 - 1
}

/// Largest truncation whose colors the prefix determines. The block index
/// of `n_last` is known even though the block's right end is not, so the
/// two vertices `2 n_last` and `2 n_last + 1` are still colored.
pub fn max_truncation(seq: &IndexSequence) -> i64 {
    2 * seq.last() as i64 + 1
}

/// `G_n` truncated to vertices `[0, hi]`.
///
/// `c(2j) = 1` and `c(2j+1) = 0` when `j` is in an even block, the reverse
/// in an odd block; edge `(j, j+1)` has color 1 exactly when `j` is even.
pub fn build_gn(seq: &IndexSequence, hi: i64) -> Result<ColoredGraph, GraphError> {
    let max = max_truncation(seq);
    if hi > max {
        return Err(GraphError::OutOfWindow { hi, max });
    }
    if hi < 1 {
        return Err(GraphError::TooSmall { lo: 0, hi });
    }
    let mut vertex_colors = Vec::with_capacity(hi as usize + 1);
    for v in 0..=hi {
        let even_block = seq.block_parity(v as u64 / 2)? == Parity::Even;
        let color = if v % 2 == 0 { even_block } else { !even_block };
        vertex_colors.push(Color::from_bit(color));
    }
    let edge_colors = (0..hi).map(|j| Color::from_bit(j % 2 == 0)).collect();
    ColoredGraph::new(0, vertex_colors, edge_colors)
}

/// Vertex and edge map from a finite colored graph into another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    source: Arc<ColoredGraph>,
    target: Arc<ColoredGraph>,
    vmap: Vec<i64>,
    emap: Vec<Edge>,
}

impl Reduction {
    /// Only checks that both maps are total on the source; use
    /// [`validate_reduction`] for the reduction conditions.
    pub fn new(
        source: Arc<ColoredGraph>,
        target: Arc<ColoredGraph>,
        vmap: Vec<i64>,
        emap: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        if vmap.len() != source.vertex_count() {
            return Err(GraphError::MapNotTotal {
                what: "vertices",
                expected: source.vertex_count(),
                got: vmap.len(),
            });
        }
        if emap.len() + 1 != source.vertex_count() {
            return Err(GraphError::MapNotTotal {
                what: "edges",
                expected: source.vertex_count() - 1,
                got: emap.len(),
            });
        }
        Ok(Reduction {
            source,
            target,
            vmap,
            emap,
        })
    }

    pub fn source(&self) -> &Arc<ColoredGraph> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ColoredGraph> {
        &self.target
    }

    /// Vertex images in source order.
    pub fn vertex_images(&self) -> &[i64] {
        &self.vmap
    }

    /// Edge images in source order.
    pub fn edge_images(&self) -> &[Edge] {
        &self.emap
    }

    pub fn image(&self, v: i64) -> Option<i64> {
        let i = v.checked_sub(self.source.lo())?;
        self.vmap.get(usize::try_from(i).ok()?).copied()
    }

    pub fn edge_image(&self, e: Edge) -> Option<Edge> {
        let i = e.left.checked_sub(self.source.lo())?;
        self.emap.get(usize::try_from(i).ok()?).copied()
    }

    /// `(min, max)` of the vertex images.
    pub fn range_bounds(&self) -> (i64, i64) {
        let min = *self.vmap.iter().min().expect("nonempty source");
        let max = *self.vmap.iter().max().expect("nonempty source");
        (min, max)
    }

    pub fn range(&self) -> BTreeSet<i64> {
        self.vmap.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    VertexOutsideTarget {
        vertex: i64,
        image: i64,
    },
    EdgeOutsideTarget {
        edge: Edge,
        image: Edge,
    },
    VertexColor {
        vertex: i64,
        image: i64,
        source: Color,
        target: Color,
    },
    EdgeColor {
        edge: Edge,
        image: Edge,
        source: Color,
        target: Color,
    },
    /// `f(i)` or `f(i+1)` is not an endpoint of `f(i, i+1)`.
    Endpoint {
        edge: Edge,
        image: Edge,
        left: i64,
        right: i64,
    },
    /// Adjacent source vertices mapped more than one apart.
    NonAdjacentJump {
        edge: Edge,
        left: i64,
        right: i64,
    },
    /// Images differ but the edge image is not the edge between them.
    ForcedEdge {
        edge: Edge,
        image: Edge,
        left: i64,
        right: i64,
    },
    ImageNotInterval {
        missing: i64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VertexOutsideTarget { vertex, image } => {
                write!(f, "vertex {vertex} maps to {image} outside the target")
            }
            Violation::EdgeOutsideTarget { edge, image } => {
                write!(f, "edge {edge} maps to {image} outside the target")
            }
            Violation::VertexColor {
                vertex,
                image,
                source,
                target,
            } => write!(
                f,
                "vertex {vertex} (color {source}) maps to {image} (color {target})"
            ),
            Violation::EdgeColor {
                edge,
                image,
                source,
                target,
            } => write!(
                f,
                "edge {edge} (color {source}) maps to {image} (color {target})"
            ),
            Violation::Endpoint {
                edge,
                image,
                left,
                right,
            } => write!(
                f,
                "endpoint condition: edge {edge} maps to {image} but its ends map to {left}, {right}"
            ),
            Violation::NonAdjacentJump { edge, left, right } => {
                write!(f, "edge {edge}: ends map to non-adjacent {left}, {right}")
            }
            Violation::ForcedEdge {
                edge,
                image,
                left,
                right,
            } => write!(
                f,
                "edge {edge} maps to {image}, expected the edge between {left} and {right}"
            ),
            Violation::ImageNotInterval { missing } => {
                write!(f, "vertex image is not an interval: {missing} missing")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return writeln!(f, "OK");
        }
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        Ok(())
    }
}

/// Checks color preservation, the endpoint condition, and the two derived
/// facts (interval image, forced edge between distinct images).
pub fn validate_reduction(r: &Reduction) -> ValidationReport {
    let mut violations = Vec::new();
    let src = &r.source;
    let tgt = &r.target;
    for (v, &img) in src.vertices().zip(&r.vmap) {
        match tgt.vertex_color(img) {
            None => violations.push(Violation::VertexOutsideTarget {
                vertex: v,
                image: img,
            }),
            Some(tc) => {
                let sc = src.vertex_color(v).expect("source vertex");
                if sc != tc {
                    violations.push(Violation::VertexColor {
                        vertex: v,
                        image: img,
                        source: sc,
                        target: tc,
                    });
                }
            }
        }
    }
    for (e, &img) in src.edges().zip(&r.emap) {
        let sc = src.edge_color(e).expect("source edge");
        match tgt.edge_color(img) {
            None => violations.push(Violation::EdgeOutsideTarget {
                edge: e,
                image: img,
            }),
            Some(tc) if tc != sc => violations.push(Violation::EdgeColor {
                edge: e,
                image: img,
                source: sc,
                target: tc,
            }),
            Some(_) => {}
        }
        let left = r.vmap[(e.left - src.lo()) as usize];
        let right = r.vmap[(e.left + 1 - src.lo()) as usize];
        if !img.has_endpoint(left) || !img.has_endpoint(right) {
            violations.push(Violation::Endpoint {
                edge: e,
                image: img,
                left,
                right,
            });
        }
        if (left - right).abs() > 1 {
            violations.push(Violation::NonAdjacentJump {
                edge: e,
                left,
                right,
            });
        } else if left != right && img.left != left.min(right) {
            violations.push(Violation::ForcedEdge {
                edge: e,
                image: img,
                left,
                right,
            });
        }
    }
    let image = r.range();
    let (min, max) = r.range_bounds();
    if let Some(missing) = (min..=max).find(|x| !image.contains(x)) {
        violations.push(Violation::ImageNotInterval { missing });
    }
    ValidationReport { violations }
}
