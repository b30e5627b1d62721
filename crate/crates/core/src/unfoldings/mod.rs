//! Unfoldings of `G_m`, `G_n`, the relation they induce, and the machinery
//! built on them: extension, exhaustive enumeration, the reachability
//! engine for coverage, and the arrow formulas.
//!
//! An unfolding is stored both as a pair of reductions and, equivalently,
//! as a synchronized walk: the sequence of `(f(i), g(i))` vertex pairs with
//! the `(f(i,i+1), g(i,i+1))` edge pairs between them. The domain colors
//! are determined by the images, so the walk carries the whole object.

mod engine;
mod enumerate;
mod extend;
mod formulas;

pub use engine::{
    coverage, coverage_in, coverage_with, Coverage, CoverageOptions, ProductGraph, ProductState,
    RegionReach,
};
pub use enumerate::{enumerate_unfoldings, enumerate_walks, WalkEnumerator, WalkSpace};
pub use extend::{extend_unfolding, ExtendCase};
pub use formulas::{
    check_sum_formula, check_within_arrow, composite_reduction, FormulaReport, SumFormulaTerms,
};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::graphs::{
    build_gn, default_truncation, validate_reduction, Color, ColoredGraph, Edge, GraphError,
    Reduction, ValidationReport,
};
use crate::sequences::IndexSequence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnfoldingError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{side} is not a reduction:\n{report}")]
    InvalidReduction {
        side: &'static str,
        report: ValidationReport,
    },
    #[error("premise not satisfied: {0}")]
    PremiseNotSatisfied(String),
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("seed (0,{l}) is invalid: c_m(0) = {cm} but c_n({l}) = {cn}")]
    SeedInvalid { l: i64, cm: Color, cn: Color },
    #[error(
        "seed (0,{0}) has no outgoing step inside the truncation, so no unfolding contains it"
    )]
    SeedIsolated(i64),
    #[error("seed vertex {0} is outside the truncation")]
    SeedOutOfRange(i64),
    #[error("forbidden vertex must be at least 1, got {0}")]
    ForbidInvalid(i64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// `G_m` and `G_n` truncated to `[0, hi_m]` and `[0, hi_n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphPair {
    m: IndexSequence,
    n: IndexSequence,
    gm: Arc<ColoredGraph>,
    gn: Arc<ColoredGraph>,
}

impl GraphPair {
    /// Uses the default truncations `[0, 2 m_last - 1]` and `[0, 2 n_last - 1]`.
    pub fn new(m: IndexSequence, n: IndexSequence) -> Result<Self, GraphError> {
        let (hm, hn) = (default_truncation(&m), default_truncation(&n));
        GraphPair::with_truncation(m, n, hm, hn)
    }

    pub fn with_truncation(
        m: IndexSequence,
        n: IndexSequence,
        hi_m: i64,
        hi_n: i64,
    ) -> Result<Self, GraphError> {
        let gm = Arc::new(build_gn(&m, hi_m)?);
        let gn = Arc::new(build_gn(&n, hi_n)?);
        Ok(GraphPair { m, n, gm, gn })
    }

    pub fn m(&self) -> &IndexSequence {
        &self.m
    }

    pub fn n(&self) -> &IndexSequence {
        &self.n
    }

    pub fn gm(&self) -> &Arc<ColoredGraph> {
        &self.gm
    }

    pub fn gn(&self) -> &Arc<ColoredGraph> {
        &self.gn
    }

    pub fn hi_m(&self) -> i64 {
        self.gm.hi()
    }

    pub fn hi_n(&self) -> i64 {
        self.gn.hi()
    }

    /// Whether `(a, b)` is a color-matched pair of vertices.
    pub fn matched(&self, a: i64, b: i64) -> bool {
        match (self.gm.vertex_color(a), self.gn.vertex_color(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }
}

/// One step of a synchronized walk: the edge pair traversed and the vertex
/// pair reached. Field order fixes the enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub em: Edge,
    pub en: Edge,
    pub to: (i64, i64),
}

/// An unfolding with domain `[0, N-1]` written as its vertex and edge pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SyncWalk {
    pub start: (i64, i64),
    pub steps: Vec<Step>,
}

impl SyncWalk {
    pub fn len(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn states(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        std::iter::once(self.start).chain(self.steps.iter().map(|s| s.to))
    }

    pub fn state(&self, i: usize) -> (i64, i64) {
        if i == 0 {
            self.start
        } else {
            self.steps[i - 1].to
        }
    }
}

/// A finite colored graph with reductions into `G_m` and `G_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unfolding {
    pair: Arc<GraphPair>,
    domain: Arc<ColoredGraph>,
    f: Reduction,
    g: Reduction,
}

impl Unfolding {
    /// Builds and validates an unfolding from explicit maps.
    pub fn new(
        pair: Arc<GraphPair>,
        domain: ColoredGraph,
        f_vertices: Vec<i64>,
        f_edges: Vec<Edge>,
        g_vertices: Vec<i64>,
        g_edges: Vec<Edge>,
    ) -> Result<Self, UnfoldingError> {
        let domain = Arc::new(domain);
        let f = Reduction::new(domain.clone(), pair.gm.clone(), f_vertices, f_edges)?;
        let g = Reduction::new(domain.clone(), pair.gn.clone(), g_vertices, g_edges)?;
        let report = validate_reduction(&f);
        if !report.is_ok() {
            return Err(UnfoldingError::InvalidReduction { side: "f", report });
        }
        let report = validate_reduction(&g);
        if !report.is_ok() {
            return Err(UnfoldingError::InvalidReduction { side: "g", report });
        }
        Ok(Unfolding { pair, domain, f, g })
    }

    /// Reads the domain colors off the `G_m` side and validates both maps.
    pub fn from_walk(pair: Arc<GraphPair>, walk: &SyncWalk) -> Result<Self, UnfoldingError> {
        let states: Vec<(i64, i64)> = walk.states().collect();
        let vertex_colors = states
            .iter()
            .map(|&(a, _)| {
                pair.gm.vertex_color(a).ok_or_else(|| {
                    UnfoldingError::TruncationTooSmall(format!("vertex {a} outside G_m"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let edge_colors = walk
            .steps
            .iter()
            .map(|s| {
                pair.gm.edge_color(s.em).ok_or_else(|| {
                    UnfoldingError::TruncationTooSmall(format!("edge {} outside G_m", s.em))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let domain = ColoredGraph::new(0, vertex_colors, edge_colors)?;
        Unfolding::new(
            pair,
            domain,
            states.iter().map(|s| s.0).collect(),
            walk.steps.iter().map(|s| s.em).collect(),
            states.iter().map(|s| s.1).collect(),
            walk.steps.iter().map(|s| s.en).collect(),
        )
    }

    /// The walk of an unfolding whose domain is relabeled to start at 0.
    pub fn to_walk(&self) -> SyncWalk {
        let fv = self.f.vertex_images();
        let gv = self.g.vertex_images();
        SyncWalk {
            start: (fv[0], gv[0]),
            steps: (1..fv.len())
                .map(|i| Step {
                    em: self.f.edge_images()[i - 1],
                    en: self.g.edge_images()[i - 1],
                    to: (fv[i], gv[i]),
                })
                .collect(),
        }
    }

    pub fn pair(&self) -> &Arc<GraphPair> {
        &self.pair
    }

    pub fn domain(&self) -> &Arc<ColoredGraph> {
        &self.domain
    }

    pub fn f(&self) -> &Reduction {
        &self.f
    }

    pub fn g(&self) -> &Reduction {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.domain.vertex_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Vertex pairs `(k, l)` with `f(j) = k`, `g(j) = l` for some domain vertex
/// `j`, and the analogous edge pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimRelation {
    pub vertex_pairs: BTreeSet<(i64, i64)>,
    pub edge_pairs: BTreeSet<(Edge, Edge)>,
}

impl SimRelation {
    pub fn relates_vertices(&self, k: i64, l: i64) -> bool {
        self.vertex_pairs.contains(&(k, l))
    }

    pub fn relates_edges(&self, em: Edge, en: Edge) -> bool {
        self.edge_pairs.contains(&(em, en))
    }

    /// Whether every pair of `self` also appears in `other`.
    pub fn is_subset(&self, other: &SimRelation) -> bool {
        self.vertex_pairs.is_subset(&other.vertex_pairs)
            && self.edge_pairs.is_subset(&other.edge_pairs)
    }
}

pub fn sim_relation(x: &Unfolding) -> SimRelation {
    let f = &x.f;
    let g = &x.g;
    SimRelation {
        vertex_pairs: f
            .vertex_images()
            .iter()
            .copied()
            .zip(g.vertex_images().iter().copied())
            .collect(),
        edge_pairs: f
            .edge_images()
            .iter()
            .copied()
            .zip(g.edge_images().iter().copied())
            .collect(),
    }
}

impl fmt::Display for Unfolding {
    /// Domain graph dump followed by `f`/`g`/`fe`/`ge` lines.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{}", crate::formats::GraphDump(&self.domain))?;
        let lo = self.domain.lo();
        for (i, v) in self.f.vertex_images().iter().enumerate() {
            writeln!(out, "f {} {}", lo + i as i64, v)?;
        }
        for (i, v) in self.g.vertex_images().iter().enumerate() {
            writeln!(out, "g {} {}", lo + i as i64, v)?;
        }
        for (i, e) in self.f.edge_images().iter().enumerate() {
            writeln!(out, "fe {} {}", lo + i as i64, e.left)?;
        }
        for (i, e) in self.g.edge_images().iter().enumerate() {
            writeln!(out, "ge {} {}", lo + i as i64, e.left)?;
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn seq(v: &[u64]) -> IndexSequence {
        IndexSequence::new(v.to_vec()).unwrap()
    }

    pub fn pair(m: &[u64], n: &[u64]) -> Arc<GraphPair> {
        Arc::new(GraphPair::new(seq(m), seq(n)).unwrap())
    }

    /// The two-vertex unfolding with `f = 0` and `g = 2l` (or `2l+1` when
    /// `l` is in an odd block of `n`), both riding the first edge.
    pub fn base_unfolding(p: &Arc<GraphPair>, l: u64) -> Unfolding {
        let even = p.n().block_parity(l).unwrap().is_even();
        let gl = if even { 2 * l as i64 } else { 2 * l as i64 + 1 };
        let domain = ColoredGraph::new(0, vec![Color::One, Color::One], vec![Color::One]).unwrap();
        Unfolding::new(
            p.clone(),
            domain,
            vec![0, 0],
            vec![Edge::new(0)],
            vec![gl, gl],
            vec![Edge::new(2 * l as i64)],
        )
        .unwrap()
    }

    pub fn identity_unfolding(p: &Arc<GraphPair>, hi: i64) -> Unfolding {
        let walk = SyncWalk {
            start: (0, 0),
            steps: (1..=hi)
                .map(|v| Step {
                    em: Edge::new(v - 1),
                    en: Edge::new(v - 1),
                    to: (v, v),
                })
                .collect(),
        };
        Unfolding::from_walk(p.clone(), &walk).unwrap()
    }
}
