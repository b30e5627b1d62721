//! Growing an unfolding by a bounce at `(k, l)`.

use std::fmt;

use crate::graphs::{ColoredGraph, Edge};

use super::{sim_relation, Unfolding, UnfoldingError};

/// The four premise shapes. Each names the edge pair that must already be
/// related and, on success, the edge pair that becomes related:
///
/// | case | premise                    | conclusion                 |
/// |------|----------------------------|----------------------------|
/// | 1    | `(k,k+1) ~ (l,l+1)`        | `(k-1,k) ~ (l-1,l)`        |
/// | 2    | `(k-1,k) ~ (l-1,l)`        | `(k,k+1) ~ (l,l+1)`        |
/// | 3    | `(k,k+1) ~ (l-1,l)`        | `(k-1,k) ~ (l,l+1)`        |
/// | 4    | `(k-1,k) ~ (l,l+1)`        | `(k,k+1) ~ (l-1,l)`        |
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendCase {
    One,
    Two,
    Three,
    Four,
}

impl ExtendCase {
    pub const ALL: [ExtendCase; 4] = [
        ExtendCase::One,
        ExtendCase::Two,
        ExtendCase::Three,
        ExtendCase::Four,
    ];

    pub fn from_number(n: u8) -> Option<ExtendCase> {
        match n {
            1 => Some(ExtendCase::One),
            2 => Some(ExtendCase::Two),
            3 => Some(ExtendCase::Three),
            4 => Some(ExtendCase::Four),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            ExtendCase::One => 1,
            ExtendCase::Two => 2,
            ExtendCase::Three => 3,
            ExtendCase::Four => 4,
        }
    }

    /// Whether the premise uses the edge to the right of `k` (resp. `l`).
    fn premise_right(self) -> (bool, bool) {
        match self {
            ExtendCase::One => (true, true),
            ExtendCase::Two => (false, false),
            ExtendCase::Three => (true, false),
            ExtendCase::Four => (false, true),
        }
    }

    pub fn premise(self, k: i64, l: i64) -> (Edge, Edge) {
        let (rk, rl) = self.premise_right();
        (side_edge(k, rk), side_edge(l, rl))
    }

    /// The conclusion swaps each side to the other edge at `k` and `l`.
    pub fn conclusion(self, k: i64, l: i64) -> (Edge, Edge) {
        let (rk, rl) = self.premise_right();
        (side_edge(k, !rk), side_edge(l, !rl))
    }
}

impl fmt::Display for ExtendCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

fn side_edge(v: i64, right: bool) -> Edge {
    if right {
        Edge::new(v)
    } else {
        Edge::new(v - 1)
    }
}

/// Inserts two domain vertices mapped to `(k, l)` right after the first
/// domain edge `j` carrying the premise pair: the walk arrives at `(k, l)`
/// over the premise pair, rides the conclusion pair while staying at
/// `(k, l)`, and returns over the premise pair.
///
/// The result is revalidated; its range grows exactly by `k` and `l`.
pub fn extend_unfolding(
    x: &Unfolding,
    k: i64,
    l: i64,
    case: ExtendCase,
) -> Result<Unfolding, UnfoldingError> {
    let pair = x.pair();
    if k <= 0 || l <= 0 {
        return Err(UnfoldingError::PremiseNotSatisfied(format!(
            "need k, l > 0, got k={k}, l={l}"
        )));
    }
    let (cm, cn) = match (pair.gm().vertex_color(k), pair.gn().vertex_color(l)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(UnfoldingError::TruncationTooSmall(format!(
                "vertex pair ({k},{l}) outside [0,{}] x [0,{}]",
                pair.hi_m(),
                pair.hi_n()
            )))
        }
    };
    if cm != cn {
        return Err(UnfoldingError::PremiseNotSatisfied(format!(
            "c_m({k}) = {cm} differs from c_n({l}) = {cn}"
        )));
    }
    let (pm, pn) = case.premise(k, l);
    let (qm, qn) = case.conclusion(k, l);
    if !sim_relation(x).relates_edges(pm, pn) {
        return Err(UnfoldingError::PremiseNotSatisfied(format!(
            "case {case}: {pm} ~ {pn} does not hold"
        )));
    }
    if !pair.gm().contains_edge(qm) || !pair.gn().contains_edge(qn) {
        return Err(UnfoldingError::TruncationTooSmall(format!(
            "case {case}: conclusion pair {qm} ~ {qn} leaves the truncation"
        )));
    }

    let f = x.f();
    let g = x.g();
    let j = f
        .edge_images()
        .iter()
        .zip(g.edge_images())
        .position(|(&a, &b)| a == pm && b == pn)
        .expect("premise pair is in the relation");

    let dom = x.domain();
    let splice = |old: &[i64], at: i64| -> Vec<i64> {
        let mut out = Vec::with_capacity(old.len() + 2);
        out.extend_from_slice(&old[..=j]);
        out.extend([at, at]);
        out.extend_from_slice(&old[j + 1..]);
        out
    };
    let splice_edges = |old: &[Edge], premise: Edge, conclusion: Edge| -> Vec<Edge> {
        let mut out = Vec::with_capacity(old.len() + 2);
        out.extend_from_slice(&old[..=j]);
        out.extend([conclusion, premise]);
        out.extend_from_slice(&old[j + 1..]);
        out
    };

    let vc = dom.vertex_colors();
    let mut vertex_colors = Vec::with_capacity(vc.len() + 2);
    vertex_colors.extend_from_slice(&vc[..=j]);
    vertex_colors.extend([cm, cm]);
    vertex_colors.extend_from_slice(&vc[j + 1..]);

    let ec = dom.edge_colors();
    let premise_color = ec[j];
    let mut edge_colors = Vec::with_capacity(ec.len() + 2);
    edge_colors.extend_from_slice(&ec[..=j]);
    edge_colors.extend([premise_color.flip(), premise_color]);
    edge_colors.extend_from_slice(&ec[j + 1..]);

    let domain = ColoredGraph::new(dom.lo(), vertex_colors, edge_colors)?;
    Unfolding::new(
        pair.clone(),
        domain,
        splice(f.vertex_images(), k),
        splice_edges(f.edge_images(), pm, qm),
        splice(g.vertex_images(), l),
        splice_edges(g.edge_images(), pn, qn),
    )
}
