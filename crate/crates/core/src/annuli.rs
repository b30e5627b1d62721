//! Exact classification of radii into the D/E annulus blocks of a rung
//! ladder, and extraction of unfoldings from piecewise-linear profiles.
//!
//! Rung `t` of a ladder corresponds to vertex `t` of `G_n` and the open
//! annulus between rungs `t` and `t+1` to the edge `(t, t+1)`. Color 1 is D,
//! color 0 is E, on vertices and edges alike.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::graphs::{max_truncation, Edge, GraphError};
use crate::sequences::{IndexSequence, SequenceError};
use crate::unfoldings::{GraphPair, SimRelation, Step, SyncWalk, Unfolding, UnfoldingError};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnulusError {
    #[error("radius {r} is outside the ladder: {detail}")]
    OutOfLadder { r: Rational, detail: String },
    #[error("invalid ladder: {0}")]
    InvalidLadder(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("consistency violated at parameter {parameter}: alpha side {alpha}, beta side {beta}")]
    ConsistencyViolation {
        parameter: Rational,
        alpha: Box<BlockLabel>,
        beta: Box<BlockLabel>,
    },
    #[error("no color-matched rung pair closes the walk at parameter {parameter}")]
    UnclosableEnd { parameter: Rational },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Unfolding(#[from] UnfoldingError),
}

fn parse_rational(s: &str) -> Option<Rational> {
    let r = Rational::from_str(s).ok()?;
    // `Ratio::from_str` accepts "p/0" as an error already; normalize signs.
    Some(r)
}

/// Strictly increasing rung radii `0 = r_0 < ... < r_T < r_outer`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusLadder {
    r_outer: Rational,
    rungs: Vec<Rational>,
}

/// Where a radius sits relative to the rungs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    OnRung(usize),
    /// Strictly between rungs `t` and `t + 1`.
    Between(usize),
}

impl RadiusLadder {
    pub fn new(r_outer: Rational, rungs: Vec<Rational>) -> Result<Self, AnnulusError> {
        if rungs.len() < 2 {
            return Err(AnnulusError::InvalidLadder(
                "need r_0 and at least one more rung".into(),
            ));
        }
        if !rungs[0].is_zero() {
            return Err(AnnulusError::InvalidLadder(format!(
                "r_0 must be 0, got {}",
                rungs[0]
            )));
        }
        for (t, w) in rungs.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(AnnulusError::InvalidLadder(format!(
                    "rungs not increasing at {}: {} then {}",
                    t + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        let last = rungs.last().expect("nonempty");
        if *last >= r_outer {
            return Err(AnnulusError::InvalidLadder(format!(
                "last rung {last} is not below r_outer {r_outer}"
            )));
        }
        Ok(RadiusLadder { r_outer, rungs })
    }

    /// Rungs `r_t = t` for `t <= count` and `r_outer = count + 1`.
    pub fn integer(count: usize) -> Self {
        let rungs = (0..=count)
            .map(|t| Rational::from_integer(t.into()))
            .collect();
        RadiusLadder::new(Rational::from_integer((count + 1).into()), rungs)
            .expect("integer ladder is valid")
    }

    pub fn r_outer(&self) -> &Rational {
        &self.r_outer
    }

    pub fn rung(&self, t: usize) -> Option<&Rational> {
        self.rungs.get(t)
    }

    pub fn rungs(&self) -> &[Rational] {
        &self.rungs
    }

    /// Index `T` of the outermost rung.
    pub fn last_rung(&self) -> usize {
        self.rungs.len() - 1
    }

    pub fn position(&self, r: &Rational) -> Result<Position, AnnulusError> {
        if r.is_negative() || *r >= self.r_outer {
            return Err(AnnulusError::OutOfLadder {
                r: r.clone(),
                detail: format!("radii must lie in [0, {})", self.r_outer),
            });
        }
        match self.rungs.binary_search(r) {
            Ok(t) => Ok(Position::OnRung(t)),
            Err(k) if k < self.rungs.len() => Ok(Position::Between(k - 1)),
            Err(_) => Err(AnnulusError::OutOfLadder {
                r: r.clone(),
                detail: format!(
                    "beyond the last rung r_{} = {} and not bracketed",
                    self.last_rung(),
                    self.rungs[self.last_rung()]
                ),
            }),
        }
    }
}

impl fmt::Display for RadiusLadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ladder {}", self.r_outer)?;
        for (t, r) in self.rungs.iter().enumerate() {
            writeln!(f, "rung {t} {r}")?;
        }
        Ok(())
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

fn rational_field(line: usize, s: &str) -> Result<Rational, AnnulusError> {
    parse_rational(s).ok_or_else(|| AnnulusError::Parse {
        line,
        msg: format!("expected a rational p/q, got `{s}`"),
    })
}

/// Parses `ladder <r_outer>` followed by `rung <t> <p/q>` lines.
pub fn parse_ladder(text: &str) -> Result<RadiusLadder, AnnulusError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| AnnulusError::Parse {
        line: 0,
        msg: "empty ladder file".into(),
    })?;
    if header.len() != 2 || header[0] != "ladder" {
        return Err(AnnulusError::Parse {
            line: hl,
            msg: "expected `ladder <r_outer>`".into(),
        });
    }
    let r_outer = rational_field(hl, header[1])?;
    let mut rungs: Vec<Option<Rational>> = Vec::new();
    for (line, t) in lines {
        if t.len() != 3 || t[0] != "rung" {
            return Err(AnnulusError::Parse {
                line,
                msg: "expected `rung <t> <p/q>`".into(),
            });
        }
        let idx: usize = t[1].parse().map_err(|_| AnnulusError::Parse {
            line,
            msg: format!("bad rung index `{}`", t[1]),
        })?;
        if idx >= rungs.len() {
            rungs.resize(idx + 1, None);
        }
        if rungs[idx].is_some() {
            return Err(AnnulusError::Parse {
                line,
                msg: format!("duplicate rung {idx}"),
            });
        }
        rungs[idx] = Some(rational_field(line, t[2])?);
    }
    let rungs = rungs
        .into_iter()
        .enumerate()
        .map(|(t, r)| r.ok_or_else(|| AnnulusError::InvalidLadder(format!("rung {t} missing"))))
        .collect::<Result<Vec<_>, _>>()?;
    RadiusLadder::new(r_outer, rungs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockKind {
    D,
    E,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::D => "D",
            BlockKind::E => "E",
        })
    }
}

/// The block `D(j)` or `E(j)` containing a radius. `D(j)` spans rungs
/// `2j, 2j+1` and `E(j)` spans `2j+1, 2j+2`; the flags say which ends the
/// block contains. `right_closed` is `None` when it depends on a block
/// parity the sequence prefix does not determine.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockLabel {
    pub kind: BlockKind,
    pub index: u64,
    pub left: usize,
    pub right: usize,
    pub left_closed: bool,
    pub right_closed: Option<bool>,
    /// Set when the radius equals `r_t` for some `t >= 1`.
    pub on_rung: Option<usize>,
}

impl BlockLabel {
    /// The graph edge of this block: `(left, left + 1)`.
    pub fn edge(&self) -> Edge {
        Edge::new(self.left as i64)
    }

    pub fn same_block(&self, other: &BlockLabel) -> bool {
        self.kind == other.kind && self.index == other.index
    }
}

impl fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.left_closed { '[' } else { '(' };
        let close = match self.right_closed {
            Some(true) => ']',
            Some(false) => ')',
            None => '?',
        };
        write!(
            f,
            "{}({}) C{open}{},{}{close}",
            self.kind, self.index, self.left, self.right
        )?;
        if let Some(t) = self.on_rung {
            write!(f, " rung {t}")?;
        }
        Ok(())
    }
}

fn block_label(seq: &IndexSequence, kind: BlockKind, j: u64) -> Result<BlockLabel, AnnulusError> {
    let even_j = seq.block_parity(j)?.is_even();
    let (left, right_closed) = match kind {
        BlockKind::D => (2 * j as usize, Some(!even_j)),
        BlockKind::E => {
            let next = seq.block_parity(j + 1).ok().map(|p| !p.is_even());
            (2 * j as usize + 1, next)
        }
    };
    Ok(BlockLabel {
        kind,
        index: j,
        left,
        right: left + 1,
        left_closed: even_j,
        right_closed,
        on_rung: None,
    })
}

/// The unique D/E block containing radius `r`.
///
/// The center `r = 0` belongs to `D(0)`. Rung `2j` belongs to `D(j)` when
/// `j` is in an even block and to `E(j-1)` otherwise; rung `2j+1` belongs to
/// `D(j)` when `j` is in an odd block and to `E(j)` otherwise.
pub fn classify_radius(
    ladder: &RadiusLadder,
    seq: &IndexSequence,
    r: &Rational,
) -> Result<BlockLabel, AnnulusError> {
    match ladder.position(r)? {
        Position::OnRung(0) => block_label(seq, BlockKind::D, 0),
        Position::OnRung(t) => {
            let j = (t / 2) as u64;
            let even_j = seq.block_parity(j)?.is_even();
            let mut label = match (t % 2 == 0, even_j) {
                (true, true) => block_label(seq, BlockKind::D, j)?,
                (true, false) => block_label(seq, BlockKind::E, j - 1)?,
                (false, false) => block_label(seq, BlockKind::D, j)?,
                (false, true) => block_label(seq, BlockKind::E, j)?,
            };
            label.on_rung = Some(t);
            Ok(label)
        }
        Position::Between(t) if t % 2 == 0 => block_label(seq, BlockKind::D, (t / 2) as u64),
        Position::Between(t) => block_label(seq, BlockKind::E, (t / 2) as u64),
    }
}

/// The least open rung interval `(r_i, r_j)` containing `r`: `(t, t+1)`
/// strictly between rungs, `(t-1, t+1)` on rung `t >= 1`, and `(0, 1)` at
/// the center, which open balls around it always contain.
pub fn smallest_open_interval(
    ladder: &RadiusLadder,
    r: &Rational,
) -> Result<(usize, usize), AnnulusError> {
    match ladder.position(r)? {
        Position::OnRung(0) => Ok((0, 1)),
        Position::OnRung(t) if t < ladder.last_rung() => Ok((t - 1, t + 1)),
        Position::OnRung(t) => Err(AnnulusError::OutOfLadder {
            r: r.clone(),
            detail: format!("rung {t} is the last one, so no open rung interval contains it"),
        }),
        Position::Between(t) => Ok((t, t + 1)),
    }
}

/// Clause (a): `D(i) x D(j)` with `(2i,2i+1) ~ (2j,2j+1)`; clause (b):
/// `E(i) x E(j)` with `(2i+1,2i+2) ~ (2j+1,2j+2)`. Mixed kinds never are.
pub fn compatible(x: &BlockLabel, fx: &BlockLabel, rel: &SimRelation) -> bool {
    x.kind == fx.kind && rel.relates_edges(x.edge(), fx.edge())
}

/// A continuous piecewise-linear path, given by the radii of a point and of
/// its image at increasing parameters from 0 to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    points: Vec<ProfilePoint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfilePoint {
    pub param: Rational,
    pub alpha: Rational,
    pub beta: Rational,
}

impl Profile {
    pub fn new(points: Vec<ProfilePoint>) -> Result<Self, AnnulusError> {
        if points.len() < 2 {
            return Err(AnnulusError::InvalidProfile(
                "need at least two breakpoints".into(),
            ));
        }
        if !points[0].param.is_zero() || !points[points.len() - 1].param.is_one() {
            return Err(AnnulusError::InvalidProfile(
                "parameters must run from 0 to 1".into(),
            ));
        }
        for w in points.windows(2) {
            if w[0].param >= w[1].param {
                return Err(AnnulusError::InvalidProfile(format!(
                    "parameters not increasing at {}",
                    w[1].param
                )));
            }
        }
        if let Some(p) = points
            .iter()
            .find(|p| p.alpha.is_negative() || p.beta.is_negative())
        {
            return Err(AnnulusError::InvalidProfile(format!(
                "negative radius at parameter {}",
                p.param
            )));
        }
        Ok(Profile { points })
    }

    /// Image radius equal to the point's radius.
    pub fn identity(radii: &[Rational]) -> Result<Self, AnnulusError> {
        let k = radii.len().saturating_sub(1).max(1);
        Profile::new(
            radii
                .iter()
                .enumerate()
                .map(|(i, r)| ProfilePoint {
                    param: Rational::new(i.into(), k.into()),
                    alpha: r.clone(),
                    beta: r.clone(),
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[ProfilePoint] {
        &self.points
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "profile")?;
        for p in &self.points {
            if p.alpha == p.beta {
                writeln!(f, "pt {} {}", p.param, p.alpha)?;
            } else {
                writeln!(f, "pt {} {} {}", p.param, p.alpha, p.beta)?;
            }
        }
        Ok(())
    }
}

/// Parses `profile` then `pt <parameter> <radius> [<image radius>]`; the
/// image radius defaults to the radius.
pub fn parse_profile(text: &str) -> Result<Profile, AnnulusError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, h)) if h == ["profile"] => {}
        Some((line, _)) => {
            return Err(AnnulusError::Parse {
                line,
                msg: "expected `profile`".into(),
            })
        }
        None => {
            return Err(AnnulusError::Parse {
                line: 0,
                msg: "empty profile file".into(),
            })
        }
    }
    let mut points = Vec::new();
    for (line, t) in lines {
        if !(t.len() == 3 || t.len() == 4) || t[0] != "pt" {
            return Err(AnnulusError::Parse {
                line,
                msg: "expected `pt <parameter> <radius> [<image radius>]`".into(),
            });
        }
        let alpha = rational_field(line, t[2])?;
        let beta = match t.get(3) {
            Some(s) => rational_field(line, s)?,
            None => alpha.clone(),
        };
        points.push(ProfilePoint {
            param: rational_field(line, t[1])?,
            alpha,
            beta,
        });
    }
    Profile::new(points)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSample {
    pub param: Rational,
    pub alpha_radius: Rational,
    pub beta_radius: Rational,
    pub alpha: BlockLabel,
    pub beta: BlockLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkExtraction {
    pub samples: Vec<ProfileSample>,
    pub walk: SyncWalk,
    pub unfolding: Unfolding,
}

impl WalkExtraction {
    /// Samples at which either side's block differs from the previous
    /// sample's.
    pub fn transitions(&self) -> Vec<&ProfileSample> {
        let mut out: Vec<&ProfileSample> = Vec::new();
        for s in &self.samples {
            let changed = out
                .last()
                .is_none_or(|p| !p.alpha.same_block(&s.alpha) || !p.beta.same_block(&s.beta));
            if changed {
                out.push(s);
            }
        }
        out
    }
}

/// Parameters where a linear piece from `(s0, r0)` to `(s1, r1)` strictly
/// crosses one of `rungs`.
fn crossings(
    s0: &Rational,
    r0: &Rational,
    s1: &Rational,
    r1: &Rational,
    rungs: &[Rational],
    out: &mut BTreeSet<Rational>,
) {
    if r0 == r1 {
        return;
    }
    let (lo, hi) = if r0 < r1 { (r0, r1) } else { (r1, r0) };
    for r in rungs.iter().filter(|r| *r > lo && *r < hi) {
        out.insert(s0 + (r - r0) * (s1 - s0) / (r1 - r0));
    }
}

fn interpolate(points: &[ProfilePoint], s: &Rational) -> (Rational, Rational) {
    let k = points.partition_point(|p| p.param <= *s);
    if k == points.len() {
        let p = &points[k - 1];
        return (p.alpha.clone(), p.beta.clone());
    }
    let (a, b) = (&points[k - 1], &points[k]);
    let u = (s - &a.param) / (&b.param - &a.param);
    (
        &a.alpha + (&b.alpha - &a.alpha) * &u,
        &a.beta + (&b.beta - &a.beta) * &u,
    )
}

/// The sample parameters: every breakpoint, every rung crossing on either
/// side, and the midpoint between consecutive ones. On each piece between
/// consecutive critical parameters both radii stay inside one cell, so this
/// sees every block the path visits.
fn sample_params(p: &Profile, la: &RadiusLadder, lb: &RadiusLadder) -> Vec<Rational> {
    let pts = p.points();
    let mut critical: BTreeSet<Rational> = pts.iter().map(|q| q.param.clone()).collect();
    for w in pts.windows(2) {
        crossings(
            &w[0].param,
            &w[0].alpha,
            &w[1].param,
            &w[1].alpha,
            la.rungs(),
            &mut critical,
        );
        crossings(
            &w[0].param,
            &w[0].beta,
            &w[1].param,
            &w[1].beta,
            lb.rungs(),
            &mut critical,
        );
    }
    let critical: Vec<Rational> = critical.into_iter().collect();
    let two = Rational::from_integer(2.into());
    let mut out = Vec::with_capacity(2 * critical.len());
    for (i, s) in critical.iter().enumerate() {
        if i > 0 {
            out.push((&critical[i - 1] + s) / &two);
        }
        out.push(s.clone());
    }
    out
}

/// One cell of the walk: the pair of block edges a sample sits in, and the
/// rungs it sits on, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Cell {
    em: Edge,
    en: Edge,
    anchor_m: Option<i64>,
    anchor_n: Option<i64>,
    param: Rational,
}

fn cell_of(s: &ProfileSample) -> Cell {
    let anchor = |l: &BlockLabel, r: &Rational| {
        if r.is_zero() {
            Some(0)
        } else {
            l.on_rung.map(|t| t as i64)
        }
    };
    Cell {
        em: s.alpha.edge(),
        en: s.beta.edge(),
        anchor_m: anchor(&s.alpha, &s.alpha_radius),
        anchor_n: anchor(&s.beta, &s.beta_radius),
        param: s.param.clone(),
    }
}

/// Vertices shared by the given edges, anchors first.
fn side_choices(edges: &[Edge], anchors: &[Option<i64>]) -> Vec<i64> {
    let common: Vec<i64> = [edges[0].left, edges[0].right()]
        .into_iter()
        .filter(|&v| edges.iter().all(|e| e.has_endpoint(v)))
        .collect();
    let mut out: Vec<i64> = anchors
        .iter()
        .flatten()
        .copied()
        .filter(|a| common.contains(a))
        .collect();
    out.extend(common);
    out.dedup();
    out
}

fn joint_vertex(
    pair: &GraphPair,
    cells: &[&Cell],
    param: &Rational,
) -> Result<(i64, i64), AnnulusError> {
    let em: Vec<Edge> = cells.iter().map(|c| c.em).collect();
    let en: Vec<Edge> = cells.iter().map(|c| c.en).collect();
    let am: Vec<Option<i64>> = cells.iter().map(|c| c.anchor_m).collect();
    let an: Vec<Option<i64>> = cells.iter().map(|c| c.anchor_n).collect();
    for a in side_choices(&em, &am) {
        for b in side_choices(&en, &an) {
            if pair.matched(a, b) {
                return Ok((a, b));
            }
        }
    }
    Err(AnnulusError::UnclosableEnd {
        parameter: param.clone(),
    })
}

/// Sweeps the profile, checks that the point is in a D block exactly when
/// its image is, and assembles the visited block pairs into an unfolding.
///
/// Every sample contributes the edge pair of its two blocks; consecutive
/// edge pairs are joined at a shared, color-matched rung pair, preferring
/// rungs the path actually touches.
pub fn extract_walk(
    profile: &Profile,
    alpha_ladder: &RadiusLadder,
    beta_ladder: &RadiusLadder,
    m: &IndexSequence,
    n: &IndexSequence,
) -> Result<WalkExtraction, AnnulusError> {
    let mut samples = Vec::new();
    for s in sample_params(profile, alpha_ladder, beta_ladder) {
        let (ra, rb) = interpolate(profile.points(), &s);
        let alpha = classify_radius(alpha_ladder, m, &ra)?;
        let beta = classify_radius(beta_ladder, n, &rb)?;
        if alpha.kind != beta.kind {
            return Err(AnnulusError::ConsistencyViolation {
                parameter: s,
                alpha: Box::new(alpha),
                beta: Box::new(beta),
            });
        }
        samples.push(ProfileSample {
            param: s,
            alpha_radius: ra,
            beta_radius: rb,
            alpha,
            beta,
        });
    }

    let hi = |ladder: &RadiusLadder, seq: &IndexSequence| {
        ((ladder.last_rung() + 1) as i64).min(max_truncation(seq))
    };
    let pair = Arc::new(GraphPair::with_truncation(
        m.clone(),
        n.clone(),
        hi(alpha_ladder, m),
        hi(beta_ladder, n),
    )?);

    let mut cells: Vec<Cell> = Vec::new();
    for s in &samples {
        let c = cell_of(s);
        let same = cells.last().is_some_and(|p| {
            p.em == c.em && p.en == c.en && p.anchor_m == c.anchor_m && p.anchor_n == c.anchor_n
        });
        if !same {
            cells.push(c);
        }
    }

    let first = &cells[0];
    let start = joint_vertex(&pair, &[first], &first.param)?;
    let mut steps = Vec::with_capacity(cells.len());
    for (k, c) in cells.iter().enumerate() {
        let to = match cells.get(k + 1) {
            Some(next) => joint_vertex(&pair, &[c, next], &next.param)?,
            None => joint_vertex(&pair, &[c], &c.param)?,
        };
        steps.push(Step {
            em: c.em,
            en: c.en,
            to,
        });
    }
    let walk = SyncWalk { start, steps };
    let unfolding = Unfolding::from_walk(pair, &walk)?;
    Ok(WalkExtraction {
        samples,
        walk,
        unfolding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unfoldings::sim_relation;
    use proptest::prelude::*;

    fn seq(v: &[u64]) -> IndexSequence {
        IndexSequence::new(v.to_vec()).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn int(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn five_rung_labels() {
        let ladder = RadiusLadder::integer(6);
        let n = seq(&[0, 1, 2]);
        let c = |r: Rational| classify_radius(&ladder, &n, &r).unwrap();
        let d0 = c(int(0));
        assert_eq!((d0.kind, d0.index, d0.on_rung), (BlockKind::D, 0, None));
        assert!(d0.left_closed);
        assert_eq!(d0.right_closed, Some(false));
        let kinds: Vec<(BlockKind, u64)> =
            (1..=5).map(|t| (c(int(t)).kind, c(int(t)).index)).collect();
        use BlockKind::*;
        assert_eq!(kinds, vec![(E, 0), (E, 0), (D, 1), (D, 2), (E, 2)]);
        let r3 = c(int(3));
        assert_eq!(r3.on_rung, Some(3));
        assert_eq!((r3.left_closed, r3.right_closed), (false, Some(true)));
        let r5 = c(int(5));
        assert_eq!(r5.on_rung, Some(5));
        assert!(r5.left_closed);
        // Whether E(2) contains rung 6 depends on n_3.
        assert_eq!(r5.right_closed, None);
        let with_n3 = classify_radius(&ladder, &seq(&[0, 1, 2, 3]), &int(5)).unwrap();
        assert_eq!(with_n3.to_string(), "E(2) C[5,6] rung 5");
        let mid = c(q(3, 2));
        assert_eq!(mid.to_string(), "E(0) C[1,2]");
    }

    #[test]
    fn out_of_ladder() {
        let ladder = RadiusLadder::integer(3);
        let n = seq(&[0, 1, 2]);
        assert!(matches!(
            classify_radius(&ladder, &n, &q(7, 2)),
            Err(AnnulusError::OutOfLadder { .. })
        ));
        assert!(matches!(
            classify_radius(&ladder, &n, &int(4)),
            Err(AnnulusError::OutOfLadder { .. })
        ));
        assert!(classify_radius(&ladder, &n, &int(3)).is_ok());
    }

    #[test]
    fn open_intervals() {
        let ladder = RadiusLadder::integer(5);
        assert_eq!(smallest_open_interval(&ladder, &int(0)).unwrap(), (0, 1));
        assert_eq!(smallest_open_interval(&ladder, &int(2)).unwrap(), (1, 3));
        assert_eq!(smallest_open_interval(&ladder, &q(3, 2)).unwrap(), (1, 2));
        assert!(smallest_open_interval(&ladder, &int(5)).is_err());
    }

    /// Membership of `r_2j`, `r_2j+1`, `r_2j+2` for every parity pattern of
    /// `(j, j+1)`.
    #[test]
    fn boundary_rules_table() {
        // (sequence, j, parities of j and j+1)
        let cases: [(&[u64], u64, bool, bool); 4] = [
            (&[0, 3], 1, true, true),
            (&[0, 2, 3], 1, true, false),
            (&[0, 1, 2], 1, false, true),
            (&[0, 1, 3], 1, false, false),
        ];
        let ladder = RadiusLadder::integer(8);
        for (s, j, ej, ej1) in cases {
            let n = seq(s);
            assert_eq!(n.block_parity(j).unwrap().is_even(), ej);
            assert_eq!(n.block_parity(j + 1).unwrap().is_even(), ej1);
            let label = |t: u64| classify_radius(&ladder, &n, &int(t as i64)).unwrap();
            let (a, b, c) = (label(2 * j), label(2 * j + 1), label(2 * j + 2));
            // D(j) = C[2j,2j+1) for even j, C(2j,2j+1] for odd j.
            assert_eq!(a.kind == BlockKind::D && a.index == j, ej);
            assert_eq!(b.kind == BlockKind::D && b.index == j, !ej);
            // E(j) is closed on the left iff j even, on the right iff j+1 odd.
            assert_eq!(b.kind == BlockKind::E && b.index == j, ej);
            assert_eq!(c.kind == BlockKind::E && c.index == j, !ej1);
            let e = classify_radius(&ladder, &n, &(int(2 * j as i64 + 1) + q(1, 2))).unwrap();
            assert_eq!((e.kind, e.index), (BlockKind::E, j));
            assert_eq!((e.left_closed, e.right_closed), (ej, Some(!ej1)));
        }
    }

    #[test]
    fn compatibility_clauses() {
        let mut rel = SimRelation::default();
        rel.edge_pairs.insert((Edge::new(0), Edge::new(4)));
        let ladder = RadiusLadder::integer(8);
        let n = seq(&[0, 1, 2, 3, 4]);
        let d0 = classify_radius(&ladder, &n, &q(1, 2)).unwrap();
        let d2 = classify_radius(&ladder, &n, &q(9, 2)).unwrap();
        let e0 = classify_radius(&ladder, &n, &q(3, 2)).unwrap();
        assert!(compatible(&d0, &d2, &rel));
        assert!(!compatible(&d0, &e0, &rel));
        assert!(!compatible(&e0, &e0, &rel));
    }

    #[test]
    fn ladder_and_profile_round_trip() {
        let ladder = RadiusLadder::new(int(4), vec![int(0), q(1, 2), q(3, 2), int(3)]).unwrap();
        let text = ladder.to_string();
        assert_eq!(
            text,
            "ladder 4\nrung 0 0\nrung 1 1/2\nrung 2 3/2\nrung 3 3\n"
        );
        assert_eq!(parse_ladder(&text).unwrap(), ladder);
        let p = parse_profile("profile\n# comment\npt 0 0\npt 1/2 5/2 2\npt 1 1\n").unwrap();
        assert_eq!(parse_profile(&p.to_string()).unwrap(), p);
        assert!(parse_profile("profile\npt 0 0\npt 0 1\n").is_err());
        assert!(parse_ladder("ladder 2\nrung 0 0\nrung 1 3\n").is_err());
    }

    #[test]
    fn identity_profile_gives_diagonal() {
        let ladder = RadiusLadder::integer(6);
        let m = seq(&[0, 1, 3, 6]);
        let p = Profile::identity(&[int(0), q(11, 2)]).unwrap();
        let x = extract_walk(&p, &ladder, &ladder, &m, &m).unwrap();
        assert!(x.walk.states().all(|(a, b)| a == b));
        assert_eq!(x.unfolding.f().range(), (0..=5).collect());
        assert!(x.unfolding.f().edge_images().contains(&Edge::new(5)));
    }

    #[test]
    fn zigzag_profile_revisits() {
        let ladder = RadiusLadder::integer(7);
        let m = seq(&[0, 1, 2, 3]);
        // Up into D(1), back into E(0), then up through D(1), E(1), D(2).
        let p = Profile::identity(&[int(0), q(5, 2), q(3, 2), q(9, 2)]).unwrap();
        let x = extract_walk(&p, &ladder, &ladder, &m, &m).unwrap();
        let rel = sim_relation(&x.unfolding);
        assert!(rel.relates_edges(Edge::new(2), Edge::new(2)));
        let visits = x.walk.steps.iter().filter(|s| s.em == Edge::new(2)).count();
        assert!(visits >= 2);
        for s in &x.samples {
            assert!(compatible(&s.alpha, &s.beta, &rel), "{}", s.param);
        }
    }

    #[test]
    fn mismatch_reports_first_parameter() {
        let ladder = RadiusLadder::integer(6);
        let m = seq(&[0, 1, 2]);
        // The point reaches rung 1 (in E(0)) at parameter 1/2 while the image
        // stays inside D(0).
        let p = parse_profile("profile\npt 0 0 0\npt 1/2 1 1/2\npt 1 3/2 1/2\n").unwrap();
        match extract_walk(&p, &ladder, &ladder, &m, &m) {
            Err(AnnulusError::ConsistencyViolation {
                parameter,
                alpha,
                beta,
            }) => {
                assert_eq!(parameter, q(1, 2));
                assert_eq!((alpha.kind, beta.kind), (BlockKind::E, BlockKind::D));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scaled_image_ladder() {
        // The image moves on a ladder twice as wide.
        let la = RadiusLadder::integer(5);
        let lb = RadiusLadder::new(int(12), (0..=5).map(|t| int(2 * t)).collect()).unwrap();
        let m = seq(&[0, 1, 3]);
        let p = parse_profile("profile\npt 0 0 0\npt 1/2 9/2 9\npt 1 1/2 1\n").unwrap();
        let x = extract_walk(&p, &la, &lb, &m, &m).unwrap();
        assert!(x.walk.states().all(|(a, b)| a == b));
    }

    proptest! {
        #[test]
        fn labels_partition_the_ball(num in 0i64..3600, s in 0usize..3) {
            let seqs: [&[u64]; 3] = [&[0, 1, 2, 3, 4, 5], &[0, 1, 3, 6], &[0, 2, 5, 9]];
            let n = seq(seqs[s]);
            let ladder = RadiusLadder::integer(9);
            let r = q(num, 400);
            let label = classify_radius(&ladder, &n, &r).unwrap();
            let (lo, hi) = (int(label.left as i64), int(label.right as i64));
            prop_assert!(lo <= r && r <= hi);
            if r == lo {
                prop_assert!(label.left_closed || r.is_zero());
            }
            if r == hi {
                prop_assert_eq!(label.right_closed, Some(true));
            }
        }
    }
}
