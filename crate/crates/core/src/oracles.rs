//! Bounded lemma-checking campaigns over a corpus of sequence pairs, and
//! the naive enumeration oracle the coverage engine is measured against.
//!
//! Every campaign instantiates a lemma's hypotheses exhaustively within
//! its bounds and checks the conclusion. `checked` counts instantiations;
//! a campaign in which nothing could be instantiated is an error rather
//! than a pass.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::graphs::{default_truncation, Edge, GraphError};
use crate::sequences::{e_tail_check, IndexSequence, SequenceError, TailKind};
use crate::unfoldings::{
    check_sum_formula, check_within_arrow, coverage_in, coverage_with, enumerate_walks,
    extend_unfolding, sim_relation, CoverageOptions, ExtendCase, GraphPair, ProductGraph,
    ProductState, Unfolding, UnfoldingError, WalkSpace,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("invalid campaign: {0}")]
    InvalidCampaign(String),
    #[error("bounds too tight for {lemma}: {detail}")]
    BoundsTooTight { lemma: LemmaId, detail: String },
    #[error(transparent)]
    Unfolding(#[from] UnfoldingError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LemmaId {
    Extend,
    WithinArrow,
    SumFormula,
    Distance,
    TailFromCoverage,
    ParityClaim,
    PhiPsiEqual,
}

impl LemmaId {
    pub const ALL: [LemmaId; 7] = [
        LemmaId::Extend,
        LemmaId::WithinArrow,
        LemmaId::SumFormula,
        LemmaId::Distance,
        LemmaId::TailFromCoverage,
        LemmaId::ParityClaim,
        LemmaId::PhiPsiEqual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Extend => "extend",
            LemmaId::WithinArrow => "within_arrow",
            LemmaId::SumFormula => "sum_formula",
            LemmaId::Distance => "distance",
            LemmaId::TailFromCoverage => "tail_from_coverage",
            LemmaId::ParityClaim => "parity_claim",
            LemmaId::PhiPsiEqual => "phi_psi_equal",
        }
    }

    /// Lemmas whose hypotheses include strictly increasing differences.
    pub fn needs_delta_increasing(self) -> bool {
        matches!(
            self,
            LemmaId::Distance
                | LemmaId::TailFromCoverage
                | LemmaId::ParityClaim
                | LemmaId::PhiPsiEqual
        )
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LemmaId::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = LemmaId::ALL.iter().map(|l| l.name()).collect();
                format!("unknown lemma `{s}`, expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_domain: usize,
    /// Caps both truncations; each side never exceeds its default window.
    pub hi: Option<i64>,
    pub max_shift: u64,
    pub min_overlap: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_domain: 6,
            hi: None,
            max_shift: 8,
            min_overlap: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Campaign {
    lemma: LemmaId,
    corpus: Vec<(IndexSequence, IndexSequence)>,
    bounds: Bounds,
    workers: usize,
}

impl Campaign {
    pub fn new(
        lemma: LemmaId,
        corpus: Vec<(IndexSequence, IndexSequence)>,
        bounds: Bounds,
    ) -> Result<Self, OracleError> {
        let invalid = |s: String| Err(OracleError::InvalidCampaign(s));
        if corpus.is_empty() {
            return invalid("empty corpus".into());
        }
        if bounds.max_domain < 2 {
            return invalid(format!(
                "max_domain must be at least 2, got {}",
                bounds.max_domain
            ));
        }
        if bounds.min_overlap == 0 {
            return invalid("min_overlap must be positive".into());
        }
        if let Some(h) = bounds.hi {
            if h < 1 {
                return invalid(format!("truncation hi must be positive, got {h}"));
            }
        }
        if lemma.needs_delta_increasing() {
            for (m, n) in &corpus {
                for s in [m, n] {
                    if !s.is_delta_increasing() {
                        return invalid(format!(
                            "{lemma} needs strictly increasing differences, {} has none",
                            s.compact()
                        ));
                    }
                }
            }
        }
        Ok(Campaign {
            lemma,
            corpus,
            bounds,
            workers: 1,
        })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn lemma(&self) -> LemmaId {
        self.lemma
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn corpus(&self) -> &[(IndexSequence, IndexSequence)] {
        &self.corpus
    }

    fn pair(&self, m: &IndexSequence, n: &IndexSequence) -> Result<Arc<GraphPair>, OracleError> {
        let cap = |s: &IndexSequence| match self.bounds.hi {
            Some(h) => h.min(default_truncation(s)),
            None => default_truncation(s),
        };
        Ok(Arc::new(GraphPair::with_truncation(
            m.clone(),
            n.clone(),
            cap(m),
            cap(n),
        )?))
    }

    /// A single command that reruns one instance.
    pub fn replay_command(&self, m: &IndexSequence, n: &IndexSequence) -> String {
        let b = &self.bounds;
        let mut cmd = format!(
            "wadgelab campaign --lemma {} --m \"{m}\" --n \"{n}\" --max-domain {} --max-shift {} --min-overlap {}",
            self.lemma, b.max_domain, b.max_shift, b.min_overlap
        );
        if let Some(h) = b.hi {
            cmd.push_str(&format!(" --hi {h}"));
        }
        cmd
    }
}

/// Reads a corpus: either `m | n` pair lines, or plain sequence lines that
/// stand for every ordered pair of them (including each sequence with
/// itself). `#` starts a comment line.
pub fn parse_corpus(text: &str) -> Result<Vec<(IndexSequence, IndexSequence)>, OracleError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let parse = |line: usize, s: &str| {
        s.trim()
            .parse::<IndexSequence>()
            .map_err(|e| OracleError::InvalidCampaign(format!("corpus line {line}: {e}")))
    };
    let pairs = lines.iter().filter(|(_, l)| l.contains('|')).count();
    if pairs == 0 {
        let seqs = lines
            .iter()
            .map(|&(i, l)| parse(i, l))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(seqs
            .iter()
            .flat_map(|m| seqs.iter().map(move |n| (m.clone(), n.clone())))
            .collect());
    }
    if pairs != lines.len() {
        return Err(OracleError::InvalidCampaign(
            "corpus mixes `m | n` pair lines with plain sequence lines".into(),
        ));
    }
    lines
        .iter()
        .map(|&(i, l)| {
            let (m, n) = l.split_once('|').expect("counted above");
            if n.contains('|') {
                return Err(OracleError::InvalidCampaign(format!(
                    "corpus line {i}: more than one `|`"
                )));
            }
            Ok((parse(i, m)?, parse(i, n)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub instance: usize,
    pub clause: String,
    /// The offending object in dump format, when there is one.
    pub dump: Option<String>,
    pub replay: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceResult {
    pub index: usize,
    pub m: IndexSequence,
    pub n: IndexSequence,
    pub checked: usize,
    pub failures: Vec<Certificate>,
    /// Observations that are not verdicts, such as measured coverage bounds.
    pub notes: Vec<String>,
}

impl InstanceResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub lemma: LemmaId,
    pub instances: Vec<InstanceResult>,
    pub wall_time: Duration,
}

impl CampaignReport {
    pub fn checked(&self) -> usize {
        self.instances.iter().map(|i| i.checked).sum()
    }

    pub fn failures(&self) -> impl Iterator<Item = &Certificate> {
        self.instances.iter().flat_map(|i| &i.failures)
    }

    pub fn failure_count(&self) -> usize {
        self.failures().count()
    }

    pub fn passed(&self) -> bool {
        self.failure_count() == 0
    }
}

/// Deterministic text: instance lines, certificates, then the footer. The
/// wall time is left out so reports compare equal across runs.
impl fmt::Display for CampaignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.instances {
            let verdict = if i.passed() { "pass" } else { "fail" };
            writeln!(
                f,
                "instance {} {verdict} m={} n={} checked={}",
                i.index,
                i.m.compact(),
                i.n.compact(),
                i.checked
            )?;
            for note in &i.notes {
                writeln!(f, "  note {note}")?;
            }
            for c in &i.failures {
                writeln!(f, "  clause {}", c.clause)?;
                writeln!(f, "  replay {}", c.replay)?;
                if let Some(d) = &c.dump {
                    for line in d.lines() {
                        writeln!(f, "    {line}")?;
                    }
                }
            }
        }
        write!(
            f,
            "campaign {} checked={} failures={}",
            self.lemma,
            self.checked(),
            self.failure_count()
        )
    }
}

struct Tally<'a> {
    campaign: &'a Campaign,
    result: InstanceResult,
}

impl<'a> Tally<'a> {
    fn new(campaign: &'a Campaign, index: usize, m: &IndexSequence, n: &IndexSequence) -> Self {
        Tally {
            campaign,
            result: InstanceResult {
                index,
                m: m.clone(),
                n: n.clone(),
                checked: 0,
                failures: Vec::new(),
                notes: Vec::new(),
            },
        }
    }

    fn check(&mut self, ok: bool, clause: impl FnOnce() -> (String, Option<String>)) {
        self.result.checked += 1;
        if !ok {
            let (clause, dump) = clause();
            self.fail(clause, dump);
        }
    }

    fn fail(&mut self, clause: String, dump: Option<String>) {
        let replay = self.campaign.replay_command(&self.result.m, &self.result.n);
        self.result.failures.push(Certificate {
            instance: self.result.index,
            clause,
            dump,
            replay,
        });
    }
}

/// Runs every instance, in parallel on `workers` threads, and merges the
/// results by instance index.
pub fn run_campaign(c: &Campaign) -> Result<CampaignReport, OracleError> {
    let start = Instant::now();
    let run = |(i, (m, n)): (usize, &(IndexSequence, IndexSequence))| run_instance(c, i, m, n);
    let instances: Result<Vec<InstanceResult>, OracleError> = if c.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(c.workers)
            .build()
            .expect("thread pool");
        pool.install(|| c.corpus.par_iter().enumerate().map(run).collect())
    } else {
        c.corpus.iter().enumerate().map(run).collect()
    };
    let report = CampaignReport {
        lemma: c.lemma,
        instances: instances?,
        wall_time: start.elapsed(),
    };
    if report.checked() == 0 {
        return Err(OracleError::BoundsTooTight {
            lemma: c.lemma,
            detail: format!(
                "no hypothesis instance exists in {} corpus pairs with max_domain={} hi={:?}",
                c.corpus.len(),
                c.bounds.max_domain,
                c.bounds.hi
            ),
        });
    }
    Ok(report)
}

fn run_instance(
    c: &Campaign,
    index: usize,
    m: &IndexSequence,
    n: &IndexSequence,
) -> Result<InstanceResult, OracleError> {
    let mut tally = Tally::new(c, index, m, n);
    let pair = c.pair(m, n)?;
    match c.lemma {
        LemmaId::Extend => extend_instance(&mut tally, &pair)?,
        LemmaId::WithinArrow => within_arrow_instance(&mut tally, &pair)?,
        LemmaId::SumFormula | LemmaId::Distance => sum_formula_instance(&mut tally, &pair)?,
        LemmaId::TailFromCoverage => tail_instance(&mut tally, &pair)?,
        LemmaId::ParityClaim => parity_instance(&mut tally, &pair)?,
        LemmaId::PhiPsiEqual => phi_psi_instance(&mut tally, &pair)?,
    }
    Ok(tally.result)
}

fn extend_instance(tally: &mut Tally, pair: &Arc<GraphPair>) -> Result<(), OracleError> {
    let max_domain = tally.campaign.bounds.max_domain;
    let mut per_case = [0usize; 4];
    let walks = WalkSpace::new(pair.clone())
        .walks(2, max_domain)
        .unfoldings();
    for x in walks {
        let rel = sim_relation(&x);
        let mut tried = BTreeSet::new();
        for &(em, en) in &rel.edge_pairs {
            for case in ExtendCase::ALL {
                if let Some((k, l)) = premise_anchors(em, en, case) {
                    if !tried.insert((case, k, l)) || !extend_admissible(pair, case, k, l) {
                        continue;
                    }
                    per_case[case.number() as usize - 1] += 1;
                    check_extension(tally, &x, &rel, case, k, l);
                }
            }
        }
    }
    tally.result.notes.push(format!(
        "instances per case: 1={} 2={} 3={} 4={}",
        per_case[0], per_case[1], per_case[2], per_case[3]
    ));
    Ok(())
}

/// The `(k, l)` for which `(em, en)` is the premise pair of `case`.
fn premise_anchors(em: Edge, en: Edge, case: ExtendCase) -> Option<(i64, i64)> {
    let k = [em.left, em.right()]
        .into_iter()
        .find(|&k| case.premise(k, 0).0 == em)?;
    let l = [en.left, en.right()]
        .into_iter()
        .find(|&l| case.premise(0, l).1 == en)?;
    Some((k, l))
}

/// `k, l > 0`, equal colors, and the conclusion pair inside both
/// truncations.
fn extend_admissible(pair: &GraphPair, case: ExtendCase, k: i64, l: i64) -> bool {
    if k <= 0 || l <= 0 || !pair.matched(k, l) {
        return false;
    }
    let (qm, qn) = case.conclusion(k, l);
    pair.gm().contains_edge(qm) && pair.gn().contains_edge(qn)
}

fn check_extension(
    tally: &mut Tally,
    x: &Unfolding,
    rel: &crate::unfoldings::SimRelation,
    case: ExtendCase,
    k: i64,
    l: i64,
) {
    let what = || format!("extend case={case} k={k} l={l}");
    match extend_unfolding(x, k, l, case) {
        Err(e) => tally.check(false, || (format!("{}: {e}", what()), Some(x.to_string()))),
        Ok(y) => {
            let rel2 = sim_relation(&y);
            let (qm, qn) = case.conclusion(k, l);
            let mut rf = x.f().range();
            rf.insert(k);
            let mut rg = x.g().range();
            rg.insert(l);
            let problem = if !rel2.relates_edges(qm, qn) {
                Some(format!("conclusion {qm} ~ {qn} missing"))
            } else if !rel.is_subset(&rel2) {
                Some("the extension loses pairs of the original relation".to_string())
            } else if y.f().range() != rf {
                Some(format!("ran f* = {:?}, expected {rf:?}", y.f().range()))
            } else if y.g().range() != rg {
                Some(format!("ran g* = {:?}, expected {rg:?}", y.g().range()))
            } else {
                None
            };
            tally.check(problem.is_none(), || {
                (
                    format!("{}: {}", what(), problem.unwrap_or_default()),
                    Some(x.to_string()),
                )
            });
        }
    }
}

fn arrows_within(seq: &IndexSequence, hi: i64) -> Vec<(usize, (i64, i64))> {
    (0..seq.len())
        .map_while(|s| seq.arrow(s).map(|a| (s, a)))
        .filter(|&(_, (_, top))| top <= hi)
        .collect()
}

fn within_arrow_instance(tally: &mut Tally, pair: &Arc<GraphPair>) -> Result<(), OracleError> {
    let max_domain = tally.campaign.bounds.max_domain;
    let mut parities = BTreeSet::new();
    for (s, (alo, ahi)) in arrows_within(pair.m(), pair.hi_m()) {
        for (t, (blo, bhi)) in arrows_within(pair.n(), pair.hi_n()) {
            let space = WalkSpace::new(pair.clone())
                .restrict(move |a, b| (alo..=ahi).contains(&a) && (blo..=bhi).contains(&b));
            for x in space.walks(2, max_domain).unfoldings() {
                parities.insert((s % 2, t % 2));
                let r = check_within_arrow(&x, s, t)?;
                tally.check(r.passed(), || {
                    (
                        format!("within_arrow s={s} t={t}: {}", r.failures.join("; ")),
                        Some(x.to_string()),
                    )
                });
            }
        }
    }
    let combos: Vec<String> = parities.iter().map(|(a, b)| format!("({a},{b})")).collect();
    tally
        .result
        .notes
        .push(format!("(s,t) parities {}", combos.join(" ")));
    Ok(())
}

fn sum_formula_instance(tally: &mut Tally, pair: &Arc<GraphPair>) -> Result<(), OracleError> {
    let max_domain = tally.campaign.bounds.max_domain;
    let n = pair.n().clone();
    let distance_only = tally.campaign.lemma == LemmaId::Distance;
    let mut distance_checks = 0usize;
    for (s, (alo, ahi)) in arrows_within(pair.m(), pair.hi_m()) {
        let space = WalkSpace::new(pair.clone()).restrict(move |a, _| (alo..=ahi).contains(&a));
        for x in space.walks(2, max_domain).unfoldings() {
            let gv = x.g().vertex_images();
            let (argmin, &g_a) = gv
                .iter()
                .enumerate()
                .min_by_key(|&(i, g)| (*g, i))
                .expect("nonempty domain");
            let a = x.domain().lo() + argmin as i64;
            let Some(t) = n.arrow_of(g_a) else { continue };
            let (_, ghi) = x.g().range_bounds();
            for w in t + 1..n.len() {
                let top = 2 * n.get(w).expect("w < len") as i64 - 1;
                if ghi > top {
                    continue;
                }
                let r = check_sum_formula(&x, a, s, t, w)?;
                let failures: Vec<&String> = r
                    .failures
                    .iter()
                    .filter(|f| !distance_only || f.contains("distance"))
                    .collect();
                let distance =
                    usize::from(pair.m().is_delta_increasing() && n.is_delta_increasing())
                        * (1 + usize::from(ghi < top));
                distance_checks += distance;
                if distance_only && distance == 0 {
                    continue;
                }
                tally.check(failures.is_empty(), || {
                    let text: Vec<&str> = failures.iter().map(|s| s.as_str()).collect();
                    (
                        format!(
                            "{} a={a} s={s} t={t} w={w}: {}",
                            tally_name(distance_only),
                            text.join("; ")
                        ),
                        Some(x.to_string()),
                    )
                });
            }
        }
    }
    tally
        .result
        .notes
        .push(format!("distance bound checks {distance_checks}"));
    Ok(())
}

fn tally_name(distance_only: bool) -> &'static str {
    if distance_only {
        "distance"
    } else {
        "sum_formula"
    }
}

/// Seeds `l` inside the truncation with `c_m(0) = c_n(l)` and at least one
/// step available from `(0, l)`.
pub fn valid_seeds(graph: &ProductGraph) -> Vec<i64> {
    (0..=graph.pair().hi_n())
        .filter(|&l| {
            graph
                .id(0, l)
                .is_some_and(|id| graph.has_self_loop(id) || !graph.neighbors(id).is_empty())
        })
        .collect()
}

/// The valid seeds with `l <= 2 n_2`.
///
/// Larger seeds start so deep inside `G_n` that the truncation boundary,
/// not the lemma, decides how far the walk can spread.
pub fn admissible_seeds(pair: &GraphPair, graph: &ProductGraph) -> Vec<i64> {
    let bound = pair.n().get(2).map_or(i64::MAX, |n2| 2 * n2 as i64);
    valid_seeds(graph)
        .into_iter()
        .filter(|&l| l <= bound)
        .collect()
}

fn tail_instance(tally: &mut Tally, pair: &Arc<GraphPair>) -> Result<(), OracleError> {
    let b = tally.campaign.bounds;
    let verdict = e_tail_check(
        &pair.m().delta(),
        &pair.n().delta(),
        b.max_shift,
        b.min_overlap,
    );
    let graph = ProductGraph::new(pair.clone(), None);
    let seeds = admissible_seeds(pair, &graph);
    tally.result.notes.push(format!("tail {verdict}"));
    match verdict.kind {
        TailKind::Undetermined => {
            tally
                .result
                .notes
                .push("window too short to decide; no instance".into());
        }
        TailKind::EquivalentOnWindow { .. } => {
            // The contrapositive has a false premise here; any coverage is
            // consistent with the lemma.
            for l in seeds {
                let cov = coverage_in(&graph, l, None, 1)?;
                tally
                    .result
                    .notes
                    .push(format!("vacuous l={l} max={}", cov.max));
                tally.check(true, || unreachable!());
            }
        }
        TailKind::InequivalentOnWindow => {
            let mut observed = Vec::new();
            for l in seeds {
                let cov = coverage_in(&graph, l, None, 1)?;
                observed.push(format!("{l}:{}", cov.max));
                tally.check(!cov.is_full(), || {
                    (
                        format!(
                            "window-inequivalent pair has full coverage [0,{}] from seed l={l}",
                            cov.hi_m
                        ),
                        Some(cov.to_string()),
                    )
                });
            }
            tally.result.notes.push(format!(
                "coverage max by seed {} of hi={}",
                observed.join(" "),
                pair.hi_m()
            ));
        }
    }
    Ok(())
}

fn p_values(seq: &IndexSequence) -> Vec<i64> {
    (0..seq.len().saturating_sub(1))
        .map(|u| seq.p_value(u).expect("u + 1 < len") as i64)
        .collect()
}

/// One orientation of the parity claim: `x` plays `m`, `y` plays `n`, and
/// `flip` says whether `x` is actually the `G_n` side.
struct Orientation<'a> {
    x: &'a IndexSequence,
    y: &'a IndexSequence,
    hi_x: i64,
    hi_y: i64,
    flip: bool,
}

impl Orientation<'_> {
    fn state(&self, on_x: i64, on_y: i64) -> ProductState {
        if self.flip {
            ProductState { a: on_y, b: on_x }
        } else {
            ProductState { a: on_x, b: on_y }
        }
    }
}

struct ParityCase {
    u: usize,
    v: usize,
    a: i64,
    b: i64,
    exits: BTreeSet<ProductState>,
}

/// For each `p_u` above both thresholds with `v` least such that
/// `p_u <= q_v`, explores from the seed inside `{x-side < a, y-side < b}`
/// with `a = 2 x_(u+1) - 1`, `b = 2 y_v + p_u`. Cases that do not fit in the
/// truncation or whose `v` the prefix does not determine are skipped.
fn parity_cases(graph: &ProductGraph, o: &Orientation, l: i64, threshold: i64) -> Vec<ParityCase> {
    let p = p_values(o.x);
    let q = p_values(o.y);
    let mut out = Vec::new();
    for (u, &pu) in p.iter().enumerate() {
        if pu <= threshold {
            continue;
        }
        let Some(v) = q.iter().position(|&qv| pu <= qv) else {
            continue;
        };
        let a = 2 * o.x.get(u + 1).expect("u + 1 < len") as i64 - 1;
        let b = 2 * o.y.get(v).expect("v < len") as i64 + pu;
        if a > o.hi_x || b > o.hi_y {
            continue;
        }
        let flip = o.flip;
        let reach = graph.reach_within(ProductState { a: 0, b: l }, move |fa, gb| {
            let (on_x, on_y) = if flip { (gb, fa) } else { (fa, gb) };
            on_x < a && on_y < b
        });
        out.push(ParityCase {
            u,
            v,
            a,
            b,
            exits: reach.exits,
        });
    }
    out
}

fn parity_instance(tally: &mut Tally, pair: &Arc<GraphPair>) -> Result<(), OracleError> {
    let graph = ProductGraph::new(pair.clone(), None);
    let (m, n) = (pair.m(), pair.n());
    let p0 = m.p_value(0)? as i64;
    let mut reached = 0usize;
    for l in admissible_seeds(pair, &graph) {
        let Some(t) = n.arrow_of(l) else { continue };
        let threshold = p0.max(n.p_value(t)? as i64);
        let orientations = [
            Orientation {
                x: m,
                y: n,
                hi_x: pair.hi_m(),
                hi_y: pair.hi_n(),
                flip: false,
            },
            Orientation {
                x: n,
                y: m,
                hi_x: pair.hi_n(),
                hi_y: pair.hi_m(),
                flip: true,
            },
        ];
        for o in &orientations {
            for c in parity_cases(&graph, o, l, threshold) {
                let target = o.state(c.a, c.b);
                let side = if o.flip { "psi" } else { "phi" };
                let stray: Vec<String> = c
                    .exits
                    .iter()
                    .filter(|s| **s != target)
                    .map(|s| format!("({},{})", s.a, s.b))
                    .collect();
                tally.check(stray.is_empty(), || {
                    (
                        format!(
                            "{side} l={l} u={} v={}: walks leave {{< {}, < {}}} at {} instead of ({},{})",
                            c.u,
                            c.v,
                            c.a,
                            c.b,
                            stray.join(" "),
                            target.a,
                            target.b
                        ),
                        None,
                    )
                });
                if c.exits.contains(&target) {
                    reached += 1;
                    tally.check(c.u % 2 == c.v % 2, || {
                        (
                            format!(
                                "{side} l={l}: ({},{}) is reached but u={} and v={} differ in parity",
                                target.a, target.b, c.u, c.v
                            ),
                            None,
                        )
                    });
                }
            }
        }
    }
    tally
        .result
        .notes
        .push(format!("first hits reached {reached}"));
    Ok(())
}

/// `{p_u : p_u > threshold} ∩ [0, bound]`.
fn tail_set(p: &[i64], threshold: i64, bound: i64) -> Vec<i64> {
    p.iter()
        .copied()
        .filter(|&x| x > threshold && x <= bound)
        .collect()
}

fn phi_psi_instance(tally: &mut Tally, pair: &Arc<GraphPair>) -> Result<(), OracleError> {
    let graph = ProductGraph::new(pair.clone(), None);
    let (m, n) = (pair.m(), pair.n());
    let (p, q) = (p_values(m), p_values(n));
    if p.len() < 2 || q.len() < 2 {
        tally
            .result
            .notes
            .push("prefix too short for a window".into());
        return Ok(());
    }
    // The last arrow of each prefix is where truncation decides coverage,
    // so the comparison stops one arrow earlier.
    let bound = p[p.len() - 2].min(q[q.len() - 2]);
    for l in admissible_seeds(pair, &graph) {
        let cov = coverage_in(&graph, l, None, 1)?;
        if !cov.is_full() {
            continue;
        }
        let Some(t) = n.arrow_of(l) else { continue };
        let threshold = p[0].max(q[t]);
        let phi = tail_set(&p, threshold, bound);
        let psi = tail_set(&q, threshold, bound);
        tally.check(phi == psi, || {
            (
                format!("l={l}: Phi={phi:?} but Psi={psi:?} below {bound}"),
                Some(cov.to_string()),
            )
        });
    }
    Ok(())
}

/// Union of `ran f` over every unfolding with at most `max_domain` domain
/// vertices through `(0, l)`, by plain enumeration. Each walk is one
/// unfolding, and `ran f` is the `G_m` side of its states.
pub fn oracle_coverage(
    pair: Arc<GraphPair>,
    l: i64,
    max_domain: usize,
    forbid_f_vertex: Option<i64>,
) -> Result<BTreeSet<i64>, UnfoldingError> {
    let mut out = BTreeSet::new();
    let mut walks = enumerate_walks(pair, l, max_domain, forbid_f_vertex)?;
    while let Some(w) = walks.next_walk() {
        out.extend(w.states().map(|(a, _)| a));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentinelOutcome {
    pub l: i64,
    pub engine: BTreeSet<i64>,
    pub oracle: BTreeSet<i64>,
    /// The engine saturated within the bound, so its answer is the full
    /// coverage as well.
    pub saturated: bool,
}

impl SentinelOutcome {
    pub fn agrees(&self) -> bool {
        self.engine == self.oracle
    }
}

/// Engine coverage restricted to walks of at most `max_domain` vertices,
/// next to the enumeration oracle on the same bound.
pub fn sentinel(
    pair: Arc<GraphPair>,
    l: i64,
    max_domain: usize,
    forbid_f_vertex: Option<i64>,
    workers: usize,
) -> Result<SentinelOutcome, UnfoldingError> {
    let cov = coverage_with(
        pair.clone(),
        l,
        CoverageOptions {
            forbid_f_vertex,
            max_steps: Some(max_domain.saturating_sub(1)),
            workers,
        },
    )?;
    let oracle = oracle_coverage(pair, l, max_domain, forbid_f_vertex)?;
    Ok(SentinelOutcome {
        l,
        engine: cov.vertices().collect(),
        oracle,
        saturated: cov.saturated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u64]) -> IndexSequence {
        IndexSequence::new(v.to_vec()).unwrap()
    }

    fn campaign(lemma: LemmaId, pairs: &[(&[u64], &[u64])], bounds: Bounds) -> Campaign {
        let corpus = pairs.iter().map(|(m, n)| (seq(m), seq(n))).collect();
        Campaign::new(lemma, corpus, bounds).unwrap()
    }

    #[test]
    fn corpus_forms() {
        let all = parse_corpus("# c\n0 1 3\n\n0 2 5\n").unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all[1], (seq(&[0, 1, 3]), seq(&[0, 2, 5])));
        let pairs = parse_corpus("0 1 3 | 0 2 5\n0 2 5|0 1\n").unwrap();
        assert_eq!(
            pairs,
            vec![
                (seq(&[0, 1, 3]), seq(&[0, 2, 5])),
                (seq(&[0, 2, 5]), seq(&[0, 1]))
            ]
        );
        assert!(parse_corpus("0 1 3 | 0 2 5\n0 1\n").is_err());
        assert!(parse_corpus("0 1 | 0 1 | 0 1\n").is_err());
        assert!(
            matches!(parse_corpus("0 2 1\n"), Err(OracleError::InvalidCampaign(m)) if m.contains("line 1"))
        );
    }

    #[test]
    fn lemma_names_round_trip() {
        for l in LemmaId::ALL {
            assert_eq!(l.name().parse::<LemmaId>(), Ok(l));
        }
        assert!("lemma9".parse::<LemmaId>().is_err());
    }

    #[test]
    fn extend_hits_every_case() {
        let c = campaign(
            LemmaId::Extend,
            &[(&[0, 1, 2, 3], &[0, 1, 2, 3])],
            Bounds {
                max_domain: 5,
                ..Bounds::default()
            },
        );
        let r = run_campaign(&c).unwrap();
        assert!(r.passed(), "{r}");
        let note = &r.instances[0].notes[0];
        for k in 1..=4 {
            assert!(!note.contains(&format!("{k}=0 ")), "{note}");
        }
        assert!(!note.ends_with("4=0"), "{note}");
    }

    #[test]
    fn premise_anchor_cases() {
        let (em, en) = (Edge::new(3), Edge::new(5));
        assert_eq!(premise_anchors(em, en, ExtendCase::One), Some((3, 5)));
        assert_eq!(premise_anchors(em, en, ExtendCase::Two), Some((4, 6)));
        assert_eq!(premise_anchors(em, en, ExtendCase::Three), Some((3, 6)));
        assert_eq!(premise_anchors(em, en, ExtendCase::Four), Some((4, 5)));
    }

    #[test]
    fn within_arrow_passes() {
        let c = campaign(
            LemmaId::WithinArrow,
            &[(&[0, 1, 3, 6], &[0, 2, 5])],
            Bounds {
                max_domain: 6,
                ..Bounds::default()
            },
        );
        let r = run_campaign(&c).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.checked() > 0);
    }

    #[test]
    fn sum_formula_and_distance_pass() {
        for lemma in [LemmaId::SumFormula, LemmaId::Distance] {
            let c = campaign(
                lemma,
                &[(&[0, 1, 3, 6], &[0, 1, 3, 6])],
                Bounds {
                    max_domain: 6,
                    ..Bounds::default()
                },
            );
            let r = run_campaign(&c).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn distance_needs_increasing_differences() {
        let corpus = vec![(seq(&[0, 1, 2, 3]), seq(&[0, 1, 2, 3]))];
        assert!(matches!(
            Campaign::new(LemmaId::Distance, corpus, Bounds::default()),
            Err(OracleError::InvalidCampaign(_))
        ));
    }

    #[test]
    fn tail_contrapositive() {
        let m = IndexSequence::from_deltas(&"1 2 3 4 5 6".parse().unwrap()).unwrap();
        let n = IndexSequence::from_deltas(&"1 3 5 7 9 11".parse().unwrap()).unwrap();
        let c = Campaign::new(
            LemmaId::TailFromCoverage,
            vec![(m.clone(), n), (m.clone(), m)],
            Bounds::default(),
        )
        .unwrap();
        let r = run_campaign(&c).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.instances[1]
            .notes
            .iter()
            .any(|n| n.starts_with("vacuous l=0 ")));
    }

    #[test]
    fn parity_claim_holds() {
        let c = campaign(
            LemmaId::ParityClaim,
            &[
                (&[0, 1, 3, 6, 10, 15], &[0, 1, 3, 6, 10, 15]),
                (&[0, 1, 3, 6, 10, 15], &[0, 2, 5, 9, 14]),
                (&[0, 2, 5, 9, 14], &[0, 1, 4, 9, 16]),
            ],
            Bounds::default(),
        );
        let r = run_campaign(&c).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.checked() > 0);
    }

    #[test]
    fn phi_psi_on_identity() {
        let c = campaign(
            LemmaId::PhiPsiEqual,
            &[(&[0, 1, 3, 6, 10], &[0, 1, 3, 6, 10])],
            Bounds::default(),
        );
        let r = run_campaign(&c).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn nothing_to_check_is_an_error() {
        let c = campaign(
            LemmaId::PhiPsiEqual,
            &[(&[0, 1, 3, 6, 10, 15], &[0, 1, 4, 9, 16, 25])],
            Bounds::default(),
        );
        assert!(matches!(
            run_campaign(&c),
            Err(OracleError::BoundsTooTight { .. })
        ));
    }

    #[test]
    fn report_is_worker_and_order_independent() {
        let pairs: [(&[u64], &[u64]); 3] = [
            (&[0, 1, 3, 6], &[0, 1, 3, 6]),
            (&[0, 1, 3, 6], &[0, 2, 5]),
            (&[0, 2, 5], &[0, 1, 3, 6]),
        ];
        let b = Bounds {
            max_domain: 5,
            ..Bounds::default()
        };
        let one = run_campaign(&campaign(LemmaId::WithinArrow, &pairs, b)).unwrap();
        let four =
            run_campaign(&campaign(LemmaId::WithinArrow, &pairs, b).with_workers(4)).unwrap();
        assert_eq!(one.to_string(), four.to_string());
        let mut rev = pairs;
        rev.reverse();
        let back = run_campaign(&campaign(LemmaId::WithinArrow, &rev, b)).unwrap();
        assert_eq!(back.checked(), one.checked());
        let counts = |r: &CampaignReport| {
            let mut v: Vec<(String, usize)> = r
                .instances
                .iter()
                .map(|i| (format!("{} {}", i.m, i.n), i.checked))
                .collect();
            v.sort();
            v
        };
        assert_eq!(counts(&back), counts(&one));
    }

    #[test]
    fn failure_report_format() {
        let c = campaign(
            LemmaId::Extend,
            &[(&[0, 1, 2], &[0, 1, 2])],
            Bounds::default(),
        );
        let mut t = Tally::new(&c, 3, &seq(&[0, 1, 2]), &seq(&[0, 1, 2]));
        t.check(false, || ("made up".into(), Some("graph 0 1\n".into())));
        let r = CampaignReport {
            lemma: LemmaId::Extend,
            instances: vec![t.result],
            wall_time: Duration::ZERO,
        };
        let text = r.to_string();
        assert!(text.starts_with("instance 3 fail m=0,1,2 n=0,1,2 checked=1\n"));
        assert!(
            text.contains("replay wadgelab campaign --lemma extend --m \"0 1 2\" --n \"0 1 2\"")
        );
        assert!(text.contains("    graph 0 1\n"));
        assert!(text.ends_with("campaign extend checked=1 failures=1"));
    }

    #[test]
    fn sentinel_small_pairs() {
        for (m, n) in [
            (&[0u64, 1, 3][..], &[0u64, 2, 5][..]),
            (&[0, 1, 3, 6], &[0, 1, 3, 6]),
        ] {
            let pair = Arc::new(GraphPair::new(seq(m), seq(n)).unwrap());
            let graph = ProductGraph::new(pair.clone(), None);
            for l in valid_seeds(&graph) {
                let s = sentinel(pair.clone(), l, 6, None, 1).unwrap();
                assert!(s.agrees(), "{s:?}");
            }
        }
    }
}
