//! Exhaustive enumeration of unfoldings as synchronized walks.
//!
//! Walks are produced by domain size, then lexicographically by start pair
//! and step labels. Each walk is a distinct unfolding up to shifting the
//! domain interval. This module deliberately does not share code with the
//! reachability engine: it is the oracle that engine is checked against.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::graphs::Edge;

use super::{GraphPair, Step, SyncWalk, Unfolding, UnfoldingError};

type StateFilter = Arc<dyn Fn(i64, i64) -> bool + Send + Sync>;

/// The vertex pairs a walk may visit: color matched, inside both
/// truncations, not on the forbidden `G_m` vertex, and accepted by an
/// optional filter.
#[derive(Clone)]
pub struct WalkSpace {
    pair: Arc<GraphPair>,
    forbid_f_vertex: Option<i64>,
    filter: Option<StateFilter>,
}

impl WalkSpace {
    pub fn new(pair: Arc<GraphPair>) -> Self {
        WalkSpace {
            pair,
            forbid_f_vertex: None,
            filter: None,
        }
    }

    pub fn forbid_f_vertex(mut self, t: Option<i64>) -> Self {
        self.forbid_f_vertex = t;
        self
    }

    /// Restricts visited vertex pairs; edges may still leave the region.
    pub fn restrict<F>(mut self, filter: F) -> Self
    where
        F: Fn(i64, i64) -> bool + Send + Sync + 'static,
    {
        self.filter = Some(Arc::new(filter));
        self
    }

    pub fn pair(&self) -> &Arc<GraphPair> {
        &self.pair
    }

    pub fn allows(&self, a: i64, b: i64) -> bool {
        self.pair.matched(a, b)
            && self.forbid_f_vertex != Some(a)
            && self.filter.as_ref().is_none_or(|f| f(a, b))
    }

    /// Steps out of `(a, b)` in label order.
    ///
    /// A reduction moves each side either to a neighbor over the edge
    /// between them, or stays put while consuming one of its incident edges;
    /// both sides' edges must share a color.
    pub fn steps_from(&self, (a, b): (i64, i64)) -> Vec<Step> {
        let gm = self.pair.gm();
        let gn = self.pair.gn();
        let mut out = Vec::new();
        for em in gm.incident_edges(a) {
            let color = gm.edge_color(em);
            for en in gn.incident_edges(b) {
                if gn.edge_color(en) != color {
                    continue;
                }
                for a2 in side_targets(a, em) {
                    for b2 in side_targets(b, en) {
                        if self.allows(a2, b2) {
                            out.push(Step {
                                em,
                                en,
                                to: (a2, b2),
                            });
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// All admissible vertex pairs in lexicographic order.
    pub fn states(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for a in 0..=self.pair.hi_m() {
            for b in 0..=self.pair.hi_n() {
                if self.allows(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Every walk with between `min_domain` and `max_domain` vertices.
    pub fn walks(&self, min_domain: usize, max_domain: usize) -> WalkEnumerator {
        WalkEnumerator::new(self.clone(), None, min_domain.max(2), max_domain)
    }

    /// Every walk with at most `max_domain` vertices that visits `seed`.
    pub fn walks_through(&self, seed: (i64, i64), max_domain: usize) -> WalkEnumerator {
        WalkEnumerator::new(self.clone(), Some(seed), 2, max_domain)
    }
}

fn side_targets(v: i64, e: Edge) -> impl Iterator<Item = i64> {
    let other = e.other(v).expect("incident edge");
    let (lo, hi) = (v.min(other), v.max(other));
    [lo, hi].into_iter()
}

struct Frame {
    /// Cell index of the state the next step leaves from.
    cell: usize,
    next: usize,
}

/// Depth-first walk generator; an iterator over [`SyncWalk`]s.
pub struct WalkEnumerator {
    space: WalkSpace,
    seed: Option<(i64, i64)>,
    width: usize,
    /// Steps out of every admissible state, by cell `a * width + b`.
    steps: Vec<Vec<Step>>,
    /// Step distance to the seed inside the space, for pruning.
    dist: Vec<u32>,
    roots: Vec<(i64, i64)>,
    size: usize,
    max_domain: usize,
    root_idx: usize,
    stack: Vec<Frame>,
    walk: SyncWalk,
    seed_visits: usize,
    /// The last walk handed out still holds its final step.
    pending_pop: bool,
}

const FAR: u32 = u32::MAX;

impl WalkEnumerator {
    fn new(
        space: WalkSpace,
        seed: Option<(i64, i64)>,
        min_domain: usize,
        max_domain: usize,
    ) -> Self {
        let roots = space.states();
        let width = space.pair.hi_n() as usize + 1;
        let cells = (space.pair.hi_m() as usize + 1) * width;
        let idx = |(a, b): (i64, i64)| a as usize * width + b as usize;
        let mut steps = vec![Vec::new(); cells];
        for &r in &roots {
            steps[idx(r)] = space.steps_from(r);
        }
        let mut dist = Vec::new();
        if let Some(s) = seed {
            dist = vec![FAR; cells];
            if space.allows(s.0, s.1) {
                dist[idx(s)] = 0;
                let mut queue = VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    let d = dist[idx(u)];
                    for step in &steps[idx(u)] {
                        let k = idx(step.to);
                        if dist[k] == FAR {
                            dist[k] = d + 1;
                            queue.push_back(step.to);
                        }
                    }
                }
            }
        }
        WalkEnumerator {
            space,
            seed,
            width,
            steps,
            dist,
            roots,
            size: min_domain,
            max_domain,
            root_idx: 0,
            stack: Vec::new(),
            walk: SyncWalk {
                start: (0, 0),
                steps: Vec::new(),
            },
            seed_visits: 0,
            pending_pop: false,
        }
    }

    fn cell(&self, (a, b): (i64, i64)) -> usize {
        a as usize * self.width + b as usize
    }

    fn push_state(&mut self, step: Step) {
        if Some(step.to) == self.seed {
            self.seed_visits += 1;
        }
        self.walk.steps.push(step);
    }

    fn pop_state(&mut self) {
        if let Some(step) = self.walk.steps.pop() {
            if Some(step.to) == self.seed {
                self.seed_visits -= 1;
            }
        }
    }

    /// Starts the next root, moving to the next domain size when needed.
    fn next_root(&mut self) -> bool {
        loop {
            if self.size > self.max_domain {
                return false;
            }
            if self.root_idx >= self.roots.len() {
                self.root_idx = 0;
                self.size += 1;
                continue;
            }
            let root = self.roots[self.root_idx];
            self.root_idx += 1;
            self.seed_visits = usize::from(Some(root) == self.seed);
            let cell = self.cell(root);
            if self.seed.is_some() && self.seed_visits == 0 && self.dist[cell] as usize >= self.size
            {
                continue;
            }
            self.walk.start = root;
            self.walk.steps.clear();
            self.stack.push(Frame { cell, next: 0 });
            return true;
        }
    }

    /// Moves to the next complete walk, leaving it in `self.walk`.
    fn advance(&mut self) -> bool {
        if std::mem::take(&mut self.pending_pop) {
            self.pop_state();
        }
        loop {
            let depth = self.stack.len();
            let Some(top) = self.stack.last_mut() else {
                if !self.next_root() {
                    return false;
                }
                continue;
            };
            // The walk has `depth` vertices; after this step the seed must
            // stay within reach of the remaining budget.
            let must_reach = self.seed.is_some() && self.seed_visits == 0;
            let budget = self.size - depth - 1;
            let options = &self.steps[top.cell];
            let mut chosen = None;
            while top.next < options.len() {
                let step = options[top.next];
                top.next += 1;
                let cell = step.to.0 as usize * self.width + step.to.1 as usize;
                if !must_reach || self.dist[cell] as usize <= budget {
                    chosen = Some((step, cell));
                    break;
                }
            }
            let Some((step, cell)) = chosen else {
                self.stack.pop();
                if !self.stack.is_empty() {
                    self.pop_state();
                }
                continue;
            };
            self.push_state(step);
            if depth + 1 == self.size {
                if self.seed.is_none() || self.seed_visits > 0 {
                    self.pending_pop = true;
                    return true;
                }
                self.pop_state();
            } else {
                self.stack.push(Frame { cell, next: 0 });
            }
        }
    }

    /// The next walk, borrowed instead of copied out.
    pub fn next_walk(&mut self) -> Option<&SyncWalk> {
        self.advance().then_some(&self.walk)
    }

    pub fn unfoldings(self) -> impl Iterator<Item = Unfolding> {
        let pair = self.space.pair.clone();
        self.map(move |w| {
            Unfolding::from_walk(pair.clone(), &w).expect("enumerated walks are unfoldings")
        })
    }
}

impl Iterator for WalkEnumerator {
    type Item = SyncWalk;

    fn next(&mut self) -> Option<SyncWalk> {
        self.advance().then(|| self.walk.clone())
    }
}

/// Every synchronized walk with at most `max_domain` vertices that visits
/// `(0, l)`, avoiding `forbid_f_vertex` on the `G_m` side when set. Empty
/// when `c_m(0) != c_n(l)`.
pub fn enumerate_walks(
    pair: Arc<GraphPair>,
    l: i64,
    max_domain: usize,
    forbid_f_vertex: Option<i64>,
) -> Result<WalkEnumerator, UnfoldingError> {
    if !(0..=pair.hi_n()).contains(&l) {
        return Err(UnfoldingError::SeedOutOfRange(l));
    }
    if let Some(t) = forbid_f_vertex {
        if t < 1 {
            return Err(UnfoldingError::ForbidInvalid(t));
        }
    }
    let space = WalkSpace::new(pair).forbid_f_vertex(forbid_f_vertex);
    Ok(space.walks_through((0, l), max_domain))
}

/// The unfoldings of [`enumerate_walks`], one per walk, so each appears
/// once up to a shift of its domain.
pub fn enumerate_unfoldings(
    pair: Arc<GraphPair>,
    l: i64,
    max_domain: usize,
    forbid_f_vertex: Option<i64>,
) -> Result<impl Iterator<Item = Unfolding>, UnfoldingError> {
    Ok(enumerate_walks(pair, l, max_domain, forbid_f_vertex)?.unfoldings())
}
