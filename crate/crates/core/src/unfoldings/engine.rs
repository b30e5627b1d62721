//! Coverage by reachability in the synchronized product graph.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::{GraphPair, UnfoldingError};

const NONE: u32 = u32::MAX;

/// A color-matched vertex pair `(a, b)` of `G_m x G_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductState {
    pub a: i64,
    pub b: i64,
}

impl fmt::Display for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// States are color-matched pairs; two states are adjacent when both lie on
/// the endpoints of a pair of equally colored edges. Every such edge pair
/// contributes a clique on the states it touches, self-loops included.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    pair: Arc<GraphPair>,
    forbid_f_vertex: Option<i64>,
    width: usize,
    index: Vec<u32>,
    states: Vec<ProductState>,
    adjacency: Vec<Vec<u32>>,
    self_loop: Vec<bool>,
}

impl ProductGraph {
    pub fn new(pair: Arc<GraphPair>, forbid_f_vertex: Option<i64>) -> Self {
        let gm = pair.gm().clone();
        let gn = pair.gn().clone();
        let width = gn.vertex_count();
        let mut index = vec![NONE; gm.vertex_count() * width];
        let mut states = Vec::new();
        for a in gm.vertices() {
            if forbid_f_vertex == Some(a) {
                continue;
            }
            for b in gn.vertices() {
                if gm.vertex_color(a) == gn.vertex_color(b) {
                    index[a as usize * width + b as usize] = states.len() as u32;
                    states.push(ProductState { a, b });
                }
            }
        }
        let mut adjacency = vec![Vec::new(); states.len()];
        let mut self_loop = vec![false; states.len()];
        let n_edges: Vec<_> = gn.edges().map(|e| (e, gn.edge_color(e))).collect();
        for em in gm.edges() {
            let cm = gm.edge_color(em);
            for &(en, cn) in &n_edges {
                if cm != cn {
                    continue;
                }
                let mut touched = [NONE; 4];
                let mut k = 0;
                for a in [em.left, em.right()] {
                    for b in [en.left, en.right()] {
                        let id = index[a as usize * width + b as usize];
                        if id != NONE {
                            touched[k] = id;
                            k += 1;
                        }
                    }
                }
                for &x in &touched[..k] {
                    self_loop[x as usize] = true;
                    for &y in &touched[..k] {
                        if x != y {
                            adjacency[x as usize].push(y);
                        }
                    }
                }
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        ProductGraph {
            pair,
            forbid_f_vertex,
            width,
            index,
            states,
            adjacency,
            self_loop,
        }
    }

    pub fn pair(&self) -> &Arc<GraphPair> {
        &self.pair
    }

    pub fn forbid_f_vertex(&self) -> Option<i64> {
        self.forbid_f_vertex
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn id(&self, a: i64, b: i64) -> Option<u32> {
        if a < 0 || b < 0 || a > self.pair.hi_m() || b > self.pair.hi_n() {
            return None;
        }
        let id = self.index[a as usize * self.width + b as usize];
        (id != NONE).then_some(id)
    }

    pub fn state(&self, id: u32) -> ProductState {
        self.states[id as usize]
    }

    pub fn neighbors(&self, id: u32) -> &[u32] {
        &self.adjacency[id as usize]
    }

    /// Whether a walk can stay at this state for one step.
    pub fn has_self_loop(&self, id: u32) -> bool {
        self.self_loop[id as usize]
    }

    /// Level-synchronous BFS from `seed`; returns the visited ids in
    /// discovery order and the number of completed levels. Each level is
    /// expanded on `workers` threads and merged in frontier order, so the
    /// result does not depend on the worker count.
    pub fn bfs(&self, seed: u32, max_steps: Option<usize>, workers: usize) -> (Vec<u32>, usize) {
        let mut seen = vec![false; self.states.len()];
        seen[seed as usize] = true;
        let mut order = vec![seed];
        let mut frontier = vec![seed];
        let mut levels = 0;
        let pool = (workers > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("thread pool")
        });
        while !frontier.is_empty() && max_steps.is_none_or(|d| levels < d) {
            let expanded: Vec<u32> = match &pool {
                Some(pool) => pool.install(|| {
                    frontier
                        .par_iter()
                        .flat_map_iter(|&s| self.adjacency[s as usize].iter().copied())
                        .collect()
                }),
                None => frontier
                    .iter()
                    .flat_map(|&s| self.adjacency[s as usize].iter().copied())
                    .collect(),
            };
            frontier.clear();
            for s in expanded {
                if !seen[s as usize] {
                    seen[s as usize] = true;
                    frontier.push(s);
                    order.push(s);
                }
            }
            if !frontier.is_empty() {
                levels += 1;
            }
        }
        (order, levels)
    }

    /// Explores from `seed` through states satisfying `inside` only.
    /// States outside the region that are adjacent to an explored state are
    /// reported as exits and not expanded.
    pub fn reach_within<F>(&self, seed: ProductState, inside: F) -> RegionReach
    where
        F: Fn(i64, i64) -> bool,
    {
        let mut reach = RegionReach::default();
        let Some(start) = self.id(seed.a, seed.b) else {
            return reach;
        };
        if !inside(seed.a, seed.b) {
            reach.exits.insert(seed);
            return reach;
        }
        let mut seen = vec![false; self.states.len()];
        seen[start as usize] = true;
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            reach.inside.insert(self.state(s));
            for &t in &self.adjacency[s as usize] {
                if seen[t as usize] {
                    continue;
                }
                seen[t as usize] = true;
                let st = self.state(t);
                if inside(st.a, st.b) {
                    stack.push(t);
                } else {
                    reach.exits.insert(st);
                }
            }
        }
        reach
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionReach {
    pub inside: BTreeSet<ProductState>,
    pub exits: BTreeSet<ProductState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageOptions {
    pub forbid_f_vertex: Option<i64>,
    /// Bounds the BFS depth; walks through the seed with at most `d + 1`
    /// vertices reach exactly the states within `d` steps.
    pub max_steps: Option<usize>,
    pub workers: usize,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        CoverageOptions {
            forbid_f_vertex: None,
            max_steps: None,
            workers: 1,
        }
    }
}

/// The `G_m` side of the seed's component, always `[0, max]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coverage {
    pub m: String,
    pub n: String,
    pub l: i64,
    pub forbid_f_vertex: Option<i64>,
    pub hi_m: i64,
    pub hi_n: i64,
    pub max: i64,
    pub states_reached: usize,
    pub depth: usize,
    /// False when `max_steps` stopped the search early.
    pub saturated: bool,
}

impl Coverage {
    pub fn is_full(&self) -> bool {
        self.max == self.hi_m
    }

    pub fn vertices(&self) -> std::ops::RangeInclusive<i64> {
        0..=self.max
    }
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let forbid = match self.forbid_f_vertex {
            Some(t) => t.to_string(),
            None => "-".to_string(),
        };
        write!(
            f,
            "coverage m={} n={} l={} forbid={} hi={} -> [0,{}]",
            self.m, self.n, self.l, forbid, self.hi_m, self.max
        )
    }
}

pub fn coverage(
    pair: Arc<GraphPair>,
    l: i64,
    forbid_f_vertex: Option<i64>,
) -> Result<Coverage, UnfoldingError> {
    coverage_with(
        pair,
        l,
        CoverageOptions {
            forbid_f_vertex,
            ..CoverageOptions::default()
        },
    )
}

pub fn coverage_with(
    pair: Arc<GraphPair>,
    l: i64,
    opts: CoverageOptions,
) -> Result<Coverage, UnfoldingError> {
    if !(0..=pair.hi_n()).contains(&l) {
        return Err(UnfoldingError::SeedOutOfRange(l));
    }
    if let Some(t) = opts.forbid_f_vertex {
        if t < 1 {
            return Err(UnfoldingError::ForbidInvalid(t));
        }
    }
    let cm = pair.gm().vertex_color(0).expect("vertex 0");
    let cn = pair.gn().vertex_color(l).expect("checked range");
    if cm != cn {
        return Err(UnfoldingError::SeedInvalid { l, cm, cn });
    }
    let graph = ProductGraph::new(pair.clone(), opts.forbid_f_vertex);
    coverage_in(&graph, l, opts.max_steps, opts.workers)
}

/// Coverage from `(0, l)` in a prebuilt product graph.
pub fn coverage_in(
    graph: &ProductGraph,
    l: i64,
    max_steps: Option<usize>,
    workers: usize,
) -> Result<Coverage, UnfoldingError> {
    let pair = graph.pair();
    let seed = graph.id(0, l).ok_or_else(|| {
        let cm = pair.gm().vertex_color(0).expect("vertex 0");
        match pair.gn().vertex_color(l) {
            Some(cn) => UnfoldingError::SeedInvalid { l, cm, cn },
            None => UnfoldingError::SeedOutOfRange(l),
        }
    })?;
    if !graph.has_self_loop(seed) && graph.neighbors(seed).is_empty() {
        return Err(UnfoldingError::SeedIsolated(l));
    }
    let (order, depth) = graph.bfs(seed, max_steps, workers.max(1));
    let projected: BTreeSet<i64> = order.iter().map(|&s| graph.state(s).a).collect();
    let max = *projected.last().expect("seed is visited");
    assert!(
        projected.len() as i64 == max + 1,
        "coverage is not an interval containing 0: {projected:?}"
    );
    let saturated = match max_steps {
        None => true,
        Some(d) => depth < d || graph.bfs(seed, Some(d + 1), 1).0.len() == order.len(),
    };
    Ok(Coverage {
        m: pair.m().compact(),
        n: pair.n().compact(),
        l,
        forbid_f_vertex: graph.forbid_f_vertex(),
        hi_m: pair.hi_m(),
        hi_n: pair.hi_n(),
        max,
        states_reached: order.len(),
        depth,
        saturated,
    })
}
