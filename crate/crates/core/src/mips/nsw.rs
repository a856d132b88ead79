//! Navigable-small-world graph index for approximate top-k inner product
//! search.
//!
//! The graph is layered: every action appears at layer 0, and each higher
//! layer keeps an exponentially thinning subset so a query can descend
//! from a single entry point in a logarithmic number of hops. Build is
//! single-threaded and fully determined by the build stream, so two builds
//! from the same seed produce byte-identical adjacency lists.

use alloc::vec;
use alloc::vec::Vec;

use crate::decision::ScoredAction;
use crate::error::{invalid, Error, Result};
use crate::math;
use crate::mips::{MipsIndex, SearchScratch};
use crate::rng::RngStream;
use crate::types::{ActionId, EmbeddingMatrix};

const MAX_LEVEL: usize = 24;

/// Adjacency structure of the small-world graph, independent of the
/// embeddings it was built over. `adjacency[node][layer]` lists the
/// neighbor ids of `node` at that layer; every node has a layer-0 list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NswGraph {
    pub(crate) num_actions: usize,
    pub(crate) dim: usize,
    pub(crate) max_degree: usize,
    pub(crate) adjacency: Vec<Vec<Vec<u32>>>,
    pub(crate) entry: u32,
    pub(crate) max_level: usize,
}

impl NswGraph {
    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    #[inline]
    fn neighbors(&self, node: u32, layer: usize) -> &[u32] {
        let layers = &self.adjacency[node as usize];
        if layer < layers.len() {
            &layers[layer]
        } else {
            &[]
        }
    }
}

/// An immutable small-world index bound to its embedding matrix.
pub struct ApproxIndex<'a> {
    beta: &'a EmbeddingMatrix,
    graph: NswGraph,
    query_beam: usize,
}

impl<'a> ApproxIndex<'a> {
    /// Binds a graph to the matrix it was built over. Dimensions must
    /// match the graph's record of the build-time catalog.
    pub fn attach(beta: &'a EmbeddingMatrix, graph: NswGraph) -> Result<Self> {
        if graph.num_actions != beta.num_actions() {
            return Err(Error::DimensionMismatch {
                expected: graph.num_actions,
                got: beta.num_actions(),
            });
        }
        if graph.dim != beta.dim() {
            return Err(Error::DimensionMismatch {
                expected: graph.dim,
                got: beta.dim(),
            });
        }
        let query_beam = default_query_beam(graph.max_degree);
        Ok(ApproxIndex {
            beta,
            graph,
            query_beam,
        })
    }

    pub fn graph(&self) -> &NswGraph {
        &self.graph
    }

    pub fn into_graph(self) -> NswGraph {
        self.graph
    }

    pub fn beta(&self) -> &EmbeddingMatrix {
        self.beta
    }

    /// Beam width used at layer 0 during queries. Widening trades speed
    /// for recall; a beam of at least `P` makes the search exhaustive.
    pub fn set_query_beam(&mut self, beam: usize) {
        self.query_beam = beam.max(1);
    }

    pub fn query_beam(&self) -> usize {
        self.query_beam
    }

    #[inline]
    fn score(&self, query: &[f64], node: u32) -> f64 {
        math::dot(query, self.beta.embedding(ActionId(node)))
    }

    /// Greedy single-path descent at one layer.
    fn greedy_step(&self, query: &[f64], mut current: ScoredAction, layer: usize) -> ScoredAction {
        loop {
            let mut improved = false;
            for &n in self.graph.neighbors(current.id, layer) {
                let cand = ScoredAction {
                    score: self.score(query, n),
                    id: n,
                };
                if cand.beats(&current) {
                    current = cand;
                    improved = true;
                }
            }
            if !improved {
                return current;
            }
        }
    }

    /// Beam search over one layer from the scratch's entry list; results
    /// end up in `scratch.results` (width `ef`).
    fn search_layer(&self, query: &[f64], ef: usize, layer: usize, scratch: &mut SearchScratch) {
        scratch.begin(self.graph.num_actions);
        scratch.frontier.clear();
        scratch.results.reset(ef);
        for i in 0..scratch.entries.len() {
            let id = scratch.entries[i];
            if scratch.mark_visited(id) {
                let s = self.score(query, id);
                scratch.frontier.push(s, id);
                scratch.results.offer(s, id);
            }
        }
        while let Some(best) = scratch.frontier.pop() {
            if let Some(worst) = scratch.results.worst() {
                if worst.beats(&best) {
                    break;
                }
            }
            for &n in self.graph.neighbors(best.id, layer) {
                if scratch.mark_visited(n) {
                    let s = self.score(query, n);
                    let admit = match scratch.results.worst() {
                        None => true,
                        Some(w) => ScoredAction { score: s, id: n }.beats(&w),
                    };
                    if admit {
                        scratch.frontier.push(s, n);
                        scratch.results.offer(s, n);
                    }
                }
            }
        }
    }
}

impl MipsIndex for ApproxIndex<'_> {
    fn num_actions(&self) -> usize {
        self.graph.num_actions
    }

    fn search_into(
        &self,
        query: &[f64],
        k: usize,
        scratch: &mut SearchScratch,
        out: &mut Vec<ActionId>,
    ) -> Result<()> {
        let p = self.graph.num_actions;
        if k == 0 || k > p {
            return Err(invalid(alloc::format!("k {k} out of range for {p} actions")));
        }
        let mut ep = ScoredAction {
            score: self.score(query, self.graph.entry),
            id: self.graph.entry,
        };
        for layer in (1..=self.graph.max_level).rev() {
            ep = self.greedy_step(query, ep, layer);
        }
        let ef = self.query_beam.max(k);
        scratch.entries.clear();
        scratch.entries.push(ep.id);
        self.search_layer(query, ef, 0, scratch);
        out.clear();
        for s in scratch.results.take_sorted() {
            if out.len() < k {
                out.push(ActionId(s.id));
            }
        }
        debug_assert_eq!(out.len(), k, "layer-0 graph must be connected");
        Ok(())
    }
}

fn default_query_beam(max_degree: usize) -> usize {
    (max_degree * 4).max(64)
}

/// Builds the small-world graph over `beta`. `max_degree` bounds the
/// per-node neighbor count on upper layers (layer 0 allows twice that);
/// `beam` is the construction-time search width. Deterministic for a
/// given `rng`.
pub fn build_approx<'a>(
    beta: &'a EmbeddingMatrix,
    max_degree: usize,
    beam: usize,
    rng: &mut RngStream,
) -> Result<ApproxIndex<'a>> {
    if max_degree < 2 {
        return Err(invalid("max_degree must be at least 2"));
    }
    if beam < 1 {
        return Err(invalid("beam must be at least 1"));
    }
    let p = beta.num_actions();
    let ml = 1.0 / math::ln(max_degree as f64);

    // Layer assignment up front, from a dedicated child stream.
    let mut level_rng = rng.child(0);
    let levels: Vec<usize> = (0..p)
        .map(|_| {
            let u = level_rng.uniform_open();
            let lvl = (-math::ln(u) * ml) as usize;
            lvl.min(MAX_LEVEL)
        })
        .collect();

    let mut graph = NswGraph {
        num_actions: p,
        dim: beta.dim(),
        max_degree,
        adjacency: levels
            .iter()
            .map(|&lvl| vec![Vec::new(); lvl + 1])
            .collect(),
        entry: 0,
        max_level: levels[0],
    };

    let mut builder = Builder {
        beta,
        beam,
        max_degree,
        scratch: SearchScratch::new(),
        selected: Vec::new(),
    };

    for node in 1..p as u32 {
        builder.insert(&mut graph, node, levels[node as usize]);
    }
    builder.repair_connectivity(&mut graph);

    ApproxIndex::attach(beta, graph)
}

struct Builder<'a> {
    beta: &'a EmbeddingMatrix,
    beam: usize,
    max_degree: usize,
    scratch: SearchScratch,
    selected: Vec<ScoredAction>,
}

impl Builder<'_> {
    #[inline]
    fn sim(&self, a: u32, b: u32) -> f64 {
        math::dot(
            self.beta.embedding(ActionId(a)),
            self.beta.embedding(ActionId(b)),
        )
    }

    fn degree_cap(&self, layer: usize) -> usize {
        if layer == 0 {
            self.max_degree * 2
        } else {
            self.max_degree
        }
    }

    fn insert(&mut self, graph: &mut NswGraph, node: u32, level: usize) {
        let query = self.beta.embedding(ActionId(node)).to_vec();
        let mut ep = ScoredAction {
            score: math::dot(&query, self.beta.embedding(ActionId(graph.entry))),
            id: graph.entry,
        };
        // Greedy descent above the node's top layer.
        let mut layer = graph.max_level;
        while layer > level {
            ep = greedy_layer(self.beta, graph, &query, ep, layer);
            layer -= 1;
        }
        // Beam search and linking from min(level, max_level) down to 0.
        let top = level.min(graph.max_level);
        for lc in (0..=top).rev() {
            search_layer_build(self.beta, graph, &query, ep, self.beam, lc, &mut self.scratch);
            let cands = self.scratch.results.take_sorted();
            let m = self.degree_cap(lc);
            self.select_heuristic(&cands, m);

            for s in self.selected.iter() {
                graph.adjacency[node as usize][lc].push(s.id);
            }
            // Bidirectional links with pruning at the receiving side.
            let cap = self.degree_cap(lc);
            let ids: Vec<u32> = self.selected.iter().map(|s| s.id).collect();
            for other in ids {
                let list = &mut graph.adjacency[other as usize][lc];
                if !list.contains(&node) {
                    list.push(node);
                }
                if graph.adjacency[other as usize][lc].len() > cap {
                    self.prune(graph, other, lc, cap);
                }
            }
            if let Some(best) = self.selected.first() {
                ep = *best;
            }
        }
        if level > graph.max_level {
            graph.max_level = level;
            graph.entry = node;
        }
    }

    /// Keeps a candidate only if it is more similar to the query node than
    /// to every already-kept neighbor, which spreads edges across
    /// directions instead of clustering them.
    fn select_heuristic(&mut self, cands: &[ScoredAction], m: usize) {
        self.selected.clear();
        for c in cands {
            if self.selected.len() >= m {
                break;
            }
            let mut keep = true;
            for s in self.selected.iter() {
                if self.sim(c.id, s.id) > c.score {
                    keep = false;
                    break;
                }
            }
            if keep {
                self.selected.push(*c);
            }
        }
        // Backfill with the best remaining candidates if the heuristic was
        // too aggressive to reach m edges.
        if self.selected.len() < m {
            for c in cands {
                if self.selected.len() >= m {
                    break;
                }
                if !self.selected.iter().any(|s| s.id == c.id) {
                    self.selected.push(*c);
                }
            }
        }
    }

    fn prune(&mut self, graph: &mut NswGraph, node: u32, layer: usize, cap: usize) {
        let mut scored: Vec<ScoredAction> = graph.adjacency[node as usize][layer]
            .iter()
            .map(|&n| ScoredAction {
                score: self.sim(node, n),
                id: n,
            })
            .collect();
        scored.sort_by(|a, b| if a.beats(b) { core::cmp::Ordering::Less } else { core::cmp::Ordering::Greater });
        self.select_heuristic(&scored, cap);
        let list = &mut graph.adjacency[node as usize][layer];
        list.clear();
        list.extend(self.selected.iter().map(|s| s.id));
    }

    /// Layer 0 must reach every action. Any component cut off during
    /// pruning is tied back to its most similar reachable node.
    fn repair_connectivity(&mut self, graph: &mut NswGraph) {
        let p = graph.num_actions;
        let mut reached = vec![false; p];
        let mut stack = vec![graph.entry];
        reached[graph.entry as usize] = true;
        let mut count = 1usize;
        while let Some(n) = stack.pop() {
            for &m in graph.neighbors(n, 0) {
                if !reached[m as usize] {
                    reached[m as usize] = true;
                    count += 1;
                    stack.push(m);
                }
            }
        }
        if count == p {
            return;
        }
        for node in 0..p as u32 {
            if reached[node as usize] {
                continue;
            }
            // Best reachable anchor by brute scan; repairs are rare and the
            // exactness here keeps the fix deterministic.
            let mut best = ScoredAction {
                score: f64::NEG_INFINITY,
                id: graph.entry,
            };
            for other in 0..p as u32 {
                if reached[other as usize] {
                    let cand = ScoredAction {
                        score: self.sim(node, other),
                        id: other,
                    };
                    if cand.beats(&best) {
                        best = cand;
                    }
                }
            }
            graph.adjacency[node as usize][0].push(best.id);
            graph.adjacency[best.id as usize][0].push(node);
            // Everything hanging off `node` is now reachable.
            let mut stack = vec![node];
            reached[node as usize] = true;
            while let Some(n) = stack.pop() {
                for &m in graph.neighbors(n, 0) {
                    if !reached[m as usize] {
                        reached[m as usize] = true;
                        stack.push(m);
                    }
                }
            }
        }
    }
}

fn greedy_layer(
    beta: &EmbeddingMatrix,
    graph: &NswGraph,
    query: &[f64],
    mut current: ScoredAction,
    layer: usize,
) -> ScoredAction {
    loop {
        let mut improved = false;
        for &n in graph.neighbors(current.id, layer) {
            let cand = ScoredAction {
                score: math::dot(query, beta.embedding(ActionId(n))),
                id: n,
            };
            if cand.beats(&current) {
                current = cand;
                improved = true;
            }
        }
        if !improved {
            return current;
        }
    }
}

fn search_layer_build(
    beta: &EmbeddingMatrix,
    graph: &NswGraph,
    query: &[f64],
    entry: ScoredAction,
    ef: usize,
    layer: usize,
    scratch: &mut SearchScratch,
) {
    scratch.begin(graph.num_actions);
    scratch.frontier.clear();
    scratch.results.reset(ef);
    scratch.mark_visited(entry.id);
    scratch.frontier.push(entry.score, entry.id);
    scratch.results.offer(entry.score, entry.id);
    while let Some(best) = scratch.frontier.pop() {
        if let Some(worst) = scratch.results.worst() {
            if worst.beats(&best) {
                break;
            }
        }
        for &n in graph.neighbors(best.id, layer) {
            if scratch.mark_visited(n) {
                let s = math::dot(query, beta.embedding(ActionId(n)));
                let admit = match scratch.results.worst() {
                    None => true,
                    Some(w) => ScoredAction { score: s, id: n }.beats(&w),
                };
                if admit {
                    scratch.frontier.push(s, n);
                    scratch.results.offer(s, n);
                }
            }
        }
    }
}
