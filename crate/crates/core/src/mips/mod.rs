//! Maximum inner product search over the fixed action embeddings.
//!
//! Two interchangeable index types sit behind [`MipsIndex`]: [`ExactIndex`]
//! scans every action and is the reference for correctness, while
//! [`ApproxIndex`] answers from a navigable-small-world graph in time that
//! grows sublinearly with the catalog size. Both order results by exact
//! inner product, ties by smaller action id, so an exhaustive approximate
//! search degenerates to the exact answer.
//!
//! Queries never mutate an index; a [`SearchScratch`] carries the per-query
//! working memory so steady-state querying allocates nothing.

mod format;
mod nsw;

pub use format::{read_graph, write_graph};
pub use nsw::{build_approx, ApproxIndex, NswGraph};

use alloc::vec::Vec;

use crate::decision::{self, TopK};
use crate::error::{invalid, Result};
use crate::types::{ActionId, EmbeddingMatrix, LatentVector, Slate};

/// Read-only top-k inner-product search.
pub trait MipsIndex {
    /// Catalog size `P`.
    fn num_actions(&self) -> usize;

    /// Writes the top-k action ids (best first) for `query` into `out`,
    /// reusing `scratch` for working memory.
    fn search_into(
        &self,
        query: &[f64],
        k: usize,
        scratch: &mut SearchScratch,
        out: &mut Vec<ActionId>,
    ) -> Result<()>;

    /// Convenience wrapper allocating its own scratch.
    fn search(&self, query: &[f64], k: usize) -> Result<Slate> {
        let mut scratch = SearchScratch::new();
        let mut out = Vec::with_capacity(k);
        self.search_into(query, k, &mut scratch, &mut out)?;
        Ok(Slate::new(out).expect("index returned an invalid slate"))
    }
}

/// Working memory for index queries. Grows to the catalog size on first
/// use and is reused afterwards, so per-query allocation is O(1).
pub struct SearchScratch {
    pub(crate) visited: Vec<u64>,
    pub(crate) epoch: u64,
    pub(crate) frontier: MaxHeap,
    pub(crate) results: TopK,
    pub(crate) entries: Vec<u32>,
}

impl SearchScratch {
    pub fn new() -> Self {
        SearchScratch {
            visited: Vec::new(),
            epoch: 0,
            frontier: MaxHeap::new(),
            results: TopK::new(0),
            entries: Vec::new(),
        }
    }

    pub(crate) fn begin(&mut self, p: usize) {
        if self.visited.len() < p {
            self.visited.resize(p, 0);
        }
        self.epoch += 1;
    }

    #[inline]
    pub(crate) fn mark_visited(&mut self, id: u32) -> bool {
        let slot = &mut self.visited[id as usize];
        if *slot == self.epoch {
            false
        } else {
            *slot = self.epoch;
            true
        }
    }
}

impl Default for SearchScratch {
    fn default() -> Self {
        SearchScratch::new()
    }
}

/// Max-heap over scored actions with the decision ordering (best at the
/// root). Backing storage is reused across queries.
pub(crate) struct MaxHeap {
    items: Vec<decision::ScoredAction>,
}

impl MaxHeap {
    pub fn new() -> Self {
        MaxHeap { items: Vec::new() }
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }

    #[inline]
    pub fn push(&mut self, score: f64, id: u32) {
        self.items.push(decision::ScoredAction { score, id });
        let mut i = self.items.len() - 1;
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.items[i].beats(&self.items[parent]) {
                self.items.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    #[inline]
    pub fn pop(&mut self) -> Option<decision::ScoredAction> {
        if self.items.is_empty() {
            return None;
        }
        let last = self.items.len() - 1;
        self.items.swap(0, last);
        let out = self.items.pop();
        let n = self.items.len();
        let mut i = 0;
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < n && self.items[l].beats(&self.items[best]) {
                best = l;
            }
            if r < n && self.items[r].beats(&self.items[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.items.swap(i, best);
            i = best;
        }
        out
    }
}

/// Brute-force index: scans all `P` actions per query. Always agrees with
/// [`crate::decision::decide`].
pub struct ExactIndex<'a> {
    beta: &'a EmbeddingMatrix,
}

impl<'a> ExactIndex<'a> {
    pub fn new(beta: &'a EmbeddingMatrix) -> Self {
        ExactIndex { beta }
    }

    pub fn beta(&self) -> &EmbeddingMatrix {
        self.beta
    }
}

impl MipsIndex for ExactIndex<'_> {
    fn num_actions(&self) -> usize {
        self.beta.num_actions()
    }

    fn search_into(
        &self,
        query: &[f64],
        k: usize,
        _scratch: &mut SearchScratch,
        out: &mut Vec<ActionId>,
    ) -> Result<()> {
        let p = self.beta.num_actions();
        if k == 0 || k > p {
            return Err(invalid(alloc::format!("k {k} out of range for {p} actions")));
        }
        let mut top = TopK::new(k);
        for a in 0..p {
            top.offer(self.beta.score(query, ActionId(a as u32)), a as u32);
        }
        out.clear();
        out.extend(top.into_sorted_ids());
        Ok(())
    }
}

/// Recall of an approximate index against the exact one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecallReport {
    pub k: usize,
    pub recall: f64,
    pub query_count: usize,
}

/// Mean over queries of |approx top-k intersect exact top-k| / k.
pub fn measure_recall(
    approx: &ApproxIndex<'_>,
    exact: &ExactIndex<'_>,
    queries: &[LatentVector],
    k: usize,
) -> Result<RecallReport> {
    if queries.is_empty() {
        return Err(invalid("measure_recall needs at least one query"));
    }
    let mut scratch = SearchScratch::new();
    let mut got = Vec::new();
    let mut want = Vec::new();
    let mut total = 0.0;
    for q in queries {
        approx.search_into(q.as_slice(), k, &mut scratch, &mut got)?;
        exact.search_into(q.as_slice(), k, &mut scratch, &mut want)?;
        let mut hits = 0usize;
        for a in &got {
            if want.contains(a) {
                hits += 1;
            }
        }
        total += hits as f64 / k as f64;
    }
    Ok(RecallReport {
        k,
        recall: total / queries.len() as f64,
        query_count: queries.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::decide;
    use crate::rng::RngStream;

    #[test]
    fn exact_index_matches_decide() {
        let mut rng = RngStream::new(77);
        let beta = EmbeddingMatrix::gaussian(8, 300, 1.0, &mut rng).unwrap();
        let idx = ExactIndex::new(&beta);
        for _ in 0..50 {
            let h =
                LatentVector::new((0..8).map(|_| rng.standard_normal()).collect()).unwrap();
            let via_index = idx.search(h.as_slice(), 10).unwrap();
            let via_decide = decide(&beta, &h, 10).unwrap();
            assert_eq!(via_index, via_decide);
        }
    }

    #[test]
    fn exact_index_rejects_bad_k() {
        let mut rng = RngStream::new(1);
        let beta = EmbeddingMatrix::gaussian(2, 5, 1.0, &mut rng).unwrap();
        let idx = ExactIndex::new(&beta);
        assert!(idx.search(&[0.0, 0.0], 6).is_err());
        assert!(idx.search(&[0.0, 0.0], 0).is_err());
    }

    #[test]
    fn max_heap_pops_best_first() {
        let mut h = MaxHeap::new();
        h.push(1.0, 5);
        h.push(3.0, 2);
        h.push(3.0, 1);
        h.push(-2.0, 0);
        let order: Vec<u32> = core::iter::from_fn(|| h.pop().map(|s| s.id)).collect();
        assert_eq!(order, vec![1, 2, 5, 0]);
    }
}
