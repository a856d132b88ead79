//! The deterministic decision rule: top-K actions by inner-product score.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::types::{ActionId, EmbeddingMatrix, ItemSet, LatentVector, Slate};

/// A scored action with the decision ordering: higher score first, ties
/// broken by smaller id so the rule is a pure function of its inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ScoredAction {
    pub score: f64,
    pub id: u32,
}

impl ScoredAction {
    /// True if `self` ranks strictly better than `other`.
    #[inline]
    pub fn beats(&self, other: &ScoredAction) -> bool {
        self.score > other.score || (self.score == other.score && self.id < other.id)
    }
}

/// Selects the top-k of a score stream, returning ids best-first.
/// The worst kept element sits at the root of a small binary min-heap.
pub(crate) struct TopK {
    heap: Vec<ScoredAction>,
    k: usize,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        TopK {
            heap: Vec::with_capacity(k + 1),
            k,
        }
    }

    #[inline]
    pub fn offer(&mut self, score: f64, id: u32) {
        let cand = ScoredAction { score, id };
        if self.heap.len() < self.k {
            self.heap.push(cand);
            self.sift_up(self.heap.len() - 1);
        } else if cand.beats(&self.heap[0]) {
            self.heap[0] = cand;
            self.sift_down(0);
        }
    }

    #[inline]
    pub fn worst(&self) -> Option<ScoredAction> {
        if self.heap.len() < self.k {
            None
        } else {
            self.heap.first().copied()
        }
    }

    /// Clears and retargets the selector, keeping its allocation.
    pub fn reset(&mut self, k: usize) {
        self.heap.clear();
        self.k = k;
    }

    /// Drains into ids ordered best-first.
    pub fn into_sorted_ids(mut self) -> Vec<ActionId> {
        let mut out = Vec::with_capacity(self.heap.len());
        while let Some(worst) = self.pop_worst() {
            out.push(ActionId(worst.id));
        }
        out.reverse();
        out
    }

    /// Drains into scored actions ordered best-first, leaving the
    /// selector empty but reusable.
    pub fn take_sorted(&mut self) -> Vec<ScoredAction> {
        let mut out = Vec::with_capacity(self.heap.len());
        while let Some(worst) = self.pop_worst() {
            out.push(worst);
        }
        out.reverse();
        out
    }

    fn pop_worst(&mut self) -> Option<ScoredAction> {
        if self.heap.is_empty() {
            return None;
        }
        let last = self.heap.len() - 1;
        self.heap.swap(0, last);
        let out = self.heap.pop();
        if !self.heap.is_empty() {
            self.sift_down(0);
        }
        out
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            // Min-heap on the decision order: parent must be the worst.
            if self.heap[parent].beats(&self.heap[i]) {
                self.heap.swap(parent, i);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut smallest = i;
            if l < n && self.heap[smallest].beats(&self.heap[l]) {
                smallest = l;
            }
            if r < n && self.heap[smallest].beats(&self.heap[r]) {
                smallest = r;
            }
            if smallest == i {
                return;
            }
            self.heap.swap(i, smallest);
            i = smallest;
        }
    }
}

/// The truncated argsort decision rule: the `k` actions with the largest
/// inner product against `h`, ordered by decreasing score, ties broken by
/// smaller action id.
pub fn decide(beta: &EmbeddingMatrix, h: &LatentVector, k: usize) -> Result<Slate> {
    let p = beta.num_actions();
    if k == 0 || k > p {
        return Err(invalid(alloc::format!(
            "slate size {k} out of range for catalog of {p}"
        )));
    }
    if h.len() != beta.dim() {
        return Err(crate::error::Error::DimensionMismatch {
            expected: beta.dim(),
            got: h.len(),
        });
    }
    let mut top = TopK::new(k);
    let q = h.as_slice();
    for a in 0..p {
        top.offer(beta.score(q, ActionId(a as u32)), a as u32);
    }
    Ok(Slate::from_distinct_unchecked(top.into_sorted_ids()))
}

/// Top-k over a precomputed score vector, same ordering contract as
/// [`decide`].
pub fn top_k_from_scores(scores: &[f64], k: usize) -> Result<Slate> {
    if k == 0 || k > scores.len() {
        return Err(invalid(alloc::format!(
            "slate size {k} out of range for {} scores",
            scores.len()
        )));
    }
    let mut top = TopK::new(k);
    for (a, &s) in scores.iter().enumerate() {
        top.offer(s, a as u32);
    }
    Ok(Slate::from_distinct_unchecked(top.into_sorted_ids()))
}

/// Mean embedding of a non-empty set of observed actions:
/// (1/|X|) sum of their embedding columns.
pub fn mean_embedding(beta: &EmbeddingMatrix, observed: &ItemSet) -> Result<LatentVector> {
    if observed.is_empty() {
        return Err(invalid("mean embedding of an empty set"));
    }
    let l = beta.dim();
    let mut out = alloc::vec![0.0; l];
    for a in observed.iter() {
        if a.index() >= beta.num_actions() {
            return Err(invalid(alloc::format!(
                "action {} outside catalog of {}",
                a.0,
                beta.num_actions()
            )));
        }
        let e = beta.embedding(a);
        for (o, v) in out.iter_mut().zip(e) {
            *o += v;
        }
    }
    let inv = 1.0 / observed.len() as f64;
    for o in &mut out {
        *o *= inv;
    }
    Ok(LatentVector::from_raw(out))
}
