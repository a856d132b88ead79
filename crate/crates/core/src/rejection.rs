//! Exact softmax sampling by rejection against a top-K envelope.
//!
//! A top-`K_env` inner-product search splits the softmax mass into a head
//! (the retrieved actions, minus the floor each shares with the tail) and
//! a flat tail envelope `P * exp(threshold)` that dominates every action
//! scoring at or below the `K_env`-th retrieved score. Head proposals are
//! always accepted; tail proposals are uniform over the catalog and
//! accepted with probability `exp(score - threshold)`. The accepted draw
//! is distributed exactly as the softmax: the head categorical supplies
//! precisely the mass each retrieved action carries above the threshold,
//! and the tail supplies the rest, so no bias enters at any envelope
//! size.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::mips::{MipsIndex, SearchScratch};
use crate::rng::RngStream;
use crate::types::{ActionId, EmbeddingMatrix, LatentVector, Slate};

/// Acceptance bookkeeping for the rejection sampler.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RejectionStats {
    /// Draws returned to the caller.
    pub accepted: u64,
    /// Proposal rounds consumed (>= accepted).
    pub proposed: u64,
    /// Proposals answered from the head categorical.
    pub head_hits: u64,
    /// Tail proposals that passed the acceptance test.
    pub tail_hits: u64,
}

impl RejectionStats {
    fn merge(&mut self, other: RejectionStats) {
        self.accepted += other.accepted;
        self.proposed += other.proposed;
        self.head_hits += other.head_hits;
        self.tail_hits += other.tail_hits;
    }
}

struct Envelope {
    /// Retrieved actions, best first (`k_env` of them).
    head_ids: Vec<ActionId>,
    /// Sorted copy for tail-proposal membership checks.
    head_sorted: Vec<u32>,
    /// Cumulative head masses `exp(s_i - shift) - floor`, excluding the
    /// last retrieved action (covered by the tail).
    head_cdf: Vec<f64>,
    /// Raw threshold score (the `k_env`-th retrieved).
    threshold: f64,
    head_mass: f64,
    tail_mass: f64,
}

impl Envelope {
    fn build(
        beta: &EmbeddingMatrix,
        h: &[f64],
        k_env: usize,
        index: &impl MipsIndex,
        scratch: &mut SearchScratch,
    ) -> Result<Envelope> {
        let p = beta.num_actions();
        if k_env == 0 || k_env > p {
            return Err(invalid(alloc::format!(
                "envelope size {k_env} out of range for catalog of {p}"
            )));
        }
        let mut head_ids = Vec::with_capacity(k_env);
        index.search_into(h, k_env, scratch, &mut head_ids)?;
        // Recompute retrieved scores exactly; an approximate index may
        // order candidates correctly yet miss the true top, so the
        // envelope must be built from what was actually returned.
        let head_scores: Vec<f64> = head_ids.iter().map(|&a| beta.score(h, a)).collect();
        let shift = head_scores.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s));
        let threshold = *head_scores.last().expect("k_env >= 1");
        let floor = math::exp(threshold - shift);
        let mut head_cdf = Vec::with_capacity(k_env.saturating_sub(1));
        let mut acc = 0.0;
        for &s in head_scores.iter().take(k_env - 1) {
            acc += math::exp(s - shift) - floor;
            head_cdf.push(acc);
        }
        let head_mass = acc;
        let tail_mass = p as f64 * floor;
        let mut head_sorted: Vec<u32> = head_ids.iter().map(|a| a.0).collect();
        head_sorted.sort_unstable();
        Ok(Envelope {
            head_ids,
            head_sorted,
            head_cdf,
            threshold,
            head_mass,
            tail_mass,
        })
    }

    /// One accepted draw; `proposed`, `head_hits`, `tail_hits` accumulate
    /// into `stats`.
    fn draw(
        &self,
        beta: &EmbeddingMatrix,
        h: &[f64],
        strict: bool,
        rng: &mut RngStream,
        stats: &mut RejectionStats,
    ) -> Result<ActionId> {
        let p = beta.num_actions();
        let total = self.head_mass + self.tail_mass;
        loop {
            stats.proposed += 1;
            if rng.uniform() * total < self.head_mass {
                // Head branch: categorical over the above-floor masses.
                let target = rng.uniform() * self.head_mass;
                let mut idx = self.head_cdf.partition_point(|&c| c <= target);
                if idx >= self.head_cdf.len() {
                    idx = self.head_cdf.len() - 1;
                }
                stats.head_hits += 1;
                stats.accepted += 1;
                return Ok(self.head_ids[idx]);
            }
            // Tail branch: uniform proposal, accept by score ratio. Head
            // actions drawn here score above the threshold and are always
            // accepted; their excess mass is what the head categorical is
            // for, so the combined law stays exactly softmax.
            let q = ActionId(rng.uniform_below(p as u64) as u32);
            let ratio = math::exp(beta.score(h, q) - self.threshold);
            if ratio > 1.0 + 1e-9 && self.head_sorted.binary_search(&q.0).is_err() {
                // Only possible when an approximate retrieval missed an
                // action scoring above its own threshold: the envelope no
                // longer dominates and acceptance would be biased.
                if strict {
                    return Err(Error::Unsupported(
                        "approximate envelope missed the score threshold; rebuild with an exact index",
                    ));
                }
                debug_assert!(false, "envelope violated: ratio {ratio} for action {}", q.0);
            }
            if ratio > rng.uniform() {
                stats.tail_hits += 1;
                stats.accepted += 1;
                return Ok(q);
            }
        }
    }
}

/// Draws one action distributed exactly as
/// `exp(score_a) / sum_b exp(score_b)` using a `k_env`-wide envelope from
/// the index. In strict mode an envelope violation (possible only with an
/// approximate index that missed the true top) is an error; otherwise it
/// is debug-asserted only.
pub fn rejection_sample_categorical(
    beta: &EmbeddingMatrix,
    h: &LatentVector,
    k_env: usize,
    index: &impl MipsIndex,
    strict: bool,
    rng: &mut RngStream,
) -> Result<(ActionId, RejectionStats)> {
    let mut scratch = SearchScratch::new();
    let env = Envelope::build(beta, h.as_slice(), k_env, index, &mut scratch)?;
    let mut stats = RejectionStats::default();
    let a = env.draw(beta, h.as_slice(), strict, rng, &mut stats)?;
    Ok((a, stats))
}

/// Draws an ordered slate distributed as the Plackett-Luce law for the
/// given scores, by `k` repeated categorical rejection draws where
/// already-placed actions are rejected and redrawn. Returns the slate and
/// the merged stats.
pub fn rejection_sample_pl_slate(
    beta: &EmbeddingMatrix,
    h: &LatentVector,
    k: usize,
    k_env: usize,
    index: &impl MipsIndex,
    strict: bool,
    rng: &mut RngStream,
) -> Result<(Slate, RejectionStats)> {
    let p = beta.num_actions();
    if k == 0 || k > p {
        return Err(invalid(alloc::format!(
            "slate size {k} out of range for catalog of {p}"
        )));
    }
    let mut scratch = SearchScratch::new();
    let env = Envelope::build(beta, h.as_slice(), k_env, index, &mut scratch)?;
    let mut stats = RejectionStats::default();
    let mut items: Vec<ActionId> = Vec::with_capacity(k);
    while items.len() < k {
        let mut local = RejectionStats::default();
        let a = env.draw(beta, h.as_slice(), strict, rng, &mut local)?;
        if items.contains(&a) {
            // Redraw: conditioning without replacement.
            local.accepted -= 1;
            stats.merge(local);
            continue;
        }
        stats.merge(local);
        items.push(a);
    }
    Ok((Slate::from_distinct_unchecked(items), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mips::ExactIndex;
    use crate::types::ParamShape;
    use crate::types::PolicyParams;

    #[test]
    fn uniform_scores_accept_every_tail_proposal() {
        let mut rng = RngStream::new(31);
        let beta = EmbeddingMatrix::gaussian(4, 100, 1.0, &mut rng).unwrap();
        let h = LatentVector::zeros(4);
        let index = ExactIndex::new(&beta);
        let mut stats = RejectionStats::default();
        let mut scratch = SearchScratch::new();
        let env = Envelope::build(&beta, h.as_slice(), 10, &index, &mut scratch).unwrap();
        assert!(env.head_mass.abs() < 1e-12);
        for _ in 0..2000 {
            env.draw(&beta, h.as_slice(), true, &mut rng, &mut stats)
                .unwrap();
        }
        assert_eq!(stats.accepted, 2000);
        assert_eq!(stats.proposed, 2000, "flat envelope must never reject");
        assert_eq!(stats.tail_hits, 2000);
    }

    #[test]
    fn envelope_size_bounds_checked() {
        let mut rng = RngStream::new(32);
        let beta = EmbeddingMatrix::gaussian(2, 10, 1.0, &mut rng).unwrap();
        let h = LatentVector::zeros(2);
        let index = ExactIndex::new(&beta);
        assert!(rejection_sample_categorical(&beta, &h, 11, &index, true, &mut rng).is_err());
        assert!(rejection_sample_categorical(&beta, &h, 0, &index, true, &mut rng).is_err());
    }

    #[test]
    fn efficiency_improves_with_envelope_size() {
        let mut rng = RngStream::new(33);
        let beta = EmbeddingMatrix::gaussian(8, 200, 1.0, &mut rng).unwrap();
        let params = PolicyParams::scaled_identity(ParamShape::Linear { dim: 8 }, 1.0);
        let _ = params;
        let h = LatentVector::new((0..8).map(|_| rng.standard_normal()).collect()).unwrap();
        let index = ExactIndex::new(&beta);
        let mut rates = Vec::new();
        for k_env in [2usize, 8, 32, 128] {
            let mut stats = RejectionStats::default();
            let mut draw_rng = RngStream::new(99);
            let mut scratch = SearchScratch::new();
            let env = Envelope::build(&beta, h.as_slice(), k_env, &index, &mut scratch).unwrap();
            for _ in 0..3000 {
                env.draw(&beta, h.as_slice(), true, &mut draw_rng, &mut stats)
                    .unwrap();
            }
            rates.push(stats.proposed as f64 / stats.accepted as f64);
        }
        for w in rates.windows(2) {
            assert!(
                w[1] <= w[0] + 0.05,
                "proposals per accept should not grow with envelope size: {rates:?}"
            );
        }
    }

    #[test]
    fn k_one_slate_matches_categorical_draws() {
        let mut rng = RngStream::new(34);
        let beta = EmbeddingMatrix::gaussian(3, 20, 1.0, &mut rng).unwrap();
        let h = LatentVector::new(vec![0.5, -0.3, 0.8]).unwrap();
        let index = ExactIndex::new(&beta);
        let mut a = RngStream::new(7);
        let mut b = RngStream::new(7);
        for _ in 0..200 {
            let (slate, _) =
                rejection_sample_pl_slate(&beta, &h, 1, 8, &index, true, &mut a).unwrap();
            let (action, _) =
                rejection_sample_categorical(&beta, &h, 8, &index, true, &mut b).unwrap();
            assert_eq!(slate[0], action);
        }
    }

    #[test]
    fn dominant_action_first_with_high_frequency() {
        // Action 0 holds ~99.97% of the softmax mass. Note the redraw loop
        // of the slate sampler costs O(1 / (1 - p_max)) once the dominant
        // action is placed, so dominance here stays away from 1.
        let mut data = vec![0.0; 2 * 50];
        data[0] = 12.0; // action 0, first coordinate
        for (i, v) in data.iter_mut().enumerate().skip(2) {
            *v = if i % 2 == 0 { 0.01 } else { -0.01 };
        }
        let beta = EmbeddingMatrix::from_column_major(2, 50, data).unwrap();
        let h = LatentVector::new(vec![1.0, 0.0]).unwrap();
        let index = ExactIndex::new(&beta);
        let mut rng = RngStream::new(35);
        let n = 1000;
        let mut first = 0u64;
        for _ in 0..n {
            let (slate, _) =
                rejection_sample_pl_slate(&beta, &h, 3, 8, &index, true, &mut rng).unwrap();
            if slate[0] == ActionId(0) {
                first += 1;
            }
        }
        assert!(first as f64 / n as f64 > 0.995, "{first}/{n}");
    }
}
