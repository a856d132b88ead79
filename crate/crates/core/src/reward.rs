//! The session-completion reward used throughout the experiments.

use crate::types::{ItemSet, Slate};

/// Position-discounted hit reward: sum over slate positions k (1-based)
/// of `hidden.contains(a_k) / 2^(k-1)`. Bounded above by 2.
pub fn slate_reward(slate: &Slate, hidden: &ItemSet) -> f64 {
    let mut weight = 1.0;
    let mut total = 0.0;
    for &a in slate.items() {
        if hidden.contains(a) {
            total += weight;
        }
        weight *= 0.5;
    }
    total
}

/// The per-position weights of [`slate_reward`]: 1, 1/2, 1/4, ...
pub fn position_weights(k: usize) -> alloc::vec::Vec<f64> {
    let mut w = alloc::vec::Vec::with_capacity(k);
    let mut v = 1.0;
    for _ in 0..k {
        w.push(v);
        v *= 0.5;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ActionId;
    use alloc::vec;

    fn slate(ids: &[u32]) -> Slate {
        Slate::new(ids.iter().map(|&i| ActionId(i)).collect()).unwrap()
    }

    #[test]
    fn no_hits_is_zero() {
        let hidden: ItemSet = [10u32, 11].into_iter().collect();
        assert_eq!(slate_reward(&slate(&[0, 1, 2]), &hidden), 0.0);
    }

    #[test]
    fn hits_at_positions_one_and_three() {
        let hidden: ItemSet = [0u32, 2].into_iter().collect();
        let r = slate_reward(&slate(&[0, 1, 2, 3, 4]), &hidden);
        assert_eq!(r, 1.25);
    }

    #[test]
    fn all_five_hit_geometric_sum() {
        let hidden: ItemSet = [0u32, 1, 2, 3, 4].into_iter().collect();
        let r = slate_reward(&slate(&[0, 1, 2, 3, 4]), &hidden);
        assert_eq!(r, 1.9375);
    }

    #[test]
    fn order_sensitive_and_bounded() {
        let hidden: ItemSet = [7u32].into_iter().collect();
        let first = slate_reward(&slate(&[7, 8]), &hidden);
        let second = slate_reward(&slate(&[8, 7]), &hidden);
        assert!(first > second);
        for k in 1..=10 {
            let ids: Vec<u32> = (0..k as u32).collect();
            let all: ItemSet = ids.iter().copied().collect();
            assert!(slate_reward(&slate(&ids), &all) < 2.0);
        }
    }

    #[test]
    fn weights_match_reward() {
        let w = position_weights(4);
        assert_eq!(w, vec![1.0, 0.5, 0.25, 0.125]);
    }
}
