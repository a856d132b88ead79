//! Naive Plackett-Luce reference computations by direct enumeration.
//!
//! No max-shift, no incremental normalizer updates: each conditional is
//! renormalized from scratch so these routines stay an independent check
//! of any cleverer implementation.

/// All ordered slates of `k` distinct indices out of `p` actions
/// (P!/(P-k)! of them), in lexicographic order.
pub fn enumerate_slates(p: usize, k: usize) -> Vec<Vec<usize>> {
    assert!(k >= 1 && k <= p, "enumerate_slates: need 1 <= k <= p");
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    let mut used = vec![false; p];
    fn rec(
        p: usize,
        k: usize,
        current: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for a in 0..p {
            if !used[a] {
                used[a] = true;
                current.push(a);
                rec(p, k, current, used, out);
                current.pop();
                used[a] = false;
            }
        }
    }
    rec(p, k, &mut current, &mut used, &mut out);
    out
}

/// Softmax of a score vector, computed naively.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let z: f64 = scores.iter().map(|s| s.exp()).sum();
    scores.iter().map(|s| s.exp() / z).collect()
}

/// Top-k indices by decreasing score, ties broken by smaller index,
/// via a full sort.
pub fn top_k_indices(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Probability of an ordered slate under the Plackett-Luce distribution
/// with the given action scores: product of softmax conditionals where
/// already-placed actions are removed before renormalizing.
pub fn pl_slate_prob(scores: &[f64], slate: &[usize]) -> f64 {
    let mut remaining: Vec<usize> = (0..scores.len()).collect();
    let mut prob = 1.0;
    for &a in slate {
        let z: f64 = remaining.iter().map(|&b| scores[b].exp()).sum();
        prob *= scores[a].exp() / z;
        let pos = remaining
            .iter()
            .position(|&b| b == a)
            .expect("slate item repeated or out of range");
        remaining.swap_remove(pos);
    }
    prob
}

/// Expected value of `f` over all ordered slates under Plackett-Luce.
pub fn pl_expectation(scores: &[f64], k: usize, mut f: impl FnMut(&[usize]) -> f64) -> f64 {
    enumerate_slates(scores.len(), k)
        .iter()
        .map(|s| pl_slate_prob(scores, s) * f(s))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_count() {
        assert_eq!(enumerate_slates(5, 2).len(), 20);
        assert_eq!(enumerate_slates(4, 4).len(), 24);
        assert_eq!(enumerate_slates(3, 1).len(), 3);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let scores = [0.3, -1.2, 0.7, 0.0];
        for k in 1..=3 {
            let total: f64 = enumerate_slates(scores.len(), k)
                .iter()
                .map(|s| pl_slate_prob(&scores, s))
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "k={k}: total {total}");
        }
    }

    #[test]
    fn hand_computed_case() {
        // Scores (ln 2, 0, 0): P([0, 1]) = (2/4) * (1/2) = 1/4.
        let scores = [2.0f64.ln(), 0.0, 0.0];
        let p = pl_slate_prob(&scores, &[0, 1]);
        assert!((p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn uniform_scores_uniform_slates() {
        let scores = [1.5; 4];
        let slates = enumerate_slates(4, 2);
        for s in &slates {
            assert!((pl_slate_prob(&scores, s) - 1.0 / 12.0).abs() < 1e-12);
        }
    }
}
