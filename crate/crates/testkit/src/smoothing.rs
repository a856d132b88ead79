//! Oracles for Gaussian-smoothed slate objectives.
//!
//! The smoothed objective is an expectation of a piecewise-constant
//! function of the noise (the slate only changes when two perturbed
//! scores cross), so along any single noise axis the expectation can be
//! computed exactly: find every crossing of the linear per-action score
//! functions, evaluate the slate once per segment, and weight segments by
//! normal CDF increments. Higher dimensions wrap that exact slice in
//! Gauss-Hermite quadrature over the remaining axes, which converges fast
//! because the slice integral is continuous in the outer variable.

use crate::chi2::gamma_p;
use crate::hermite::gauss_hermite;
use crate::pl::top_k_indices;

/// Standard normal CDF, accurate to ~1e-14 via the regularized incomplete
/// gamma function.
pub fn normal_cdf(x: f64) -> f64 {
    if x >= 40.0 {
        return 1.0;
    }
    if x <= -40.0 {
        return 0.0;
    }
    let half = 0.5 * gamma_p(0.5, x * x / 2.0);
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// E_{e ~ N(0, sigma^2)}[ f(top_k(c + e * g)) ], computed exactly:
/// per-action scores are linear in the scalar noise, so the slate map is
/// constant between consecutive crossing points.
pub fn smoothed_value_1d(
    c: &[f64],
    g: &[f64],
    k: usize,
    sigma: f64,
    mut f: impl FnMut(&[usize]) -> f64,
) -> f64 {
    assert_eq!(c.len(), g.len());
    let p = c.len();
    let mut cuts: Vec<f64> = Vec::new();
    for a in 0..p {
        for b in a + 1..p {
            if g[a] != g[b] {
                let t = (c[b] - c[a]) / (g[a] - g[b]);
                if t.is_finite() {
                    cuts.push(t);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    let mut total = 0.0;
    let mut lo = f64::NEG_INFINITY;
    for i in 0..=cuts.len() {
        let hi = if i < cuts.len() { cuts[i] } else { f64::INFINITY };
        if hi <= lo {
            continue;
        }
        let mid = segment_midpoint(lo, hi);
        let scores: Vec<f64> = (0..p).map(|a| c[a] + mid * g[a]).collect();
        let slate = top_k_indices(&scores, k);
        let weight = normal_cdf(clamp_inf(hi) / sigma) - normal_cdf(clamp_inf(lo) / sigma);
        total += weight * f(&slate);
        lo = hi;
    }
    total
}

fn segment_midpoint(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

fn clamp_inf(x: f64) -> f64 {
    x.clamp(-1e300, 1e300)
}

/// E_{(e1, e2) ~ N(0, sigma^2 I)}[ f(top_k(c + e1 g1 + e2 g2)) ]: the
/// first axis is integrated exactly, the second by `nodes`-point
/// Gauss-Hermite.
pub fn smoothed_value_2d(
    c: &[f64],
    g1: &[f64],
    g2: &[f64],
    k: usize,
    sigma: f64,
    nodes: usize,
    mut f: impl FnMut(&[usize]) -> f64,
) -> f64 {
    assert_eq!(c.len(), g1.len());
    assert_eq!(c.len(), g2.len());
    let (xs, ws) = gauss_hermite(nodes);
    let norm = core::f64::consts::PI.sqrt();
    let scale = core::f64::consts::SQRT_2 * sigma;
    let mut total = 0.0;
    for (&x, &w) in xs.iter().zip(&ws) {
        let e2 = scale * x;
        let shifted: Vec<f64> = c.iter().zip(g2).map(|(ci, gi)| ci + e2 * gi).collect();
        total += w * smoothed_value_1d(&shifted, g1, k, sigma, &mut f);
    }
    total / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841344746068543).abs() < 1e-12);
        assert!((normal_cdf(-1.96) - 0.024997895148220435).abs() < 1e-12);
        assert!(normal_cdf(40.0) <= 1.0);
        assert!(normal_cdf(-40.0) >= 0.0);
    }

    #[test]
    fn two_action_probability_is_a_normal_tail() {
        // Scores c + e*g with c = (0, d), g = (1, 0): action 0 wins iff
        // e > d, so P(win) = 1 - Phi(d / sigma).
        let d = 0.7;
        let sigma = 0.5;
        let prob = smoothed_value_1d(&[0.0, d], &[1.0, 0.0], 1, sigma, |slate| {
            if slate[0] == 0 {
                1.0
            } else {
                0.0
            }
        });
        let want = 1.0 - normal_cdf(d / sigma);
        assert!((prob - want).abs() < 1e-12, "{prob} vs {want}");
    }

    #[test]
    fn slice_value_matches_dense_quadrature() {
        // Compare the exact 1-D slice against brute Gauss-Hermite on a
        // smooth-ish instance; they agree to quadrature accuracy.
        let c = [0.3, -0.1, 0.2, 0.0];
        let g = [1.0, -0.5, 0.2, 0.8];
        let sigma = 0.4;
        let exact = smoothed_value_1d(&c, &g, 2, sigma, |s| 1.0 / (1 + s[0]) as f64);
        let quad = crate::hermite::gaussian_expectation_1d(sigma, 301, |e| {
            let scores: Vec<f64> = c.iter().zip(&g).map(|(ci, gi)| ci + e * gi).collect();
            let slate = top_k_indices(&scores, 2);
            1.0 / (1 + slate[0]) as f64
        });
        assert!((exact - quad).abs() < 2e-3, "{exact} vs {quad}");
    }
}
