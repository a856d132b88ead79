//! Stochastic slate policies: Plackett-Luce and latent perturbations.
//!
//! Plackett-Luce places a distribution directly over ordered slates by
//! sampling actions without replacement with probabilities proportional
//! to `exp(score)`. Latent-perturbation policies instead add noise to the
//! context embedding and take the deterministic top-K of the perturbed
//! query, which is what lets them ride on an inner-product index.

use alloc::vec;
use alloc::vec::Vec;

use crate::decision::top_k_from_scores;
use crate::error::{invalid, Error, Result};
use crate::math;
use crate::mips::{MipsIndex, SearchScratch};
use crate::rng::RngStream;
use crate::types::{ActionId, EmbeddingMatrix, LatentVector, PolicyParams, Slate};

/// A Plackett-Luce policy over slates of size `k`, scored by
/// `f(a) = h(m)^T beta_a`.
pub struct PlackettLuce<'a> {
    pub beta: &'a EmbeddingMatrix,
    pub params: &'a PolicyParams,
    pub k: usize,
}

impl<'a> PlackettLuce<'a> {
    pub fn new(beta: &'a EmbeddingMatrix, params: &'a PolicyParams, k: usize) -> Result<Self> {
        if k == 0 || k > beta.num_actions() {
            return Err(invalid(alloc::format!(
                "slate size {k} out of range for catalog of {}",
                beta.num_actions()
            )));
        }
        if params.dim() != beta.dim() {
            return Err(Error::DimensionMismatch {
                expected: beta.dim(),
                got: params.dim(),
            });
        }
        Ok(PlackettLuce { beta, params, k })
    }

    /// Scores of every action for the given mean embedding. O(P L).
    pub fn scores(&self, x_mean: &LatentVector) -> Result<Vec<f64>> {
        let h = self.params.context_embedding(x_mean)?;
        Ok(self.beta.scores(h.as_slice()))
    }
}

/// Log probability of `slate` under Plackett-Luce with the given scores:
/// sum over positions of `f(a_i) - ln Z_{i-1}` where `Z_0` is the full
/// normalizer and each placed action's mass is removed from the next
/// normalizer. Scores are max-shifted before exponentiation.
pub fn pl_log_prob_from_scores(scores: &[f64], slate: &Slate) -> Result<f64> {
    let p = scores.len();
    if slate.len() > p {
        return Err(invalid("slate longer than catalog"));
    }
    for &a in slate.items() {
        if a.index() >= p {
            return Err(invalid(alloc::format!("action {} outside catalog", a.0)));
        }
    }
    let shift = scores.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s));
    let weights: Vec<f64> = scores.iter().map(|&s| math::exp(s - shift)).collect();
    let mut z = math::pairwise_sum(&weights);
    let z0 = z;
    let mut log_prob = 0.0;
    let mut removed: Vec<usize> = Vec::with_capacity(slate.len());
    for &a in slate.items() {
        let i = a.index();
        log_prob += (scores[i] - shift) - math::ln(z);
        removed.push(i);
        z -= weights[i];
        // Sequential subtraction can cancel badly once the slate holds
        // nearly all the mass; rebuild the tail sum exactly in that case.
        if z < z0 * 1e-12 {
            let mut rest = 0.0;
            for (j, &w) in weights.iter().enumerate() {
                if !removed.contains(&j) {
                    rest += w;
                }
            }
            z = rest;
        }
    }
    Ok(log_prob)
}

/// Log probability of `slate` under the policy for context `x_mean`.
pub fn pl_log_prob(pl: &PlackettLuce<'_>, x_mean: &LatentVector, slate: &Slate) -> Result<f64> {
    if slate.len() != pl.k {
        return Err(invalid(alloc::format!(
            "slate length {} does not match policy k {}",
            slate.len(),
            pl.k
        )));
    }
    let scores = pl.scores(x_mean)?;
    pl_log_prob_from_scores(&scores, slate)
}

/// Sequential sampler: `k` categorical draws without replacement with
/// probabilities proportional to `exp(score)`. O(k P).
pub fn pl_sample_sequential_from_scores(scores: &[f64], k: usize, rng: &mut RngStream) -> Slate {
    debug_assert!(k >= 1 && k <= scores.len());
    let mut taken = vec![false; scores.len()];
    let mut weights = vec![0.0; scores.len()];
    let mut items = Vec::with_capacity(k);
    for _ in 0..k {
        // Re-shift against the remaining maximum every draw: once a
        // dominant action is removed, the stale shift would underflow the
        // survivors to zero and lose their relative masses.
        let shift = scores
            .iter()
            .zip(&taken)
            .filter(|(_, &t)| !t)
            .fold(f64::NEG_INFINITY, |m, (&s, _)| m.max(s));
        for (a, w) in weights.iter_mut().enumerate() {
            *w = if taken[a] { 0.0 } else { math::exp(scores[a] - shift) };
        }
        let total = math::pairwise_sum(&weights);
        let mut target = rng.uniform() * total;
        let mut chosen = None;
        for (a, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                if target < w {
                    chosen = Some(a);
                    break;
                }
                target -= w;
            }
        }
        // Rounding can push the target past the last positive weight.
        let a = chosen.unwrap_or_else(|| {
            weights
                .iter()
                .rposition(|&w| w > 0.0)
                .expect("re-shifted weights always contain the maximum")
        });
        items.push(ActionId(a as u32));
        taken[a] = true;
    }
    Slate::from_distinct_unchecked(items)
}

/// Sequential sampler for a policy and context.
pub fn pl_sample_sequential(
    pl: &PlackettLuce<'_>,
    x_mean: &LatentVector,
    rng: &mut RngStream,
) -> Result<Slate> {
    let scores = pl.scores(x_mean)?;
    Ok(pl_sample_sequential_from_scores(&scores, pl.k, rng))
}

/// Gumbel-trick sampler: perturbs every score with an independent
/// standard Gumbel draw and takes the top-k. Distribution-identical to
/// the sequential sampler. O(P) noise draws per slate.
pub fn pl_sample_gumbel_from_scores(scores: &[f64], k: usize, rng: &mut RngStream) -> Slate {
    pl_sample_gumbel_impl(scores, k, || rng.gumbel())
}

/// Gumbel sampler for a policy and context.
pub fn pl_sample_gumbel(
    pl: &PlackettLuce<'_>,
    x_mean: &LatentVector,
    rng: &mut RngStream,
) -> Result<Slate> {
    let scores = pl.scores(x_mean)?;
    Ok(pl_sample_gumbel_from_scores(&scores, pl.k, rng))
}

/// Noise-injectable body of the Gumbel sampler; with noise fixed to zero
/// it reduces to the deterministic top-k decision.
pub(crate) fn pl_sample_gumbel_impl(
    scores: &[f64],
    k: usize,
    mut gumbel: impl FnMut() -> f64,
) -> Slate {
    debug_assert!(k >= 1 && k <= scores.len());
    let perturbed: Vec<f64> = scores.iter().map(|&s| s + gumbel()).collect();
    top_k_from_scores(&perturbed, k).expect("k validated by caller")
}

/// A latent Gaussian perturbation policy: isotropic noise of scale
/// `sigma` is added to the context embedding before the top-k decision.
pub struct LgpPolicy<'a> {
    pub beta: &'a EmbeddingMatrix,
    pub params: &'a PolicyParams,
    pub k: usize,
    pub sigma: f64,
}

impl<'a> LgpPolicy<'a> {
    pub fn new(
        beta: &'a EmbeddingMatrix,
        params: &'a PolicyParams,
        k: usize,
        sigma: f64,
    ) -> Result<Self> {
        if k == 0 || k > beta.num_actions() {
            return Err(invalid(alloc::format!(
                "slate size {k} out of range for catalog of {}",
                beta.num_actions()
            )));
        }
        if params.dim() != beta.dim() {
            return Err(Error::DimensionMismatch {
                expected: beta.dim(),
                got: params.dim(),
            });
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(invalid("sigma must be positive and finite"));
        }
        Ok(LgpPolicy {
            beta,
            params,
            k,
            sigma,
        })
    }

    /// The context embedding h(m).
    pub fn context(&self, x_mean: &LatentVector) -> Result<LatentVector> {
        self.params.context_embedding(x_mean)
    }
}

/// Default noise scale 1/L.
pub fn sigma_inv_dim(l: usize) -> f64 {
    1.0 / l as f64
}

/// Norm-matched noise scale 1/B with B the mean embedding norm, chosen so
/// per-action score perturbations have roughly unit standard deviation.
pub fn sigma_inv_mean_norm(beta: &EmbeddingMatrix) -> f64 {
    1.0 / beta.mean_norm()
}

/// Draws one slate from the LGP policy through an index: perturbs the
/// context with `sigma * eps0`, `eps0 ~ N(0, I_L)`, and queries the
/// top-k. Returns the slate and the raw `eps0` for gradient reuse.
pub fn lgp_sample<I: MipsIndex>(
    lgp: &LgpPolicy<'_>,
    x_mean: &LatentVector,
    index: &I,
    rng: &mut RngStream,
) -> Result<(Slate, Vec<f64>)> {
    let mut scratch = SearchScratch::new();
    let mut out = Vec::with_capacity(lgp.k);
    let h = lgp.context(x_mean)?;
    let eps0 = lgp_sample_into(lgp, h.as_slice(), index, rng, &mut scratch, &mut out)?;
    Ok((Slate::new(out)?, eps0))
}

/// Scratch-reusing body of [`lgp_sample`], taking the precomputed context
/// embedding. Per-call allocations are O(L + k), independent of P.
pub fn lgp_sample_into<I: MipsIndex>(
    lgp: &LgpPolicy<'_>,
    h: &[f64],
    index: &I,
    rng: &mut RngStream,
    scratch: &mut SearchScratch,
    out: &mut Vec<ActionId>,
) -> Result<Vec<f64>> {
    let l = lgp.beta.dim();
    let mut eps0 = vec![0.0; l];
    rng.fill_standard_normal(&mut eps0);
    let mut query = vec![0.0; l];
    for i in 0..l {
        query[i] = h[i] + lgp.sigma * eps0[i];
    }
    index.search_into(&query, lgp.k, scratch, out)?;
    Ok(eps0)
}

/// A samplable latent noise distribution for the generalized
/// latent-random-perturbation policy.
pub trait LatentNoise {
    /// Draws a noise vector of length `l`.
    fn sample(&self, l: usize, rng: &mut RngStream) -> Vec<f64>;

    /// Gradient of the log density with respect to a location parameter,
    /// evaluated at the drawn offset `eps` (that is, at
    /// `h - location`). Distributions without a differentiable log
    /// density return `Err(Unsupported)` and cannot drive gradients.
    fn location_score(&self, eps: &[f64]) -> Result<Vec<f64>>;
}

/// Isotropic Gaussian noise of scale `sigma`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianNoise {
    pub sigma: f64,
}

impl LatentNoise for GaussianNoise {
    fn sample(&self, l: usize, rng: &mut RngStream) -> Vec<f64> {
        let mut eps = vec![0.0; l];
        rng.fill_standard_normal(&mut eps);
        for e in &mut eps {
            *e *= self.sigma;
        }
        eps
    }

    fn location_score(&self, eps: &[f64]) -> Result<Vec<f64>> {
        let inv_var = 1.0 / (self.sigma * self.sigma);
        Ok(eps.iter().map(|&e| e * inv_var).collect())
    }
}

/// Draws one slate from a latent-random-perturbation policy: adds a draw
/// from `noise` to the context embedding and queries the index. Returns
/// the slate and the raw noise draw.
pub fn lrp_sample<N: LatentNoise, I: MipsIndex>(
    beta: &EmbeddingMatrix,
    params: &PolicyParams,
    k: usize,
    x_mean: &LatentVector,
    noise: &N,
    index: &I,
    rng: &mut RngStream,
) -> Result<(Slate, Vec<f64>)> {
    if k == 0 || k > beta.num_actions() {
        return Err(invalid(alloc::format!(
            "slate size {k} out of range for catalog of {}",
            beta.num_actions()
        )));
    }
    let h = params.context_embedding(x_mean)?;
    let eps = noise.sample(beta.dim(), rng);
    if eps.len() != beta.dim() {
        return Err(Error::DimensionMismatch {
            expected: beta.dim(),
            got: eps.len(),
        });
    }
    let mut query = h.as_slice().to_vec();
    for (q, e) in query.iter_mut().zip(&eps) {
        *q += e;
    }
    let slate = index.search(&query, k)?;
    Ok((slate, eps))
}
