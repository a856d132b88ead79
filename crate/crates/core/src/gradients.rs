//! Stochastic gradient estimators for slate policies, their exhaustive
//! reference, and variance probes.
//!
//! Every Plackett-Luce gradient here flows through one kernel: the
//! gradient of `log pi(A|x)` with respect to the per-action scores is a
//! sparse-plus-dense coefficient vector over actions (+1 at each placed
//! action, minus the conditional softmax weights accumulated while the
//! normalizer shrinks). Contracting the embedding matrix with those
//! coefficients gives the latent-space gradient, which the parameter map
//! then pulls back to a flat parameter gradient. The same coefficients
//! drive the embedding-block gradients used by the fixed-versus-learned
//! embedding study.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::mips::{MipsIndex, SearchScratch};
use crate::policy::{
    pl_sample_gumbel_from_scores, LatentNoise, LgpPolicy, PlackettLuce,
};
use crate::rng::RngStream;
use crate::types::{ActionId, EmbeddingMatrix, ItemSet, LatentVector, PolicyParams, Slate};

/// Which estimator produced a gradient sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    PlPg,
    PlCov,
    PlRank,
    Lgp,
    Lrp,
    Exact,
}

/// One stochastic gradient estimate with its provenance.
#[derive(Debug, Clone)]
pub struct GradientSample {
    /// Flat gradient over the chosen parameter block.
    pub grad: Vec<f64>,
    pub estimator: Estimator,
    /// Monte Carlo sample count used.
    pub samples: u32,
    /// Noise scale, for the latent-perturbation estimators.
    pub sigma: Option<f64>,
    /// Mean reward of the slates drawn while estimating.
    pub mean_reward: f64,
}

/// Parameter block a Plackett-Luce gradient is taken over. `Theta` is the
/// production path; the embedding blocks exist for the study comparing
/// fixed and learned embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamBlock {
    /// The context-map parameters.
    Theta,
    /// The embedding matrix entries (column-major, L x P).
    Beta,
    /// Both, concatenated theta-then-beta.
    ThetaBeta,
}

impl ParamBlock {
    pub fn grad_len(self, params: &PolicyParams, beta: &EmbeddingMatrix) -> usize {
        match self {
            ParamBlock::Theta => params.param_len(),
            ParamBlock::Beta => beta.dim() * beta.num_actions(),
            ParamBlock::ThetaBeta => params.param_len() + beta.dim() * beta.num_actions(),
        }
    }
}

/// Normalizer sequence of one slate: z[i] is the (max-shifted) normalizer
/// before the i-th draw.
fn normalizer_sequence(weights: &[f64], z0: f64, slate: &Slate) -> Vec<f64> {
    let mut zs = Vec::with_capacity(slate.len());
    let mut z = z0;
    for (i, &a) in slate.items().iter().enumerate() {
        zs.push(z);
        z -= weights[a.index()];
        if z < z0 * 1e-12 {
            // Rebuild exactly when cancellation bites.
            let mut rest = 0.0;
            for (b, &w) in weights.iter().enumerate() {
                if !slate.items()[..=i].iter().any(|x| x.index() == b) {
                    rest += w;
                }
            }
            z = rest;
        }
    }
    zs
}

/// Accumulates `scale * d log pi(A|x) / d score_b` into `coef`, given the
/// shifted weights and normalizer sequence of the slate. Positions are
/// weighted by `pos_factor` (all ones for the plain log probability;
/// reward-to-go terms for the decomposable-reward estimator).
fn accumulate_logprob_score_coefficients(
    weights: &[f64],
    zs: &[f64],
    slate: &Slate,
    pos_factor: &[f64],
    scale: f64,
    coef: &mut [f64],
) {
    let k = slate.len();
    // Prefix sums d_j = sum_{i <= j} pos_factor[i] / z[i].
    let mut d = Vec::with_capacity(k);
    let mut acc = 0.0;
    for i in 0..k {
        acc += pos_factor[i] / zs[i];
        d.push(acc);
    }
    let d_full = d[k - 1];
    for (b, c) in coef.iter_mut().enumerate() {
        *c -= scale * weights[b] * d_full;
    }
    for (j, &a) in slate.items().iter().enumerate() {
        let b = a.index();
        // The action left the pool after being placed at j: undo the
        // full-horizon subtraction beyond its own prefix, then add the
        // placement term.
        coef[b] += scale * (weights[b] * (d_full - d[j]) + pos_factor[j]);
    }
}

/// Contracts the embedding matrix with per-action coefficients:
/// out = sum_b coef_b * beta_b. O(P L).
fn contract_embeddings(beta: &EmbeddingMatrix, coef: &[f64], out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = 0.0;
    }
    for (b, &c) in coef.iter().enumerate() {
        if c != 0.0 {
            math::add_scaled(out, c, beta.embedding(ActionId(b as u32)));
        }
    }
}

struct PlGradScratch {
    weights: Vec<f64>,
    coef: Vec<f64>,
    z0: f64,
}

impl PlGradScratch {
    fn from_scores(scores: &[f64]) -> Self {
        let shift = scores.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s));
        let weights: Vec<f64> = scores.iter().map(|&s| math::exp(s - shift)).collect();
        let z0 = math::pairwise_sum(&weights);
        PlGradScratch {
            coef: vec![0.0; weights.len()],
            weights,
            z0,
        }
    }
}

/// Writes the block gradient implied by accumulated score coefficients
/// and a latent factor. For the theta block the coefficient contraction
/// lands in latent space and is pulled back through the parameter map;
/// for the beta block column `b` receives `coef_b * h`.
fn emit_block_grad(
    block: ParamBlock,
    params: &PolicyParams,
    beta: &EmbeddingMatrix,
    m: &[f64],
    h: &[f64],
    coef: &[f64],
    grad: &mut [f64],
) {
    let l = beta.dim();
    match block {
        ParamBlock::Theta => {
            let mut g_h = vec![0.0; l];
            contract_embeddings(beta, coef, &mut g_h);
            params.accumulate_param_grad(m, &g_h, 1.0, grad);
        }
        ParamBlock::Beta => {
            for (b, &c) in coef.iter().enumerate() {
                if c != 0.0 {
                    math::add_scaled(&mut grad[b * l..(b + 1) * l], c, h);
                }
            }
        }
        ParamBlock::ThetaBeta => {
            let n = params.param_len();
            let mut g_h = vec![0.0; l];
            contract_embeddings(beta, coef, &mut g_h);
            params.accumulate_param_grad(m, &g_h, 1.0, &mut grad[..n]);
            for (b, &c) in coef.iter().enumerate() {
                if c != 0.0 {
                    math::add_scaled(&mut grad[n + b * l..n + (b + 1) * l], c, h);
                }
            }
        }
    }
}

/// Score-function (REINFORCE) gradient of the Plackett-Luce objective:
/// the average over `s` sampled slates of `reward * grad log pi`.
pub fn pl_pg_grad<F: Fn(&Slate) -> f64>(
    pl: &PlackettLuce<'_>,
    x_mean: &LatentVector,
    reward: F,
    s: u32,
    rng: &mut RngStream,
) -> Result<GradientSample> {
    pl_pg_grad_block(pl, x_mean, reward, s, rng, ParamBlock::Theta)
}

/// [`pl_pg_grad`] over an explicit parameter block.
pub fn pl_pg_grad_block<F: Fn(&Slate) -> f64>(
    pl: &PlackettLuce<'_>,
    x_mean: &LatentVector,
    reward: F,
    s: u32,
    rng: &mut RngStream,
    block: ParamBlock,
) -> Result<GradientSample> {
    if s < 1 {
        return Err(invalid("pl_pg_grad needs at least one sample"));
    }
    let h = pl.params.context_embedding(x_mean)?;
    let scores = pl.beta.scores(h.as_slice());
    let mut ps = PlGradScratch::from_scores(&scores);
    let pos_ones = vec![1.0; pl.k];
    let mut reward_sum = 0.0;
    for _ in 0..s {
        let slate = pl_sample_gumbel_from_scores(&scores, pl.k, rng);
        let r = reward(&slate);
        reward_sum += r;
        if r != 0.0 {
            let zs = normalizer_sequence(&ps.weights, ps.z0, &slate);
            accumulate_logprob_score_coefficients(
                &ps.weights,
                &zs,
                &slate,
                &pos_ones,
                r / s as f64,
                &mut ps.coef,
            );
        }
    }
    let mut grad = vec![0.0; block.grad_len(pl.params, pl.beta)];
    emit_block_grad(
        block,
        pl.params,
        pl.beta,
        x_mean.as_slice(),
        h.as_slice(),
        &ps.coef,
        &mut grad,
    );
    Ok(GradientSample {
        grad,
        estimator: Estimator::PlPg,
        samples: s,
        sigma: None,
        mean_reward: reward_sum / s as f64,
    })
}

/// Covariance gradient: the empirical covariance (with the unbiased
/// 1/(S-1) normalization) between the slate reward and the summed score
/// gradients of the placed actions, each conditionally recentered by an
/// independent redraw from the same without-replacement conditional it
/// was sampled from. No normalizing-constant gradient is evaluated; the
/// redraws replace it.
///
/// The recentering is what makes the estimator unbiased for slates. The
/// raw covariance with `sum_i grad f(a_i)` matches the true gradient only
/// for K = 1: for longer slates the later conditional normalizers are
/// prefix-dependent and their correlation with the reward does not cancel
/// (at K = P the raw summed score gradient is even constant across
/// slates, zeroing the covariance while the true gradient is not zero).
/// Pairing every placed action with a fresh draw from its own conditional
/// removes exactly that term: E[grad f(a_i) - grad f(a_i') | prefix] = 0.
pub fn pl_cov_grad<F: Fn(&Slate) -> f64>(
    pl: &PlackettLuce<'_>,
    x_mean: &LatentVector,
    reward: F,
    s: u32,
    rng: &mut RngStream,
) -> Result<GradientSample> {
    pl_cov_grad_block(pl, x_mean, reward, s, rng, ParamBlock::Theta)
}

/// [`pl_cov_grad`] over an explicit parameter block.
pub fn pl_cov_grad_block<F: Fn(&Slate) -> f64>(
    pl: &PlackettLuce<'_>,
    x_mean: &LatentVector,
    reward: F,
    s: u32,
    rng: &mut RngStream,
    block: ParamBlock,
) -> Result<GradientSample> {
    if s < 2 {
        return Err(invalid("covariance gradient needs at least two samples"));
    }
    let h = pl.params.context_embedding(x_mean)?;
    let scores = pl.beta.scores(h.as_slice());
    let mut slates = Vec::with_capacity(s as usize);
    let mut redraws = Vec::with_capacity(s as usize);
    let mut rewards = Vec::with_capacity(s as usize);
    for _ in 0..s {
        let slate = pl_sample_gumbel_from_scores(&scores, pl.k, rng);
        redraws.push(conditional_redraws(&scores, &slate, rng));
        rewards.push(reward(&slate));
        slates.push(slate);
    }
    let r_mean = math::pairwise_sum(&rewards) / s as f64;
    let mut coef = vec![0.0; scores.len()];
    let denom = (s - 1) as f64;
    for ((slate, redraw), &r) in slates.iter().zip(&redraws).zip(&rewards) {
        let w = (r - r_mean) / denom;
        if w != 0.0 {
            for (&a, &a_prime) in slate.items().iter().zip(redraw) {
                coef[a.index()] += w;
                coef[a_prime.index()] -= w;
            }
        }
    }
    let mut grad = vec![0.0; block.grad_len(pl.params, pl.beta)];
    emit_block_grad(
        block,
        pl.params,
        pl.beta,
        x_mean.as_slice(),
        h.as_slice(),
        &coef,
        &mut grad,
    );
    Ok(GradientSample {
        grad,
        estimator: Estimator::PlCov,
        samples: s,
        sigma: None,
        mean_reward: r_mean,
    })
}

/// For each slate position, one independent draw from the conditional
/// softmax over the actions still available before that position was
/// filled, via Gumbel-max over the remaining set.
fn conditional_redraws(scores: &[f64], slate: &Slate, rng: &mut RngStream) -> Vec<ActionId> {
    let k = slate.len();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let placed = &slate.items()[..i];
        let mut best_score = f64::NEG_INFINITY;
        let mut best = 0u32;
        for (b, &f) in scores.iter().enumerate() {
            if placed.iter().any(|a| a.index() == b) {
                continue;
            }
            let perturbed = f + rng.gumbel();
            if perturbed > best_score {
                best_score = perturbed;
                best = b as u32;
            }
        }
        out.push(ActionId(best));
    }
    out
}

/// Decomposable-reward baseline: exploits rewards of the form
/// `sum_k weight_k * hit(a_k)` by crediting each placed action only with
/// the reward earned from its own position onward. Unbiased for the same
/// objective as [`pl_pg_grad`], with lower variance.
pub fn pl_rank_grad(
    pl: &PlackettLuce<'_>,
    x_mean: &LatentVector,
    hidden: &ItemSet,
    position_weights: &[f64],
    s: u32,
    rng: &mut RngStream,
) -> Result<GradientSample> {
    if s < 1 {
        return Err(invalid("pl_rank_grad needs at least one sample"));
    }
    if position_weights.len() != pl.k {
        return Err(invalid(alloc::format!(
            "need one weight per slate position: got {} for k {}; \
             non-linear rewards are not supported by this estimator",
            position_weights.len(),
            pl.k
        )));
    }
    if position_weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("position weights"));
    }
    let h = pl.params.context_embedding(x_mean)?;
    let scores = pl.beta.scores(h.as_slice());
    let mut ps = PlGradScratch::from_scores(&scores);
    let mut reward_sum = 0.0;
    let mut to_go = vec![0.0; pl.k];
    for _ in 0..s {
        let slate = pl_sample_gumbel_from_scores(&scores, pl.k, rng);
        // Reward-to-go per position.
        let mut acc = 0.0;
        for i in (0..pl.k).rev() {
            if hidden.contains(slate[i]) {
                acc += position_weights[i];
            }
            to_go[i] = acc;
        }
        reward_sum += to_go[0];
        if to_go[0] != 0.0 {
            let zs = normalizer_sequence(&ps.weights, ps.z0, &slate);
            accumulate_logprob_score_coefficients(
                &ps.weights,
                &zs,
                &slate,
                &to_go,
                1.0 / s as f64,
                &mut ps.coef,
            );
        }
    }
    let mut grad = vec![0.0; pl.params.param_len()];
    emit_block_grad(
        ParamBlock::Theta,
        pl.params,
        pl.beta,
        x_mean.as_slice(),
        h.as_slice(),
        &ps.coef,
        &mut grad,
    );
    Ok(GradientSample {
        grad,
        estimator: Estimator::PlRank,
        samples: s,
        sigma: None,
        mean_reward: reward_sum / s as f64,
    })
}

/// Gradient of the Gaussian-smoothed objective: for each of `s` noise
/// draws, the perturbed query's slate reward times the location score,
/// averaged and scaled by 1/sigma. Slates come from the supplied index,
/// so the approximate path never touches all P actions.
pub fn lgp_grad<F: Fn(&Slate) -> f64, I: MipsIndex>(
    lgp: &LgpPolicy<'_>,
    x_mean: &LatentVector,
    reward: F,
    s: u32,
    index: &I,
    rng: &mut RngStream,
) -> Result<GradientSample> {
    let mut scratch = SearchScratch::new();
    lgp_grad_with_scratch(lgp, x_mean, reward, s, index, rng, &mut scratch)
}

/// [`lgp_grad`] reusing caller-owned search scratch; steady-state
/// allocations are O(S L + k), independent of the catalog size.
pub fn lgp_grad_with_scratch<F: Fn(&Slate) -> f64, I: MipsIndex>(
    lgp: &LgpPolicy<'_>,
    x_mean: &LatentVector,
    reward: F,
    s: u32,
    index: &I,
    rng: &mut RngStream,
    scratch: &mut SearchScratch,
) -> Result<GradientSample> {
    if s < 1 {
        return Err(invalid("lgp_grad needs at least one sample"));
    }
    let l = lgp.beta.dim();
    let h = lgp.context(x_mean)?;
    let mut g_h = vec![0.0; l];
    let mut eps = vec![0.0; l];
    let mut query = vec![0.0; l];
    let mut slate_ids: Vec<ActionId> = Vec::with_capacity(lgp.k);
    let mut reward_sum = 0.0;
    for _ in 0..s {
        rng.fill_standard_normal(&mut eps);
        for i in 0..l {
            query[i] = h.as_slice()[i] + lgp.sigma * eps[i];
        }
        index.search_into(&query, lgp.k, scratch, &mut slate_ids)?;
        let slate = Slate::from_distinct_unchecked(core::mem::take(&mut slate_ids));
        let r = reward(&slate);
        slate_ids = slate.into_items();
        reward_sum += r;
        if r != 0.0 {
            math::add_scaled(&mut g_h, r, &eps);
        }
    }
    let scale = 1.0 / (s as f64 * lgp.sigma);
    let mut grad = vec![0.0; lgp.params.param_len()];
    lgp.params
        .accumulate_param_grad(x_mean.as_slice(), &g_h, scale, &mut grad);
    Ok(GradientSample {
        grad,
        estimator: Estimator::Lgp,
        samples: s,
        sigma: Some(lgp.sigma),
        mean_reward: reward_sum / s as f64,
    })
}

/// Generalized latent-perturbation gradient: reward times the gradient of
/// the noise log density with respect to its location, averaged over `s`
/// draws. Errors if the noise has no differentiable log density.
pub fn lrp_grad<F: Fn(&Slate) -> f64, N: LatentNoise, I: MipsIndex>(
    beta: &EmbeddingMatrix,
    params: &PolicyParams,
    k: usize,
    x_mean: &LatentVector,
    reward: F,
    noise: &N,
    s: u32,
    index: &I,
    rng: &mut RngStream,
) -> Result<GradientSample> {
    if s < 1 {
        return Err(invalid("lrp_grad needs at least one sample"));
    }
    if k == 0 || k > beta.num_actions() {
        return Err(invalid("slate size out of range"));
    }
    let l = beta.dim();
    let h = params.context_embedding(x_mean)?;
    let mut scratch = SearchScratch::new();
    let mut g_h = vec![0.0; l];
    let mut query = vec![0.0; l];
    let mut slate_ids: Vec<ActionId> = Vec::with_capacity(k);
    let mut reward_sum = 0.0;
    for _ in 0..s {
        let eps = noise.sample(l, rng);
        for i in 0..l {
            query[i] = h.as_slice()[i] + eps[i];
        }
        index.search_into(&query, k, &mut scratch, &mut slate_ids)?;
        let slate = Slate::from_distinct_unchecked(core::mem::take(&mut slate_ids));
        let r = reward(&slate);
        slate_ids = slate.into_items();
        reward_sum += r;
        if r != 0.0 {
            let score = noise.location_score(&eps)?;
            math::add_scaled(&mut g_h, r, &score);
        }
    }
    let mut grad = vec![0.0; params.param_len()];
    params.accumulate_param_grad(x_mean.as_slice(), &g_h, 1.0 / s as f64, &mut grad);
    Ok(GradientSample {
        grad,
        estimator: Estimator::Lrp,
        samples: s,
        sigma: None,
        mean_reward: reward_sum / s as f64,
    })
}

/// Hard ceiling on how many ordered slates the exhaustive gradient will
/// enumerate.
pub const EXACT_ENUMERATION_LIMIT: u64 = 1_000_000;

fn count_ordered_slates(p: usize, k: usize) -> u64 {
    let mut n: u64 = 1;
    for i in 0..k {
        n = n.saturating_mul((p - i) as u64);
    }
    n
}

/// Exhaustive gradient: sums `pi * reward * grad log pi` over every
/// ordered slate. Refuses instances with more than
/// [`EXACT_ENUMERATION_LIMIT`] slates.
pub fn exact_pl_grad<F: Fn(&Slate) -> f64>(
    pl: &PlackettLuce<'_>,
    x_mean: &LatentVector,
    reward: F,
) -> Result<GradientSample> {
    exact_pl_grad_block(pl, x_mean, reward, ParamBlock::Theta)
}

/// [`exact_pl_grad`] over an explicit parameter block.
pub fn exact_pl_grad_block<F: Fn(&Slate) -> f64>(
    pl: &PlackettLuce<'_>,
    x_mean: &LatentVector,
    reward: F,
    block: ParamBlock,
) -> Result<GradientSample> {
    let p = pl.beta.num_actions();
    let required = count_ordered_slates(p, pl.k);
    if required > EXACT_ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge {
            required,
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }
    let h = pl.params.context_embedding(x_mean)?;
    let scores = pl.beta.scores(h.as_slice());
    let mut ps = PlGradScratch::from_scores(&scores);
    let pos_ones = vec![1.0; pl.k];
    let mut mean_reward = 0.0;

    let mut items: Vec<ActionId> = Vec::with_capacity(pl.k);
    let mut used = vec![false; p];
    // Iterative depth-first enumeration of ordered slates.
    enumerate_rec(
        p,
        pl.k,
        &mut items,
        &mut used,
        &mut |slate: &Slate| {
            let prob = math::exp(
                crate::policy::pl_log_prob_from_scores(&scores, slate)
                    .expect("enumerated slate is valid"),
            );
            let r = reward(slate);
            mean_reward += prob * r;
            let w = prob * r;
            if w != 0.0 {
                let zs = normalizer_sequence(&ps.weights, ps.z0, slate);
                accumulate_logprob_score_coefficients(
                    &ps.weights,
                    &zs,
                    slate,
                    &pos_ones,
                    w,
                    &mut ps.coef,
                );
            }
        },
    );
    let mut grad = vec![0.0; block.grad_len(pl.params, pl.beta)];
    emit_block_grad(
        block,
        pl.params,
        pl.beta,
        x_mean.as_slice(),
        h.as_slice(),
        &ps.coef,
        &mut grad,
    );
    Ok(GradientSample {
        grad,
        estimator: Estimator::Exact,
        samples: 0,
        sigma: None,
        mean_reward,
    })
}

/// Exact expected reward under the Plackett-Luce policy, by enumeration.
/// Subject to the same instance-size refusal as [`exact_pl_grad`].
pub fn exact_pl_value<F: Fn(&Slate) -> f64>(
    pl: &PlackettLuce<'_>,
    x_mean: &LatentVector,
    reward: F,
) -> Result<f64> {
    let p = pl.beta.num_actions();
    let required = count_ordered_slates(p, pl.k);
    if required > EXACT_ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge {
            required,
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }
    let scores = pl.scores(x_mean)?;
    let mut total = 0.0;
    let mut items: Vec<ActionId> = Vec::with_capacity(pl.k);
    let mut used = vec![false; p];
    enumerate_rec(p, pl.k, &mut items, &mut used, &mut |slate: &Slate| {
        let prob = math::exp(
            crate::policy::pl_log_prob_from_scores(&scores, slate)
                .expect("enumerated slate is valid"),
        );
        total += prob * reward(slate);
    });
    Ok(total)
}

fn enumerate_rec(
    p: usize,
    k: usize,
    items: &mut Vec<ActionId>,
    used: &mut Vec<bool>,
    visit: &mut impl FnMut(&Slate),
) {
    if items.len() == k {
        let slate = Slate::from_distinct_unchecked(items.clone());
        visit(&slate);
        return;
    }
    for a in 0..p {
        if !used[a] {
            used[a] = true;
            items.push(ActionId(a as u32));
            enumerate_rec(p, k, items, used, visit);
            items.pop();
            used[a] = false;
        }
    }
}

/// Order-insensitive vector accumulator: partial sums are merged pairwise
/// (binary-counter pattern), so the result depends only on how many
/// vectors were pushed, not on floating-point-friendly orderings.
pub struct PairwiseVecSum {
    levels: Vec<Option<Vec<f64>>>,
    count: u64,
    dim: usize,
}

impl PairwiseVecSum {
    pub fn new(dim: usize) -> Self {
        PairwiseVecSum {
            levels: Vec::new(),
            count: 0,
            dim,
        }
    }

    pub fn push(&mut self, mut v: Vec<f64>) {
        debug_assert_eq!(v.len(), self.dim);
        let mut level = 0;
        loop {
            if level == self.levels.len() {
                self.levels.push(Some(v));
                break;
            }
            match self.levels[level].take() {
                None => {
                    self.levels[level] = Some(v);
                    break;
                }
                Some(existing) => {
                    for (a, b) in v.iter_mut().zip(&existing) {
                        *a += b;
                    }
                    level += 1;
                }
            }
        }
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Final sum (zeros if nothing was pushed).
    pub fn finish(self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for level in self.levels.into_iter().flatten() {
            for (a, b) in acc.iter_mut().zip(&level) {
                *a += b;
            }
        }
        acc
    }
}

/// Empirical variance of a gradient estimator: E ||G - mean(G)||^2 over
/// independent trials.
///
/// Two passes keep the result accurate when the mean dominates: trial `t`
/// always sees the child stream `t`, so the second pass re-draws exactly
/// the same gradients. `draw` must therefore be a pure function of the
/// stream it is handed.
pub fn estimate_variance<F: FnMut(&mut RngStream) -> Vec<f64>>(
    mut draw: F,
    trials: u32,
    rng: &mut RngStream,
) -> Result<f64> {
    if trials < 2 {
        return Err(invalid("variance estimation needs at least two trials"));
    }
    let mut sum: Option<PairwiseVecSum> = None;
    for t in 0..trials {
        let mut stream = rng.child(t as u64);
        let g = draw(&mut stream);
        sum.get_or_insert_with(|| PairwiseVecSum::new(g.len())).push(g);
    }
    let mean = {
        let s = sum.expect("at least two trials");
        let n = s.count() as f64;
        let mut m = s.finish();
        for v in &mut m {
            *v /= n;
        }
        m
    };
    let mut sq_devs = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut stream = rng.child(t as u64);
        let g = draw(&mut stream);
        let dev: Vec<f64> = g.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).collect();
        sq_devs.push(math::pairwise_sum(&dev));
    }
    Ok(math::pairwise_sum(&sq_devs) / trials as f64)
}
