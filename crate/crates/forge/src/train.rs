//! The optimization loop: mini-batch stochastic gradient ascent with
//! Adam over any registered estimator, plus deterministic evaluation.

use std::time::Instant;

use serde::Serialize;
use slate_core::adam::AdamState;
use slate_core::gradients::{
    lgp_grad_with_scratch, pl_cov_grad, pl_pg_grad, pl_rank_grad, GradientSample, PairwiseVecSum,
};
use slate_core::mips::{ApproxIndex, ExactIndex, SearchScratch};
use slate_core::policy::{sigma_inv_dim, sigma_inv_mean_norm, LgpPolicy, PlackettLuce};
use slate_core::reward::position_weights;
use slate_core::types::ParamShape;
use slate_core::{
    decide, mean_embedding, slate_reward, EmbeddingMatrix, LatentVector, PolicyParams, RngStream,
    Slate,
};

use crate::data::SessionSplit;
use crate::pool;
use crate::{ForgeError, Result};

/// The estimators the trainer and benchmarks can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    PlPg,
    PlCov,
    PlRank,
    Lgp,
    LgpMips,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::PlPg,
        Method::PlCov,
        Method::PlRank,
        Method::Lgp,
        Method::LgpMips,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::PlPg => "pl-pg",
            Method::PlCov => "pl-cov",
            Method::PlRank => "pl-rank",
            Method::Lgp => "lgp",
            Method::LgpMips => "lgp-mips",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                ForgeError::Config(format!(
                    "unknown estimator '{s}' (expected one of {})",
                    Method::ALL.map(|m| m.name()).join(", ")
                ))
            })
    }

    /// Whether the layer behind this estimator is implemented. All are in
    /// this build; benchmarks consult the registry so that an unavailable
    /// baseline degrades to an explicit gap instead of a silent drop.
    pub fn is_available(self) -> bool {
        true
    }

    pub fn needs_approx_index(self) -> bool {
        matches!(self, Method::LgpMips)
    }
}

/// Noise-scale policy for the latent-perturbation estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SigmaSpec {
    Fixed(f64),
    /// 1/L.
    InvDim,
    /// 1/B with B the mean embedding norm.
    InvMeanNorm,
}

impl SigmaSpec {
    pub fn resolve(self, beta: &EmbeddingMatrix) -> f64 {
        match self {
            SigmaSpec::Fixed(v) => v,
            SigmaSpec::InvDim => sigma_inv_dim(beta.dim()),
            SigmaSpec::InvMeanNorm => sigma_inv_mean_norm(beta),
        }
    }

    pub fn parse(s: &str) -> Result<SigmaSpec> {
        match s {
            "auto" => Ok(SigmaSpec::InvDim),
            "norm" => Ok(SigmaSpec::InvMeanNorm),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .map(SigmaSpec::Fixed)
                .ok_or_else(|| {
                    ForgeError::Config(format!(
                        "sigma must be 'auto', 'norm' or a positive number, got '{other}'"
                    ))
                }),
        }
    }
}

/// Stop condition for the training loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Budget {
    Iterations(u64),
    WallClockSecs(f64),
}

/// Shape of the context-embedding map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PolicyShape {
    Linear,
    TwoLayer,
}

impl PolicyShape {
    pub fn to_param_shape(self, dim: usize) -> ParamShape {
        match self {
            PolicyShape::Linear => ParamShape::Linear { dim },
            PolicyShape::TwoLayer => ParamShape::TwoLayer { dim },
        }
    }

    pub fn parse(s: &str) -> Result<PolicyShape> {
        match s {
            "linear" => Ok(PolicyShape::Linear),
            "two-layer" => Ok(PolicyShape::TwoLayer),
            other => Err(ForgeError::Config(format!(
                "unknown policy shape '{other}' (expected linear or two-layer)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainConfig {
    pub method: Method,
    pub policy: PolicyShape,
    pub k: usize,
    pub samples: u32,
    pub sigma: SigmaSpec,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub budget: Budget,
    pub intervals: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(ForgeError::Config("slate size k must be positive".into()));
        }
        if self.samples == 0 {
            return Err(ForgeError::Config("need at least one Monte Carlo sample".into()));
        }
        if self.method == Method::PlCov && self.samples < 2 {
            return Err(ForgeError::Config(
                "the covariance estimator needs at least two samples".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ForgeError::Config("learning rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(ForgeError::Config("batch size must be positive".into()));
        }
        if self.intervals == 0 {
            return Err(ForgeError::Config("need at least one logging interval".into()));
        }
        Ok(())
    }
}

/// One evaluation checkpoint.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalRecord {
    pub interval: usize,
    pub seconds: f64,
    pub iteration: u64,
    pub train_reward: f64,
    pub val_reward: f64,
}

/// The full training trace.
#[derive(Debug, Clone, Serialize)]
pub struct TrainLog {
    pub records: Vec<IntervalRecord>,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("interval,seconds,iteration,train_reward,val_reward\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.interval, r.seconds, r.iteration, r.train_reward, r.val_reward
            ));
        }
        out
    }

    pub fn final_val_reward(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.val_reward)
    }
}

/// Mean reward of the deterministic top-k decision over the given users,
/// always through the exact index so the metric does not depend on the
/// estimator, sample count or noise scale used in training.
pub fn evaluate_deterministic(
    params: &PolicyParams,
    beta: &EmbeddingMatrix,
    split: &SessionSplit,
    users: &[usize],
    k: usize,
) -> Result<f64> {
    if users.is_empty() {
        return Ok(0.0);
    }
    let mut rewards = Vec::with_capacity(users.len());
    for &u in users {
        let m = mean_embedding(beta, &split.observed[u])?;
        let h = params.context_embedding(&m)?;
        let slate = decide(beta, &h, k)?;
        rewards.push(slate_reward(&slate, &split.hidden[u]));
    }
    Ok(slate_core::math::pairwise_sum(&rewards) / users.len() as f64)
}

/// Everything a gradient worker needs, immutable during an iteration.
struct GradientContext<'a> {
    method: Method,
    beta: &'a EmbeddingMatrix,
    params: &'a PolicyParams,
    split: &'a SessionSplit,
    mean_cache: &'a [LatentVector],
    k: usize,
    samples: u32,
    sigma: f64,
    approx: Option<&'a ApproxIndex<'a>>,
}

impl GradientContext<'_> {
    /// Gradient for one user context, on the given stream.
    fn gradient(
        &self,
        user: usize,
        stream: &mut RngStream,
        scratch: &mut SearchScratch,
    ) -> Result<GradientSample> {
        let x_mean = &self.mean_cache[user];
        let hidden = &self.split.hidden[user];
        let reward = |s: &Slate| slate_reward(s, hidden);
        let sample = match self.method {
            Method::PlPg => {
                let pl = PlackettLuce::new(self.beta, self.params, self.k)?;
                pl_pg_grad(&pl, x_mean, reward, self.samples, stream)?
            }
            Method::PlCov => {
                let pl = PlackettLuce::new(self.beta, self.params, self.k)?;
                pl_cov_grad(&pl, x_mean, reward, self.samples, stream)?
            }
            Method::PlRank => {
                let pl = PlackettLuce::new(self.beta, self.params, self.k)?;
                let weights = position_weights(self.k);
                pl_rank_grad(&pl, x_mean, hidden, &weights, self.samples, stream)?
            }
            Method::Lgp => {
                let lgp = LgpPolicy::new(self.beta, self.params, self.k, self.sigma)?;
                let exact = ExactIndex::new(self.beta);
                lgp_grad_with_scratch(
                    &lgp, x_mean, reward, self.samples, &exact, stream, scratch,
                )?
            }
            Method::LgpMips => {
                let lgp = LgpPolicy::new(self.beta, self.params, self.k, self.sigma)?;
                let index = self.approx.expect("validated at train entry");
                lgp_grad_with_scratch(
                    &lgp, x_mean, reward, self.samples, index, stream, scratch,
                )?
            }
        };
        Ok(sample)
    }
}

/// Mean gradient and mean sampled reward over a batch of user contexts.
/// Context `c` always draws from `iter_rng.child(1 + user_id)`, so the
/// batch mean equals the mean of the per-context gradients regardless of
/// batch composition, worker count or ordering.
fn batch_gradient(
    ctx: &GradientContext<'_>,
    users: &[usize],
    iter_rng: &RngStream,
    scratches: &mut [SearchScratch],
) -> Result<(Vec<f64>, f64)> {
    let results = pool::parallel_map_with(users.len(), scratches, |i, scratch| {
        let user = users[i];
        let mut stream = iter_rng.child(1 + user as u64);
        ctx.gradient(user, &mut stream, scratch)
    });
    let mut grad_sum: Option<PairwiseVecSum> = None;
    let mut rewards = Vec::with_capacity(users.len());
    for r in results {
        let sample = r?;
        rewards.push(sample.mean_reward);
        grad_sum
            .get_or_insert_with(|| PairwiseVecSum::new(sample.grad.len()))
            .push(sample.grad);
    }
    let n = users.len() as f64;
    let mut grad = grad_sum.expect("non-empty batch").finish();
    for g in &mut grad {
        *g /= n;
    }
    Ok((grad, slate_core::math::pairwise_sum(&rewards) / n))
}

/// Runs the training loop. Under an iteration budget the result is a
/// pure function of the config and inputs; wall-clock budgets stop at the
/// first iteration boundary past the deadline.
pub fn train(
    config: &TrainConfig,
    split: &SessionSplit,
    beta: &EmbeddingMatrix,
    approx: Option<&ApproxIndex<'_>>,
) -> Result<(PolicyParams, TrainLog)> {
    config.validate()?;
    if config.method.needs_approx_index() && approx.is_none() {
        return Err(ForgeError::Config(format!(
            "estimator {} needs an approximate index",
            config.method.name()
        )));
    }
    if config.k > beta.num_actions() {
        return Err(ForgeError::Config(format!(
            "slate size {} exceeds catalog of {}",
            config.k,
            beta.num_actions()
        )));
    }
    if split.train_users.is_empty() {
        return Err(ForgeError::Config("no training users after the split".into()));
    }
    if !config.method.is_available() {
        return Err(ForgeError::Config(format!(
            "estimator {} is not available in this build",
            config.method.name()
        )));
    }

    let sigma = config.sigma.resolve(beta);
    let mean_cache: Vec<LatentVector> = split
        .observed
        .iter()
        .map(|obs| mean_embedding(beta, obs))
        .collect::<slate_core::Result<_>>()?;

    let shape = config.policy.to_param_shape(beta.dim());
    let mut params = PolicyParams::scaled_identity(shape, 0.1);
    let mut adam = AdamState::new(params.param_len());
    let workers = pool::threads();
    let mut scratches: Vec<SearchScratch> =
        (0..workers).map(|_| SearchScratch::new()).collect();

    let root = RngStream::new(config.seed);
    let started = Instant::now();
    let mut log = TrainLog { records: Vec::new() };
    let mut next_interval = 1usize;
    let mut reward_accum = 0.0;
    let mut reward_count = 0u64;

    let initial_val =
        evaluate_deterministic(&params, beta, split, &split.val_users, config.k)?;
    log.records.push(IntervalRecord {
        interval: 0,
        seconds: 0.0,
        iteration: 0,
        train_reward: 0.0,
        val_reward: initial_val,
    });

    let mut iteration: u64 = 0;
    loop {
        match config.budget {
            Budget::Iterations(t) => {
                if iteration >= t {
                    break;
                }
            }
            Budget::WallClockSecs(b) => {
                if started.elapsed().as_secs_f64() >= b {
                    break;
                }
            }
        }
        let iter_rng = root.child(iteration);
        let mut pick_rng = iter_rng.child(0);
        let users: Vec<usize> = (0..config.batch_size)
            .map(|_| {
                split.train_users
                    [pick_rng.uniform_below(split.train_users.len() as u64) as usize]
            })
            .collect();
        let ctx = GradientContext {
            method: config.method,
            beta,
            params: &params,
            split,
            mean_cache: &mean_cache,
            k: config.k,
            samples: config.samples,
            sigma,
            approx,
        };
        let (grad, mean_reward) = batch_gradient(&ctx, &users, &iter_rng, &mut scratches)?;
        adam.step(params.flat_mut(), &grad, config.learning_rate)?;
        iteration += 1;
        reward_accum += mean_reward;
        reward_count += 1;

        // Interval logging: iteration budgets log at fixed iteration
        // marks, wall-clock budgets at elapsed-time marks.
        let due = match config.budget {
            Budget::Iterations(t) => {
                let mark = (t as u128 * next_interval as u128).div_ceil(config.intervals as u128);
                iteration as u128 >= mark
            }
            Budget::WallClockSecs(b) => {
                started.elapsed().as_secs_f64() >= b * next_interval as f64 / config.intervals as f64
            }
        };
        if due && next_interval <= config.intervals {
            let val =
                evaluate_deterministic(&params, beta, split, &split.val_users, config.k)?;
            log.records.push(IntervalRecord {
                interval: next_interval,
                seconds: started.elapsed().as_secs_f64(),
                iteration,
                train_reward: if reward_count > 0 {
                    reward_accum / reward_count as f64
                } else {
                    0.0
                },
                val_reward: val,
            });
            reward_accum = 0.0;
            reward_count = 0;
            next_interval += 1;
        }
    }
    // Fill any intervals the budget cut short so curves share one grid.
    while next_interval <= config.intervals {
        let val = evaluate_deterministic(&params, beta, split, &split.val_users, config.k)?;
        log.records.push(IntervalRecord {
            interval: next_interval,
            seconds: started.elapsed().as_secs_f64(),
            iteration,
            train_reward: if reward_count > 0 {
                reward_accum / reward_count as f64
            } else {
                log.records.last().map_or(0.0, |r| r.train_reward)
            },
            val_reward: val,
        });
        reward_accum = 0.0;
        reward_count = 0;
        next_interval += 1;
    }
    Ok((params, log))
}
