//! Desk-scale benchmark harness: synthetic worlds, budgeted method
//! comparisons, variance studies, and the fixed-versus-learned embedding
//! study. Reports carry their full environment fingerprint and land on
//! disk as plot-ready long-format CSV plus JSON.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use slate_core::decision::top_k_from_scores;
use slate_core::gradients::{
    estimate_variance, lgp_grad_with_scratch, pl_pg_grad_block, ParamBlock,
};
use slate_core::mips::{ApproxIndex, ExactIndex, MipsIndex, SearchScratch};
use slate_core::policy::LgpPolicy;
use slate_core::types::ParamShape;
use slate_core::{
    mean_embedding, slate_reward, EmbeddingMatrix, ItemSet, LatentVector, PolicyParams,
    RngStream, Slate,
};

use crate::data::SessionSplit;
use crate::train::{self, Budget, Method, PolicyShape, SigmaSpec, TrainConfig};
use crate::{io_err, ForgeError, Result};

/// A synthetic experiment preset.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub name: String,
    pub num_actions: usize,
    pub dim: usize,
    pub k: usize,
    pub samples: u32,
    pub users: usize,
    /// Items per user in each of the observed and hidden halves.
    pub session_len: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn small() -> Scenario {
        Scenario {
            name: "small".into(),
            num_actions: 1_000,
            dim: 16,
            k: 3,
            samples: 10,
            users: 400,
            session_len: 12,
            seed: 1,
        }
    }

    pub fn medium() -> Scenario {
        Scenario {
            name: "medium".into(),
            num_actions: 100_000,
            dim: 32,
            k: 5,
            samples: 10,
            users: 400,
            session_len: 16,
            seed: 2,
        }
    }

    pub fn large() -> Scenario {
        Scenario {
            name: "large".into(),
            num_actions: 1_000_000,
            dim: 32,
            k: 5,
            samples: 10,
            users: 64,
            session_len: 16,
            seed: 3,
        }
    }

    pub fn parse(s: &str) -> Result<Scenario> {
        match s {
            "small" => Ok(Scenario::small()),
            "medium" => Ok(Scenario::medium()),
            "large" => Ok(Scenario::large()),
            other => Err(ForgeError::Config(format!(
                "unknown scenario '{other}' (expected small, medium or large)"
            ))),
        }
    }
}

/// A generated world: fixed embeddings plus user sessions whose hidden
/// halves correlate with the observed halves through a per-user taste
/// vector, so there is signal for the policies to learn.
pub struct World {
    pub beta: EmbeddingMatrix,
    pub split: SessionSplit,
}

pub fn build_world(sc: &Scenario) -> Result<World> {
    let mut rng = RngStream::new(sc.seed);
    let scale = 1.0 / (sc.dim as f64).sqrt();
    let beta = EmbeddingMatrix::gaussian(sc.dim, sc.num_actions, scale, &mut rng)?;

    let concentration = 3.0;
    let take = 2 * sc.session_len;
    let mut observed = Vec::with_capacity(sc.users);
    let mut hidden = Vec::with_capacity(sc.users);
    let mut scores = vec![0.0; sc.num_actions];
    for u in 0..sc.users {
        let mut user_rng = rng.child(u as u64);
        let taste: Vec<f64> = (0..sc.dim).map(|_| user_rng.standard_normal()).collect();
        beta.scores_into(&taste, &mut scores);
        for s in scores.iter_mut() {
            *s = concentration * *s + user_rng.gumbel();
        }
        let ranked = top_k_from_scores(&scores, take.min(sc.num_actions))?;
        let mut obs = Vec::with_capacity(sc.session_len);
        let mut hid = Vec::with_capacity(sc.session_len);
        for (i, &a) in ranked.items().iter().enumerate() {
            if i % 2 == 0 {
                obs.push(a);
            } else {
                hid.push(a);
            }
        }
        observed.push(obs.into_iter().collect::<ItemSet>());
        hidden.push(hid.into_iter().collect::<ItemSet>());
    }
    // Hold out 10% of users for validation.
    let retained = observed.len();
    let val_count = (retained / 10).max(1);
    let mut order: Vec<usize> = (0..retained).collect();
    let mut val_rng = rng.child(u64::MAX);
    for i in (1..order.len()).rev() {
        let j = val_rng.uniform_below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    let mut val_users: Vec<usize> = order[..val_count].to_vec();
    let mut train_users: Vec<usize> = order[val_count..].to_vec();
    val_users.sort_unstable();
    train_users.sort_unstable();
    Ok(World {
        beta,
        split: SessionSplit {
            observed,
            hidden,
            train_users,
            val_users,
            dropped_users: 0,
            num_actions: sc.num_actions,
            split_ratio: 0.5,
            seed: sc.seed,
        },
    })
}

/// Environment fingerprint attached to every report.
#[derive(Debug, Clone, Serialize)]
pub struct Fingerprint {
    pub scenario: String,
    pub num_actions: usize,
    pub dim: usize,
    pub k: usize,
    pub samples: u32,
    pub sigma: String,
    pub seeds: Vec<u64>,
    pub budget: String,
    pub hardware: String,
}

fn hardware_note() -> String {
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(0);
    format!("{} logical cores, {}", cores, std::env::consts::ARCH)
}

/// One point of one method's curve under one seed.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub method: String,
    pub seed: u64,
    pub x: f64,
    pub y: f64,
}

/// A method that could not run, with the reason; never silently dropped.
#[derive(Debug, Clone, Serialize)]
pub struct GapEntry {
    pub method: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub scenario: String,
    pub fingerprint: Fingerprint,
    pub points: Vec<CurvePoint>,
    pub gaps: Vec<GapEntry>,
}

impl BenchReport {
    /// Long-format CSV: scenario, method, seed, x, y.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,method,seed,x,y\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.scenario, p.method, p.seed, p.x, p.y
            ));
        }
        out
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        std::fs::write(&csv_path, self.to_csv()).map_err(io_err(&csv_path))?;
        let json_path = dir.join(format!("{stem}.json"));
        let json = serde_json::to_string_pretty(self)
            .expect("report serialization cannot fail");
        std::fs::write(&json_path, json).map_err(io_err(&json_path))
    }

    /// Per-seed final y values of one method (largest x per seed).
    pub fn final_values(&self, method: &str) -> Vec<f64> {
        let mut per_seed: std::collections::BTreeMap<u64, (f64, f64)> =
            std::collections::BTreeMap::new();
        for p in self.points.iter().filter(|p| p.method == method) {
            let e = per_seed.entry(p.seed).or_insert((f64::NEG_INFINITY, 0.0));
            if p.x >= e.0 {
                *e = (p.x, p.y);
            }
        }
        per_seed.values().map(|(_, y)| *y).collect()
    }

    /// Mean and standard error of the per-seed final values.
    pub fn final_mean_se(&self, method: &str) -> (f64, f64) {
        let vals = self.final_values(method);
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        if vals.len() < 2 {
            return (mean, 0.0);
        }
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }
}

fn split_available(methods: &[Method]) -> (Vec<Method>, Vec<GapEntry>) {
    let mut ok = Vec::new();
    let mut gaps = Vec::new();
    for &m in methods {
        if m.is_available() {
            ok.push(m);
        } else {
            gaps.push(GapEntry {
                method: m.name().into(),
                reason: "estimator not available in this build".into(),
            });
        }
    }
    (ok, gaps)
}

/// Trains every method under the same wall-clock budget, once per seed,
/// and reports validation-reward curves on a shared interval grid.
/// Runs strictly sequentially to keep the timing honest.
pub fn bench_time_budget(
    scenario: &Scenario,
    methods: &[Method],
    budget_secs: f64,
    seeds: &[u64],
) -> Result<BenchReport> {
    if methods.len() < 2 {
        return Err(ForgeError::Config(
            "a time-budget comparison needs at least two methods".into(),
        ));
    }
    let world = build_world(scenario)?;
    let (methods, gaps) = split_available(methods);
    let needs_index = methods.iter().any(|m| m.needs_approx_index());
    let approx = if needs_index {
        let mut rng = RngStream::new(scenario.seed ^ 0x1d8);
        Some(slate_core::mips::build_approx(&world.beta, 32, 128, &mut rng)?)
    } else {
        None
    };
    let intervals = 10;
    let mut points = Vec::new();
    for &method in &methods {
        for &seed in seeds {
            let cfg = TrainConfig {
                method,
                policy: PolicyShape::Linear,
                k: scenario.k,
                samples: scenario.samples,
                sigma: SigmaSpec::InvDim,
                learning_rate: 0.01,
                batch_size: 32,
                budget: Budget::WallClockSecs(budget_secs),
                intervals,
                seed,
            };
            let (_, log) = train::train(&cfg, &world.split, &world.beta, approx.as_ref())?;
            for r in &log.records {
                points.push(CurvePoint {
                    method: method.name().into(),
                    seed,
                    x: budget_secs * r.interval as f64 / intervals as f64,
                    y: r.val_reward,
                });
            }
        }
    }
    Ok(BenchReport {
        scenario: scenario.name.clone(),
        fingerprint: Fingerprint {
            scenario: scenario.name.clone(),
            num_actions: scenario.num_actions,
            dim: scenario.dim,
            k: scenario.k,
            samples: scenario.samples,
            sigma: "1/L".into(),
            seeds: seeds.to_vec(),
            budget: format!("{budget_secs}s wall clock"),
            hardware: hardware_note(),
        },
        points,
        gaps,
    })
}

/// Trains every method for the same number of iterations and reports
/// training-reward curves against the iteration count.
pub fn bench_iteration_budget(
    scenario: &Scenario,
    methods: &[Method],
    iterations: u64,
    seeds: &[u64],
) -> Result<BenchReport> {
    let world = build_world(scenario)?;
    let (methods, gaps) = split_available(methods);
    let needs_index = methods.iter().any(|m| m.needs_approx_index());
    let approx = if needs_index {
        let mut rng = RngStream::new(scenario.seed ^ 0x1d8);
        Some(slate_core::mips::build_approx(&world.beta, 32, 128, &mut rng)?)
    } else {
        None
    };
    let intervals = 10;
    let mut points = Vec::new();
    for &method in &methods {
        for &seed in seeds {
            let cfg = TrainConfig {
                method,
                policy: PolicyShape::Linear,
                k: scenario.k,
                samples: scenario.samples,
                sigma: SigmaSpec::InvDim,
                learning_rate: 0.01,
                batch_size: 32,
                budget: Budget::Iterations(iterations),
                intervals,
                seed,
            };
            let (_, log) = train::train(&cfg, &world.split, &world.beta, approx.as_ref())?;
            for r in &log.records {
                points.push(CurvePoint {
                    method: method.name().into(),
                    seed,
                    x: r.iteration as f64,
                    y: r.train_reward,
                });
            }
        }
    }
    Ok(BenchReport {
        scenario: scenario.name.clone(),
        fingerprint: Fingerprint {
            scenario: scenario.name.clone(),
            num_actions: scenario.num_actions,
            dim: scenario.dim,
            k: scenario.k,
            samples: scenario.samples,
            sigma: "1/L".into(),
            seeds: seeds.to_vec(),
            budget: format!("{iterations} iterations"),
            hardware: hardware_note(),
        },
        points,
        gaps,
    })
}

/// Gradient variance as a function of the slate size on one frozen
/// instance (fixed embeddings, context and parameters), with the noise
/// scale set by the norm-matching 1/B heuristic. Curve y-values are
/// log10 of the measured variance.
pub fn bench_variance_vs_k(
    scenario: &Scenario,
    methods: &[Method],
    k_list: &[usize],
    trials: u32,
    seeds: &[u64],
) -> Result<BenchReport> {
    let world = build_world(scenario)?;
    let (methods, gaps) = split_available(methods);
    let beta = &world.beta;
    let sigma = SigmaSpec::InvMeanNorm.resolve(beta);
    let params = PolicyParams::scaled_identity(ParamShape::Linear { dim: beta.dim() }, 0.1);
    let probe_user = world.split.train_users[0];
    let x_mean = mean_embedding(beta, &world.split.observed[probe_user])?;
    let hidden = &world.split.hidden[probe_user];
    let exact = ExactIndex::new(beta);

    let mut points = Vec::new();
    for &method in &methods {
        for &k in k_list {
            for &seed in seeds {
                let mut rng = RngStream::new(seed);
                let reward = |s: &Slate| slate_reward(s, hidden);
                let variance = match method {
                    Method::PlPg => {
                        let pl = slate_core::policy::PlackettLuce::new(beta, &params, k)?;
                        estimate_variance(
                            |r| {
                                slate_core::gradients::pl_pg_grad(&pl, &x_mean, reward, 1, r)
                                    .unwrap()
                                    .grad
                            },
                            trials,
                            &mut rng,
                        )?
                    }
                    Method::PlCov => {
                        let pl = slate_core::policy::PlackettLuce::new(beta, &params, k)?;
                        estimate_variance(
                            |r| {
                                slate_core::gradients::pl_cov_grad(&pl, &x_mean, reward, 2, r)
                                    .unwrap()
                                    .grad
                            },
                            trials,
                            &mut rng,
                        )?
                    }
                    Method::PlRank => {
                        let pl = slate_core::policy::PlackettLuce::new(beta, &params, k)?;
                        let weights = slate_core::reward::position_weights(k);
                        estimate_variance(
                            |r| {
                                slate_core::gradients::pl_rank_grad(
                                    &pl, &x_mean, hidden, &weights, 1, r,
                                )
                                .unwrap()
                                .grad
                            },
                            trials,
                            &mut rng,
                        )?
                    }
                    Method::Lgp | Method::LgpMips => {
                        let lgp = LgpPolicy::new(beta, &params, k, sigma)?;
                        estimate_variance(
                            |r| {
                                slate_core::gradients::lgp_grad(&lgp, &x_mean, reward, 1, &exact, r)
                                    .unwrap()
                                    .grad
                            },
                            trials,
                            &mut rng,
                        )?
                    }
                };
                points.push(CurvePoint {
                    method: method.name().into(),
                    seed,
                    x: k as f64,
                    y: variance.max(f64::MIN_POSITIVE).log10(),
                });
            }
        }
    }
    Ok(BenchReport {
        scenario: scenario.name.clone(),
        fingerprint: Fingerprint {
            scenario: scenario.name.clone(),
            num_actions: scenario.num_actions,
            dim: scenario.dim,
            k: 0,
            samples: 1,
            sigma: format!("1/B = {sigma:.6}"),
            seeds: seeds.to_vec(),
            budget: format!("{trials} trials per point"),
            hardware: hardware_note(),
        },
        points,
        gaps,
    })
}

/// Mean log10 variance of one method at one slate size, across seeds.
pub fn mean_log_variance(report: &BenchReport, method: Method, k: usize) -> f64 {
    let vals: Vec<f64> = report
        .points
        .iter()
        .filter(|p| p.method == method.name() && p.x == k as f64)
        .map(|p| p.y)
        .collect();
    vals.iter().sum::<f64>() / vals.len() as f64
}

/// Outcome of the fixed-versus-learned embedding study.
pub struct FixedBetaOutcome {
    pub report: BenchReport,
    /// Gradient-variance probes at each logged interval.
    pub theta_variances: Vec<f64>,
    pub beta_variances: Vec<f64>,
    /// Mean seconds per optimization iteration, probes excluded.
    pub theta_iter_seconds: f64,
    pub beta_iter_seconds: f64,
}

/// Trains a Plackett-Luce policy twice on the same instance: once
/// learning the context map with embeddings fixed, once learning the
/// embeddings directly (the context map drops out of the score as the
/// mean embedding then feeds the scores unmapped). Tracks reward,
/// per-interval gradient-variance probes, and per-iteration wall time.
pub fn bench_fixed_beta(
    scenario: &Scenario,
    iterations: u64,
    probe_trials: u32,
    seed: u64,
) -> Result<FixedBetaOutcome> {
    if scenario.num_actions > 5_000 {
        return Err(ForgeError::Config(
            "the embedding-learning study is capped at 5000 actions".into(),
        ));
    }
    let world = build_world(scenario)?;
    let k = 2;
    let samples = 1;
    let lr = 0.01;
    let batch = 32;
    let intervals = 10usize;
    let l = world.beta.dim();
    let identity = PolicyParams::scaled_identity(ParamShape::Linear { dim: l }, 1.0);
    let probe_user = world.split.train_users[0];
    let mean_cache: Vec<LatentVector> = world
        .split
        .observed
        .iter()
        .map(|o| mean_embedding(&world.beta, o))
        .collect::<slate_core::Result<_>>()?;

    let mut points = Vec::new();
    let mut outcome = FixedBetaOutcome {
        report: BenchReport {
            scenario: scenario.name.clone(),
            fingerprint: Fingerprint {
                scenario: scenario.name.clone(),
                num_actions: scenario.num_actions,
                dim: l,
                k,
                samples,
                sigma: "n/a".into(),
                seeds: vec![seed],
                budget: format!("{iterations} iterations"),
                hardware: hardware_note(),
            },
            points: Vec::new(),
            gaps: Vec::new(),
        },
        theta_variances: Vec::new(),
        beta_variances: Vec::new(),
        theta_iter_seconds: 0.0,
        beta_iter_seconds: 0.0,
    };

    for learn_beta in [false, true] {
        let label = if learn_beta { "learn-beta" } else { "learn-theta" };
        // Own copies: the learned-beta run mutates the embeddings.
        let mut beta = world.beta.clone();
        let mut theta =
            PolicyParams::scaled_identity(ParamShape::Linear { dim: l }, 0.1);
        let param_len = if learn_beta {
            l * beta.num_actions()
        } else {
            theta.param_len()
        };
        let mut adam = slate_core::adam::AdamState::new(param_len);
        let root = RngStream::new(seed);
        let mut reward_accum = 0.0;
        let mut reward_count = 0u64;
        let mut probed = Vec::new();
        let mut timed = 0.0f64;
        let mark = |j: usize| (iterations as u128 * j as u128).div_ceil(intervals as u128) as u64;
        let mut next = 1usize;
        let mut it = 0u64;
        while it < iterations {
            let iter_rng = root.child(it);
            let mut pick = iter_rng.child(0);
            let t0 = Instant::now();
            let mut grad_sum = slate_core::gradients::PairwiseVecSum::new(param_len);
            let mut batch_reward = 0.0;
            for c in 0..batch {
                let user = world.split.train_users
                    [pick.uniform_below(world.split.train_users.len() as u64) as usize];
                let mut stream = iter_rng.child(1 + c as u64);
                let hidden = &world.split.hidden[user];
                let reward = |s: &Slate| slate_reward(s, hidden);
                let sample = if learn_beta {
                    let pl = slate_core::policy::PlackettLuce::new(&beta, &identity, k)?;
                    pl_pg_grad_block(
                        &pl,
                        &mean_cache[user],
                        reward,
                        samples,
                        &mut stream,
                        ParamBlock::Beta,
                    )?
                } else {
                    let pl = slate_core::policy::PlackettLuce::new(&beta, &theta, k)?;
                    pl_pg_grad_block(
                        &pl,
                        &mean_cache[user],
                        reward,
                        samples,
                        &mut stream,
                        ParamBlock::Theta,
                    )?
                };
                batch_reward += sample.mean_reward;
                grad_sum.push(sample.grad);
            }
            let mut grad = grad_sum.finish();
            for g in &mut grad {
                *g /= batch as f64;
            }
            if learn_beta {
                adam.step(beta.data_mut(), &grad, lr)?;
                beta.refresh_norms();
            } else {
                adam.step(theta.flat_mut(), &grad, lr)?;
            }
            timed += t0.elapsed().as_secs_f64();
            it += 1;
            reward_accum += batch_reward / batch as f64;
            reward_count += 1;

            if it >= mark(next) && next <= intervals {
                // Probe the gradient variance at the current parameters;
                // excluded from the iteration timer.
                let hidden = &world.split.hidden[probe_user];
                let reward = |s: &Slate| slate_reward(s, hidden);
                let mut probe_rng = RngStream::new(seed ^ 0xFACE);
                let variance = if learn_beta {
                    let pl = slate_core::policy::PlackettLuce::new(&beta, &identity, k)?;
                    estimate_variance(
                        |r| {
                            pl_pg_grad_block(
                                &pl,
                                &mean_cache[probe_user],
                                reward,
                                samples,
                                r,
                                ParamBlock::Beta,
                            )
                            .unwrap()
                            .grad
                        },
                        probe_trials,
                        &mut probe_rng,
                    )?
                } else {
                    let pl = slate_core::policy::PlackettLuce::new(&beta, &theta, k)?;
                    estimate_variance(
                        |r| {
                            pl_pg_grad_block(
                                &pl,
                                &mean_cache[probe_user],
                                reward,
                                samples,
                                r,
                                ParamBlock::Theta,
                            )
                            .unwrap()
                            .grad
                        },
                        probe_trials,
                        &mut probe_rng,
                    )?
                };
                probed.push(variance);
                points.push(CurvePoint {
                    method: format!("{label}:variance"),
                    seed,
                    x: it as f64,
                    y: variance.max(f64::MIN_POSITIVE).log10(),
                });
                points.push(CurvePoint {
                    method: format!("{label}:reward"),
                    seed,
                    x: it as f64,
                    y: reward_accum / reward_count.max(1) as f64,
                });
                reward_accum = 0.0;
                reward_count = 0;
                next += 1;
            }
        }
        let per_iter = timed / iterations.max(1) as f64;
        points.push(CurvePoint {
            method: format!("{label}:iter_seconds"),
            seed,
            x: 0.0,
            y: per_iter,
        });
        if learn_beta {
            outcome.beta_variances = probed;
            outcome.beta_iter_seconds = per_iter;
        } else {
            outcome.theta_variances = probed;
            outcome.theta_iter_seconds = per_iter;
        }
    }
    outcome.report.points = points;
    Ok(outcome)
}

/// Seconds per training-style iteration (a batch of LGP gradient
/// estimates) against the given index, single-threaded, warmup excluded.
pub fn time_lgp_iteration<I: MipsIndex>(
    beta: &EmbeddingMatrix,
    split: &SessionSplit,
    k: usize,
    samples: u32,
    sigma: f64,
    batch: usize,
    iterations: u64,
    index: &I,
    seed: u64,
) -> Result<f64> {
    let params = PolicyParams::scaled_identity(ParamShape::Linear { dim: beta.dim() }, 0.1);
    let lgp = LgpPolicy::new(beta, &params, k, sigma)?;
    let users = &split.train_users;
    let mean_cache: Vec<LatentVector> = split
        .observed
        .iter()
        .map(|o| mean_embedding(beta, o))
        .collect::<slate_core::Result<_>>()?;
    let mut scratch = SearchScratch::new();
    let root = RngStream::new(seed);
    let mut run = |iters: u64, offset: u64| -> Result<f64> {
        let t0 = Instant::now();
        for it in 0..iters {
            let iter_rng = root.child(offset + it);
            let mut pick = iter_rng.child(0);
            for c in 0..batch {
                let user = users[pick.uniform_below(users.len() as u64) as usize];
                let mut stream = iter_rng.child(1 + c as u64);
                let hidden = &split.hidden[user];
                lgp_grad_with_scratch(
                    &lgp,
                    &mean_cache[user],
                    |s| slate_reward(s, hidden),
                    samples,
                    index,
                    &mut stream,
                    &mut scratch,
                )?;
            }
        }
        Ok(t0.elapsed().as_secs_f64() / iters as f64)
    };
    run(1, 1_000_000)?; // warmup
    run(iterations, 0)
}

/// Convenience wrapper building both index flavors for one embedding
/// matrix and timing the same workload through each.
pub struct ComplexityPoint {
    pub num_actions: usize,
    pub exact_secs: f64,
    pub approx_secs: f64,
}

pub fn lgp_complexity_point(
    num_actions: usize,
    dim: usize,
    users: usize,
    k: usize,
    samples: u32,
    iterations: u64,
    seed: u64,
) -> Result<ComplexityPoint> {
    let sc = Scenario {
        name: format!("complexity-{num_actions}"),
        num_actions,
        dim,
        k,
        samples,
        users,
        session_len: 12,
        seed,
    };
    let world = build_world(&sc)?;
    let sigma = 1.0 / dim as f64;
    let exact = ExactIndex::new(&world.beta);
    let mut rng = RngStream::new(seed ^ 0xABCD);
    // Lean build parameters: this point measures per-iteration latency,
    // where retrieval quality plays no role, and the million-action
    // build has to stay inside the suite's time window.
    let approx: ApproxIndex<'_> = slate_core::mips::build_approx(&world.beta, 12, 32, &mut rng)?;
    let exact_secs = time_lgp_iteration(
        &world.beta,
        &world.split,
        k,
        samples,
        sigma,
        32,
        iterations,
        &exact,
        seed,
    )?;
    let approx_secs = time_lgp_iteration(
        &world.beta,
        &world.split,
        k,
        samples,
        sigma,
        32,
        iterations,
        &approx,
        seed,
    )?;
    Ok(ComplexityPoint {
        num_actions,
        exact_secs,
        approx_secs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_generation_is_deterministic_and_learnable() {
        let sc = Scenario {
            name: "tiny".into(),
            num_actions: 200,
            dim: 8,
            k: 3,
            samples: 4,
            users: 60,
            session_len: 8,
            seed: 5,
        };
        let a = build_world(&sc).unwrap();
        let b = build_world(&sc).unwrap();
        assert_eq!(a.beta.data(), b.beta.data());
        assert_eq!(a.split.observed, b.split.observed);
        // Observed and hidden halves are disjoint and non-empty.
        for (obs, hid) in a.split.observed.iter().zip(&a.split.hidden) {
            assert_eq!(obs.len(), 8);
            assert_eq!(hid.len(), 8);
            assert!(obs.iter().all(|x| !hid.contains(x)));
        }
        assert!(!a.split.val_users.is_empty());
    }

    #[test]
    fn time_budget_needs_two_methods() {
        let sc = Scenario::small();
        assert!(bench_time_budget(&sc, &[Method::Lgp], 0.1, &[1]).is_err());
    }

    #[test]
    fn iteration_budget_zero_gives_flat_curves() {
        let mut sc = Scenario::small();
        sc.num_actions = 150;
        sc.users = 40;
        sc.session_len = 6;
        let report =
            bench_iteration_budget(&sc, &[Method::Lgp, Method::PlPg], 0, &[1, 2]).unwrap();
        for method in ["lgp", "pl-pg"] {
            for seed in [1u64, 2] {
                let ys: Vec<f64> = report
                    .points
                    .iter()
                    .filter(|p| p.method == method && p.seed == seed)
                    .map(|p| p.y)
                    .collect();
                assert_eq!(ys.len(), 11);
                assert!(ys.iter().all(|&y| y == ys[0]));
            }
        }
    }

    #[test]
    fn report_csv_and_final_values() {
        let report = BenchReport {
            scenario: "x".into(),
            fingerprint: Fingerprint {
                scenario: "x".into(),
                num_actions: 1,
                dim: 1,
                k: 1,
                samples: 1,
                sigma: "1/L".into(),
                seeds: vec![1, 2],
                budget: "test".into(),
                hardware: "test".into(),
            },
            points: vec![
                CurvePoint { method: "m".into(), seed: 1, x: 0.0, y: 0.1 },
                CurvePoint { method: "m".into(), seed: 1, x: 1.0, y: 0.5 },
                CurvePoint { method: "m".into(), seed: 2, x: 1.0, y: 0.7 },
            ],
            gaps: vec![],
        };
        let csv = report.to_csv();
        assert!(csv.starts_with("scenario,method,seed,x,y\n"));
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(report.final_values("m"), vec![0.5, 0.7]);
        let (mean, se) = report.final_mean_se("m");
        assert!((mean - 0.6).abs() < 1e-12);
        assert!(se > 0.0);
    }
}
