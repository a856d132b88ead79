//! Gradient estimators against their independent oracles: finite
//! differences for the exhaustive gradient, the exhaustive gradient for
//! the Plackett-Luce estimators, and smoothed-objective quadrature for
//! the latent-perturbation estimators.

mod util;

use slate_core::gradients::{
    estimate_variance, exact_pl_grad, exact_pl_grad_block, exact_pl_value, lgp_grad, lrp_grad,
    pl_cov_grad, pl_pg_grad, pl_pg_grad_block, pl_rank_grad, ParamBlock,
};
use slate_core::mips::ExactIndex;
use slate_core::policy::{GaussianNoise, LatentNoise, LgpPolicy, PlackettLuce};
use slate_core::reward::position_weights;
use slate_core::{
    slate_reward, ActionId, EmbeddingMatrix, LatentVector, PolicyParams, RngStream, Slate,
};
use util::{tiny_instance, MeanAccumulator};

#[test]
fn exact_gradient_matches_finite_differences() {
    for (p, k, seed) in [(5usize, 3usize, 1u64), (4, 2, 2), (6, 2, 3)] {
        let inst = tiny_instance(p, 2, &[0, 2], seed);
        let reward = |s: &Slate| slate_reward(s, &inst.hidden);
        let pl = PlackettLuce::new(&inst.beta, &inst.params, k).unwrap();
        let exact = exact_pl_grad(&pl, &inst.x_mean, reward).unwrap();

        let flat = inst.params.flat().to_vec();
        let shape = inst.params.shape();
        let eps = 1e-5;
        for c in 0..flat.len() {
            let mut hi = flat.clone();
            hi[c] += eps;
            let mut lo = flat.clone();
            lo[c] -= eps;
            let params_hi = PolicyParams::from_flat(shape, hi).unwrap();
            let params_lo = PolicyParams::from_flat(shape, lo).unwrap();
            let v_hi = exact_pl_value(
                &PlackettLuce::new(&inst.beta, &params_hi, k).unwrap(),
                &inst.x_mean,
                reward,
            )
            .unwrap();
            let v_lo = exact_pl_value(
                &PlackettLuce::new(&inst.beta, &params_lo, k).unwrap(),
                &inst.x_mean,
                reward,
            )
            .unwrap();
            let fd = (v_hi - v_lo) / (2.0 * eps);
            let scale = fd.abs().max(1.0);
            assert!(
                (fd - exact.grad[c]).abs() / scale < 1e-6,
                "P={p} K={k} coord {c}: fd {fd} vs analytic {}",
                exact.grad[c]
            );
        }
    }
}

#[test]
fn exact_gradient_two_layer_matches_finite_differences() {
    let mut rng = RngStream::new(9);
    let l = 2;
    let beta = EmbeddingMatrix::gaussian(l, 4, 1.0, &mut rng).unwrap();
    let w1: Vec<f64> = (0..l * l).map(|_| 0.5 * rng.standard_normal()).collect();
    let w2: Vec<f64> = (0..l * l).map(|_| 0.5 * rng.standard_normal()).collect();
    let params = PolicyParams::two_layer(l, w1, w2).unwrap();
    let x_mean = LatentVector::new(vec![0.7, -0.4]).unwrap();
    let hidden: slate_core::ItemSet = [1u32, 3].into_iter().collect();
    let reward = |s: &Slate| slate_reward(s, &hidden);

    let pl = PlackettLuce::new(&beta, &params, 2).unwrap();
    let exact = exact_pl_grad(&pl, &x_mean, reward).unwrap();
    let flat = params.flat().to_vec();
    let eps = 1e-5;
    for c in 0..flat.len() {
        let mut hi = flat.clone();
        hi[c] += eps;
        let mut lo = flat.clone();
        lo[c] -= eps;
        let ph = PolicyParams::from_flat(params.shape(), hi).unwrap();
        let pl_low = PolicyParams::from_flat(params.shape(), lo).unwrap();
        let v_hi =
            exact_pl_value(&PlackettLuce::new(&beta, &ph, 2).unwrap(), &x_mean, reward).unwrap();
        let v_lo =
            exact_pl_value(&PlackettLuce::new(&beta, &pl_low, 2).unwrap(), &x_mean, reward)
                .unwrap();
        let fd = (v_hi - v_lo) / (2.0 * eps);
        assert!(
            (fd - exact.grad[c]).abs() < 1e-6,
            "coord {c}: fd {fd} vs {}",
            exact.grad[c]
        );
    }
}

#[test]
fn exact_gradient_constant_reward_is_zero() {
    // E[grad log pi] = 0: with a constant reward the exhaustive gradient
    // vanishes identically.
    for seed in [4u64, 5, 6] {
        let inst = tiny_instance(5, 3, &[], seed);
        let pl = PlackettLuce::new(&inst.beta, &inst.params, 2).unwrap();
        let g = exact_pl_grad(&pl, &inst.x_mean, |_| 2.5).unwrap();
        for (c, v) in g.grad.iter().enumerate() {
            assert!(v.abs() < 1e-10, "coord {c}: {v}");
        }
    }
}

#[test]
fn exact_gradient_k1_matches_softmax_formula() {
    // K = 1 reduces to the softmax policy gradient
    // sum_a p_a r_a (grad f_a - sum_b p_b grad f_b).
    let inst = tiny_instance(5, 2, &[1, 4], 7);
    let pl = PlackettLuce::new(&inst.beta, &inst.params, 1).unwrap();
    let reward = |s: &Slate| slate_reward(s, &inst.hidden);
    let exact = exact_pl_grad(&pl, &inst.x_mean, reward).unwrap();

    let scores = pl.scores(&inst.x_mean).unwrap();
    let probs = slate_testkit::softmax(&scores);
    let l = inst.beta.dim();
    let m = inst.x_mean.as_slice();
    // Latent-space softmax gradient, then the linear-shape pullback
    // (outer product with m), computed from scratch.
    let mut g_h = vec![0.0; l];
    let mean_emb: Vec<f64> = (0..l)
        .map(|r| {
            (0..5)
                .map(|a| probs[a] * inst.beta.embedding(ActionId(a as u32))[r])
                .sum()
        })
        .collect();
    for a in 0..5u32 {
        let r = slate_reward(
            &Slate::new(vec![ActionId(a)]).unwrap(),
            &inst.hidden,
        );
        let e = inst.beta.embedding(ActionId(a));
        for i in 0..l {
            g_h[i] += probs[a as usize] * r * (e[i] - mean_emb[i]);
        }
    }
    for i in 0..l {
        for j in 0..l {
            let want = m[i] * g_h[j];
            let got = exact.grad[i * l + j];
            assert!((want - got).abs() < 1e-10, "({i},{j}): {want} vs {got}");
        }
    }
}

#[test]
fn pl_pg_mean_matches_exhaustive_gradient() {
    let inst = tiny_instance(5, 2, &[0, 3], 11);
    let k = 2;
    let pl = PlackettLuce::new(&inst.beta, &inst.params, k).unwrap();
    let reward = |s: &Slate| slate_reward(s, &inst.hidden);
    let exact = exact_pl_grad(&pl, &inst.x_mean, reward).unwrap();

    let mut rng = RngStream::new(12);
    let mut acc = MeanAccumulator::new(exact.grad.len());
    for _ in 0..1_000_000 {
        let g = pl_pg_grad(&pl, &inst.x_mean, reward, 1, &mut rng).unwrap();
        acc.push(&g.grad);
    }
    acc.assert_matches(&exact.grad, 3.0, 0.02, "pl_pg vs exact");
}

#[test]
fn pl_pg_constant_reward_mean_vanishes() {
    let inst = tiny_instance(5, 2, &[], 13);
    let pl = PlackettLuce::new(&inst.beta, &inst.params, 2).unwrap();
    let mut rng = RngStream::new(14);
    let mut acc = MeanAccumulator::new(inst.params.param_len());
    for _ in 0..200_000 {
        let g = pl_pg_grad(&pl, &inst.x_mean, |_| 1.7, 1, &mut rng).unwrap();
        acc.push(&g.grad);
    }
    let zeros = vec![0.0; inst.params.param_len()];
    acc.assert_matches(&zeros, 3.0, 1.0, "pl_pg constant reward");
}

#[test]
fn pl_cov_mean_matches_exhaustive_gradient() {
    let inst = tiny_instance(5, 2, &[2, 4], 15);
    let pl = PlackettLuce::new(&inst.beta, &inst.params, 2).unwrap();
    let reward = |s: &Slate| slate_reward(s, &inst.hidden);
    let exact = exact_pl_grad(&pl, &inst.x_mean, reward).unwrap();

    let mut rng = RngStream::new(16);
    let mut acc = MeanAccumulator::new(exact.grad.len());
    for _ in 0..100_000 {
        let g = pl_cov_grad(&pl, &inst.x_mean, reward, 16, &mut rng).unwrap();
        acc.push(&g.grad);
    }
    acc.assert_matches(&exact.grad, 3.0, 0.02, "pl_cov vs exact");
}

#[test]
fn pl_cov_constant_rewards_give_exactly_zero_estimates() {
    let inst = tiny_instance(6, 2, &[], 17);
    let pl = PlackettLuce::new(&inst.beta, &inst.params, 3).unwrap();
    let mut rng = RngStream::new(18);
    for _ in 0..50 {
        let g = pl_cov_grad(&pl, &inst.x_mean, |_| 3.25, 8, &mut rng).unwrap();
        assert!(g.grad.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn pl_cov_requires_two_samples() {
    let inst = tiny_instance(4, 2, &[0], 19);
    let pl = PlackettLuce::new(&inst.beta, &inst.params, 2).unwrap();
    let mut rng = RngStream::new(20);
    assert!(pl_cov_grad(&pl, &inst.x_mean, |_| 0.0, 1, &mut rng).is_err());
}

#[test]
fn pl_rank_mean_matches_exhaustive_gradient() {
    let inst = tiny_instance(5, 2, &[1, 2], 21);
    let k = 2;
    let pl = PlackettLuce::new(&inst.beta, &inst.params, k).unwrap();
    let weights = position_weights(k);
    let reward = |s: &Slate| slate_reward(s, &inst.hidden);
    let exact = exact_pl_grad(&pl, &inst.x_mean, reward).unwrap();

    let mut rng = RngStream::new(22);
    let mut acc = MeanAccumulator::new(exact.grad.len());
    for _ in 0..400_000 {
        let g = pl_rank_grad(&pl, &inst.x_mean, &inst.hidden, &weights, 1, &mut rng).unwrap();
        acc.push(&g.grad);
    }
    acc.assert_matches(&exact.grad, 3.0, 0.02, "pl_rank vs exact");
}

#[test]
fn pl_rank_zero_weights_zero_gradient() {
    let inst = tiny_instance(5, 2, &[1], 23);
    let pl = PlackettLuce::new(&inst.beta, &inst.params, 2).unwrap();
    let mut rng = RngStream::new(24);
    let g = pl_rank_grad(&pl, &inst.x_mean, &inst.hidden, &[0.0, 0.0], 4, &mut rng).unwrap();
    assert!(g.grad.iter().all(|&v| v == 0.0));
}

#[test]
fn pl_rank_rejects_mismatched_weights() {
    let inst = tiny_instance(5, 2, &[1], 25);
    let pl = PlackettLuce::new(&inst.beta, &inst.params, 2).unwrap();
    let mut rng = RngStream::new(26);
    assert!(pl_rank_grad(&pl, &inst.x_mean, &inst.hidden, &[1.0], 4, &mut rng).is_err());
    assert!(
        pl_rank_grad(&pl, &inst.x_mean, &inst.hidden, &[1.0, f64::NAN], 4, &mut rng).is_err()
    );
}

#[test]
fn estimators_reward_zero_gives_zero_gradient() {
    let inst = tiny_instance(4, 2, &[], 27);
    let pl = PlackettLuce::new(&inst.beta, &inst.params, 2).unwrap();
    let lgp = LgpPolicy::new(&inst.beta, &inst.params, 2, 0.3).unwrap();
    let index = ExactIndex::new(&inst.beta);
    let mut rng = RngStream::new(28);
    let zero = |_: &Slate| 0.0;
    assert!(pl_pg_grad(&pl, &inst.x_mean, zero, 4, &mut rng)
        .unwrap()
        .grad
        .iter()
        .all(|&v| v == 0.0));
    assert!(lgp_grad(&lgp, &inst.x_mean, zero, 4, &index, &mut rng)
        .unwrap()
        .grad
        .iter()
        .all(|&v| v == 0.0));
}

/// Reference gradient of the smoothed objective via the slice oracle:
/// finite differences over the context embedding h, chained to the linear
/// parameter shape by the outer product with the mean embedding.
fn smoothed_gradient_oracle(
    beta: &EmbeddingMatrix,
    params: &PolicyParams,
    x_mean: &LatentVector,
    k: usize,
    sigma: f64,
    reward: impl Fn(&[usize]) -> f64 + Copy,
) -> Vec<f64> {
    let l = beta.dim();
    assert_eq!(l, 2, "oracle is wired for L = 2");
    let h0 = params.context_embedding(x_mean).unwrap();
    let p = beta.num_actions();
    let g1: Vec<f64> = (0..p).map(|a| beta.embedding(ActionId(a as u32))[0]).collect();
    let g2: Vec<f64> = (0..p).map(|a| beta.embedding(ActionId(a as u32))[1]).collect();
    let value = |h: &[f64]| {
        let c: Vec<f64> = (0..p).map(|a| beta.score(h, ActionId(a as u32))).collect();
        slate_testkit::smoothed_value_2d(&c, &g1, &g2, k, sigma, 96, reward)
    };
    let delta = 1e-3;
    let mut dh = vec![0.0; l];
    for j in 0..l {
        let mut hi = h0.as_slice().to_vec();
        hi[j] += delta;
        let mut lo = h0.as_slice().to_vec();
        lo[j] -= delta;
        dh[j] = (value(&hi) - value(&lo)) / (2.0 * delta);
    }
    // Pull back through the linear map: d/d theta_(i,j) = m_i * dh_j.
    let m = x_mean.as_slice();
    let mut grad = vec![0.0; params.param_len()];
    for i in 0..l {
        for j in 0..l {
            grad[i * l + j] = m[i] * dh[j];
        }
    }
    grad
}

#[test]
fn lgp_mean_matches_smoothed_objective_quadrature() {
    let mut rng = RngStream::new(31);
    let l = 2;
    let p = 4;
    let beta = EmbeddingMatrix::gaussian(l, p, 1.0, &mut rng).unwrap();
    let theta: Vec<f64> = (0..4).map(|_| 0.5 * rng.standard_normal()).collect();
    let params = PolicyParams::linear(l, theta).unwrap();
    let x_mean = LatentVector::new(vec![0.9, -0.6]).unwrap();
    let hidden: slate_core::ItemSet = [0u32, 2].into_iter().collect();
    let sigma = 0.5;
    let k = 2;

    let reward_ids = |slate: &[usize]| {
        let mut w = 1.0;
        let mut total = 0.0;
        for &a in slate {
            if hidden.contains(ActionId(a as u32)) {
                total += w;
            }
            w *= 0.5;
        }
        total
    };
    let oracle = smoothed_gradient_oracle(&beta, &params, &x_mean, k, sigma, reward_ids);

    let lgp = LgpPolicy::new(&beta, &params, k, sigma).unwrap();
    let index = ExactIndex::new(&beta);
    let reward = |s: &Slate| slate_reward(s, &hidden);
    let mut acc = MeanAccumulator::new(params.param_len());
    let mut draw_rng = RngStream::new(32);
    for _ in 0..1_000_000 {
        let g = lgp_grad(&lgp, &x_mean, reward, 1, &index, &mut draw_rng).unwrap();
        acc.push(&g.grad);
    }
    acc.assert_matches(&oracle, 3.0, 0.02, "lgp vs quadrature");
}

#[test]
fn lrp_gaussian_gradient_equals_lgp_given_same_stream() {
    let inst = tiny_instance(6, 3, &[0, 5], 33);
    let sigma = 0.4;
    let lgp = LgpPolicy::new(&inst.beta, &inst.params, 2, sigma).unwrap();
    let noise = GaussianNoise { sigma };
    let index = ExactIndex::new(&inst.beta);
    let reward = |s: &Slate| slate_reward(s, &inst.hidden);
    for seed in 40..50 {
        let mut r1 = RngStream::new(seed);
        let mut r2 = RngStream::new(seed);
        let a = lgp_grad(&lgp, &inst.x_mean, reward, 8, &index, &mut r1).unwrap();
        let b = lrp_grad(
            &inst.beta,
            &inst.params,
            2,
            &inst.x_mean,
            reward,
            &noise,
            8,
            &index,
            &mut r2,
        )
        .unwrap();
        for (x, y) in a.grad.iter().zip(&b.grad) {
            assert!(
                (x - y).abs() <= 1e-12 * x.abs().max(1.0),
                "lgp {x} vs lrp {y}"
            );
        }
    }
}

#[test]
fn lrp_without_differentiable_density_errors() {
    struct PointMass;
    impl LatentNoise for PointMass {
        fn sample(&self, l: usize, _rng: &mut RngStream) -> Vec<f64> {
            vec![0.0; l]
        }
        fn location_score(&self, _eps: &[f64]) -> slate_core::Result<Vec<f64>> {
            Err(slate_core::Error::Unsupported("no density"))
        }
    }
    let inst = tiny_instance(4, 2, &[0], 34);
    let index = ExactIndex::new(&inst.beta);
    let mut rng = RngStream::new(35);
    // Nonzero reward forces the estimator to query the log density.
    let err = lrp_grad(
        &inst.beta,
        &inst.params,
        2,
        &inst.x_mean,
        |_| 1.0,
        &PointMass,
        4,
        &index,
        &mut rng,
    );
    assert!(err.is_err());
}

#[test]
fn lgp_scaling_halves_with_doubled_sigma_on_frozen_slates() {
    // Score gaps are enormous compared to both noise scales, so the
    // sampled slates coincide; only the 1/sigma prefactor differs.
    let l = 2;
    let mut data = vec![0.0; l * 5];
    for a in 0..5 {
        data[a * l] = 100.0 * (a as f64 + 1.0);
    }
    let beta = EmbeddingMatrix::from_column_major(l, 5, data).unwrap();
    let params = PolicyParams::scaled_identity(
        slate_core::types::ParamShape::Linear { dim: l },
        1.0,
    );
    let x_mean = LatentVector::new(vec![1.0, 0.0]).unwrap();
    let hidden: slate_core::ItemSet = [4u32, 3].into_iter().collect();
    let reward = |s: &Slate| slate_reward(s, &hidden);
    let index = ExactIndex::new(&beta);

    let lgp_small = LgpPolicy::new(&beta, &params, 2, 0.01).unwrap();
    let lgp_big = LgpPolicy::new(&beta, &params, 2, 0.02).unwrap();
    let g_small = lgp_grad(&lgp_small, &x_mean, reward, 32, &index, &mut RngStream::new(36))
        .unwrap();
    let g_big = lgp_grad(&lgp_big, &x_mean, reward, 32, &index, &mut RngStream::new(36)).unwrap();
    for (a, b) in g_small.grad.iter().zip(&g_big.grad) {
        assert!((a - 2.0 * b).abs() < 1e-9 * a.abs().max(1.0), "{a} vs 2*{b}");
    }
}

#[test]
fn variance_of_deterministic_estimator_is_zero() {
    let inst = tiny_instance(5, 2, &[0, 1], 37);
    let pl = PlackettLuce::new(&inst.beta, &inst.params, 2).unwrap();
    let reward = |s: &Slate| slate_reward(s, &inst.hidden);
    let mut rng = RngStream::new(38);
    let v = estimate_variance(
        |_| exact_pl_grad(&pl, &inst.x_mean, reward).unwrap().grad,
        200,
        &mut rng,
    )
    .unwrap();
    // Identical draws: anything beyond accumulated rounding is a bug.
    assert!(v < 1e-30, "variance of a deterministic estimator: {v}");
}

#[test]
fn pl_pg_variance_grows_with_k_lgp_does_not() {
    let mut rng = RngStream::new(39);
    let l = 8;
    let p = 40;
    let beta = EmbeddingMatrix::gaussian(l, p, 1.0, &mut rng).unwrap();
    let theta: Vec<f64> = (0..l * l).map(|_| 0.3 * rng.standard_normal()).collect();
    let params = PolicyParams::linear(l, theta).unwrap();
    let x_mean = LatentVector::new((0..l).map(|_| rng.standard_normal()).collect()).unwrap();
    let hidden: slate_core::ItemSet = (0..p as u32).filter(|a| a % 3 == 0).collect();
    let reward = |s: &Slate| slate_reward(s, &hidden);
    let sigma = slate_core::policy::sigma_inv_mean_norm(&beta);
    let index = ExactIndex::new(&beta);

    let trials = 4000;
    let mut var = |k: usize, lgp: bool| {
        let mut seed_rng = RngStream::new(40 + k as u64 + lgp as u64 * 100);
        if lgp {
            let pol = LgpPolicy::new(&beta, &params, k, sigma).unwrap();
            estimate_variance(
                |r| lgp_grad(&pol, &x_mean, reward, 1, &index, r).unwrap().grad,
                trials,
                &mut seed_rng,
            )
            .unwrap()
        } else {
            let pol = PlackettLuce::new(&beta, &params, k).unwrap();
            estimate_variance(
                |r| pl_pg_grad(&pol, &x_mean, reward, 1, r).unwrap().grad,
                trials,
                &mut seed_rng,
            )
            .unwrap()
        }
    };
    let pl_ratio = var(10, false) / var(2, false);
    let lgp_ratio = var(10, true) / var(2, true);
    assert!(pl_ratio >= 3.0, "PL-PG variance ratio K=10/K=2: {pl_ratio:.2}");
    assert!(
        (1.0 / 1.5..=1.5).contains(&lgp_ratio),
        "LGP variance ratio K=10/K=2: {lgp_ratio:.2}"
    );
}

#[test]
fn lgp_variance_scales_inverse_sigma_squared() {
    let mut inst = tiny_instance(30, 4, &[], 41);
    // The reward must vary under small perturbations, so hide some of the
    // actions the deterministic decision actually ranks near the top.
    let top = slate_core::decide(
        &inst.beta,
        &inst.params.context_embedding(&inst.x_mean).unwrap(),
        6,
    )
    .unwrap();
    inst.hidden = [top[0], top[2], top[4]].into_iter().collect();
    let index = ExactIndex::new(&inst.beta);
    let reward = |s: &Slate| slate_reward(s, &inst.hidden);
    let sigmas = [0.05, 0.1, 0.2, 0.4];
    let mut log_sigma = Vec::new();
    let mut log_var = Vec::new();
    for (i, &sigma) in sigmas.iter().enumerate() {
        let pol = LgpPolicy::new(&inst.beta, &inst.params, 3, sigma).unwrap();
        let mut rng = RngStream::new(42 + i as u64);
        let v = estimate_variance(
            |r| lgp_grad(&pol, &inst.x_mean, reward, 1, &index, r).unwrap().grad,
            20_000,
            &mut rng,
        )
        .unwrap();
        log_sigma.push(sigma.ln());
        log_var.push(v.ln());
    }
    let slope = slate_testkit::stats::ols_slope(&log_sigma, &log_var);
    assert!(
        (slope + 2.0).abs() <= 0.3,
        "log-log slope {slope:.3}, expected -2 +/- 0.3"
    );
}

#[test]
fn fixing_embeddings_reduces_gradient_variance() {
    // The joint (theta, beta) gradient variance decomposes into the sum
    // of the block variances, so the theta-only variance must be smaller.
    let inst = tiny_instance(12, 3, &[0, 4, 8], 43);
    let pl = PlackettLuce::new(&inst.beta, &inst.params, 2).unwrap();
    let reward = |s: &Slate| slate_reward(s, &inst.hidden);
    let trials = 4000;
    let var_of = |block: ParamBlock, seed: u64| {
        let mut rng = RngStream::new(seed);
        estimate_variance(
            |r| {
                pl_pg_grad_block(&pl, &inst.x_mean, reward, 1, r, block)
                    .unwrap()
                    .grad
            },
            trials,
            &mut rng,
        )
        .unwrap()
    };
    let v_theta = var_of(ParamBlock::Theta, 44);
    let v_joint = var_of(ParamBlock::ThetaBeta, 44);
    let v_beta = var_of(ParamBlock::Beta, 44);
    assert!(
        v_theta < v_joint,
        "theta {v_theta:.4} should be below joint {v_joint:.4}"
    );
    // Same trial streams: the joint variance is exactly the block sum.
    assert!(
        (v_joint - (v_theta + v_beta)).abs() < 1e-9 * v_joint,
        "decomposition: {v_joint} vs {v_theta} + {v_beta}"
    );
}

#[test]
fn beta_block_gradient_matches_finite_differences() {
    // Validates the embedding-block gradient against finite differences
    // of the exhaustive objective in a few embedding coordinates.
    let inst = tiny_instance(4, 2, &[1, 3], 45);
    let k = 2;
    let pl = PlackettLuce::new(&inst.beta, &inst.params, k).unwrap();
    let reward = |s: &Slate| slate_reward(s, &inst.hidden);
    let exact =
        exact_pl_grad_block(&pl, &inst.x_mean, reward, ParamBlock::Beta).unwrap();

    let l = inst.beta.dim();
    let eps = 1e-6;
    for coord in [0usize, 3, 5, 7] {
        let perturb = |delta: f64| {
            let mut data = inst.beta.data().to_vec();
            data[coord] += delta;
            let beta = EmbeddingMatrix::from_column_major(l, 4, data).unwrap();
            let pl = PlackettLuce::new(&beta, &inst.params, k).unwrap();
            exact_pl_value(&pl, &inst.x_mean, reward).unwrap()
        };
        let fd = (perturb(eps) - perturb(-eps)) / (2.0 * eps);
        assert!(
            (fd - exact.grad[coord]).abs() < 1e-6,
            "beta coord {coord}: fd {fd} vs {}",
            exact.grad[coord]
        );
    }
}

#[test]
fn exact_gradient_refuses_oversized_instances() {
    let mut rng = RngStream::new(46);
    let beta = EmbeddingMatrix::gaussian(2, 200, 1.0, &mut rng).unwrap();
    let params = PolicyParams::scaled_identity(
        slate_core::types::ParamShape::Linear { dim: 2 },
        0.1,
    );
    let x = LatentVector::new(vec![1.0, 0.5]).unwrap();
    let pl = PlackettLuce::new(&beta, &params, 4).unwrap();
    assert!(matches!(
        exact_pl_grad(&pl, &x, |_| 1.0),
        Err(slate_core::Error::InstanceTooLarge { .. })
    ));
}

#[test]
fn lgp_mean_matches_32_node_quadrature() {
    // Same instance as the finite-difference slice-oracle test, but the
    // reference gradient integrates the score-function form directly:
    // grad_h = E[r(A{h + eps}) * eps] / sigma^2, with the first noise
    // axis integrated exactly and 32 Gauss-Hermite nodes on the other.
    // (A plain 32x32 tensor rule on this discontinuous integrand carries
    // about 4% of its own quadrature error, which would swamp the 2%
    // tolerance; integrating the inner axis exactly removes that.)
    let mut rng = RngStream::new(31);
    let l = 2;
    let p = 4;
    let beta = EmbeddingMatrix::gaussian(l, p, 1.0, &mut rng).unwrap();
    let theta: Vec<f64> = (0..4).map(|_| 0.5 * rng.standard_normal()).collect();
    let params = PolicyParams::linear(l, theta).unwrap();
    let x_mean = LatentVector::new(vec![0.9, -0.6]).unwrap();
    let hidden: slate_core::ItemSet = [0u32, 2].into_iter().collect();
    let sigma = 0.5;
    let k = 2;

    let h = params.context_embedding(&x_mean).unwrap();
    // d/dh_j of the smoothed value, via E[r * eps_j]/sigma^2. For j=0 the
    // inner (exact) axis is the first coordinate, so swap axes per j and
    // put the Gauss-Hermite nodes on the axis whose eps multiplies the
    // integrand.
    let c0: Vec<f64> = (0..p)
        .map(|a| beta.score(h.as_slice(), ActionId(a as u32)))
        .collect();
    let g_axis: Vec<Vec<f64>> = (0..l)
        .map(|axis| {
            (0..p)
                .map(|a| beta.embedding(ActionId(a as u32))[axis])
                .collect()
        })
        .collect();
    let mut oracle32 = vec![0.0; params.param_len()];
    for j in 0..l {
        // Outer axis carries eps_j (32 GH nodes); inner axis is exact.
        let inner = 1 - j;
        let (nodes, weights) = slate_testkit::gauss_hermite(32);
        let norm = std::f64::consts::PI.sqrt();
        let scale = std::f64::consts::SQRT_2 * sigma;
        let mut d = 0.0;
        for (&x, &w) in nodes.iter().zip(&weights) {
            let eps_j = scale * x;
            let shifted: Vec<f64> = c0
                .iter()
                .zip(&g_axis[j])
                .map(|(c, g)| c + eps_j * g)
                .collect();
            let inner_val = slate_testkit::smoothed_value_1d(
                &shifted,
                &g_axis[inner],
                k,
                sigma,
                |slate| {
                    let mut w = 1.0;
                    let mut total = 0.0;
                    for &a in slate {
                        if hidden.contains(ActionId(a as u32)) {
                            total += w;
                        }
                        w *= 0.5;
                    }
                    total
                },
            );
            d += w * inner_val * eps_j;
        }
        d /= norm * sigma * sigma;
        for i in 0..l {
            oracle32[i * l + j] = x_mean.as_slice()[i] * d;
        }
    }

    let lgp = LgpPolicy::new(&beta, &params, k, sigma).unwrap();
    let index = ExactIndex::new(&beta);
    let reward = |s: &Slate| slate_reward(s, &hidden);
    let mut acc = MeanAccumulator::new(params.param_len());
    let mut draw_rng = RngStream::new(32);
    for _ in 0..1_000_000 {
        let g = lgp_grad(&lgp, &x_mean, reward, 1, &index, &mut draw_rng).unwrap();
        acc.push(&g.grad);
    }
    let mean = acc.mean();
    let err: f64 = mean
        .iter()
        .zip(&oracle32)
        .map(|(m, o)| (m - o) * (m - o))
        .sum::<f64>()
        .sqrt();
    let rel = err / oracle32.iter().map(|o| o * o).sum::<f64>().sqrt();
    assert!(rel < 0.02, "relative error {rel:.4} against the 32-node rule");
}
