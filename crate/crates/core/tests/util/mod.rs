//! Shared helpers for the statistical integration tests.

use slate_core::{EmbeddingMatrix, ItemSet, LatentVector, PolicyParams, RngStream};

/// Streaming per-coordinate mean and standard error.
pub struct MeanAccumulator {
    pub n: u64,
    sum: Vec<f64>,
    sumsq: Vec<f64>,
}

impl MeanAccumulator {
    pub fn new(dim: usize) -> Self {
        MeanAccumulator {
            n: 0,
            sum: vec![0.0; dim],
            sumsq: vec![0.0; dim],
        }
    }

    pub fn push(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.sum.len());
        self.n += 1;
        for (i, &x) in v.iter().enumerate() {
            self.sum[i] += x;
            self.sumsq[i] += x * x;
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        self.sum.iter().map(|s| s / self.n as f64).collect()
    }

    /// Standard error of the mean, per coordinate.
    pub fn se(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.sum
            .iter()
            .zip(&self.sumsq)
            .map(|(&s, &ss)| {
                let mean = s / n;
                let var = (ss / n - mean * mean).max(0.0) * n / (n - 1.0);
                (var / n).sqrt()
            })
            .collect()
    }

    /// Checks the vector mean against a reference: the error norm must be
    /// within `se_factor` combined standard errors, and within
    /// `rel_tol` of the reference norm when it is nonzero.
    pub fn assert_matches(&self, reference: &[f64], se_factor: f64, rel_tol: f64, label: &str) {
        let mean = self.mean();
        let se = self.se();
        let err: f64 = mean
            .iter()
            .zip(reference)
            .map(|(m, r)| (m - r) * (m - r))
            .sum::<f64>()
            .sqrt();
        let combined_se: f64 = se.iter().map(|s| s * s).sum::<f64>().sqrt();
        let ref_norm: f64 = reference.iter().map(|r| r * r).sum::<f64>().sqrt();
        assert!(
            err <= se_factor * combined_se,
            "{label}: error {err:.3e} exceeds {se_factor} x combined SE {combined_se:.3e}"
        );
        if ref_norm > 0.0 {
            assert!(
                err / ref_norm <= rel_tol,
                "{label}: relative error {:.4} exceeds {rel_tol}",
                err / ref_norm
            );
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A small random test instance.
pub struct TinyInstance {
    pub beta: EmbeddingMatrix,
    pub params: PolicyParams,
    pub x_mean: LatentVector,
    pub hidden: ItemSet,
}

pub fn tiny_instance(p: usize, l: usize, hidden_ids: &[u32], seed: u64) -> TinyInstance {
    let mut rng = RngStream::new(seed);
    let beta = EmbeddingMatrix::gaussian(l, p, 1.0, &mut rng).unwrap();
    let theta: Vec<f64> = (0..l * l).map(|_| 0.4 * rng.standard_normal()).collect();
    let params = PolicyParams::linear(l, theta).unwrap();
    let x_mean =
        LatentVector::new((0..l).map(|_| rng.standard_normal()).collect()).unwrap();
    let hidden: ItemSet = hidden_ids.iter().copied().collect();
    TinyInstance {
        beta,
        params,
        x_mean,
        hidden,
    }
}
