//! Gauss-Hermite quadrature for expectations under Gaussian measures.
//!
//! Nodes and weights are computed with Newton iteration on the orthonormal
//! Hermite recurrence, so arbitrary orders are available without tables.

/// Nodes and weights of the n-point Gauss-Hermite rule for the weight
/// function exp(-x^2). The weights sum to sqrt(pi).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_hermite: n >= 1 required");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    let pim4 = core::f64::consts::PI.powf(-0.25);

    let mut z = 0.0f64;
    for i in 0..m {
        // Initial guesses from the classic asymptotic expansions.
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal recurrence h_{j+1} = x sqrt(2/(j+1)) h_j - sqrt(j/(j+1)) h_{j-1}.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2
                    - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    // Largest node first ended up in slot 0; return ascending for sanity.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// E[f(e)] for e ~ N(0, sigma^2), by n-point Gauss-Hermite.
pub fn gaussian_expectation_1d(sigma: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_hermite(n);
    let norm = core::f64::consts::PI.sqrt();
    let scale = core::f64::consts::SQRT_2 * sigma;
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(&weights) {
        acc += w * f(scale * x);
    }
    acc / norm
}

/// E[f(e1, e2)] for (e1, e2) ~ N(0, sigma^2 I_2), by a tensor-product
/// n-point Gauss-Hermite rule (n^2 evaluations).
pub fn gaussian_expectation_2d(sigma: f64, n: usize, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_hermite(n);
    let norm = core::f64::consts::PI;
    let scale = core::f64::consts::SQRT_2 * sigma;
    let mut acc = 0.0;
    for (&x1, &w1) in nodes.iter().zip(&weights) {
        for (&x2, &w2) in nodes.iter().zip(&weights) {
            acc += w1 * w2 * f(scale * x1, scale * x2);
        }
    }
    acc / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [1, 2, 5, 16, 32, 64, 101] {
            let (_, w) = gauss_hermite(n);
            let sum: f64 = w.iter().sum();
            assert!(
                (sum - core::f64::consts::PI.sqrt()).abs() < 1e-10,
                "n={n}: weight sum {sum}"
            );
        }
    }

    #[test]
    fn nodes_symmetric_and_sorted() {
        let (x, _) = gauss_hermite(32);
        for i in 0..16 {
            assert!((x[i] + x[31 - i]).abs() < 1e-12);
        }
        for i in 1..32 {
            assert!(x[i] > x[i - 1]);
        }
    }

    #[test]
    fn gaussian_moments_exact() {
        // E[x^2] = sigma^2, E[x^4] = 3 sigma^4 for N(0, sigma^2).
        let sigma = 0.7;
        let m2 = gaussian_expectation_1d(sigma, 16, |x| x * x);
        let m4 = gaussian_expectation_1d(sigma, 16, |x| x.powi(4));
        assert!((m2 - sigma * sigma).abs() < 1e-12);
        assert!((m4 - 3.0 * sigma.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_2d_product_moment() {
        let sigma = 1.3;
        let m = gaussian_expectation_2d(sigma, 16, |x, y| x * x * y * y);
        assert!((m - sigma.powi(4)).abs() < 1e-10);
    }

    #[test]
    fn smooth_nonpolynomial_expectation() {
        // E[exp(t x)] = exp(t^2 sigma^2 / 2) for N(0, sigma^2).
        let (sigma, t) = (0.9, 1.1);
        let got = gaussian_expectation_1d(sigma, 48, |x| (t * x).exp());
        let want = (t * t * sigma * sigma / 2.0f64).exp();
        assert!((got - want).abs() / want < 1e-12);
    }
}
