//! Small statistical helpers shared by the test suites.

/// Total variation distance between two probability vectors over the same
/// support: 0.5 * sum |p_i - q_i|.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ordinary least squares slope of y against x.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    num / den
}

/// Counts of observations per cell, for frequency tests. `index` maps an
/// observation to its cell; observations mapping to `None` panic, so the
/// caller's support must be exhaustive.
pub fn histogram<T>(obs: &[T], cells: usize, mut index: impl FnMut(&T) -> usize) -> Vec<u64> {
    let mut counts = vec![0u64; cells];
    for o in obs {
        let i = index(o);
        counts[i] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_bounds() {
        assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
    }

    #[test]
    fn slope_of_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        assert!((ols_slope(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mean_se_basics() {
        let (m, se) = mean_and_se(&[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(m, 1.0);
        assert_eq!(se, 0.0);
    }
}
