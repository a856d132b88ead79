//! Chi-square goodness-of-fit machinery built on the regularized
//! incomplete gamma function.

/// ln Γ(x) for x > 0, Lanczos approximation (g = 7, n = 9 coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = core::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * core::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_p: a > 0 and x >= 0 required");
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_contfrac(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_q: a > 0 and x >= 0 required");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_contfrac(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = a;
    for _ in 0..500 {
        n += 1.0;
        term *= x / n;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_contfrac(a: f64, x: f64) -> f64 {
    // Modified Lentz's method.
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Upper-tail p-value of a chi-square statistic with `df` degrees of freedom.
pub fn chi_square_pvalue(stat: f64, df: usize) -> f64 {
    assert!(df >= 1, "chi_square_pvalue: df >= 1 required");
    if stat <= 0.0 {
        return 1.0;
    }
    gamma_q(df as f64 / 2.0, stat / 2.0)
}

/// Goodness-of-fit test of observed counts against expected probabilities.
///
/// Returns `(statistic, p_value)`. Panics if any expected count is below 5,
/// which would invalidate the chi-square approximation; callers should size
/// their sample or merge cells before testing.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64]) -> (f64, f64) {
    assert_eq!(observed.len(), expected_probs.len());
    assert!(observed.len() >= 2, "need at least 2 cells");
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * n as f64;
        assert!(
            e >= 5.0,
            "expected count {e:.2} < 5 invalidates the chi-square approximation"
        );
        let d = o as f64 - e;
        stat += d * d / e;
    }
    let df = observed.len() - 1;
    (stat, chi_square_pvalue(stat, df))
}

/// Two-sample chi-square homogeneity test over shared cells.
///
/// Returns `(statistic, p_value)` for the null hypothesis that both count
/// vectors were drawn from the same categorical distribution. Cells whose
/// pooled expected count would fall below 5 in either sample are merged
/// into a common overflow cell.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    assert!(na > 0 && nb > 0);
    let total = (na + nb) as f64;
    let min_n = na.min(nb) as f64;

    // Merge sparse cells so every retained cell has expected count >= 5
    // in the smaller sample.
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut overflow = (0.0f64, 0.0f64);
    let mut overflow_used = false;
    for (&oa, &ob) in a.iter().zip(b) {
        let pooled = (oa + ob) as f64 / total;
        if pooled * min_n >= 5.0 {
            cells.push((oa as f64, ob as f64));
        } else {
            overflow.0 += oa as f64;
            overflow.1 += ob as f64;
            overflow_used = true;
        }
    }
    if overflow_used {
        cells.push(overflow);
    }
    assert!(cells.len() >= 2, "fewer than 2 usable cells after merging");

    let mut stat = 0.0;
    for &(oa, ob) in &cells {
        let pooled = (oa + ob) / total;
        for (o, n) in [(oa, na as f64), (ob, nb as f64)] {
            let e = pooled * n;
            if e > 0.0 {
                let d = o - e;
                stat += d * d / e;
            }
        }
    }
    let df = cells.len() - 1;
    (stat, chi_square_pvalue(stat, df))
}
