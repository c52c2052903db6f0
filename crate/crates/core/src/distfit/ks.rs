use std::f64::consts::PI;

use serde::Serialize;

use super::family::FittedDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic_d: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample Kolmogorov–Smirnov test against a fully specified distribution.
pub fn ks_test(fit: &FittedDistribution, samples: &[f64]) -> KsResult {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let d = ks_statistic_sorted(&sorted, |x| fit.cdf(x));
    KsResult {
        statistic_d: d,
        p_value: ks_p_value(d, sorted.len()),
        n: sorted.len(),
    }
}

/// `max_i max(i/n - F(x_i), F(x_i) - (i-1)/n)` over ascending samples.
pub fn ks_statistic_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value with the small-sample correction
/// `lambda = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * d`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let rn = (n as f64).sqrt();
    kolmogorov_q((rn + 0.12 + 0.11 / rn) * d)
}

/// Kolmogorov survival function `Q(lambda) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2)`.
///
/// The alternating series is summed until a term drops below 1e-12, capped at
/// 100 terms. For small lambda the series has not settled by then, and the
/// complementary theta-function form `1 - sqrt(2 pi)/lambda sum exp(-(2j-1)^2 pi^2 / (8 lambda^2))`
/// is used instead.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let a = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100u32 {
        let j = j as f64;
        let term = (a * j * j).exp();
        sum += sign * term;
        if term < 1e-12 {
            return (2.0 * sum).clamp(0.0, 1.0);
        }
        sign = -sign;
    }
    let b = -PI * PI / (8.0 * lambda * lambda);
    let mut cdf = 0.0;
    for j in 1..=100u32 {
        let k = (2 * j - 1) as f64;
        let term = (b * k * k).exp();
        cdf += term;
        if term < 1e-16 {
            break;
        }
    }
    (1.0 - (2.0 * PI).sqrt() / lambda * cdf).clamp(0.0, 1.0)
}
