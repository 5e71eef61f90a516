//! Small statistics toolkit used by the validation harnesses.

use alloc::vec::Vec;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_error(xs: &[f64]) -> f64 {
    libm::sqrt(variance(xs) / xs.len() as f64)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic p-value of a KS statistic `d` with effective sample size `n_eff`.
pub fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let s = libm::sqrt(n_eff);
    let lambda = (s + 0.12 + 0.11 / s) * d;
    kolmogorov_q(lambda)
}

/// p-value of the two-sample KS test.
pub fn ks_two_sample_p_value(d: f64, na: usize, nb: usize) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    ks_p_value(d, na * nb / (na + nb))
}

/// Tail of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = sign * libm::exp(-2.0 * kf * kf * lambda * lambda);
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Least squares line `y = slope x + intercept` with coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    LinearFit { slope, intercept: my - slope * mx, r_squared }
}

/// Hill estimator of the tail index from the `k` largest samples.
pub fn hill_estimator(xs: &[f64], k: usize) -> f64 {
    let v = sorted(xs);
    let n = v.len();
    assert!(k >= 1 && k < n, "need 1 <= k < n");
    let threshold = v[n - k - 1];
    let s: f64 = v[n - k..].iter().map(|x| libm::log(x / threshold)).sum();
    k as f64 / s
}

/// Maximum likelihood tail index of a Pareto law truncated to `[lo, hi]`.
///
/// Samples outside the window are ignored. Returns the estimate and the number
/// of samples used, or `None` with fewer than two samples in the window.
pub fn truncated_pareto_mle(xs: &[f64], lo: f64, hi: f64) -> Option<(f64, usize)> {
    let ys: Vec<f64> = xs
        .iter()
        .filter(|&&x| x >= lo && x <= hi)
        .map(|&x| libm::log(x / lo))
        .collect();
    let n = ys.len();
    if n < 2 {
        return None;
    }
    let mean_y = mean(&ys);
    if !hi.is_finite() {
        return Some((1.0 / mean_y, n));
    }
    let log_r = libm::log(hi / lo);
    // Score per sample: 1/a - mean_y - log_r r^-a / (1 - r^-a). Decreasing in a.
    let score = |a: f64| {
        let ra = libm::exp(-a * log_r);
        1.0 / a - mean_y - log_r * ra / (1.0 - ra)
    };
    let (mut a, mut b) = (1e-4, 20.0);
    if score(b) > 0.0 {
        return Some((b, n));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if score(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Some((0.5 * (a + b), n))
}

/// Total variation distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Equal-width histogram of `xs` over `[lo, hi)`; out-of-range samples are dropped.
pub fn histogram(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u64> {
    let mut h = alloc::vec![0u64; bins];
    let w = (hi - lo) / bins as f64;
    for &x in xs {
        if x >= lo && x < hi {
            let b = (((x - lo) / w) as usize).min(bins - 1);
            h[b] += 1;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, rng_from_seed, uniform};
    use alloc::vec;

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ks_detects_and_accepts() {
        let mut rng = rng_from_seed(3);
        let xs: Vec<f64> = (0..5000).map(|_| normal(&mut rng)).collect();
        let d = ks_statistic(&xs, normal_cdf);
        assert!(ks_p_value(d, 5000.0) > 0.01);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.2).collect();
        let d2 = ks_statistic(&shifted, normal_cdf);
        assert!(ks_p_value(d2, 5000.0) < 1e-6);
        let d3 = ks_two_sample(&xs, &shifted);
        assert!(ks_two_sample_p_value(d3, 5000, 5000) < 1e-6);
    }

    #[test]
    fn kolmogorov_known_value() {
        // P(K > 1.36) is about 0.05.
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn fit_recovers_line() {
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let f = linear_fit(&x, &y);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pareto_estimators() {
        let mut rng = rng_from_seed(9);
        let a = 0.75;
        let xs: Vec<f64> = (0..50_000).map(|_| libm::pow(1.0 - uniform(&mut rng), -1.0 / a)).collect();
        let (est, _) = truncated_pareto_mle(&xs, 1.0, f64::INFINITY).unwrap();
        assert!((est - a).abs() < 0.02);
        let (est_t, _) = truncated_pareto_mle(&xs, 2.0, 50.0).unwrap();
        assert!((est_t - a).abs() < 0.03);
        assert!((hill_estimator(&xs, 5000) - a).abs() < 0.05);
    }
}
