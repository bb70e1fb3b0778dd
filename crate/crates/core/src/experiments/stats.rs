//! Small statistics toolkit for the reports.

use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Deviations from the first sample, so a constant sample gives exact zeros.
fn shifted(xs: &[f64]) -> Vec<f64> {
    let x0 = xs[0];
    xs.iter().map(|x| x - x0).collect()
}

/// Unbiased sample variance; NaN below two samples.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let d = shifted(xs);
    let m = mean(&d);
    d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (d.len() - 1) as f64
}

/// Standard error of the sample variance, from the fourth central moment.
pub fn variance_standard_error(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 4 {
        return f64::NAN;
    }
    let d = shifted(xs);
    let m = mean(&d);
    let m2 = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = d.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    ((m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendTest {
    pub rho: f64,
    /// `P(rho_perm >= rho)` over all permutations of `y`.
    pub p_upward: f64,
}

/// One-sided Spearman test for an increasing trend, exact over all permutations.
///
/// Intended for a handful of points; refuses more than 10.
pub fn spearman_upward_trend(x: &[f64], y: &[f64]) -> Option<TrendTest> {
    let m = x.len();
    if m < 3 || m != y.len() || m > 10 {
        return None;
    }
    let rho = spearman(x, y);
    let rx = ranks(x);
    let ry = ranks(y);
    let mut perm: Vec<usize> = (0..m).collect();
    let (mut hits, mut total) = (0u64, 0u64);
    let tol = 1e-12;
    loop {
        let permuted: Vec<f64> = perm.iter().map(|&k| ry[k]).collect();
        if pearson(&rx, &permuted) >= rho - tol {
            hits += 1;
        }
        total += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Some(TrendTest {
        rho,
        p_upward: hits as f64 / total as f64,
    })
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic 5% critical value of the two-sample KS statistic.
pub fn ks_critical_5pct(na: usize, nb: usize) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    1.358 * ((na + nb) / (na * nb)).sqrt()
}

/// `P(Poisson(n) = n) = e^{-n} n^n / n!`, via a log-factorial sum.
pub fn poisson_pmf_at_mean(n: u64) -> f64 {
    let nf = n as f64;
    let log_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    (-nf + nf * nf.ln() - log_fact).exp()
}
