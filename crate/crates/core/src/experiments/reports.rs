use rand::seq::index::sample as sample_indices;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::Thresholds;
use crate::error::{Error, Result};
use crate::mst::minimum_spanning_forest;
use crate::rgg::{build_rgg, radius_for};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sampling::sample_binomial;
use crate::tiling::{occupancy, plan_tiling};

use super::config::{ExperimentConfig, SamplingModel};
use super::stats::{
    ks_critical_5pct, ks_statistic, mean, ols_slope, poisson_pmf_at_mean, spearman_upward_trend, variance,
    variance_standard_error, wilson_interval, TrendTest,
};
use super::sweep::{run_trials, setup_for, thread_pool, TrialRecord};

const MIN_SCALING_SIZES: usize = 3;
const MIN_SCALING_TRIALS: usize = 100;

fn group_by_n(records: &[TrialRecord]) -> Vec<(usize, Vec<&TrialRecord>)> {
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| (n, records.iter().filter(|r| r.n == n).collect()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub radius: f64,
    pub trials: usize,
    pub variance: f64,
    pub variance_se: f64,
    /// `r² (n r²)^α`.
    pub predicted: f64,
    pub ratio: f64,
    pub ratio_se: f64,
    /// Zero or undefined variance; left out of the fit and the trend test.
    pub excluded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Slope of `ln var` against `ln r²(nr²)^α`.
    pub slope: Option<f64>,
    /// Spearman test of the ratio against `n`.
    pub trend: Option<TrendTest>,
    pub upward_trend_significant: bool,
}

pub fn variance_scaling_report(records: &[TrialRecord], cfg: &ExperimentConfig) -> Result<VarianceScalingReport> {
    let alpha = cfg.alpha;
    let groups: Vec<_> = group_by_n(records)
        .into_iter()
        .filter(|(_, rs)| rs.len() >= MIN_SCALING_TRIALS)
        .collect();
    if groups.len() < MIN_SCALING_SIZES {
        return Err(Error::Parameter(format!(
            "variance scaling needs {MIN_SCALING_SIZES} sizes with >= {MIN_SCALING_TRIALS} trials, got {}",
            groups.len()
        )));
    }
    let points: Vec<ScalingPoint> = groups
        .iter()
        .map(|(n, rs)| {
            let xs: Vec<f64> = rs.iter().map(|r| r.scaled_mst).collect();
            let r = rs[0].radius;
            let nf = *n as f64;
            let predicted = r * r * (nf * r * r).powf(alpha);
            let v = variance(&xs);
            let se = variance_standard_error(&xs);
            ScalingPoint {
                n: *n,
                radius: r,
                trials: xs.len(),
                variance: v,
                variance_se: se,
                predicted,
                ratio: v / predicted,
                ratio_se: se / predicted,
                excluded: !(v > 0.0),
            }
        })
        .collect();
    let kept: Vec<&ScalingPoint> = points.iter().filter(|p| !p.excluded).collect();
    let (slope, trend) = if kept.len() >= MIN_SCALING_SIZES {
        let lx: Vec<f64> = kept.iter().map(|p| p.predicted.ln()).collect();
        let ly: Vec<f64> = kept.iter().map(|p| p.variance.ln()).collect();
        let ns: Vec<f64> = kept.iter().map(|p| p.n as f64).collect();
        let ratios: Vec<f64> = kept.iter().map(|p| p.ratio).collect();
        (Some(ols_slope(&lx, &ly)), spearman_upward_trend(&ns, &ratios))
    } else {
        (None, None)
    };
    Ok(VarianceScalingReport {
        upward_trend_significant: trend.as_ref().is_some_and(|t| t.p_upward < 0.05),
        points,
        slope,
        trend,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub n: usize,
    pub trials: usize,
    pub lower_threshold: f64,
    pub lower_vacuous: bool,
    pub lower_freq: f64,
    pub lower_ci: (f64, f64),
    pub upper_threshold: f64,
    pub upper_freq: f64,
    pub upper_ci: (f64, f64),
    pub mean_scaled: f64,
    pub mean_scaled_se: f64,
    pub mean_lower: f64,
    pub mean_lower_vacuous: bool,
    pub mean_upper: f64,
    pub mean_within_bounds: bool,
}

/// Frequencies of the deviation events per `n`, with 95% Wilson intervals.
///
/// `thresholds` are matched to records by `n`; sizes without thresholds are skipped.
pub fn deviation_report(records: &[TrialRecord], thresholds: &[Thresholds]) -> Vec<DeviationRow> {
    group_by_n(records)
        .into_iter()
        .filter_map(|(n, rs)| {
            let th = thresholds.iter().find(|t| t.n == n)?;
            let trials = rs.len();
            let lo_hits = rs
                .iter()
                .filter(|r| th.lower_vacuous || r.mst_total >= th.lower)
                .count();
            let up_hits = rs.iter().filter(|r| r.mst_total <= th.upper).count();
            let xs: Vec<f64> = rs.iter().map(|r| r.scaled_mst).collect();
            let m = mean(&xs);
            Some(DeviationRow {
                n,
                trials,
                lower_threshold: th.lower,
                lower_vacuous: th.lower_vacuous,
                lower_freq: lo_hits as f64 / trials as f64,
                lower_ci: wilson_interval(lo_hits, trials),
                upper_threshold: th.upper,
                upper_freq: up_hits as f64 / trials as f64,
                upper_ci: wilson_interval(up_hits, trials),
                mean_scaled: m,
                mean_scaled_se: (variance(&xs) / trials as f64).sqrt(),
                mean_lower: th.mean_lower,
                mean_lower_vacuous: th.mean_lower_vacuous,
                mean_upper: th.mean_upper,
                mean_within_bounds: m >= th.mean_lower && m <= th.mean_upper,
            })
        })
        .collect()
}

/// Outcome of removing single nodes from `n + 1`-node configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneNodeReport {
    pub n: usize,
    pub radius: f64,
    pub instances: usize,
    pub dense_instances: usize,
    pub pairs_checked: usize,
    pub violations: usize,
    /// Largest `|MST_{n+1} − MST(i)| / (ξ_max d_i r^α)` seen.
    pub max_ratio: f64,
    /// Pairs where the removed node was a leaf of the tree.
    pub leaf_pairs: usize,
    /// `200 ε2 n r²`.
    pub degree_cap: f64,
    pub max_degree_seen: u32,
    pub degree_violations: usize,
}

struct InstanceOutcome {
    dense: bool,
    pairs: usize,
    violations: usize,
    max_ratio: f64,
    leaf_pairs: usize,
    max_degree: u32,
}

/// Removes `removals` random nodes (one at a time) from each of `instances`
/// configurations of `n + 1` nodes and compares forest weights at the same radius.
///
/// Only instances where `e_dense` holds are checked. The comparison allows a
/// relative floating-point slack of `1e-10 · MST_{n+1}`.
pub fn one_node_difference_check(
    cfg: &ExperimentConfig,
    n: usize,
    instances: usize,
    removals: usize,
) -> Result<OneNodeReport> {
    if n < 3 {
        return Err(Error::Parameter(format!("one-node check needs n >= 3, got {n}")));
    }
    let ws = cfg.weight_spec()?;
    let r = radius_for(n + 1, &cfg.radius_rule, cfg.density.eps1)?.radius;
    let plan = plan_tiling(n, r, cfg.a)?;
    let scale = ws.xi_max() * ws.length_power(r);
    let degree_cap = 200.0 * cfg.density.eps2 * n as f64 * r * r;
    let pool = thread_pool(cfg.workers)?;

    let outcomes: Vec<InstanceOutcome> = pool.install(|| {
        (0..instances as u64)
            .into_par_iter()
            .map(|k| {
                let seed = derive_seed(cfg.master_seed, &[2, n as u64, k]);
                let pts = sample_binomial(n + 1, &cfg.density, seed)?;
                let rep = occupancy(&pts, &plan, &cfg.density);
                if !rep.e_dense {
                    return Ok(InstanceOutcome {
                        dense: false,
                        pairs: 0,
                        violations: 0,
                        max_ratio: 0.0,
                        leaf_pairs: 0,
                        max_degree: 0,
                    });
                }
                let g = build_rgg(pts.clone(), r, ws.clone())?;
                let full = minimum_spanning_forest(&g);
                let mut rng = rng_from_seed(derive_seed(seed, &[1]));
                let picks = sample_indices(&mut rng, n + 1, removals.min(n + 1));
                let mut out = InstanceOutcome {
                    dense: true,
                    pairs: 0,
                    violations: 0,
                    max_ratio: 0.0,
                    leaf_pairs: 0,
                    max_degree: full.degrees.iter().copied().max().unwrap_or(0),
                };
                for i in picks {
                    let gi = build_rgg(pts.without(i), r, ws.clone())?;
                    let mi = minimum_spanning_forest(&gi);
                    let diff = (full.total_weight - mi.total_weight).abs();
                    let d_i = full.degrees[i];
                    let bound = scale * d_i as f64;
                    out.pairs += 1;
                    if d_i == 1 {
                        out.leaf_pairs += 1;
                    }
                    if diff > bound + 1e-10 * full.total_weight {
                        out.violations += 1;
                    }
                    if bound > 0.0 {
                        out.max_ratio = out.max_ratio.max(diff / bound);
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let dense: Vec<&InstanceOutcome> = outcomes.iter().filter(|o| o.dense).collect();
    let max_degree_seen = dense.iter().map(|o| o.max_degree).max().unwrap_or(0);
    Ok(OneNodeReport {
        n,
        radius: r,
        instances,
        dense_instances: dense.len(),
        pairs_checked: dense.iter().map(|o| o.pairs).sum(),
        violations: dense.iter().map(|o| o.violations).sum(),
        max_ratio: dense.iter().map(|o| o.max_ratio).fold(0.0, f64::max),
        leaf_pairs: dense.iter().map(|o| o.leaf_pairs).sum(),
        degree_cap,
        max_degree_seen,
        degree_violations: dense.iter().filter(|o| o.max_degree as f64 > degree_cap).count(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMoments {
    pub trials: usize,
    pub mean: f64,
    pub variance: f64,
}

impl SampleMoments {
    fn of(xs: &[f64]) -> Self {
        Self {
            trials: xs.len(),
            mean: mean(xs),
            variance: variance(xs),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountAtMean {
    pub draws: usize,
    pub hits: usize,
    pub frequency: f64,
    /// `1 / sqrt(2πn)`.
    pub stirling: f64,
    /// `e^{-n} n^n / n!`.
    pub exact: f64,
    /// Binomial standard deviation of the frequency around `stirling`.
    pub sigma: f64,
    pub within_3_sigma: bool,
}

impl CountAtMean {
    fn new(n: usize, hits: usize, draws: usize) -> Self {
        let stirling = 1.0 / (2.0 * std::f64::consts::PI * n as f64).sqrt();
        let frequency = hits as f64 / draws as f64;
        let sigma = (stirling * (1.0 - stirling) / draws as f64).sqrt();
        Self {
            draws,
            hits,
            frequency,
            stirling,
            exact: poisson_pmf_at_mean(n as u64),
            sigma,
            within_3_sigma: (frequency - stirling).abs() <= 3.0 * sigma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonComparison {
    pub n: usize,
    pub binomial: SampleMoments,
    pub poisson: SampleMoments,
    pub mean_difference: f64,
    pub pooled_se: f64,
    pub within_3_se: bool,
    pub ks_statistic: f64,
    pub ks_critical_5pct: f64,
    /// `N_P = n` among the Poisson trials.
    pub count_in_trials: CountAtMean,
    /// `N_P = n` among extra count-only draws.
    pub count_in_draws: Option<CountAtMean>,
}

/// Matched binomial and Poisson sweeps at one `n`.
pub fn poissonization_comparison(
    cfg: &ExperimentConfig,
    n: usize,
    trials: usize,
    count_draws: usize,
) -> Result<PoissonComparison> {
    let setup = setup_for(cfg, n)?;
    let pool = thread_pool(cfg.workers)?;
    let bin = run_trials(&pool, cfg, SamplingModel::Binomial, &setup, trials as u64)?;
    let poi = run_trials(&pool, cfg, SamplingModel::Poisson, &setup, trials as u64)?;
    let xb: Vec<f64> = bin.iter().map(|r| r.scaled_mst).collect();
    let xp: Vec<f64> = poi.iter().map(|r| r.scaled_mst).collect();
    let (mb, mp) = (SampleMoments::of(&xb), SampleMoments::of(&xp));
    let pooled_se = (mb.variance / mb.trials as f64 + mp.variance / mp.trials as f64).sqrt();
    let mean_difference = mp.mean - mb.mean;

    let hits = poi.iter().filter(|r| r.node_count == n).count();
    let count_in_draws = if count_draws > 0 {
        let dist = Poisson::new(n as f64).map_err(|e| Error::Parameter(e.to_string()))?;
        let mut rng = rng_from_seed(derive_seed(cfg.master_seed, &[3, n as u64]));
        let h = (0..count_draws)
            .filter(|_| dist.sample(&mut rng) as usize == n)
            .count();
        Some(CountAtMean::new(n, h, count_draws))
    } else {
        None
    };

    Ok(PoissonComparison {
        n,
        within_3_se: mean_difference.abs() <= 3.0 * pooled_se,
        mean_difference,
        pooled_se,
        ks_statistic: ks_statistic(&xb, &xp),
        ks_critical_5pct: ks_critical_5pct(xb.len(), xp.len()),
        binomial: mb,
        poisson: mp,
        count_in_trials: CountAtMean::new(n, hits, poi.len()),
        count_in_draws,
    })
}
