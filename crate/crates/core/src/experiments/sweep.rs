use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bounds_table, optimize_betas, theorem_thresholds, write_bounds_csv, BetaOptima, Thresholds};
use crate::error::{Error, Result};
use crate::mst::{minimum_spanning_forest, mst_degree_stats};
use crate::rgg::{build_rgg, radius_for, RadiusChoice, WeightSpec};
use crate::rng::derive_seed;
use crate::sampling::{sample_binomial, sample_poisson, DensitySpec, PointSet};
use crate::tiling::{build_tuni, gap_sum, lower_bound_count, occupancy, plan_tiling, TilingPlan};

use super::config::{ExperimentConfig, SamplingModel};
use super::reports::{deviation_report, variance_scaling_report, DeviationRow, VarianceScalingReport};
use super::stats::{mean, variance};

/// One row of `trials.csv`.
///
/// Optional columns are empty when the quantity is undefined for the trial
/// (`T_uni` without `e_poi`, the lower-bound check on a disconnected graph).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial_index: u64,
    pub seed: u64,
    pub node_count: usize,
    pub radius: f64,
    pub mst_total: f64,
    /// `mst_total · n^(α/2 − 1)`.
    pub scaled_mst: f64,
    pub components: usize,
    pub connected: bool,
    pub e_dense: bool,
    pub e_poi: bool,
    pub isolated_count: usize,
    pub h_alpha: f64,
    /// `½ ξ_min a^α · isolated_count`.
    pub lower_bound: f64,
    pub lower_bound_ok: Option<bool>,
    pub y_alpha: f64,
    pub tuni_weight: Option<f64>,
    pub up_bd1_rhs: Option<f64>,
    pub up_bd1_ok: Option<bool>,
    pub bridges_over_2ta: Option<usize>,
    /// Lower bound `≤ MST_n ≤ W(T_uni)`; set only when `e_poi` holds.
    pub sandwich_ok: Option<bool>,
    /// `MST_n` at or above the lower deviation threshold (always true when vacuous).
    pub lower_threshold_hit: bool,
    pub upper_threshold_hit: bool,
    pub max_degree: u32,
    #[serde(skip)]
    pub wall_time: f64,
}

/// Quantities fixed for a given `n`.
#[derive(Clone, Debug)]
pub struct NSetup {
    pub n: usize,
    pub radius: RadiusChoice,
    pub plan: TilingPlan,
    pub thresholds: Thresholds,
}

pub(crate) struct Context {
    pub density: DensitySpec,
    pub weights: WeightSpec,
}

pub fn setup_for(cfg: &ExperimentConfig, n: usize) -> Result<NSetup> {
    let radius = radius_for(n, &cfg.radius_rule, cfg.density.eps1)?;
    let plan = plan_tiling(n, radius.radius, cfg.a)?;
    let thresholds = theorem_thresholds(n, plan.a_eff, &cfg.bound_params()?)?;
    Ok(NSetup {
        n,
        radius,
        plan,
        thresholds,
    })
}

/// Seed of trial `trial` at size `n` under `model`.
pub fn trial_seed(master: u64, n: usize, trial: u64, model: SamplingModel) -> u64 {
    let stream = match model {
        SamplingModel::Binomial => 0,
        SamplingModel::Poisson => 1,
    };
    derive_seed(master, &[stream, n as u64, trial])
}

pub(crate) fn sample(model: SamplingModel, n: usize, density: &DensitySpec, seed: u64) -> Result<PointSet> {
    match model {
        SamplingModel::Binomial => sample_binomial(n, density, seed),
        SamplingModel::Poisson => sample_poisson(n as f64, density, seed),
    }
}

/// Runs every per-trial computation on one configuration.
pub(crate) fn evaluate(points: PointSet, setup: &NSetup, ctx: &Context, trial_index: u64) -> Result<TrialRecord> {
    let start = Instant::now();
    let seed = points.seed;
    let node_count = points.len();
    let alpha = ctx.weights.alpha;
    let g = build_rgg(points, setup.radius.radius, ctx.weights.clone())?;
    let m = minimum_spanning_forest(&g);
    let report = occupancy(&g.points, &setup.plan, &ctx.density);
    let lower = lower_bound_count(&g, &m, &setup.plan, &report, &ctx.weights);
    let tuni = build_tuni(&g, &setup.plan, &report)?;
    let connected = m.components <= 1;

    let sandwich_ok = tuni.as_ref().map(|t| {
        let lower_ok = connected && lower.holds;
        lower_ok && m.total_weight <= t.weight
    });
    let th = &setup.thresholds;
    Ok(TrialRecord {
        n: setup.n,
        trial_index,
        seed,
        node_count,
        radius: setup.radius.radius,
        mst_total: m.total_weight,
        scaled_mst: m.total_weight * (setup.n as f64).powf(alpha / 2.0 - 1.0),
        components: m.components,
        connected,
        e_dense: report.e_dense,
        e_poi: report.e_poi,
        isolated_count: report.isolated_count,
        h_alpha: lower.h_alpha,
        lower_bound: lower.bound,
        lower_bound_ok: lower.applicable.then_some(lower.holds),
        y_alpha: gap_sum(&report, alpha),
        tuni_weight: tuni.as_ref().map(|t| t.weight),
        up_bd1_rhs: tuni.as_ref().map(|t| t.upper_rhs),
        up_bd1_ok: tuni.as_ref().map(|t| t.within_upper_rhs()),
        bridges_over_2ta: tuni.as_ref().map(|t| t.bridges_over_2ta),
        sandwich_ok,
        lower_threshold_hit: th.lower_vacuous || m.total_weight >= th.lower,
        upper_threshold_hit: m.total_weight <= th.upper,
        max_degree: mst_degree_stats(&m).max_degree,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Runs `trials` trials at one `n` on `pool`, sorted by trial index.
pub(crate) fn run_trials(
    pool: &rayon::ThreadPool,
    cfg: &ExperimentConfig,
    model: SamplingModel,
    setup: &NSetup,
    trials: u64,
) -> Result<Vec<TrialRecord>> {
    let ctx = Context {
        density: cfg.density.clone(),
        weights: cfg.weight_spec()?,
    };
    let mut records: Vec<TrialRecord> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(cfg.master_seed, setup.n, t, model);
                let pts = sample(model, setup.n, &cfg.density, seed)?;
                evaluate(pts, setup, &ctx, t)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    records.sort_by_key(|r| r.trial_index);
    Ok(records)
}

/// Aggregates for one `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NSummary {
    pub n: usize,
    pub radius: f64,
    pub radius_warnings: Vec<String>,
    pub above_theorem_scale: bool,
    pub w: usize,
    pub l: usize,
    pub t: f64,
    pub a: f64,
    pub a_eff: f64,
    pub a_feasible: bool,
    pub delta_in_window: bool,
    pub thresholds: Thresholds,
    pub trials: usize,
    pub mean_nodes: f64,
    pub mean_scaled_mst: f64,
    pub var_scaled_mst: f64,
    pub connected_freq: f64,
    pub e_dense_freq: f64,
    pub e_poi_freq: f64,
    /// Trials with `e_dense` but a disconnected graph.
    pub dense_but_disconnected: usize,
    pub sandwich_checked: usize,
    pub sandwich_violations: usize,
    pub lower_bound_violations: usize,
    pub up_bd1_violations: usize,
    pub bridges_over_2ta: usize,
    pub max_degree: u32,
}

pub fn summarize_n(setup: &NSetup, records: &[TrialRecord]) -> NSummary {
    let scaled: Vec<f64> = records.iter().map(|r| r.scaled_mst).collect();
    let freq = |f: &dyn Fn(&TrialRecord) -> bool| {
        records.iter().filter(|r| f(r)).count() as f64 / records.len().max(1) as f64
    };
    let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count();
    NSummary {
        n: setup.n,
        radius: setup.radius.radius,
        radius_warnings: setup.radius.warnings.clone(),
        above_theorem_scale: setup.radius.above_theorem_scale,
        w: setup.plan.w,
        l: setup.plan.l,
        t: setup.plan.t,
        a: setup.plan.a,
        a_eff: setup.plan.a_eff,
        a_feasible: setup.plan.a_feasible,
        delta_in_window: setup.plan.delta_in_window,
        thresholds: setup.thresholds,
        trials: records.len(),
        mean_nodes: mean(&records.iter().map(|r| r.node_count as f64).collect::<Vec<_>>()),
        mean_scaled_mst: mean(&scaled),
        var_scaled_mst: variance(&scaled),
        connected_freq: freq(&|r| r.connected),
        e_dense_freq: freq(&|r| r.e_dense),
        e_poi_freq: freq(&|r| r.e_poi),
        dense_but_disconnected: count(&|r| r.e_dense && !r.connected),
        sandwich_checked: count(&|r| r.sandwich_ok.is_some()),
        sandwich_violations: count(&|r| r.sandwich_ok == Some(false)),
        lower_bound_violations: count(&|r| r.lower_bound_ok == Some(false)),
        up_bd1_violations: count(&|r| r.up_bd1_ok == Some(false)),
        bridges_over_2ta: records.iter().filter_map(|r| r.bridges_over_2ta).sum(),
        max_degree: records.iter().map(|r| r.max_degree).max().unwrap_or(0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config: ExperimentConfig,
    pub per_n: Vec<NSummary>,
    pub betas: BetaOptima,
    pub deviation: Vec<DeviationRow>,
    /// Absent when the sweep is too small for the trend test.
    pub variance_scaling: Option<VarianceScalingReport>,
    pub variance_scaling_note: Option<String>,
}

pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub setups: Vec<NSetup>,
    pub summary: SweepSummary,
}

/// Runs the sweep, handing each completed `n` to `on_batch` before moving on.
pub fn run_sweep_with<F>(cfg: &ExperimentConfig, mut on_batch: F) -> Result<SweepResult>
where
    F: FnMut(&[TrialRecord]) -> Result<()>,
{
    cfg.validate()?;
    let params = cfg.bound_params()?;
    let pool = thread_pool(cfg.workers)?;
    let mut records = Vec::new();
    let mut setups = Vec::new();
    let mut per_n = Vec::new();
    for n in cfg.sorted_n_values() {
        let setup = setup_for(cfg, n)?;
        let batch = run_trials(&pool, cfg, cfg.process, &setup, cfg.trials as u64)?;
        on_batch(&batch)?;
        per_n.push(summarize_n(&setup, &batch));
        records.extend(batch);
        setups.push(setup);
    }
    let thresholds: Vec<Thresholds> = setups.iter().map(|s| s.thresholds).collect();
    let (variance_scaling, variance_scaling_note) = match variance_scaling_report(&records, cfg) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = SweepSummary {
        config: cfg.clone(),
        per_n,
        betas: optimize_betas(&params, 1e-8)?,
        deviation: deviation_report(&records, &thresholds),
        variance_scaling,
        variance_scaling_note,
    };
    Ok(SweepResult {
        records,
        setups,
        summary,
    })
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, |_| Ok(()))
}

/// Runs the sweep and writes `trials.csv`, `summary.json` and `bounds.csv` under `dir`.
///
/// `trials.csv` is flushed after every `n`, so an aborted sweep leaves the
/// completed sizes on disk.
pub fn run_sweep_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<SweepResult> {
    cfg.validate()?;
    fs::create_dir_all(dir)?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("trials.csv"))?));
    let result = run_sweep_with(cfg, |batch| {
        for r in batch {
            writer.serialize(r)?;
        }
        writer.flush()?;
        Ok(())
    })?;
    drop(writer);
    write_json(&dir.join("summary.json"), &result.summary)?;
    let rows = bounds_table(&cfg.bound_params()?, 0.05, 5.0, 200)?;
    write_bounds_csv(&rows, BufWriter::new(File::create(dir.join("bounds.csv"))?))?;
    Ok(result)
}

pub fn write_trials_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
