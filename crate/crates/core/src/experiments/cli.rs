use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{bounds_table, optimize_betas, write_bounds_csv, BoundParams};
use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::reports::{one_node_difference_check, poissonization_comparison, variance_scaling_report};
use super::sweep::{read_trials_csv, run_sweep_to_dir, write_json};

#[derive(Parser, Debug)]
#[command(name = "rgg-mst", version, about = "Minimum spanning forests of random geometric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the edge-weight exponent.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the configured sweep; writes trials.csv, summary.json and bounds.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Replace the configured n values (repeat or comma separate).
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Evaluate C1, C2 and their optima.
    Bounds {
        /// Take density and weight bounds from this configuration.
        #[arg(long, conflicts_with = "homogeneous")]
        config: Option<PathBuf>,
        /// Use eps1 = eps2 = xi_min = xi_max = 1.
        #[arg(long)]
        homogeneous: bool,
        #[arg(long)]
        alpha: Option<f64>,
        /// Write bounds.csv and bounds.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Check the one-node difference bound on (n+1)-node configurations.
    CheckLemma {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// Number of configurations.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Nodes removed per configuration.
        #[arg(long, default_value_t = 10)]
        removals: usize,
    },
    /// Compare binomial and Poisson sampling at one n.
    ComparePoisson {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        /// Extra count-only Poisson draws for the P(N = n) estimate.
        #[arg(long, default_value_t = 100_000)]
        count_draws: usize,
    },
    /// Emit tidy (x, y, series) CSV for plotting.
    PlotData {
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (including the program name) and runs the command. Returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.master_seed = s;
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    if let Some(a) = common.alpha {
        cfg.alpha = a;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    let out = cfg.output_dir.clone();
    Ok((cfg, out))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Sweep { common, n, trials } => {
            let (mut cfg, out) = load(&common)?;
            if !n.is_empty() {
                cfg.n_values = n;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            cfg.validate()?;
            let res = run_sweep_to_dir(&cfg, &out)?;
            for s in &res.summary.per_n {
                println!(
                    "n={} r={:.5} W={} L={} trials={} mean={:.6} var={:.3e} connected={:.3} e_poi={:.3} sandwich_violations={}",
                    s.n,
                    s.radius,
                    s.w,
                    s.l,
                    s.trials,
                    s.mean_scaled_mst,
                    s.var_scaled_mst,
                    s.connected_freq,
                    s.e_poi_freq,
                    s.sandwich_violations
                );
            }
            if let Some(v) = &res.summary.variance_scaling {
                if let Some(t) = &v.trend {
                    println!("variance ratio trend: rho={:.3} p={:.4}", t.rho, t.p_upward);
                }
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Bounds {
            config,
            homogeneous,
            alpha,
            out,
            tol,
        } => {
            let params = match (config, homogeneous) {
                (Some(path), _) => {
                    let mut cfg = ExperimentConfig::load(&path)?;
                    if let Some(a) = alpha {
                        cfg.alpha = a;
                    }
                    cfg.bound_params()?
                }
                (None, true) => BoundParams::homogeneous(alpha.unwrap_or(1.0)),
                (None, false) => {
                    return Err(Error::Config("bounds needs --config or --homogeneous".into()));
                }
            };
            params.validate()?;
            let opt = optimize_betas(&params, tol)?;
            println!("beta_low = {:.7}", opt.beta_low);
            println!("argmax_A = {:.7}", opt.argmax_a);
            println!("beta_up = {:.6}", opt.beta_up);
            println!("argmin_A = {:.7}", opt.argmin_a);
            if opt.multimodal_low || opt.multimodal_up {
                println!("warning: several local optima on the scan grid");
            }
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                let rows = bounds_table(&params, 0.05, 5.0, 200)?;
                write_bounds_csv(&rows, BufWriter::new(File::create(dir.join("bounds.csv"))?))?;
                write_json(&dir.join("bounds.json"), &opt)?;
            }
            Ok(())
        }
        Command::CheckLemma {
            common,
            n,
            trials,
            removals,
        } => {
            let (cfg, out) = load(&common)?;
            let rep = one_node_difference_check(&cfg, n, trials, removals)?;
            print_json(&rep)?;
            fs::create_dir_all(&out)?;
            write_json(&out.join("lemma.json"), &rep)
        }
        Command::ComparePoisson {
            common,
            n,
            trials,
            count_draws,
        } => {
            let (cfg, out) = load(&common)?;
            let rep = poissonization_comparison(&cfg, n, trials, count_draws)?;
            print_json(&rep)?;
            fs::create_dir_all(&out)?;
            write_json(&out.join("poisson.json"), &rep)
        }
        Command::PlotData { common } => {
            let (cfg, out) = load(&common)?;
            plot_data(&cfg, &out)
        }
    }
}

#[derive(Serialize)]
struct PlotRow<'a> {
    x: f64,
    y: f64,
    series: &'a str,
}

fn plot_data(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let mut rows = Vec::new();
    for b in bounds_table(&cfg.bound_params()?, 0.05, 5.0, 200)? {
        rows.push(PlotRow { x: b.a, y: b.c1, series: "c1" });
        rows.push(PlotRow { x: b.a, y: b.c2, series: "c2" });
    }
    let trials = out.join("trials.csv");
    if trials.exists() {
        let records = read_trials_csv(&trials)?;
        match variance_scaling_report(&records, cfg) {
            Ok(rep) => {
                for p in &rep.points {
                    let x = p.n as f64;
                    rows.push(PlotRow { x, y: p.variance, series: "variance" });
                    rows.push(PlotRow { x, y: p.predicted, series: "r2_nr2_alpha" });
                    rows.push(PlotRow { x, y: p.ratio, series: "variance_ratio" });
                }
            }
            Err(e) => eprintln!("skipping variance series: {e}"),
        }
    } else {
        eprintln!("no {} yet; emitting C1/C2 curves only", trials.display());
    }
    fs::create_dir_all(out)?;
    let path = out.join("plot_data.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}
