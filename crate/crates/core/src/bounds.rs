//! Analytic constants for the forest weight: `C1(A)`, `C2(A)`, the geometric
//! gap moment, their optima `beta_low = sup C1` and `beta_up = inf C2`, and
//! the finite-`n` deviation thresholds.
//!
//! ```text
//! C1(A) = ½ xi_min A^(alpha-2) (1 - e^(-eps1 A²)) e^(-8 eps2 A²)
//! C2(A) = xi_max (2A)^alpha (1 + E[T^alpha] / A²),  T ~ Geometric(1 - e^(-delta A²))
//! ```

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SERIES_REL_TOL: f64 = 1e-14;
const SERIES_MAX_TERMS: u64 = 10_000_000;
const GRID_POINTS: usize = 10_000;
const GRID_MIN_A: f64 = 1e-3;

/// Which density bound plays the role of `delta` in the gap distribution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    /// `delta = eps1` for `alpha <= 1`, `eps2` otherwise (the form used to state `C2`).
    #[default]
    Constant,
    /// `delta = eps2` for `alpha <= 1`, `eps1` otherwise (the direction of the coupling).
    Coupling,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub eps1: f64,
    pub eps2: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub alpha: f64,
    #[serde(default)]
    pub delta_rule: DeltaRule,
}

impl BoundParams {
    /// `eps1 = eps2 = xi_min = xi_max = 1`.
    pub fn homogeneous(alpha: f64) -> Self {
        Self {
            eps1: 1.0,
            eps2: 1.0,
            xi_min: 1.0,
            xi_max: 1.0,
            alpha,
            delta_rule: DeltaRule::Constant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0 && self.eps1 <= 1.0 && self.eps2 >= 1.0) {
            return Err(Error::Config(format!(
                "need 0 < eps1 <= 1 <= eps2, got eps1={}, eps2={}",
                self.eps1, self.eps2
            )));
        }
        if !(self.xi_min > 0.0 && self.xi_min <= self.xi_max) {
            return Err(Error::Config(format!(
                "need 0 < xi_min <= xi_max, got xi_min={}, xi_max={}",
                self.xi_min, self.xi_max
            )));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        let small = self.alpha <= 1.0;
        match (self.delta_rule, small) {
            (DeltaRule::Constant, true) | (DeltaRule::Coupling, false) => self.eps1,
            (DeltaRule::Constant, false) | (DeltaRule::Coupling, true) => self.eps2,
        }
    }

    /// The same parameters with both weight-factor bounds multiplied by `c`.
    pub fn with_xi_scaled(&self, c: f64) -> Self {
        Self {
            xi_min: self.xi_min * c,
            xi_max: self.xi_max * c,
            ..*self
        }
    }
}

/// `Σ_{k≥1} k^alpha q^(k-1) p` with `q = 1 - p`, for `q ∈ [0, 1)`.
fn moment_series(alpha: f64, q: f64, p: f64) -> Result<f64> {
    if q == 0.0 {
        return Ok(1.0);
    }
    let ln_q = q.ln();
    let mut sum = 0.0;
    let mut k: u64 = 1;
    loop {
        let kf = k as f64;
        sum += kf.powf(alpha) * ((kf - 1.0) * ln_q).exp() * p;
        // terms after k shrink at least geometrically with ratio ((k+2)/(k+1))^alpha q once that is < 1
        let ratio = ((kf + 2.0) / (kf + 1.0)).powf(alpha) * q;
        if ratio < 1.0 {
            let next = (kf + 1.0).powf(alpha) * (kf * ln_q).exp() * p;
            if next / (1.0 - ratio) < SERIES_REL_TOL * sum {
                return Ok(sum);
            }
        }
        if k == SERIES_MAX_TERMS {
            return Err(Error::Domain(format!(
                "geometric moment series did not converge within {SERIES_MAX_TERMS} terms (p = {p:e})"
            )));
        }
        k += 1;
    }
}

/// `E[T^alpha]` for `T` geometric on `{1, 2, ...}` with success probability `p`.
pub fn geometric_moment(alpha: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("success probability must lie in (0, 1), got {p}")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("moment order must be positive, got {alpha}")));
    }
    moment_series(alpha, 1.0 - p, p)
}

/// Gap moment entering `C2(a)`: success probability `1 - e^(-delta a²)`.
fn gap_moment(a: f64, params: &BoundParams) -> Result<f64> {
    let x = params.delta() * a * a;
    let q = (-x).exp();
    let p = -(-x).exp_m1();
    if p <= 0.0 {
        return Err(Error::Domain(format!("gap success probability vanished at A = {a}")));
    }
    moment_series(params.alpha, q, p)
}

pub fn c1(a: f64, params: &BoundParams) -> f64 {
    let alpha = params.alpha;
    0.5 * params.xi_min
        * a.powf(alpha - 2.0)
        * (-(-params.eps1 * a * a).exp_m1())
        * (-8.0 * params.eps2 * a * a).exp()
}

pub fn c2(a: f64, params: &BoundParams) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Parameter(format!("A must be positive, got {a}")));
    }
    let m = gap_moment(a, params)?;
    Ok(params.xi_max * (2.0 * a).powf(params.alpha) * (1.0 + m / (a * a)))
}

/// A cheap lower bound on `C2(a)` from `E[T^alpha] >= m^alpha P(T >= m)`.
fn c2_lower_bound(a: f64, params: &BoundParams) -> f64 {
    let x = params.delta() * a * a;
    let p = -(-x).exp_m1();
    let m = (1.0 / p).ceil().max(1.0);
    let tail = m.powf(params.alpha) * (-(m - 1.0) * x).exp();
    params.xi_max * (2.0 * a).powf(params.alpha) * (1.0 + tail / (a * a))
}

/// Minimises `f` on `[lo, hi]` by golden-section search until the bracket is below `tol`.
pub fn golden_section_min<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x)?;
    let best = [(x, fx), (x1, f1), (x2, f2)]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaOptima {
    pub beta_low: f64,
    pub argmax_a: f64,
    pub beta_up: f64,
    pub argmin_a: f64,
    /// More than one interior grid maximum of `C1`.
    pub multimodal_low: bool,
    /// More than one interior grid minimum of `C2`.
    pub multimodal_up: bool,
    pub a_max: f64,
}

fn scan_upper_limit(params: &BoundParams) -> Result<f64> {
    let mut a = 1.0;
    while a < 1e4 {
        if c1(a, params) < 1e-30 && c2(a * 1.01, params)? > c2(a, params)? {
            return Ok(a);
        }
        a *= 2.0;
    }
    Err(Error::Domain("could not bracket the optima of C1 and C2".into()))
}

/// Index of the best grid value and whether several interior local optima exist.
fn grid_optimum(values: &[f64]) -> (usize, bool) {
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let local = (1..values.len() - 1)
        .filter(|&i| {
            values[i].is_finite() && values[i] < values[i - 1] && values[i] <= values[i + 1]
        })
        .count();
    (best, local > 1)
}

/// `sup_A C1(A)` and `inf_A C2(A)` by a geometric grid scan and golden-section refinement.
pub fn optimize_betas(params: &BoundParams, tol: f64) -> Result<BetaOptima> {
    params.validate()?;
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let a_max = scan_upper_limit(params)?;
    let ratio = (a_max / GRID_MIN_A).powf(1.0 / (GRID_POINTS - 1) as f64);
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| GRID_MIN_A * ratio.powi(i as i32))
        .collect();

    let neg_c1: Vec<f64> = grid.iter().map(|&a| -c1(a, params)).collect();

    // C2 blows up as A -> 0, where its series is also longest; skip points whose
    // lower bound already exceeds the best value seen from above.
    let mut c2_values = vec![f64::INFINITY; GRID_POINTS];
    let mut best = f64::INFINITY;
    for i in (0..GRID_POINTS).rev() {
        let a = grid[i];
        if c2_lower_bound(a, params) >= best {
            continue;
        }
        let v = c2(a, params)?;
        best = best.min(v);
        c2_values[i] = v;
    }

    let bracket = |i: usize| (grid[i.saturating_sub(1)], grid[(i + 1).min(GRID_POINTS - 1)]);

    let (i_low, multimodal_low) = grid_optimum(&neg_c1);
    let (lo, hi) = bracket(i_low);
    let (argmax_a, neg) = golden_section_min(|a| Ok(-c1(a, params)), lo, hi, tol)?;

    let (i_up, multimodal_up) = grid_optimum(&c2_values);
    let (lo, hi) = bracket(i_up);
    let (argmin_a, beta_up) = golden_section_min(|a| c2(a, params), lo, hi, tol)?;

    Ok(BetaOptima {
        beta_low: -neg,
        argmax_a,
        beta_up,
        argmin_a,
        multimodal_low,
        multimodal_up,
        a_max,
    })
}

/// Every constant at one value of `A`, together with the optima.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
    pub geo_moment: f64,
    pub beta_low: f64,
    pub beta_up: f64,
    pub argmax_a: f64,
    pub argmin_a: f64,
}

pub fn bound_set(a: f64, params: &BoundParams, tol: f64) -> Result<BoundSet> {
    let opt = optimize_betas(params, tol)?;
    Ok(BoundSet {
        a,
        c1: c1(a, params),
        c2: c2(a, params)?,
        geo_moment: gap_moment(a, params)?,
        beta_low: opt.beta_low,
        beta_up: opt.beta_up,
        argmax_a: opt.argmax_a,
        argmin_a: opt.argmin_a,
    })
}

/// `[A + 1/(ln n)^(1/4), A + 2/(ln n)^(1/4))`.
pub fn a_n_interval(a: f64, n: usize) -> (f64, f64) {
    let w = (n as f64).ln().powf(-0.25);
    (a + w, a + 2.0 * w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnReport {
    pub n: usize,
    pub a: f64,
    pub interval_lo: f64,
    pub interval_hi: f64,
    /// The `A_n` actually used (realised by the tiling, or the interval's left end).
    pub a_eff: f64,
    pub in_interval: bool,
    pub c1_gap: f64,
    pub c2_gap: f64,
}

pub fn a_n_sequence(a: f64, n: usize, a_eff: Option<f64>, params: &BoundParams) -> Result<AnReport> {
    if !(a > 0.0) {
        return Err(Error::Parameter(format!("A must be positive, got {a}")));
    }
    if n < 3 {
        return Err(Error::Parameter(format!("A_n needs n >= 3, got {n}")));
    }
    let (lo, hi) = a_n_interval(a, n);
    let a_eff = a_eff.unwrap_or(lo);
    Ok(AnReport {
        n,
        a,
        interval_lo: lo,
        interval_hi: hi,
        a_eff,
        in_interval: a_eff >= lo && a_eff < hi,
        c1_gap: (c1(a_eff, params) - c1(a, params)).abs(),
        c2_gap: (c2(a_eff, params)? - c2(a, params)?).abs(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub n: usize,
    pub a_eff: f64,
    /// `C1(A_n) n^(1-alpha/2) (1 - 36 sqrt(A_n) / n^(1/4))`, clamped at 0.
    pub lower: f64,
    pub lower_factor: f64,
    pub lower_vacuous: bool,
    /// `C2(A_n) n^(1-alpha/2) (1 + n^(-1/17))`.
    pub upper: f64,
    pub upper_factor: f64,
    /// Bounds on the mean of the scaled weight: `C1 (1 - 37 sqrt(A_n)/n^(1/4))` and `C2 (1 + 2 n^(-1/17))`.
    pub mean_lower: f64,
    pub mean_lower_vacuous: bool,
    pub mean_upper: f64,
}

pub fn theorem_thresholds(n: usize, a_eff: f64, params: &BoundParams) -> Result<Thresholds> {
    if n < 2 {
        return Err(Error::Parameter(format!("thresholds need n >= 2, got {n}")));
    }
    let nf = n as f64;
    let scale = nf.powf(1.0 - params.alpha / 2.0);
    let c1v = c1(a_eff, params);
    let c2v = c2(a_eff, params)?;
    let lower_factor = 1.0 - 36.0 * a_eff.sqrt() / nf.powf(0.25);
    let upper_factor = 1.0 + nf.powf(-1.0 / 17.0);
    let mean_lower_factor = 1.0 - 37.0 * a_eff.sqrt() / nf.powf(0.25);
    Ok(Thresholds {
        n,
        a_eff,
        lower: (c1v * scale * lower_factor).max(0.0),
        lower_factor,
        lower_vacuous: lower_factor <= 0.0,
        upper: c2v * scale * upper_factor,
        upper_factor,
        mean_lower: (c1v * mean_lower_factor).max(0.0),
        mean_lower_vacuous: mean_lower_factor <= 0.0,
        mean_upper: c2v * (1.0 + 2.0 * nf.powf(-1.0 / 17.0)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
}

/// `(A, C1, C2)` on `count` geometrically spaced points of `[a_lo, a_hi]`.
pub fn bounds_table(params: &BoundParams, a_lo: f64, a_hi: f64, count: usize) -> Result<Vec<BoundsRow>> {
    if !(a_lo > 0.0 && a_hi > a_lo) || count < 2 {
        return Err(Error::Parameter(format!(
            "need 0 < a_lo < a_hi and count >= 2, got [{a_lo}, {a_hi}] x {count}"
        )));
    }
    let ratio = (a_hi / a_lo).powf(1.0 / (count - 1) as f64);
    (0..count)
        .map(|i| {
            let a = a_lo * ratio.powi(i as i32);
            Ok(BoundsRow {
                a,
                c1: c1(a, params),
                c2: c2(a, params)?,
            })
        })
        .collect()
}

pub fn write_bounds_csv<W: Write>(rows: &[BoundsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
