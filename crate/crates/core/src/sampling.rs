//! Node configurations in the unit square.
//!
//! Densities are piecewise constant on a `k × k` grid (uniform is the `k = 1`
//! special case) and are bounded by `eps1 ≤ f ≤ eps2`. Points are drawn by
//! rejection against the flat envelope `eps2`, which makes the acceptance rate
//! exactly `1 / eps2`.
//!
//! Three process models are provided: a fixed number of i.i.d. points
//! (binomial), a Poisson number of i.i.d. points (Poissonized), and a coloured
//! superposition of two independent Poisson processes that realises the
//! monotone coupling between an inhomogeneous and a homogeneous process.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

const DENSITY_MASS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance, computed exactly as the graph builder does.
    pub fn dist(&self, other: &Point) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        (dx * dx + dy * dy).sqrt()
    }
}

/// Shape of a density on the unit square.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    Uniform,
    /// Cell values on a `k × k` grid, row-major with row index along `y`.
    Grid { k: usize, values: Vec<f64> },
}

/// A bounded density `f` on `[0,1]²` together with its declared bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    #[serde(flatten)]
    pub kind: DensityKind,
    pub eps1: f64,
    pub eps2: f64,
}

impl DensitySpec {
    pub fn uniform() -> Self {
        Self {
            kind: DensityKind::Uniform,
            eps1: 1.0,
            eps2: 1.0,
        }
    }

    /// Uniform density with looser declared bounds (useful for the coupled process).
    pub fn uniform_with_bounds(eps1: f64, eps2: f64) -> Result<Self> {
        let d = Self {
            kind: DensityKind::Uniform,
            eps1,
            eps2,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn grid(k: usize, values: Vec<f64>, eps1: f64, eps2: f64) -> Result<Self> {
        let d = Self {
            kind: DensityKind::Grid { k, values },
            eps1,
            eps2,
        };
        d.validate()?;
        Ok(d)
    }

    /// Grid density whose bounds are the tightest ones allowed (`eps1 ≤ 1 ≤ eps2`).
    pub fn grid_tight(k: usize, values: Vec<f64>) -> Result<Self> {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
        let hi = values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
            .max(1.0);
        Self::grid(k, values, lo, hi)
    }

    pub fn validate(&self) -> Result<()> {
        let (eps1, eps2) = (self.eps1, self.eps2);
        if !(eps1.is_finite() && eps2.is_finite()) || eps1 <= 0.0 || eps1 > 1.0 || eps2 < 1.0 {
            return Err(Error::Config(format!(
                "density bounds must satisfy 0 < eps1 <= 1 <= eps2, got eps1={eps1}, eps2={eps2}"
            )));
        }
        if let DensityKind::Grid { k, values } = &self.kind {
            if *k == 0 || values.len() != k * k {
                return Err(Error::Config(format!(
                    "grid density needs k*k = {} values, got {}",
                    k * k,
                    values.len()
                )));
            }
            if let Some(v) = values
                .iter()
                .find(|v| !v.is_finite() || **v < eps1 || **v > eps2)
            {
                return Err(Error::Config(format!(
                    "density value {v} outside [{eps1}, {eps2}]"
                )));
            }
            let mass = values.iter().sum::<f64>() / (k * k) as f64;
            if (mass - 1.0).abs() > DENSITY_MASS_TOL {
                return Err(Error::Config(format!(
                    "density integrates to {mass}, expected 1"
                )));
            }
        }
        Ok(())
    }

    pub fn value_at(&self, p: Point) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::Grid { k, values } => {
                let ix = cell_coord(p.x, *k);
                let iy = cell_coord(p.y, *k);
                values[iy * k + ix]
            }
        }
    }

    pub fn is_uniform(&self) -> bool {
        match &self.kind {
            DensityKind::Uniform => true,
            DensityKind::Grid { values, .. } => values.iter().all(|&v| v == 1.0),
        }
    }
}

/// Index of the cell containing coordinate `c` on a grid with `k` cells per side.
pub(crate) fn cell_coord(c: f64, k: usize) -> usize {
    let i = (c * k as f64).floor();
    if i <= 0.0 {
        0
    } else {
        (i as usize).min(k - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Green,
    Red,
}

/// Which side of `alpha = 1` the coupling is built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRegime {
    /// Green = intensity `n f`, red = `n (eps2 - f)`; union is homogeneous `n eps2`.
    AtMostOne,
    /// Green = homogeneous `n eps1`, red = `n (f - eps1)`; union has intensity `n f`.
    AboveOne,
}

impl AlphaRegime {
    pub fn for_alpha(alpha: f64) -> Self {
        if alpha <= 1.0 {
            Self::AtMostOne
        } else {
            Self::AboveOne
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Process {
    Binomial { n: usize },
    Poisson { intensity: f64 },
    HomogeneousPoisson { intensity: f64 },
    CoupledSuperposition { intensity: f64, regime: AlphaRegime },
    /// Hand-built configuration, not drawn from any process.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub process: Process,
    pub colors: Option<Vec<Color>>,
    pub seed: u64,
}

impl PointSet {
    pub fn fixed(points: Vec<Point>) -> Self {
        Self {
            points,
            process: Process::Fixed,
            colors: None,
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count(&self, color: Color) -> usize {
        self.colors
            .as_ref()
            .map_or(0, |c| c.iter().filter(|&&c| c == color).count())
    }

    /// Points of one colour, in their original order.
    pub fn subset(&self, color: Color) -> PointSet {
        let points = match &self.colors {
            Some(colors) => self
                .points
                .iter()
                .zip(colors)
                .filter(|(_, &c)| c == color)
                .map(|(p, _)| *p)
                .collect(),
            None => Vec::new(),
        };
        PointSet {
            points,
            process: Process::Fixed,
            colors: None,
            seed: self.seed,
        }
    }

    /// The configuration with node `index` removed (other nodes keep their order).
    pub fn without(&self, index: usize) -> PointSet {
        let mut points = self.points.clone();
        points.remove(index);
        let colors = self.colors.as_ref().map(|c| {
            let mut c = c.clone();
            c.remove(index);
            c
        });
        PointSet {
            points,
            process: Process::Fixed,
            colors,
            seed: self.seed,
        }
    }

    /// The configuration with one extra node appended.
    pub fn with_point(&self, p: Point) -> PointSet {
        let mut points = self.points.clone();
        points.push(p);
        PointSet {
            points,
            process: Process::Fixed,
            colors: None,
            seed: self.seed,
        }
    }

    /// Writes `x,y,color` rows (color is empty for uncoloured sets).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "color"])?;
        for (i, p) in self.points.iter().enumerate() {
            let color = match self.colors.as_ref().map(|c| c[i]) {
                Some(Color::Green) => "green",
                Some(Color::Red) => "red",
                None => "",
            };
            w.write_record([p.x.to_string(), p.y.to_string(), color.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Proposal bookkeeping for the rejection sampler.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RejectionStats {
    pub proposals: u64,
    pub accepted: u64,
}

impl RejectionStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            return f64::NAN;
        }
        self.accepted as f64 / self.proposals as f64
    }
}

fn uniform_point(rng: &mut SimRng) -> Point {
    Point::new(rng.random::<f64>(), rng.random::<f64>())
}

/// Draws one point whose density is proportional to `accept(p)` (`accept ∈ [0,1]`).
fn rejection_draw(
    rng: &mut SimRng,
    stats: &mut RejectionStats,
    accept: impl Fn(Point) -> f64,
) -> Point {
    loop {
        let p = uniform_point(rng);
        stats.proposals += 1;
        if rng.random::<f64>() < accept(p) {
            stats.accepted += 1;
            return p;
        }
    }
}

fn draw_density_points(
    rng: &mut SimRng,
    density: &DensitySpec,
    count: usize,
    stats: &mut RejectionStats,
) -> Vec<Point> {
    if density.is_uniform() && density.eps2 == 1.0 {
        stats.proposals += count as u64;
        stats.accepted += count as u64;
        return (0..count).map(|_| uniform_point(rng)).collect();
    }
    let envelope = density.eps2;
    (0..count)
        .map(|_| rejection_draw(rng, stats, |p| density.value_at(p) / envelope))
        .collect()
}

fn poisson_count(rng: &mut SimRng, mean: f64) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean)
        .map_err(|e| Error::Parameter(format!("poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

/// `count` i.i.d. draws from `density`, with rejection statistics.
pub fn sample_points_with_stats(
    density: &DensitySpec,
    count: usize,
    seed: u64,
) -> Result<(Vec<Point>, RejectionStats)> {
    density.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut stats = RejectionStats::default();
    let pts = draw_density_points(&mut rng, density, count, &mut stats);
    Ok((pts, stats))
}

/// Exactly `n` i.i.d. nodes with density `f`.
pub fn sample_binomial(n: usize, density: &DensitySpec, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::Parameter("binomial process needs n >= 1".into()));
    }
    let (points, _) = sample_points_with_stats(density, n, seed)?;
    Ok(PointSet {
        points,
        process: Process::Binomial { n },
        colors: None,
        seed,
    })
}

/// Poisson process with intensity `n f`: a Poisson(`n`) count of i.i.d. `f` draws.
pub fn sample_poisson(n: f64, density: &DensitySpec, seed: u64) -> Result<PointSet> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::Parameter(format!(
            "poisson intensity scale must be >= 1, got {n}"
        )));
    }
    density.validate()?;
    let mut rng = rng_from_seed(seed);
    let count = poisson_count(&mut rng, n)?;
    let mut stats = RejectionStats::default();
    let points = draw_density_points(&mut rng, density, count, &mut stats);
    Ok(PointSet {
        points,
        process: Process::Poisson { intensity: n },
        colors: None,
        seed,
    })
}

/// Coloured superposition of two independent Poisson processes.
///
/// Green points come first, then red. Reading the green subset gives one
/// process of the coupling, reading all points gives the other.
pub fn sample_coupled(
    n: f64,
    density: &DensitySpec,
    regime: AlphaRegime,
    seed: u64,
) -> Result<PointSet> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Parameter(format!(
            "coupled intensity scale must be positive, got {n}"
        )));
    }
    density.validate()?;
    let (eps1, eps2) = (density.eps1, density.eps2);
    let spread = eps2 - eps1;
    let mut rng = rng_from_seed(seed);
    let mut stats = RejectionStats::default();

    let (green, red_mean) = match regime {
        AlphaRegime::AtMostOne => {
            let count = poisson_count(&mut rng, n)?;
            let green = draw_density_points(&mut rng, density, count, &mut stats);
            (green, n * (eps2 - 1.0))
        }
        AlphaRegime::AboveOne => {
            let count = poisson_count(&mut rng, n * eps1)?;
            let green = (0..count).map(|_| uniform_point(&mut rng)).collect();
            (green, n * (1.0 - eps1))
        }
    };

    let red_count = poisson_count(&mut rng, red_mean)?;
    let red: Vec<Point> = if red_count == 0 {
        Vec::new()
    } else {
        // red_mean > 0 forces eps2 > eps1, so `spread` is positive here.
        (0..red_count)
            .map(|_| {
                rejection_draw(&mut rng, &mut stats, |p| match regime {
                    AlphaRegime::AtMostOne => (eps2 - density.value_at(p)) / spread,
                    AlphaRegime::AboveOne => (density.value_at(p) - eps1) / spread,
                })
            })
            .collect()
    };

    let mut colors = vec![Color::Green; green.len()];
    colors.extend(std::iter::repeat_n(Color::Red, red.len()));
    let mut points = green;
    points.extend(red);
    Ok(PointSet {
        points,
        process: Process::CoupledSuperposition {
            intensity: n,
            regime,
        },
        colors: Some(colors),
        seed,
    })
}
