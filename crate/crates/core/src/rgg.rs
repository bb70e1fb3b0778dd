//! Random geometric graphs with location dependent edge weights.
//!
//! Nodes `i` and `j` are adjacent iff `d(X_i, X_j) < r` (strict). An edge
//! carries the weight `d^alpha * xi(X_i, X_j)` where `xi` is a symmetric,
//! bounded factor evaluated from the grid cells that contain the endpoints.
//! Construction buckets nodes into a grid with cells of side at least `r` and
//! scans each cell against itself and four forward neighbours.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dsu::DisjointSets;
use crate::error::{Error, Result};
use crate::sampling::{cell_coord, Point, PointSet};

/// The symmetric weight factor `xi(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum XiFactor {
    Constant {
        value: f64,
    },
    /// `xi(x, y) = (g(cell(x)) + g(cell(y))) / 2` with per-cell factors `g` on a `k × k` grid.
    CellAverage {
        k: usize,
        factors: Vec<f64>,
    },
    /// Full symmetric table over pairs of cells of a `k × k` grid: `values[a * k² + b]`.
    CellTable {
        k: usize,
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub alpha: f64,
    pub xi: XiFactor,
}

impl WeightSpec {
    pub fn constant(alpha: f64, value: f64) -> Result<Self> {
        let w = Self {
            alpha,
            xi: XiFactor::Constant { value },
        };
        w.validate()?;
        Ok(w)
    }

    /// Unit weight factor: `w = d^alpha`.
    pub fn euclidean(alpha: f64) -> Result<Self> {
        Self::constant(alpha, 1.0)
    }

    pub fn cell_average(alpha: f64, k: usize, factors: Vec<f64>) -> Result<Self> {
        let w = Self {
            alpha,
            xi: XiFactor::CellAverage { k, factors },
        };
        w.validate()?;
        Ok(w)
    }

    pub fn cell_table(alpha: f64, k: usize, values: Vec<f64>) -> Result<Self> {
        let w = Self {
            alpha,
            xi: XiFactor::CellTable { k, values },
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!(
                "edge weight exponent must be positive, got {}",
                self.alpha
            )));
        }
        let values: &[f64] = match &self.xi {
            XiFactor::Constant { value } => std::slice::from_ref(value),
            XiFactor::CellAverage { k, factors } => {
                if *k == 0 || factors.len() != k * k {
                    return Err(Error::Config(format!(
                        "cell_average xi needs k*k = {} factors, got {}",
                        k * k,
                        factors.len()
                    )));
                }
                factors
            }
            XiFactor::CellTable { k, values } => {
                let cells = k * k;
                if *k == 0 || values.len() != cells * cells {
                    return Err(Error::Config(format!(
                        "cell_table xi needs (k*k)^2 = {} values, got {}",
                        cells * cells,
                        values.len()
                    )));
                }
                for a in 0..cells {
                    for b in (a + 1)..cells {
                        if values[a * cells + b] != values[b * cells + a] {
                            return Err(Error::Config(format!(
                                "cell_table xi is not symmetric at cells ({a}, {b})"
                            )));
                        }
                    }
                }
                values
            }
        };
        if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Config(format!("xi values must be positive, got {v}")));
        }
        Ok(())
    }

    fn table_values(&self) -> &[f64] {
        match &self.xi {
            XiFactor::Constant { value } => std::slice::from_ref(value),
            XiFactor::CellAverage { factors, .. } => factors,
            XiFactor::CellTable { values, .. } => values,
        }
    }

    pub fn xi_min(&self) -> f64 {
        self.table_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn xi_max(&self) -> f64 {
        self.table_values()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn xi(&self, p: Point, q: Point) -> f64 {
        match &self.xi {
            XiFactor::Constant { value } => *value,
            XiFactor::CellAverage { k, factors } => {
                let a = cell_coord(p.y, *k) * k + cell_coord(p.x, *k);
                let b = cell_coord(q.y, *k) * k + cell_coord(q.x, *k);
                0.5 * (factors[a] + factors[b])
            }
            XiFactor::CellTable { k, values } => {
                let cells = k * k;
                let a = cell_coord(p.y, *k) * k + cell_coord(p.x, *k);
                let b = cell_coord(q.y, *k) * k + cell_coord(q.x, *k);
                values[a * cells + b]
            }
        }
    }

    /// `d^alpha`, with the common exponents special-cased.
    pub fn length_power(&self, d: f64) -> f64 {
        if self.alpha == 1.0 {
            d
        } else if self.alpha == 2.0 {
            d * d
        } else {
            d.powf(self.alpha)
        }
    }

    pub fn weight(&self, p: Point, q: Point) -> f64 {
        self.length_power(p.dist(&q)) * self.xi(p, q)
    }

    /// The same weights with every `xi` value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let xi = match &self.xi {
            XiFactor::Constant { value } => XiFactor::Constant { value: value * c },
            XiFactor::CellAverage { k, factors } => XiFactor::CellAverage {
                k: *k,
                factors: factors.iter().map(|v| v * c).collect(),
            },
            XiFactor::CellTable { k, values } => XiFactor::CellTable {
                k: *k,
                values: values.iter().map(|v| v * c).collect(),
            },
        };
        Self {
            alpha: self.alpha,
            xi,
        }
    }
}

/// How the adjacency distance depends on `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusRule {
    /// `sqrt(M log n / n)`, the connectivity-regime form.
    Theorem { m: f64 },
    /// `c * n^(-exponent)`.
    Power { c: f64, exponent: f64 },
    /// `c * sqrt(log n / n)` with a free constant.
    Log { c: f64 },
    /// The same radius for every `n`.
    Fixed { r: f64 },
}

impl RadiusRule {
    pub fn evaluate(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            RadiusRule::Theorem { m } => (m * nf.ln() / nf).sqrt(),
            RadiusRule::Power { c, exponent } => c * nf.powf(-exponent),
            RadiusRule::Log { c } => c * (nf.ln() / nf).sqrt(),
            RadiusRule::Fixed { r } => r,
        }
    }

    /// Whether `n^(alpha / (2 (1 + alpha))) * r_n -> 0`, the condition under
    /// which the variance bound yields L² convergence of the centred, scaled weight.
    pub fn satisfies_l2_condition(&self, alpha: f64) -> bool {
        let needed = alpha / (2.0 * (1.0 + alpha));
        match *self {
            // sqrt(log n / n) decays like n^(-1/2) up to logs, and needed < 1/2
            RadiusRule::Theorem { .. } | RadiusRule::Log { .. } => true,
            RadiusRule::Power { exponent, .. } => exponent > needed,
            RadiusRule::Fixed { .. } => false,
        }
    }
}

/// The radius selected for one `n`, with which theorem hypotheses it meets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusChoice {
    pub radius: f64,
    /// `r_n >= sqrt(M_min log n / n)` with `M_min = 1600 / eps1`.
    pub above_theorem_scale: bool,
    /// For the theorem rule: whether its `M` exceeds `1600 / eps1`.
    pub theorem_constant_ok: Option<bool>,
    pub warnings: Vec<String>,
}

/// Smallest admissible `M` in the connectivity condition, for density lower bound `eps1`.
pub fn theorem_m_threshold(eps1: f64) -> f64 {
    1600.0 / eps1
}

pub fn radius_for(n: usize, rule: &RadiusRule, eps1: f64) -> Result<RadiusChoice> {
    if n < 2 {
        return Err(Error::Parameter(format!("radius needs n >= 2, got {n}")));
    }
    let radius = rule.evaluate(n);
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Parameter(format!(
            "radius {radius} for n={n} is not positive"
        )));
    }
    if radius > 1.0 {
        return Err(Error::Parameter(format!(
            "radius {radius:.6} for n={n} exceeds 1 (unit square)"
        )));
    }
    let m_min = theorem_m_threshold(eps1);
    let nf = n as f64;
    let above_theorem_scale = radius >= (m_min * nf.ln() / nf).sqrt();
    let mut warnings = Vec::new();
    let theorem_constant_ok = match *rule {
        RadiusRule::Theorem { m } => {
            let ok = m > m_min;
            if !ok {
                warnings.push(format!("M = {m} does not exceed 1600/eps1 = {m_min}"));
            }
            Some(ok)
        }
        _ => None,
    };
    if !above_theorem_scale {
        warnings.push(format!(
            "r = {radius:.6} is below sqrt(M log n / n) for M = {m_min}; desk-scale regime"
        ));
    }
    Ok(RadiusChoice {
        radius,
        above_theorem_scale,
        theorem_constant_ok,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Smaller endpoint index.
    pub i: u32,
    /// Larger endpoint index.
    pub j: u32,
    pub dist: f64,
    pub weight: f64,
}

/// Bucket index over the unit square with `side × side` square cells.
#[derive(Clone, Debug)]
pub struct GridIndex {
    side: usize,
    cell_start: Vec<u32>,
    items: Vec<u32>,
}

impl GridIndex {
    /// Cells of side `1 / floor(1 / min_cell)`, which is at least `min_cell`.
    pub fn build(points: &[Point], min_cell: f64) -> Self {
        let side = ((1.0 / min_cell).floor() as usize).max(1);
        let cells = side * side;
        let cell_of: Vec<usize> = points
            .iter()
            .map(|p| cell_coord(p.y, side) * side + cell_coord(p.x, side))
            .collect();
        let mut cell_start = vec![0u32; cells + 1];
        for &c in &cell_of {
            cell_start[c + 1] += 1;
        }
        for c in 0..cells {
            cell_start[c + 1] += cell_start[c];
        }
        let mut fill = cell_start.clone();
        let mut items = vec![0u32; points.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Self {
            side,
            cell_start,
            items,
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn cell(&self, cx: usize, cy: usize) -> &[u32] {
        let c = cy * self.side + cx;
        &self.items[self.cell_start[c] as usize..self.cell_start[c + 1] as usize]
    }
}

#[derive(Clone, Debug)]
pub struct Rgg {
    pub points: PointSet,
    pub radius: f64,
    pub weights: WeightSpec,
    pub edges: Vec<Edge>,
    pub grid: GridIndex,
}

impl Rgg {
    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "dist", "weight"])?;
        for e in &self.edges {
            w.write_record([
                e.i.to_string(),
                e.j.to_string(),
                e.dist.to_string(),
                e.weight.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn build_rgg(points: PointSet, radius: f64, weights: WeightSpec) -> Result<Rgg> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::Parameter(format!(
            "radius must lie in (0, 1], got {radius}"
        )));
    }
    weights.validate()?;
    if points.len() > u32::MAX as usize {
        return Err(Error::Parameter("too many nodes for u32 indices".into()));
    }
    let pts = &points.points;
    let grid = GridIndex::build(pts, radius);
    let side = grid.side();
    let r2 = radius * radius;
    let mut edges = Vec::new();

    let push = |a: u32, b: u32, edges: &mut Vec<Edge>| {
        let (p, q) = (pts[a as usize], pts[b as usize]);
        let (dx, dy) = (p.x - q.x, p.y - q.y);
        let d2 = dx * dx + dy * dy;
        if d2 < r2 {
            let dist = d2.sqrt();
            // strict adjacency is decided on the rounded distance as well
            if dist < radius {
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                let weight = weights.length_power(dist) * weights.xi(p, q);
                edges.push(Edge { i, j, dist, weight });
            }
        }
    };

    const FORWARD: [(isize, isize); 4] = [(1, 0), (-1, 1), (0, 1), (1, 1)];
    for cy in 0..side {
        for cx in 0..side {
            let here = grid.cell(cx, cy);
            for (k, &a) in here.iter().enumerate() {
                for &b in &here[k + 1..] {
                    push(a, b, &mut edges);
                }
            }
            for (dx, dy) in FORWARD {
                let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                if nx < 0 || ny < 0 || nx >= side as isize || ny >= side as isize {
                    continue;
                }
                let there = grid.cell(nx as usize, ny as usize);
                for &a in here {
                    for &b in there {
                        push(a, b, &mut edges);
                    }
                }
            }
        }
    }

    Ok(Rgg {
        points,
        radius,
        weights,
        edges,
        grid,
    })
}

/// Number of connected components (isolated nodes count as components).
pub fn component_count(g: &Rgg) -> usize {
    let mut dsu = DisjointSets::new(g.node_count());
    for e in &g.edges {
        dsu.union(e.i, e.j);
    }
    dsu.sets()
}

pub fn is_connected(g: &Rgg) -> bool {
    component_count(g) <= 1
}
