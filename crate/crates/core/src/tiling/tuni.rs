use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mst::{MstEdge, MstResult};
use crate::rgg::{Rgg, WeightSpec};

use super::occupancy::{gap_sum, OccupancyReport};
use super::plan::TilingPlan;

/// Relative slack for comparing computed lengths against exact geometric bounds.
const GEOM_TOL: f64 = 1e-9;

/// The constructive spanning tree: a star in every occupied fine square plus
/// one bridge between consecutive occupied squares in serpentine order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tuni {
    pub tree: MstResult,
    pub weight: f64,
    pub star_weight: f64,
    pub bridge_weight: f64,
    pub bridge_count: usize,
    /// Bridges longer than `2·T·a` (possible only for `T = 1`, where the cap is `√5·a`).
    pub bridges_over_2ta: usize,
    /// `ξ_max (2a)^α (Σ N(R_i) + Y_α)`.
    pub upper_rhs: f64,
}

impl Tuni {
    pub fn within_upper_rhs(&self) -> bool {
        self.weight <= self.upper_rhs
    }
}

/// Builds `T_uni` on the nodes of `g`. Returns `Ok(None)` when `e_poi` fails.
pub fn build_tuni(g: &Rgg, plan: &TilingPlan, report: &OccupancyReport) -> Result<Option<Tuni>> {
    if !report.e_poi {
        return Ok(None);
    }
    let pts = &g.points.points;
    let ws = &g.weights;
    let n = pts.len();

    // nodes grouped by label, in increasing node index
    let mut start = vec![0usize; plan.fine_count() + 1];
    let labels: Vec<usize> = pts.iter().map(|&p| plan.label_of(p)).collect();
    for &l in &labels {
        start[l + 1] += 1;
    }
    for k in 0..plan.fine_count() {
        start[k + 1] += start[k];
    }
    let mut fill = start.clone();
    let mut members = vec![0u32; n];
    for (i, &l) in labels.iter().enumerate() {
        members[fill[l]] = i as u32;
        fill[l] += 1;
    }
    let square = |l: usize| &members[start[l]..start[l + 1]];

    let star_cap = ws.xi_max() * ws.length_power(plan.a * std::f64::consts::SQRT_2);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut star_weight = 0.0;
    let mut bridge_weight = 0.0;
    let mut bridges_over_2ta = 0;
    let mut prev: Option<usize> = None;

    for label in 0..plan.fine_count() {
        let nodes = square(label);
        let Some(&root) = nodes.first() else {
            continue;
        };
        for &v in &nodes[1..] {
            let w = ws.weight(pts[root as usize], pts[v as usize]);
            if w > star_cap * (1.0 + GEOM_TOL) {
                return Err(Error::ConstructionViolation(format!(
                    "star edge ({root}, {v}) in square {label} outweighs the square diagonal"
                )));
            }
            star_weight += w;
            edges.push(edge(root, v, w));
        }
        if let Some(p) = prev {
            let gap = (label - p) as f64;
            let mut best: Option<(MstEdge, f64)> = None;
            for &u in square(p) {
                for &v in nodes {
                    let (pu, pv) = (pts[u as usize], pts[v as usize]);
                    let d = pu.dist(&pv);
                    if d >= g.radius {
                        return Err(Error::ConstructionViolation(format!(
                            "nodes {u} and {v} in consecutive occupied squares are not adjacent (d = {d})"
                        )));
                    }
                    let e = edge(u, v, ws.length_power(d) * ws.xi(pu, pv));
                    if best.as_ref().is_none_or(|(b, _)| e.cmp_key(b).is_lt()) {
                        best = Some((e, d));
                    }
                }
            }
            let (e, d) = best.expect("both squares are occupied");
            let cap = ((gap + 1.0).powi(2) + 1.0).sqrt() * plan.a;
            if d > cap * (1.0 + GEOM_TOL) {
                return Err(Error::ConstructionViolation(format!(
                    "bridge between labels {p} and {label} has length {d} > {cap}"
                )));
            }
            if d > 2.0 * gap * plan.a {
                bridges_over_2ta += 1;
            }
            bridge_weight += e.weight;
            edges.push(e);
        }
        prev = Some(label);
    }

    let bridge_count = report.q_occupied.saturating_sub(1);
    let tree = MstResult::from_edges(n, edges, usize::from(n > 0));
    let upper_rhs = ws.xi_max()
        * ws.length_power(2.0 * plan.a)
        * (n as f64 + gap_sum(report, ws.alpha));
    Ok(Some(Tuni {
        weight: tree.total_weight,
        tree,
        star_weight,
        bridge_weight,
        bridge_count,
        bridges_over_2ta,
        upper_rhs,
    }))
}

fn edge(a: u32, b: u32, weight: f64) -> MstEdge {
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    MstEdge { i, j, weight }
}

/// `H_α` and the pathwise lower-bound check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    /// `Σ a^α 1(isolated)`.
    pub h_alpha: f64,
    pub isolated_count: usize,
    /// `½ ξ_min a^α · isolated_count`.
    pub bound: f64,
    /// Set when the graph is connected with at least two nodes, the only case the check applies to.
    pub applicable: bool,
    /// Isolated squares with no tree edge of length `>= a` leaving them.
    pub squares_without_long_edge: usize,
    pub holds: bool,
}

pub fn lower_bound_count(
    g: &Rgg,
    m: &MstResult,
    plan: &TilingPlan,
    report: &OccupancyReport,
    weights: &WeightSpec,
) -> LowerBoundCheck {
    let a_pow = weights.length_power(plan.a);
    let iso = report.isolated_count;
    let bound = 0.5 * weights.xi_min() * a_pow * iso as f64;
    let applicable = g.node_count() >= 2 && m.components == 1;
    let mut missing = 0;
    if applicable && iso > 0 {
        let pts = &g.points.points;
        let labels: Vec<usize> = pts.iter().map(|&p| plan.label_of(p)).collect();
        let mut has_long = vec![false; plan.fine_count()];
        for e in &m.edges {
            let (li, lj) = (labels[e.i as usize], labels[e.j as usize]);
            if li == lj {
                continue;
            }
            let d = pts[e.i as usize].dist(&pts[e.j as usize]);
            if d >= plan.a * (1.0 - GEOM_TOL) {
                has_long[li] = true;
                has_long[lj] = true;
            }
        }
        missing = report
            .isolated
            .iter()
            .zip(&has_long)
            .filter(|&(&iso, &long)| iso && !long)
            .count();
    }
    let holds = !applicable || (missing == 0 && m.total_weight >= bound * (1.0 - GEOM_TOL));
    LowerBoundCheck {
        h_alpha: a_pow * iso as f64,
        isolated_count: iso,
        bound,
        applicable,
        squares_without_long_edge: missing,
        holds,
    }
}
