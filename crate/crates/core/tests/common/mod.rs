#![allow(dead_code)]

use rand::Rng;
use rgg_mst::rgg::{WeightSpec, XiFactor};
use rgg_mst::sampling::Point;

/// All pairs `(i, j, weight)` with `i < j` and distance `< r`, by exhaustive scan.
pub fn all_pairs_edges(points: &[Point], r: f64, ws: &WeightSpec) -> Vec<(u32, u32, f64)> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (p, q) = (points[i], points[j]);
            let d = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt();
            if d < r {
                out.push((i as u32, j as u32, ws.weight(p, q)));
            }
        }
    }
    out
}

/// Minimum spanning forest weight by Prim's algorithm on a dense matrix, one component at a time.
pub fn prim_forest_weight(n: usize, edges: &[(u32, u32, f64)]) -> (f64, usize) {
    let mut w = vec![f64::INFINITY; n * n];
    for &(i, j, x) in edges {
        w[i as usize * n + j as usize] = x;
        w[j as usize * n + i as usize] = x;
    }
    let mut done = vec![false; n];
    let mut total = 0.0;
    let mut components = 0;
    for s in 0..n {
        if done[s] {
            continue;
        }
        components += 1;
        let mut best = vec![f64::INFINITY; n];
        best[s] = 0.0;
        loop {
            let mut u = None;
            for v in 0..n {
                if !done[v] && best[v].is_finite() && u.is_none_or(|k: usize| best[v] < best[k]) {
                    u = Some(v);
                }
            }
            let Some(u) = u else { break };
            done[u] = true;
            total += best[u];
            for v in 0..n {
                if !done[v] && w[u * n + v] < best[v] {
                    best[v] = w[u * n + v];
                }
            }
        }
    }
    (total, components)
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize) -> Vec<Point> {
    (0..n).map(|_| Point::new(rng.random(), rng.random())).collect()
}

/// A random weight specification of one of the three `xi` shapes.
pub fn random_weights<R: Rng>(rng: &mut R, alpha: f64) -> WeightSpec {
    match rng.random_range(0..3) {
        0 => WeightSpec::constant(alpha, rng.random_range(0.5..2.0)).unwrap(),
        1 => {
            let k = rng.random_range(1..5);
            let factors = (0..k * k).map(|_| rng.random_range(0.5..2.0)).collect();
            WeightSpec::cell_average(alpha, k, factors).unwrap()
        }
        _ => {
            let k = rng.random_range(1..4);
            let cells = k * k;
            let mut values = vec![0.0; cells * cells];
            for a in 0..cells {
                for b in a..cells {
                    let v = rng.random_range(0.5..2.0);
                    values[a * cells + b] = v;
                    values[b * cells + a] = v;
                }
            }
            WeightSpec::cell_table(alpha, k, values).unwrap()
        }
    }
}

pub fn xi_bounds(ws: &WeightSpec) -> (f64, f64) {
    match &ws.xi {
        XiFactor::Constant { value } => (*value, *value),
        XiFactor::CellAverage { factors, .. } => (
            factors.iter().copied().fold(f64::INFINITY, f64::min),
            factors.iter().copied().fold(0.0, f64::max),
        ),
        XiFactor::CellTable { values, .. } => (
            values.iter().copied().fold(f64::INFINITY, f64::min),
            values.iter().copied().fold(0.0, f64::max),
        ),
    }
}

/// `½ ξ_min A^(α−2) (1 − e^{−ε1 A²}) e^{−8 ε2 A²}`, evaluated directly.
pub fn c1_formula(a: f64, alpha: f64, eps1: f64, eps2: f64, xi_min: f64) -> f64 {
    0.5 * xi_min * a.powf(alpha - 2.0) * (1.0 - (-eps1 * a * a).exp()) * (-8.0 * eps2 * a * a).exp()
}

/// `ξ_max (2A)^α (1 + E T^α / A²)` for `α ∈ {1, 2}` using the closed geometric moments.
pub fn c2_closed_form(a: f64, alpha: f64, delta: f64, xi_max: f64) -> f64 {
    let p = 1.0 - (-delta * a * a).exp();
    let moment = if alpha == 1.0 {
        1.0 / p
    } else if alpha == 2.0 {
        (2.0 - p) / (p * p)
    } else {
        panic!("closed form only for alpha 1 or 2")
    };
    xi_max * (2.0 * a).powf(alpha) * (1.0 + moment / (a * a))
}
