mod common;

use proptest::prelude::*;
use rand::Rng;
use rgg_mst::dsu::DisjointSets;
use rgg_mst::mst::{brute_force_mst, minimum_spanning_forest, mst_degree_stats};
use rgg_mst::rgg::{build_rgg, is_connected, radius_for, RadiusRule, WeightSpec};
use rgg_mst::rng::rng_from_seed;
use rgg_mst::sampling::{sample_binomial, DensitySpec, Point, PointSet};

use common::{all_pairs_edges, prim_forest_weight, random_points, random_weights};

fn point() -> impl Strategy<Value = Point> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| Point::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_edges_equal_all_pairs(pts in prop::collection::vec(point(), 0..500), r in 0.01..1.0f64) {
        let ws = WeightSpec::euclidean(1.5).unwrap();
        let g = build_rgg(PointSet::fixed(pts.clone()), r, ws.clone()).unwrap();
        let mut got: Vec<(u32, u32, f64)> = g.edges.iter().map(|e| (e.i, e.j, e.weight)).collect();
        got.sort_by_key(|e| (e.0, e.1));
        let want = all_pairs_edges(&pts, r, &ws);
        prop_assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            prop_assert_eq!((a.0, a.1), (b.0, b.1));
            prop_assert!((a.2 - b.2).abs() <= 1e-12 * b.2);
        }
    }

    #[test]
    fn edges_grow_with_radius(pts in prop::collection::vec(point(), 2..300), r in 0.01..0.5f64, extra in 0.0..0.5f64) {
        let ws = WeightSpec::euclidean(1.0).unwrap();
        let small = build_rgg(PointSet::fixed(pts.clone()), r, ws.clone()).unwrap();
        let large = build_rgg(PointSet::fixed(pts), r + extra, ws).unwrap();
        let big: std::collections::HashSet<(u32, u32)> = large.edges.iter().map(|e| (e.i, e.j)).collect();
        prop_assert!(small.edges.iter().all(|e| big.contains(&(e.i, e.j))));
    }

    #[test]
    fn forest_matches_prim(pts in prop::collection::vec(point(), 0..150), r in 0.05..0.6f64, alpha in 0.3..3.0f64) {
        let ws = WeightSpec::euclidean(alpha).unwrap();
        let edges = all_pairs_edges(&pts, r, &ws);
        let (w, comps) = prim_forest_weight(pts.len(), &edges);
        let m = minimum_spanning_forest(&build_rgg(PointSet::fixed(pts.clone()), r, ws).unwrap());
        prop_assert_eq!(m.components, comps);
        prop_assert_eq!(m.edges.len(), pts.len() - comps.min(pts.len()));
        prop_assert!((m.total_weight - w).abs() <= 1e-9 * w.max(1.0));
    }
}

#[test]
fn collinear_examples() {
    let pts = PointSet::fixed(vec![Point::new(0.1, 0.5), Point::new(0.2, 0.5), Point::new(0.3, 0.5)]);
    let g = build_rgg(pts, 0.15, WeightSpec::euclidean(1.0).unwrap()).unwrap();
    assert_eq!(g.edges.len(), 2);
    for e in &g.edges {
        assert!((e.weight - 0.1).abs() < 1e-12);
    }
    let m = minimum_spanning_forest(&g);
    assert!((m.total_weight - 0.2).abs() < 1e-12);
    assert_eq!(m.degrees, vec![1, 2, 1]);
    assert_eq!(mst_degree_stats(&m).max_degree, 2);

    let far = PointSet::fixed(vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0)]);
    let g = build_rgg(far, 0.4, WeightSpec::euclidean(1.0).unwrap()).unwrap();
    assert!(g.edges.is_empty());
    assert!(!is_connected(&g));
}

#[test]
fn connectivity_examples() {
    let one = build_rgg(PointSet::fixed(vec![Point::new(0.3, 0.3)]), 0.1, WeightSpec::euclidean(1.0).unwrap()).unwrap();
    assert!(is_connected(&one));
    // a boustrophedon chain with spacing r/2
    let r = 0.1;
    let mut pts = Vec::new();
    let mut y = 0.02;
    let mut row = 0;
    while y < 0.98 {
        let xs: Vec<f64> = (0..20).map(|k| 0.02 + k as f64 * r / 2.0).collect();
        let xs: Vec<f64> = if row % 2 == 0 { xs } else { xs.into_iter().rev().collect() };
        for x in xs {
            pts.push(Point::new(x, y));
        }
        y += r / 2.0;
        row += 1;
    }
    let g = build_rgg(PointSet::fixed(pts), r, WeightSpec::euclidean(1.0).unwrap()).unwrap();
    assert!(is_connected(&g));
}

#[test]
fn star_forced_by_geometry() {
    let c = Point::new(0.5, 0.5);
    let s = 0.1;
    let pts = vec![
        c,
        Point::new(0.5 + s, 0.5),
        Point::new(0.5 - s, 0.5),
        Point::new(0.5, 0.5 + s),
        Point::new(0.5, 0.5 - s),
    ];
    let g = build_rgg(PointSet::fixed(pts), 0.12, WeightSpec::euclidean(1.0).unwrap()).unwrap();
    let m = minimum_spanning_forest(&g);
    assert_eq!(mst_degree_stats(&m).max_degree, 4);
    assert_eq!(m.degrees[0], 4);
}

#[test]
fn radius_rule_examples() {
    let err = radius_for(10_000, &RadiusRule::Theorem { m: 1600.0 }, 1.0);
    assert!(err.is_err());
    let r = radius_for(1_000_000, &RadiusRule::Power { c: 1.0, exponent: 1.0 / 3.0 }, 1.0).unwrap();
    assert!((r.radius - 0.01).abs() < 1e-12);
    assert!(!r.above_theorem_scale);
    assert!(RadiusRule::Power { c: 1.0, exponent: 1.0 / 3.0 }.satisfies_l2_condition(1.0));
    assert!(radius_for(1, &RadiusRule::Fixed { r: 0.5 }, 1.0).is_err());
}

#[test]
fn small_forests_match_oracle() {
    let mut rng = rng_from_seed(2024);
    for _ in 0..300 {
        let n = rng.random_range(0..=8);
        let alpha = [0.5, 1.0, 2.0, 3.0][rng.random_range(0..4)];
        let ws = random_weights(&mut rng, alpha);
        let r = rng.random_range(0.2..1.0);
        let g = build_rgg(PointSet::fixed(random_points(&mut rng, n)), r, ws).unwrap();
        let fast = minimum_spanning_forest(&g);
        let slow = brute_force_mst(&g).unwrap();
        assert_eq!(fast.total_weight, slow.total_weight);
        assert_eq!(fast.components, slow.components);
    }
}

#[test]
fn cut_property_holds_on_every_tree_edge() {
    let mut rng = rng_from_seed(5);
    for trial in 0..20 {
        let ws = random_weights(&mut rng, 1.0 + trial as f64 / 10.0);
        let pts = sample_binomial(120, &DensitySpec::uniform(), trial).unwrap();
        let g = build_rgg(pts, 0.2, ws).unwrap();
        let m = minimum_spanning_forest(&g);
        for (k, e) in m.edges.iter().enumerate() {
            let mut dsu = DisjointSets::new(g.node_count());
            for (l, f) in m.edges.iter().enumerate() {
                if l != k {
                    dsu.union(f.i, f.j);
                }
            }
            let (ru, rv) = (dsu.find(e.i), dsu.find(e.j));
            for x in &g.edges {
                let (a, b) = (dsu.find(x.i), dsu.find(x.j));
                if (a == ru && b == rv) || (a == rv && b == ru) {
                    assert!(x.weight >= e.weight, "edge ({}, {}) undercuts tree edge", x.i, x.j);
                }
            }
        }
    }
}

#[test]
fn scaling_xi_scales_weight_and_keeps_edges() {
    let mut rng = rng_from_seed(77);
    for trial in 0..20 {
        let ws = random_weights(&mut rng, 1.0);
        let pts = sample_binomial(300, &DensitySpec::uniform(), 100 + trial).unwrap();
        let c = 4.0; // a power of two keeps every product exact
        let base = minimum_spanning_forest(&build_rgg(pts.clone(), 0.15, ws.clone()).unwrap());
        let scaled = minimum_spanning_forest(&build_rgg(pts, 0.15, ws.scaled(c)).unwrap());
        assert_eq!(scaled.total_weight, c * base.total_weight);
        let pairs = |m: &rgg_mst::mst::MstResult| {
            let mut v: Vec<(u32, u32)> = m.edges.iter().map(|e| (e.i, e.j)).collect();
            v.sort_unstable();
            v
        };
        assert_eq!(pairs(&base), pairs(&scaled));
    }
}

#[test]
fn forest_invariants() {
    for seed in 0..10 {
        let pts = sample_binomial(400, &DensitySpec::uniform(), seed).unwrap();
        let g = build_rgg(pts, 0.06, WeightSpec::euclidean(1.0).unwrap()).unwrap();
        let m = minimum_spanning_forest(&g);
        assert_eq!(m.edges.len(), g.node_count() - m.components);
        assert!((m.total_weight - m.half_incident_weight()).abs() < 1e-9 * m.total_weight);
        let deg_sum: u32 = m.degrees.iter().sum();
        assert_eq!(deg_sum as usize, 2 * m.edges.len());
        assert!(deg_sum as usize <= 2 * g.node_count());
        assert_eq!(m.forest, m.components > 1);
    }
}

#[test]
fn forest_weight_does_not_increase_with_radius() {
    for seed in 0..10 {
        let pts = sample_binomial(500, &DensitySpec::uniform(), 900 + seed).unwrap();
        let ws = WeightSpec::euclidean(1.0).unwrap();
        let a = minimum_spanning_forest(&build_rgg(pts.clone(), 0.1, ws.clone()).unwrap());
        let b = minimum_spanning_forest(&build_rgg(pts, 0.2, ws).unwrap());
        if a.components == 1 && b.components == 1 {
            assert!(b.total_weight <= a.total_weight);
        }
    }
}
