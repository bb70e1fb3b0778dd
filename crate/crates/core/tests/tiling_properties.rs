use rand::Rng;
use rgg_mst::dsu::DisjointSets;
use rgg_mst::mst::minimum_spanning_forest;
use rgg_mst::rgg::{build_rgg, is_connected, WeightSpec};
use rgg_mst::rng::rng_from_seed;
use rgg_mst::sampling::{sample_binomial, sample_coupled, AlphaRegime, Color, DensitySpec, Point};
use rgg_mst::tiling::{
    build_tuni, gap_sum, gap_sum_of, independence_families, lower_bound_count, occupancy, plan_tiling, TilingPlan,
};

const ODD: [usize; 5] = [1, 3, 5, 7, 9];

fn random_plan<R: Rng>(rng: &mut R) -> TilingPlan {
    let w = ODD[rng.random_range(1..5)];
    let l = ODD[rng.random_range(0..4)];
    TilingPlan::from_grid(100, 0.5, 1.0, w, l, true).unwrap()
}

fn random_points<R: Rng>(rng: &mut R, n: usize) -> Vec<Point> {
    (0..n).map(|_| Point::new(rng.random(), rng.random())).collect()
}

#[test]
fn adding_a_point_moves_y_alpha_the_right_way() {
    let mut rng = rng_from_seed(11);
    for _ in 0..400 {
        let plan = random_plan(&mut rng);
        let n = rng.random_range(0..3 * plan.fine_count());
        let mut pts = random_points(&mut rng, n);
        let extra = Point::new(rng.random(), rng.random());
        for alpha in [0.5, 1.0, 2.0] {
            let before = gap_sum_of(&pts, &plan, alpha);
            pts.push(extra);
            let after = gap_sum_of(&pts, &plan, alpha);
            pts.pop();
            let slack = 1e-12 * before.max(1.0);
            if alpha <= 1.0 {
                assert!(after >= before - slack, "alpha {alpha}: {before} -> {after}");
            }
            if alpha >= 1.0 {
                assert!(after <= before + slack, "alpha {alpha}: {before} -> {after}");
            }
        }
    }
}

#[test]
fn gaps_partition_the_label_range() {
    let mut rng = rng_from_seed(12);
    for _ in 0..200 {
        let plan = random_plan(&mut rng);
        let n = rng.random_range(0..2 * plan.fine_count());
        let pts = rgg_mst::sampling::PointSet::fixed(random_points(&mut rng, n));
        let rep = occupancy(&pts, &plan, &DensitySpec::uniform());
        let g2 = plan.fine_count() as u64;
        assert_eq!(rep.gaps.iter().sum::<u64>(), g2 - 1);
        assert_eq!(rep.gaps.len(), rep.q_occupied + 1);
        assert_eq!(gap_sum(&rep, 1.0), (g2 - 1) as f64);
        for alpha in [0.5, 2.0] {
            let y = gap_sum(&rep, alpha);
            assert!((y - gap_sum_of(&pts.points, &plan, alpha)).abs() <= 1e-12 * y.max(1.0));
        }
        assert_eq!(rep.fine_counts.iter().map(|&c| c as usize).sum::<usize>(), n);
        assert_eq!(rep.coarse_counts.iter().map(|&c| c as usize).sum::<usize>(), n);
    }
}

#[test]
fn coupled_green_gaps_dominate_union_gaps() {
    let density = DensitySpec::grid(2, vec![1.5, 0.5, 0.8, 1.2], 0.5, 1.5).unwrap();
    let mut rng = rng_from_seed(13);
    for seed in 0..300 {
        let plan = random_plan(&mut rng);
        let s = sample_coupled(plan.fine_count() as f64, &density, AlphaRegime::AtMostOne, seed).unwrap();
        let green = s.subset(Color::Green);
        for alpha in [0.3, 0.5, 1.0] {
            let yg = gap_sum_of(&green.points, &plan, alpha);
            let yu = gap_sum_of(&s.points, &plan, alpha);
            assert!(yg <= yu + 1e-12 * yu.max(1.0));
        }
    }
}

#[test]
fn families_meet_the_size_bound() {
    for w in [3, 5, 7, 9] {
        for l in [1, 3, 5] {
            let plan = TilingPlan::from_grid(100, 0.5, 1.0, w, l, true).unwrap();
            let g = plan.side() as f64;
            let fams = independence_families(&plan);
            let interior = (plan.side() - 2).pow(2);
            assert_eq!(fams.iter().map(Vec::len).sum::<usize>(), interior);
            for f in &fams {
                assert!(f.len() as f64 >= g * g / 9.0 - 4.0 * g);
                for (x, &p) in f.iter().enumerate() {
                    let (c1, r1) = plan.cell_of_label(p as usize);
                    for &q in &f[x + 1..] {
                        let (c2, r2) = plan.cell_of_label(q as usize);
                        assert!(c1.abs_diff(c2).max(r1.abs_diff(r2)) >= 3);
                    }
                }
            }
        }
    }
}

#[test]
fn dense_instances_are_connected() {
    let mut dense = 0;
    for (n, r, reps) in [(800, 0.8, 30), (3000, 0.5, 4)] {
        let plan = plan_tiling(n, r, 1.0).unwrap();
        for seed in 0..reps {
            let pts = sample_binomial(n + 1, &DensitySpec::uniform(), seed).unwrap();
            let rep = occupancy(&pts, &plan, &DensitySpec::uniform());
            if rep.e_dense {
                dense += 1;
                let g = build_rgg(pts, r, WeightSpec::euclidean(1.0).unwrap()).unwrap();
                assert!(is_connected(&g));
            }
        }
    }
    assert!(dense >= 10, "only {dense} dense instances");
}

#[test]
fn tuni_is_a_spanning_tree_between_the_bounds() {
    let density = DensitySpec::uniform();
    let mut built = 0;
    for seed in 0..20 {
        let n = 800;
        let r = 0.8;
        let plan = plan_tiling(n, r, 1.0).unwrap();
        let pts = sample_binomial(n, &density, 500 + seed).unwrap();
        let rep = occupancy(&pts, &plan, &density);
        let ws = WeightSpec::cell_average(1.0 + (seed % 3) as f64 / 2.0, 2, vec![0.5, 1.0, 1.5, 2.0]).unwrap();
        let g = build_rgg(pts, r, ws.clone()).unwrap();
        let m = minimum_spanning_forest(&g);
        let Some(t) = build_tuni(&g, &plan, &rep).unwrap() else {
            continue;
        };
        built += 1;
        assert_eq!(t.tree.edges.len(), n - 1);
        let mut dsu = DisjointSets::new(n);
        for e in &t.tree.edges {
            assert!(dsu.union(e.i, e.j), "cycle through ({}, {})", e.i, e.j);
            let (p, q) = (g.points.points[e.i as usize], g.points.points[e.j as usize]);
            assert!(p.dist(&q) < r);
            assert_eq!(e.weight, ws.weight(p, q));
        }
        assert!((t.star_weight + t.bridge_weight - t.weight).abs() <= 1e-9 * t.weight);
        assert_eq!(t.bridge_count, rep.q_occupied - 1);
        assert!(m.total_weight <= t.weight * (1.0 + 1e-12));
        assert!(t.within_upper_rhs());
        let lb = lower_bound_count(&g, &m, &plan, &rep, &ws);
        assert!(lb.applicable && lb.holds);
        assert!(lb.bound <= m.total_weight);
    }
    assert!(built >= 15, "e_poi held in only {built} of 20 trials");
}
