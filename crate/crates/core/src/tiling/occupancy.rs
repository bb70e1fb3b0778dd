use serde::{Deserialize, Serialize};

use crate::sampling::{DensitySpec, Point, PointSet};

use super::plan::TilingPlan;

/// Per-square counts and the events derived from them.
///
/// `fine_counts`, `isolated` and the gaps are indexed by serpentine label;
/// `coarse_counts` by coarse id `row * W + col`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupancyReport {
    pub total_points: usize,
    pub coarse_counts: Vec<u32>,
    pub fine_counts: Vec<u32>,
    /// Every coarse square keeps `[ε1 n t²/2, 2ε2 n t²]` nodes after removing any single node, `n = total − 1`.
    pub e_dense: bool,
    /// Every coarse square holds `[ε1 n t²/2, 2ε2 n t²]` nodes with `n = n_ref`.
    pub e_poi: bool,
    pub isolated: Vec<bool>,
    pub isolated_count: usize,
    pub q_occupied: usize,
    /// `T_1 .. T_{Q+1}`; a single entry `G² − 1` when nothing is occupied.
    pub gaps: Vec<u64>,
}

fn count_window(n: f64, t: f64, density: &DensitySpec) -> (f64, f64) {
    (density.eps1 * n * t * t / 2.0, 2.0 * density.eps2 * n * t * t)
}

pub fn occupancy(points: &PointSet, plan: &TilingPlan, density: &DensitySpec) -> OccupancyReport {
    occupancy_of(&points.points, plan, density)
}

pub(crate) fn occupancy_of(points: &[Point], plan: &TilingPlan, density: &DensitySpec) -> OccupancyReport {
    let g = plan.side();
    let mut coarse_counts = vec![0u32; plan.coarse_count()];
    let mut fine_counts = vec![0u32; plan.fine_count()];
    for &p in points {
        let (c, r) = plan.fine_cell(p);
        fine_counts[plan.rank[r * g + c] as usize] += 1;
        coarse_counts[plan.coarse_of_cell(c, r)] += 1;
    }

    let (lo, hi) = count_window(plan.n_ref as f64, plan.t, density);
    let e_poi = coarse_counts.iter().all(|&c| c as f64 >= lo && c as f64 <= hi);
    let e_dense = if points.len() < 2 {
        false
    } else {
        let (lo, hi) = count_window((points.len() - 1) as f64, plan.t, density);
        // the removed node sits in one square; the worst case for that square is count − 1
        coarse_counts
            .iter()
            .all(|&c| c >= 1 && (c - 1) as f64 >= lo && c as f64 <= hi)
    };

    let mut isolated = vec![false; fine_counts.len()];
    for (label, &count) in fine_counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let (c, r) = plan.cell_of_label(label);
        let mut alone = true;
        'scan: for dr in -1isize..=1 {
            for dc in -1isize..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nc, nr) = (c as isize + dc, r as isize + dr);
                if nc < 0 || nr < 0 || nc >= g as isize || nr >= g as isize {
                    continue;
                }
                if fine_counts[plan.rank[nr as usize * g + nc as usize] as usize] > 0 {
                    alone = false;
                    break 'scan;
                }
            }
        }
        isolated[label] = alone;
    }
    let isolated_count = isolated.iter().filter(|&&b| b).count();

    let occupied: Vec<u64> = fine_counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(label, _)| label as u64 + 1)
        .collect();
    let total = fine_counts.len() as u64;
    let gaps = gaps_from_labels(&occupied, total);

    OccupancyReport {
        total_points: points.len(),
        coarse_counts,
        fine_counts,
        e_dense,
        e_poi,
        isolated,
        isolated_count,
        q_occupied: occupied.len(),
        gaps,
    }
}

/// Gaps between sorted one-based occupied labels out of `total` squares.
fn gaps_from_labels(occupied: &[u64], total: u64) -> Vec<u64> {
    let Some((&first, &last)) = occupied.first().zip(occupied.last()) else {
        return vec![total - 1];
    };
    let mut gaps = Vec::with_capacity(occupied.len() + 1);
    gaps.push(first - 1);
    gaps.extend(occupied.windows(2).map(|w| w[1] - w[0]));
    gaps.push(total - last);
    gaps
}

/// `Y_α = Σ T_j^α`. With no occupied square this is `(G² − 1)^α`.
pub fn gap_sum(report: &OccupancyReport, alpha: f64) -> f64 {
    report
        .gaps
        .iter()
        .filter(|&&t| t > 0)
        .map(|&t| (t as f64).powf(alpha))
        .sum()
}

/// `Y_α` of a bare point list under `plan`, skipping the event bookkeeping.
pub fn gap_sum_of(points: &[Point], plan: &TilingPlan, alpha: f64) -> f64 {
    let g = plan.side();
    let mut occupied = vec![false; plan.fine_count()];
    for &p in points {
        let (c, r) = plan.fine_cell(p);
        occupied[plan.rank[r * g + c] as usize] = true;
    }
    let labels: Vec<u64> = occupied
        .iter()
        .enumerate()
        .filter(|(_, &o)| o)
        .map(|(l, _)| l as u64 + 1)
        .collect();
    gaps_from_labels(&labels, occupied.len() as u64)
        .into_iter()
        .filter(|&t| t > 0)
        .map(|t| (t as f64).powf(alpha))
        .sum()
}

/// Nine families of interior fine squares, grouped by `(row mod 3, col mod 3)`.
///
/// Family `3·(row mod 3) + (col mod 3)`; entries are serpentine labels.
/// Squares in one family are at Chebyshev distance at least 3, so their
/// 3×3 neighbourhoods are disjoint.
pub fn independence_families(plan: &TilingPlan) -> Vec<Vec<u32>> {
    let g = plan.side();
    let mut families = vec![Vec::new(); 9];
    if g < 3 {
        return families;
    }
    for r in 1..g - 1 {
        for c in 1..g - 1 {
            families[3 * (r % 3) + c % 3].push(plan.rank[r * g + c]);
        }
    }
    for f in &mut families {
        f.sort_unstable();
    }
    families
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(w: usize, l: usize) -> TilingPlan {
        TilingPlan::from_grid(100, 0.9, 1.0, w, l, true).unwrap()
    }

    fn centre(plan: &TilingPlan, label: usize) -> Point {
        let (c, r) = plan.cell_of_label(label);
        Point::new((c as f64 + 0.5) * plan.a, (r as f64 + 0.5) * plan.a)
    }

    #[test]
    fn empty_configuration() {
        let p = plan(5, 3);
        let rep = occupancy_of(&[], &p, &DensitySpec::uniform());
        assert!(!rep.e_dense);
        assert!(!rep.e_poi);
        assert_eq!(rep.q_occupied, 0);
        assert_eq!(rep.isolated_count, 0);
        assert_eq!(gap_sum(&rep, 1.0), 224.0);
        assert!((gap_sum(&rep, 0.5) - 224f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_point_in_fifth_square() {
        let p = plan(5, 3);
        let rep = occupancy_of(&[centre(&p, 4)], &p, &DensitySpec::uniform());
        assert_eq!(rep.q_occupied, 1);
        assert!(rep.isolated[4]);
        assert_eq!(rep.isolated_count, 1);
        assert_eq!(rep.gaps, vec![4, 225 - 5]);
    }

    #[test]
    fn full_occupancy() {
        let p = plan(5, 3);
        let pts: Vec<Point> = (0..p.fine_count()).map(|l| centre(&p, l)).collect();
        let rep = occupancy_of(&pts, &p, &DensitySpec::uniform());
        assert_eq!(rep.q_occupied, 225);
        assert_eq!(rep.isolated_count, 0);
        assert_eq!(rep.gaps[0], 0);
        assert_eq!(*rep.gaps.last().unwrap(), 0);
        assert!(rep.gaps[1..225].iter().all(|&t| t == 1));
        assert_eq!(gap_sum(&rep, 1.0), 224.0);
        assert_eq!(gap_sum(&rep, 2.0), 224.0);
        // 9 nodes per coarse square with n_ref = 100: window [2, 8] fails, at n_ref = 225 it is [4.5, 18]
        assert!(!rep.e_poi);
        let p2 = TilingPlan::from_grid(225, 0.9, 1.0, 5, 3, true).unwrap();
        let rep2 = occupancy_of(&pts, &p2, &DensitySpec::uniform());
        assert!(rep2.e_poi);
        assert!(rep2.e_dense);
    }

    #[test]
    fn isolation_crosses_coarse_boundaries() {
        let p = plan(5, 3);
        let g = p.side();
        // fine cells (2,0) and (3,0) sit in different coarse squares
        let a = Point::new(2.5 * p.a, 0.5 * p.a);
        let b = Point::new(3.5 * p.a, 0.5 * p.a);
        let rep = occupancy_of(&[a, b], &p, &DensitySpec::uniform());
        assert_eq!(rep.isolated_count, 0);
        let c = Point::new(4.5 * p.a, 1.5 * p.a);
        let rep = occupancy_of(&[a, c], &p, &DensitySpec::uniform());
        assert_eq!(rep.isolated_count, 2);
        assert_eq!(g, 15);
    }

    #[test]
    fn gaps_sum_to_total_minus_one() {
        let p = plan(5, 3);
        for labels in [vec![0usize], vec![224], vec![3, 17, 100, 101]] {
            let pts: Vec<Point> = labels.iter().map(|&l| centre(&p, l)).collect();
            let rep = occupancy_of(&pts, &p, &DensitySpec::uniform());
            assert_eq!(rep.gaps.iter().sum::<u64>(), 224);
            assert_eq!(rep.gaps.len(), rep.q_occupied + 1);
            assert_eq!(gap_sum(&rep, 0.7), gap_sum_of(&pts, &p, 0.7));
        }
    }

    #[test]
    fn families_on_nine_by_nine() {
        let p = TilingPlan::from_grid(81, 0.4, 1.0, 9, 1, true).unwrap();
        let fams = independence_families(&p);
        let g = 9;
        let mut all: Vec<u32> = fams.iter().flatten().copied().collect();
        all.sort_unstable();
        let mut interior: Vec<u32> = (1..8)
            .flat_map(|r| (1..8).map(move |c| (r, c)))
            .map(|(r, c)| p.rank[r * g + c])
            .collect();
        interior.sort_unstable();
        assert_eq!(all, interior);
        // residues 1, 2, 0 of 1..=7 occur 3, 2, 2 times
        let per_residue = [2usize, 3, 2];
        for (k, f) in fams.iter().enumerate() {
            assert_eq!(f.len(), per_residue[k / 3] * per_residue[k % 3]);
        }
        for f in &fams {
            for (x, &u) in f.iter().enumerate() {
                for &v in &f[x + 1..] {
                    let (uc, ur) = p.cell_of_label(u as usize);
                    let (vc, vr) = p.cell_of_label(v as usize);
                    assert!(uc.abs_diff(vc).max(ur.abs_diff(vr)) >= 3);
                }
            }
        }
    }
}
