mod common;

use rgg_mst::bounds::{
    a_n_sequence, bounds_table, c1, c2, geometric_moment, optimize_betas, theorem_thresholds, BoundParams, DeltaRule,
};

use common::{c1_formula, c2_closed_form};

#[test]
fn homogeneous_examples() {
    let p = BoundParams::homogeneous(1.0);
    let want = 2.0 * (1.0 - (-0.0625f64).exp()) * (-0.5f64).exp();
    assert!((c1(0.25, &p) - want).abs() < 1e-15);
    assert!((c1(0.25, &p) - 0.073496).abs() < 5e-7);
    assert!((c2(1.0, &p).unwrap() - 5.16395).abs() < 5e-6);
    assert!((c2(1.4, &p).unwrap() - 4.463).abs() < 5e-4);
    for (prob, want) in [(0.5, 2.0), (1.0 - (-1f64).exp(), 1.58198)] {
        assert!((geometric_moment(1.0, prob).unwrap() - want).abs() < 1e-5);
    }
    assert!((geometric_moment(2.0, 0.5).unwrap() - 6.0).abs() < 1e-10);
}

#[test]
fn constants_match_direct_formulas() {
    for &(eps1, eps2, xi_min, xi_max) in &[(1.0, 1.0, 1.0, 1.0), (0.5, 1.5, 0.25, 3.0), (0.9, 4.0, 1.0, 1.0)] {
        for alpha in [1.0, 2.0] {
            for rule in [DeltaRule::Constant, DeltaRule::Coupling] {
                let p = BoundParams {
                    eps1,
                    eps2,
                    xi_min,
                    xi_max,
                    alpha,
                    delta_rule: rule,
                };
                let delta = match (rule, alpha <= 1.0) {
                    (DeltaRule::Constant, true) | (DeltaRule::Coupling, false) => eps1,
                    _ => eps2,
                };
                for a in [0.1, 0.5, 1.0, 1.39, 3.0] {
                    let got1 = c1(a, &p);
                    let want1 = c1_formula(a, alpha, eps1, eps2, xi_min);
                    assert!((got1 - want1).abs() <= 1e-14 * want1.abs().max(1e-300));
                    let got2 = c2(a, &p).unwrap();
                    let want2 = c2_closed_form(a, alpha, delta, xi_max);
                    assert!((got2 - want2).abs() <= 1e-9 * want2, "a={a} alpha={alpha}: {got2} vs {want2}");
                }
            }
        }
    }
}

#[test]
fn c1_is_below_its_envelope() {
    let p = BoundParams {
        eps1: 0.7,
        eps2: 1.3,
        xi_min: 0.8,
        xi_max: 1.2,
        alpha: 1.5,
        delta_rule: DeltaRule::Constant,
    };
    for i in 1..200 {
        let a = i as f64 * 0.025;
        let env = 0.5 * p.xi_min * a.powf(p.alpha - 2.0) * (-8.0 * p.eps2 * a * a).exp();
        assert!(c1(a, &p) <= env);
    }
    let tiny = BoundParams::homogeneous(1.0);
    assert!(c1(1e-6, &tiny) < 1e-5);
}

#[test]
fn moment_is_monotone_in_alpha_and_inverse_p() {
    let ps = [0.05, 0.1, 0.2, 0.3, 0.45];
    for alpha in [1.0, 1.5, 2.0, 2.5, 3.0] {
        let vals: Vec<f64> = ps.iter().map(|&p| geometric_moment(alpha, p).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] > w[1]));
    }
    for &p in &ps {
        let vals: Vec<f64> = [1.0, 1.5, 2.0, 3.0].iter().map(|&a| geometric_moment(a, p).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn optima_scale_with_the_weight_factor() {
    let base = BoundParams::homogeneous(1.0);
    let o = optimize_betas(&base, 1e-9).unwrap();
    for c in [0.5, 3.0] {
        let s = optimize_betas(&base.with_xi_scaled(c), 1e-9).unwrap();
        assert!((s.beta_low - c * o.beta_low).abs() <= 1e-9 * s.beta_low);
        assert!((s.beta_up - c * o.beta_up).abs() <= 1e-9 * s.beta_up);
        assert!((s.argmax_a - o.argmax_a).abs() < 1e-6);
        assert!((s.argmin_a - o.argmin_a).abs() < 1e-6);
    }
}

#[test]
fn optima_dominate_a_fine_grid() {
    for alpha in [0.5, 1.0, 2.0] {
        let p = BoundParams::homogeneous(alpha);
        let o = optimize_betas(&p, 1e-9).unwrap();
        for row in bounds_table(&p, 0.05, 5.0, 400).unwrap() {
            assert!(row.c1 <= o.beta_low * (1.0 + 1e-12));
            assert!(row.c2 >= o.beta_up * (1.0 - 1e-12));
        }
    }
}

#[test]
fn threshold_examples() {
    let p = BoundParams::homogeneous(1.0);
    let t = theorem_thresholds(10_000, 0.25, &p).unwrap();
    assert!((t.lower_factor + 0.8).abs() < 1e-12);
    assert!(t.lower_vacuous);
    assert_eq!(t.lower, 0.0);
    assert!((t.upper_factor - (1.0 + 10f64.powf(-4.0 / 17.0))).abs() < 1e-12);
    assert!((t.upper_factor - 1.582).abs() < 1e-3);
    let t = theorem_thresholds(1_000_000_000_000, 0.25, &p).unwrap();
    assert!((t.lower_factor - 0.982).abs() < 1e-12);
    assert!(!t.lower_vacuous && t.lower > 0.0);
}

#[test]
fn a_n_examples() {
    let p = BoundParams::homogeneous(1.0);
    let exact = a_n_sequence(1.0, 1000, Some(1.0), &p).unwrap();
    assert_eq!(exact.c1_gap, 0.0);
    assert_eq!(exact.c2_gap, 0.0);
    let off = a_n_sequence(1.0, 1000, Some(1.1), &p).unwrap();
    let want = (c2_closed_form(1.1, 1.0, 1.0, 1.0) - c2_closed_form(1.0, 1.0, 1.0, 1.0)).abs();
    assert!((off.c2_gap - want).abs() < 1e-9);
    assert!(off.c2_gap > 0.0);
    let widths: Vec<f64> = [1e3, 1e4, 1e5, 1e6, 1e7]
        .iter()
        .map(|&n| {
            let r = a_n_sequence(1.0, n as usize, None, &p).unwrap();
            r.interval_hi - r.interval_lo
        })
        .collect();
    assert!(widths.windows(2).all(|w| w[1] < w[0]));
}
