mod common;

use common::{c, horner, poly_from_roots};
use moduli_walls::wall::{geometric_grid, log_grid};
use moduli_walls::{json, normalize, sample_divisors, BranchDivisor, CellCoordinates, CriticalSet, Displacement, C64};
use proptest::prelude::*;

fn upper() -> impl Strategy<Value = C64> {
    (-2.5f64..2.5, 0.1f64..2.0).prop_map(|(re, im)| c(re, im))
}

fn divisor() -> impl Strategy<Value = BranchDivisor> {
    (upper(), upper())
        .prop_filter("branch points apart", |(a, b)| (a - b).norm() > 0.05)
        .prop_map(|(e1, e2)| BranchDivisor::new(e1, e2).unwrap())
}

proptest! {
    #[test]
    fn sextic_is_real_on_conjugates(e in divisor(), x in upper()) {
        let p = e.sextic(x);
        let q = e.sextic(x.conj());
        prop_assert!((p.conj() - q).norm() <= 1e-12 * (1.0 + p.norm()));
    }

    #[test]
    fn sextic_matches_expanded_polynomial(e in divisor(), x in upper()) {
        let poly = poly_from_roots(&e.branch_points());
        let want = horner(&poly, x);
        prop_assert!((e.sextic(x) - want).norm() <= 1e-11 * (1.0 + want.norm()));
    }

    #[test]
    fn swapping_keeps_the_curve(e in divisor(), x in upper()) {
        let a = e.sextic(x);
        prop_assert!((a - e.swapped().sextic(x)).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn critical_points_solve_the_quadratic(a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let s = CriticalSet::from_coefficients(a, b);
        for z in [s.z1, s.z2] {
            let r = z * z + z * a + b;
            prop_assert!(r.norm() <= 1e-12 * (1.0 + a.abs() + b.abs() + z.norm_sqr()));
        }
        prop_assert_eq!(s.dsc >= 0.0, s.z1.im == 0.0);
        if s.dsc >= 0.0 {
            prop_assert!(s.z1.re >= s.z2.re);
        } else {
            prop_assert!(s.z1.im > 0.0 && s.z2 == s.z1.conj());
        }
    }

    #[test]
    fn displaced_targets_leave_the_wall(h in 1e-4f64..0.1, plus in any::<bool>(),
                                        h1 in 0.1f64..0.7, h2 in 0.1f64..0.7, w in 0.1f64..2.0) {
        let sign = if plus { 1 } else { -1 };
        let t = Displacement::transversal(h, sign).target((h1, h2, w));
        let d = 2.0 * h.powi(3);
        match t {
            CellCoordinates::GammaPlus { h0, h1: a, h2: b, w: ww } => {
                prop_assert!(plus);
                prop_assert!(h0 > 0.0);
                prop_assert!((h0 - d).abs() <= 1e-15);
                prop_assert!((a + b - h1 - h2).abs() <= 1e-14);
                prop_assert_eq!(ww, w);
            }
            CellCoordinates::GammaMinus { h1: a, h2: b, w1, w2 } => {
                prop_assert!(!plus);
                prop_assert!(w1 < w2);
                prop_assert!((w2 - w1 - 2.0 * d).abs() <= 1e-14);
                prop_assert_eq!((a, b), (h1, h2));
            }
            CellCoordinates::GammaZero { .. } => prop_assert!(false),
        }
    }

    #[test]
    fn grids_are_increasing(lo in 1e-8f64..1e-4, span in 1.5f64..1e4, n in 2usize..30, r in 1.1f64..4.0) {
        let hi = lo * span;
        let g = log_grid(lo, hi, n);
        prop_assert_eq!(g.len(), n);
        prop_assert!(g.windows(2).all(|p| p[0] < p[1]));
        prop_assert_eq!((g[0], g[n - 1]), (lo, hi));
        let g = geometric_grid(lo, hi, r);
        prop_assert!(g.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(*g.last().unwrap() <= hi * (1.0 + 1e-12));
        prop_assert!(g.last().unwrap() * r > hi);
    }

    #[test]
    fn json_floats_round_trip(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..20)) {
        let s = json::to_string(&xs).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(xs, back);
    }

    #[test]
    fn csv_cells_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(json::fmt17(x).parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn normalized_periods_are_imaginary(seed in 0u64..1000) {
        let e = sample_divisors(seed, 1)[0];
        let d = normalize(&e).unwrap();
        prop_assert!(d.period_residuals[0] < 1e-9);
        // mirror symmetry of the level function
        let x = c(0.37, 2.3);
        let (p, q) = (d.eta(x).unwrap(), d.eta(x.conj()).unwrap());
        prop_assert!((p + q.conj()).norm() < 1e-8);
    }
}
