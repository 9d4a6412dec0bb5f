mod common;

use common::{c, displaced, divisor, divisor_distance, expansion, wall, wall_seed, WALL_SEEDS};
use moduli_walls::coords::{forward_full, inverse_with};
use moduli_walls::wall::log_grid;
use moduli_walls::{
    continue_path, find_wall, forward, inverse, normalize, BranchDivisor, CellCoordinates, Displacement, Error,
    GraphType, InverseOptions,
};

fn noisy(e: &BranchDivisor, s: f64) -> BranchDivisor {
    BranchDivisor::new(e.e1 + c(s, -0.7 * s), e.e2 + c(-0.8 * s, s)).unwrap()
}

#[test]
fn wall_width_is_the_value_at_the_double_zero() {
    let r = forward_full(&wall()).unwrap();
    let z = r.differential.critical_points().z1;
    let eta = r.differential.eta(z).unwrap();
    let CellCoordinates::GammaZero { w, .. } = r.coordinates else {
        panic!("{:?}", r.coordinates)
    };
    assert!(eta.im.abs() < 1e-8);
    assert!((eta.re - w).abs() < 1e-10);
}

#[test]
fn plus_side_weights_converge_to_the_wall_weights() {
    let CellCoordinates::GammaZero { h1, h2, w } = expansion().wall else {
        unreachable!()
    };
    let mut last = f64::INFINITY;
    for h in [0.05, 0.025, 0.0125] {
        let (t, v) = forward(&displaced(1, h)).unwrap();
        assert_eq!(t, GraphType::GammaPlus);
        let CellCoordinates::GammaPlus { h0, h1: a, h2: b, w: x } = v else {
            unreachable!()
        };
        let gap = h0.abs().max((a - h1).abs()).max((b - h2).abs()).max((x - w).abs());
        assert!(gap < last, "h = {h}: {gap}");
        last = gap;
    }
    assert!(last < 1e-5);
}

#[test]
fn inverse_is_a_fixed_point_at_the_exact_solution() {
    for e in [wall(), displaced(1, 0.05), displaced(-1, 0.05)] {
        let (_, w) = forward(&e).unwrap();
        let back = inverse(&w, &e).unwrap();
        assert!(divisor_distance(&back, &e) < 1e-9);
    }
}

#[test]
fn inverse_recovers_the_divisor_from_a_perturbed_guess() {
    for e in [wall(), displaced(1, 0.05), displaced(-1, 0.05)] {
        let (t, w) = forward(&e).unwrap();
        let (back, res) = inverse_with(&w, &noisy(&e, 1e-3), &InverseOptions::default()).unwrap();
        assert!(res < 1e-10, "{t:?}: residual {res}");
        assert!(divisor_distance(&back, &e) < 1e-8, "{t:?}: {}", divisor_distance(&back, &e));
    }
}

#[test]
fn infeasible_heights_are_rejected_before_iterating() {
    let t = CellCoordinates::GammaZero { h1: 1.0, h2: 0.6, w: 0.1 };
    assert!(matches!(inverse(&t, &wall()), Err(Error::WeightOutOfRange(_))));
    let t = CellCoordinates::GammaPlus { h0: 0.2, h1: 0.8, h2: 0.7, w: 0.1 };
    assert!(matches!(inverse(&t, &wall()), Err(Error::WeightOutOfRange(_))));
    let t = CellCoordinates::GammaMinus { h1: 0.1, h2: 0.2, w1: 0.3, w2: 0.2 };
    assert!(matches!(inverse(&t, &wall()), Err(Error::WeightOutOfRange(_))));
    let t = CellCoordinates::GammaZero { h1: -0.1, h2: 0.2, w: 0.1 };
    assert!(matches!(inverse(&t, &wall()), Err(Error::WeightOutOfRange(_))));
}

#[test]
fn wall_finder_converges_and_is_idempotent() {
    for (a, b) in WALL_SEEDS.iter().take(3) {
        let w = find_wall(&divisor(*a, *b)).unwrap();
        let d = normalize(&w).unwrap();
        assert!(d.discriminant().abs() < 1e-12, "{}", d.discriminant());
        let (t, v) = forward(&w).unwrap();
        assert_eq!(t, GraphType::GammaZero);
        v.check().unwrap();
        let again = find_wall(&w).unwrap();
        assert_eq!(again, w);
    }
}

#[test]
fn wall_finder_moves_only_the_imaginary_part_of_e2() {
    let s = wall_seed();
    let w = wall();
    assert_eq!(w.e1, s.e1);
    assert_eq!(w.e2.re, s.e2.re);
}

#[test]
fn single_step_path_is_one_inverse() {
    let e = displaced(1, 0.05);
    let (_, w) = forward(&e).unwrap();
    let g = noisy(&e, 1e-3);
    let path = continue_path(&g, &[w]).unwrap();
    assert_eq!(path.len(), 1);
    assert_eq!(path[0], inverse(&w, &g).unwrap());
}

#[test]
fn constant_path_gives_identical_divisors() {
    let e = displaced(-1, 0.05);
    let (_, w) = forward(&e).unwrap();
    let path = continue_path(&noisy(&e, 1e-3), &[w, w, w]).unwrap();
    for p in &path {
        assert!(divisor_distance(p, &path[0]) < 1e-9);
    }
}

#[test]
fn shrinking_transversal_weight_approaches_the_wall_monotonically() {
    let x = expansion();
    let targets: Vec<CellCoordinates> = log_grid(1e-6, 1e-3, 7)
        .into_iter()
        .rev()
        .map(|h0| Displacement::transversal((h0 / 2.0).cbrt(), 1).target(x.wall_weights()))
        .collect();
    let path = continue_path(&displaced(1, (1e-3f64 / 2.0).cbrt()), &targets).unwrap();
    let dist: Vec<f64> = path.iter().map(|e| divisor_distance(e, &x.e0)).collect();
    assert!(dist.windows(2).all(|p| p[1] < p[0]), "{dist:?}");
}

#[test]
fn forward_refuses_configurations_outside_the_three_cells() {
    let e = divisor((0.5, 1.0), (-0.5, 0.8));
    let err = forward(&e).unwrap_err();
    assert!(err.is_infeasible(), "{err}");
}
