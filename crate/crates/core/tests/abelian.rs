mod common;

use std::f64::consts::PI;

use common::{c, divisor, wall};
use moduli_walls::differential::{normalize_with, PlaneForm};
use moduli_walls::quadrature::QuadOptions;
use moduli_walls::{normalize, sample_divisors, Contour, ContourTag, PlanePath, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[test]
fn symmetric_divisor_has_a_zero_at_two_quadrature_orders() {
    let e1 = c(1.3, 0.6);
    let e = moduli_walls::BranchDivisor::new(e1, -e1.conj()).unwrap();
    for order in [64, 128] {
        let opts = QuadOptions {
            order,
            ..Default::default()
        };
        let d = normalize_with(&e, false, &opts).unwrap();
        assert!(d.a.abs() < 1e-9, "order {order}: a = {}", d.a);
    }
}

#[test]
fn even_periods_vanish() {
    for e in sample_divisors(5, 6) {
        let d = normalize(&e).unwrap();
        for s in [1, 2] {
            let p = d.period(&d.slit_contour(s).unwrap()).unwrap();
            assert!(p.norm() < 1e-9, "{e:?} C{s}: {p}");
        }
        assert!(d.period_residuals.iter().all(|r| *r < 1e-9));
    }
}

#[test]
fn odd_periods_are_imaginary() {
    for e in sample_divisors(6, 6) {
        let d = normalize(&e).unwrap();
        for s in [1, 2] {
            let p = d.period(&d.odd_contour(s)).unwrap();
            assert!(p.re.abs() < 1e-8, "{e:?} odd {s}: {p}");
            assert!(p.im.abs() > 1e-6);
        }
    }
}

#[test]
fn simple_pole_form_has_residue_one() {
    let d = normalize(&divisor((0.5, 1.0), (-0.5, 0.8))).unwrap();
    let z = c(2.0, 0.3);
    let form = PlaneForm(move |x: C64| 1.0 / (x - z));
    let loop_ = Contour::new(PlanePath::circle(z, 0.05, 0.0), ContourTag::C);
    let p = d.period_of(&form, &loop_).unwrap();
    assert!((p - 2.0 * PI * I).norm() < 1e-12, "{p}");
}

#[test]
fn loop_around_infinity_matches_the_residue_at_infinity() {
    let d = normalize(&divisor((0.5, 1.0), (-0.5, 0.8))).unwrap();
    let r = 10.0;
    // on the slit-complement sheet w ≈ σ·x³ far out; then dη ≈ σ·dx/x
    let x = c(r, 0.0);
    let sigma = (d.w_at(x).unwrap() / (x * x * x)).re.signum();
    let big = Contour::new(PlanePath::circle(c(0.0, 0.0), r, 0.0), ContourTag::Custom);
    let p = d.period(&big).unwrap();
    assert!((p - sigma * 2.0 * PI * I).norm() < 1e-9, "{p}");
    assert!(p.re.abs() < 1e-9);
}

#[test]
fn integral_is_zero_at_the_base_point_and_i_pi_at_minus_one() {
    for e in sample_divisors(8, 4).into_iter().chain([wall()]) {
        let d = normalize(&e).unwrap();
        assert_eq!(d.eta(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        let h = d.eta(c(-1.0, 0.0)).unwrap();
        assert!((h - PI * I).norm() < 1e-7, "{e:?}: {h}");
    }
}

#[test]
fn integral_is_path_independent() {
    let d = normalize(&divisor((0.5, 1.0), (-0.5, 0.8))).unwrap();
    for x in [c(2.0, 1.5), c(-1.8, 0.4), c(0.1, 2.4)] {
        let direct = d.eta(x).unwrap();
        for via in [c(3.0, 3.0), c(-2.5, 3.0)] {
            let other = d.eta_w_via(x, via).unwrap().0;
            assert!((other - direct).norm() < 1e-9, "{x} via {via}: {other} vs {direct}");
        }
    }
}

#[test]
fn width_vanishes_at_branch_points_and_is_mirror_symmetric() {
    let d = normalize(&divisor((0.5, 1.0), (-0.5, 0.8))).unwrap();
    for p in [d.divisor.e1, d.divisor.e2, c(1.0, 0.0), c(-1.0, 0.0)] {
        assert!(d.width(p).unwrap() < 1e-8, "W({p})");
    }
    for x in [c(0.3, 0.4), c(2.2, 1.1), c(-1.6, 2.0)] {
        let (a, b) = (d.width(x).unwrap(), d.width(x.conj()).unwrap());
        assert!((a - b).abs() < 1e-10, "{x}: {a} vs {b}");
    }
}

#[test]
fn labeling_puts_e1_above_and_e2_below() {
    let mut seen = 0;
    for e in sample_divisors(9, 12) {
        let d = normalize(&e).unwrap();
        if !d.labeled {
            continue;
        }
        seen += 1;
        assert!(d.eta(d.divisor.e1).unwrap().im > 0.0);
        assert!(d.eta(d.divisor.e2).unwrap().im < 0.0);
    }
    assert!(seen > 0);
}

#[test]
fn conjugation_reflects_the_integral() {
    // η(x̄) = −conj η(x) for a real differential normalized at 1
    let d = normalize(&divisor((1.3, 0.7), (-0.4, 1.9))).unwrap();
    for x in [c(0.3, 0.4), c(2.2, 1.1)] {
        let (a, b) = (d.eta(x).unwrap(), d.eta(x.conj()).unwrap());
        assert!((b + a.conj()).norm() < 1e-10);
    }
}
