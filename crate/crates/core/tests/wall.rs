mod common;

use std::f64::consts::PI;

use common::{c, divisor, expansion, wall};
use moduli_walls::wall::{d_eta_e, d_eta_e_forms, taylor_check, verify_with, DEtaE};
use moduli_walls::{alpha_beta, normalize, predict_displacement, BranchDivisor, Displacement, Error, Orientation, C64};
use nalgebra::{DMatrix, DVector};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn sample_points() -> Vec<C64> {
    // a deterministic spray over the upper and lower half planes
    (0..20)
        .map(|k| {
            let t = k as f64;
            c(-2.7 + 0.29 * t, 2.1 * (1.3 * t).sin() + 0.05)
        })
        .collect()
}

#[test]
fn both_forms_of_the_branch_derivative_agree() {
    let x = expansion();
    let d = &x.differential;
    for e in [d.divisor.e1, d.divisor.e2] {
        for p in sample_points() {
            let (a, b) = d_eta_e_forms(d, e, p).unwrap();
            assert!((a - b).norm() <= 1e-10 * a.norm(), "{p}: {a} vs {b}");
        }
    }
}

#[test]
fn branch_derivative_decays_like_an_inverse_square() {
    let d = &expansion().differential;
    let e = d.divisor.e1;
    let f3 = d_eta_e(d, e, c(0.6e3, 0.8e3)).unwrap().norm();
    let f4 = d_eta_e(d, e, c(0.6e4, 0.8e4)).unwrap().norm();
    let ratio = f3 / f4;
    assert!((ratio / 100.0 - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn branch_derivative_has_the_predicted_double_pole() {
    let x = expansion();
    let d = &x.differential;
    let z = c(x.z, 0.0);
    for b in &x.branches {
        // g(r) = (x − z)²·f(x) at x = z + i r tends to Ω(z) w(z); Richardson
        // on r, r/2, r/4 removes the O(r) and O(r²) terms
        let g = |r: f64| {
            let p = z + I * r;
            (p - z) * (p - z) * d_eta_e(d, b.e, p).unwrap()
        };
        let r = 1e-3;
        let limit = (8.0 * g(r / 4.0) - 6.0 * g(r / 2.0) + g(r)) / 3.0;
        let expect = b.omega_z * x.w_z;
        assert!((limit - expect).norm() < 1e-6 * expect.norm(), "{limit} vs {expect}");
    }
}

#[test]
fn branch_derivative_refuses_its_poles_and_foreign_points() {
    let d = &expansion().differential;
    let e = d.divisor.e1;
    assert!(matches!(d_eta_e(d, e, c(expansion().z, 0.0)), Err(Error::PoleEvaluation(_))));
    assert!(matches!(d_eta_e(d, e, e), Err(Error::PoleEvaluation(_))));
    assert!(DEtaE::new(&d.divisor, c(0.3, 0.3), 1.5).is_err());
}

#[test]
fn residues_match_quadrature_on_the_contour() {
    for b in &expansion().branches {
        for (q, r) in [(b.ic, b.ic_residue), (b.icy, b.icy_residue)] {
            assert!((q - r).norm() < 1e-6 * r.norm(), "{q} vs {r}");
        }
        assert!(b.i1.norm().is_finite() && b.i1.norm() > 1e-8);
    }
}

#[test]
fn alpha_and_beta_follow_from_w_at_the_double_zero() {
    let x = expansion();
    assert!((x.alpha.powi(3) - 1.0 / (3.0 * x.w_z)).abs() < 1e-14 * x.alpha.powi(3));
    assert!((x.beta4 + x.dw_z / (4.0 * x.w_z * x.w_z)).abs() < 1e-14 * x.beta4.abs());
    let (a, b4, z) = alpha_beta(&wall()).unwrap();
    assert_eq!((a, b4, z), (x.alpha, x.beta4, x.z));
}

/// Least-squares polynomial fit of `η − W` on the real segment through `z`.
fn real_axis_taylor(deg: usize, shrink: f64) -> Vec<f64> {
    let x = expansion();
    let d = &x.differential;
    let (_, _, w) = x.wall_weights();
    let r = x.radius * shrink;
    let n = 41;
    let ts: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
    let a = DMatrix::from_fn(n, deg + 1, |i, j| ts[i].powi(j as i32));
    let y = DVector::from_iterator(n, ts.iter().map(|t| (d.eta(c(x.z + r * t, 0.0)).unwrap() - w).re));
    let sol = a.svd(true, true).solve(&y, 1e-14).unwrap();
    (0..=deg).map(|k| sol[k] / r.powi(k as i32)).collect()
}

#[test]
fn taylor_coefficients_at_the_double_zero() {
    let x = expansion();
    let fit = real_axis_taylor(16, 0.5);
    let (a3, b4) = (x.alpha.powi(3), x.beta4);
    assert!(fit[0].abs() < 1e-10 && fit[1].abs() < 1e-8 && fit[2].abs() < 1e-7);
    // η''' = 6α³ = 2/w(z)
    assert!((6.0 * fit[3] - 2.0 / x.w_z).abs() < 1e-6 * (2.0 / x.w_z), "{}", fit[3]);
    assert!((fit[4] - b4).abs() < 1e-5 * b4.abs(), "{} vs {b4}", fit[4]);
    let t = taylor_check(x).unwrap();
    assert!(t.rel3 < 1e-6 && t.rel4 < 1e-5, "{t:?}");
    assert!((t.c3.re - a3).abs() < 1e-6 * a3);
}

#[test]
fn symmetric_divisor_has_its_critical_points_symmetric_about_zero() {
    let e1 = c(1.3, 0.6);
    let e = BranchDivisor::new(e1, -e1.conj()).unwrap();
    let d = normalize(&e).unwrap();
    assert!(d.a.abs() < 1e-9);
    // P(0) = −|e1|²|e2|² on this sheet convention, so w(0) is imaginary
    let p0 = e.sextic(c(0.0, 0.0));
    assert!((p0.re + e.e1.norm_sqr() * e.e2.norm_sqr()).abs() < 1e-12 && p0.im.abs() < 1e-12);
    // and a symmetric divisor is not a wall point unless b = 0
    assert!(alpha_beta(&e).is_err());
}

#[test]
fn off_wall_divisors_have_no_expansion() {
    let e = divisor((1.8, 0.31606005), (2.0, 1.1));
    assert!(matches!(moduli_walls::expansion_data(&e), Err(Error::Unsupported(_))));
}

#[test]
fn zero_displacement_predicts_no_motion() {
    let x = expansion();
    let d = Displacement::tangential(0.0, 0.0, 0.0);
    for o in Orientation::all() {
        for k in 0..2 {
            assert_eq!(predict_displacement(x, k, &d, o), c(0.0, 0.0));
        }
    }
}

#[test]
fn transversal_prediction_is_the_cube_root_term() {
    let x = expansion();
    let h = 0.03;
    let d = Displacement::transversal(h, 1);
    for k in 0..2 {
        let p = predict_displacement(x, k, &d, Orientation::default());
        let expect = 3.0 * h * h * x.branches[k].icy / (2.0 * PI * I);
        assert!((p - expect).norm() < 1e-15 * expect.norm());
    }
}

#[test]
fn tangential_prediction_is_linear() {
    let x = expansion();
    let d1 = Displacement::tangential(1e-3, -2e-3, 0.5e-3);
    let d2 = Displacement::tangential(-0.7e-3, 0.4e-3, 2e-3);
    let sum = Displacement::tangential(d1.dh1 + d2.dh1, d1.dh2 + d2.dh2, d1.dw + d2.dw);
    for o in Orientation::all() {
        for k in 0..2 {
            let lhs = predict_displacement(x, k, &sum, o);
            let rhs = predict_displacement(x, k, &d1, o) + predict_displacement(x, k, &d2, o);
            assert!((lhs - rhs).norm() < 1e-15 * lhs.norm().max(1e-3));
        }
    }
}

#[test]
fn zero_displacement_solves_to_the_wall_point() {
    let x = expansion();
    let r = verify_with(x, &Displacement::tangential(0.0, 0.0, 0.0), Orientation::default()).unwrap();
    assert!(r.solver_residual < 1e-10);
    assert!(r.delta_actual.iter().all(|d| d.norm() < 1e-9), "{:?}", r.delta_actual);
}
