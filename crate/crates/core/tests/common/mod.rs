//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use std::sync::OnceLock;

use moduli_walls::{expansion_data, find_wall, BranchDivisor, WallExpansion, C64};

/// Seeds whose `Im e2` scan brackets a wall point.
pub const WALL_SEEDS: [((f64, f64), (f64, f64)); 5] = [
    ((1.8, 0.31606005), (2.0, 1.0)),
    ((1.8, 0.36102), (1.3, 0.6)),
    ((1.5, 0.4), (2.0, 1.0)),
    ((1.9, 0.5), (2.5, 1.5)),
    ((1.7, 0.3), (2.3, 0.9)),
];

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn divisor(e1: (f64, f64), e2: (f64, f64)) -> BranchDivisor {
    BranchDivisor::from_parts(e1, e2).unwrap()
}

pub fn wall_seed() -> BranchDivisor {
    divisor(WALL_SEEDS[0].0, WALL_SEEDS[0].1)
}

/// The wall point found from the first seed.
pub fn wall() -> BranchDivisor {
    static W: OnceLock<BranchDivisor> = OnceLock::new();
    *W.get_or_init(|| find_wall(&wall_seed()).unwrap())
}

pub fn expansion() -> &'static WallExpansion {
    static X: OnceLock<WallExpansion> = OnceLock::new();
    X.get_or_init(|| expansion_data(&wall()).unwrap())
}

/// Coefficients of `∏ (x − r)`, lowest degree first.
pub fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![c(1.0, 0.0)];
    for r in roots {
        let mut q = vec![c(0.0, 0.0); p.len() + 1];
        for (k, a) in p.iter().enumerate() {
            q[k + 1] += a;
            q[k] -= a * r;
        }
        p = q;
    }
    p
}

pub fn horner(p: &[C64], x: C64) -> C64 {
    p.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * x + a)
}

pub fn divisor_distance(a: &BranchDivisor, b: &BranchDivisor) -> f64 {
    ((a.e1 - b.e1).norm_sqr() + (a.e2 - b.e2).norm_sqr()).sqrt()
}

/// The divisor next to the wall with transversal weight `h` on side `sign`.
pub fn displaced(sign: i8, h: f64) -> BranchDivisor {
    let d = moduli_walls::Displacement::transversal(h, sign);
    moduli_walls::wall::solve_displaced(expansion(), &d).unwrap().0
}

/// One divisor per cell: `Γ₀`, `Γ₊`, `Γ₋`.
pub fn cell_representatives() -> [BranchDivisor; 3] {
    [wall(), displaced(1, 0.05), displaced(-1, 0.05)]
}
