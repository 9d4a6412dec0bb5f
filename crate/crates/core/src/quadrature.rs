//! Gauss–Legendre rules and the shared quadrature options.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Gauss–Legendre rule on `[0, 1]`, nodes ascending.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Computes the `n`-point rule by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th root (descending from 1)
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[n - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    Rule { nodes, weights }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule; rules are built once per order and shared.
pub fn rule(n: usize) -> &'static Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("rule cache poisoned");
    map.entry(n)
        .or_insert_with(|| Box::leak(Box::new(gauss_legendre(n))))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    /// Nodes per panel.
    pub order: usize,
    /// Absolute tolerance for a whole path; split between panels.
    pub tol: f64,
    /// Maximum bisection depth per panel.
    pub max_depth: u32,
    /// Regular panels may not come closer than this to a branch point.
    pub exclusion: f64,
    /// Panel length as a fraction of the distance to the nearest branch point.
    pub panel_factor: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            order: 32,
            tol: 1e-13,
            max_depth: 14,
            exclusion: 1e-9,
            panel_factor: 0.2,
        }
    }
}
