//! The curve family `w² = (x² − 1)(x − e1)(x − ē1)(x − e2)(x − ē2)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// The two free branch points in the upper half plane; `±1` are implicit.
///
/// Serialized as `{"e1":[re,im],"e2":[re,im]}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchDivisor {
    pub e1: C64,
    pub e2: C64,
}

impl BranchDivisor {
    pub fn new(e1: C64, e2: C64) -> Result<Self> {
        let d = BranchDivisor { e1, e2 };
        d.validate()?;
        Ok(d)
    }

    pub fn from_parts(e1: (f64, f64), e2: (f64, f64)) -> Result<Self> {
        Self::new(C64::new(e1.0, e1.1), C64::new(e2.0, e2.1))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, e) in [("e1", self.e1), ("e2", self.e2)] {
            if !(e.re.is_finite() && e.im.is_finite()) {
                return Err(Error::InvalidDivisor(format!("{name} is not finite")));
            }
            if e.im <= 0.0 {
                return Err(Error::InvalidDivisor(format!(
                    "{name} = {e} must lie in the upper half plane"
                )));
            }
        }
        if (self.e1 - self.e2).norm() <= 1e-12 * self.scale() {
            return Err(Error::InvalidDivisor("e1 and e2 coincide".into()));
        }
        Ok(())
    }

    /// The six branch points in the order `1, −1, e1, ē1, e2, ē2`.
    pub fn branch_points(&self) -> [C64; 6] {
        [
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            self.e1,
            self.e1.conj(),
            self.e2,
            self.e2.conj(),
        ]
    }

    pub fn swapped(&self) -> Self {
        BranchDivisor { e1: self.e2, e2: self.e1 }
    }

    pub fn scale(&self) -> f64 {
        1f64.max(self.e1.norm()).max(self.e2.norm())
    }

    pub fn sextic(&self, x: C64) -> C64 {
        sextic(self, x)
    }

    /// P'(x) by the product rule (exact at the roots).
    pub fn sextic_derivative(&self, x: C64) -> C64 {
        let r = self.branch_points();
        let mut sum = C64::new(0.0, 0.0);
        for i in 0..6 {
            let mut p = C64::new(1.0, 0.0);
            for (j, rj) in r.iter().enumerate() {
                if j != i {
                    p *= x - rj;
                }
            }
            sum += p;
        }
        sum
    }

    /// Distance from `x` to the nearest branch point, and that point's index.
    pub fn nearest_branch_point(&self, x: C64) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (i, p) in self.branch_points().iter().enumerate() {
            let d = (x - p).norm();
            if d < best.0 {
                best = (d, i);
            }
        }
        best
    }

    /// Index of the branch point equal to `x` (to rounding), if any.
    pub fn branch_point_at(&self, x: C64) -> Option<usize> {
        let (d, i) = self.nearest_branch_point(x);
        (d <= 1e-13 * self.scale()).then_some(i)
    }

    /// The coefficient `c` with `w ≈ c·√(x − 1)` near the base point, where
    /// `√` has its cut along the positive real axis direction: `arg(x−1) ∈ [0, 2π)`.
    /// This makes `w > 0` on the upper bank of `(1, ∞)`.
    pub fn base_sqrt_coefficient(&self) -> f64 {
        let p1 = 2.0 * (C64::new(1.0, 0.0) - self.e1).norm_sqr() * (C64::new(1.0, 0.0) - self.e2).norm_sqr();
        p1.sqrt()
    }

    /// `w` near the base point 1 on the base sheet, to leading order.
    pub fn base_w_leading(&self, x: C64) -> C64 {
        let d = x - 1.0;
        let mut arg = d.arg();
        if arg < 0.0 {
            arg += 2.0 * std::f64::consts::PI;
        }
        C64::from_polar(self.base_sqrt_coefficient() * d.norm().sqrt(), 0.5 * arg)
    }
}

/// `(x² − 1)(x − e1)(x − ē1)(x − e2)(x − ē2)` evaluated as a product of
/// real-coefficient quadratics.
pub fn sextic(e: &BranchDivisor, x: C64) -> C64 {
    let q = |p: C64| x * x - 2.0 * p.re * x + p.norm_sqr();
    (x * x - 1.0) * q(e.e1) * q(e.e2)
}

/// Square root of the sextic at `x` with the sign closest to `prev`.
#[inline]
pub(crate) fn sqrt_near(e: &BranchDivisor, x: C64, prev: C64) -> C64 {
    pick_sign(sextic(e, x).sqrt(), prev)
}

#[inline]
pub(crate) fn pick_sign(w: C64, prev: C64) -> C64 {
    if (w - prev).norm_sqr() > (w + prev).norm_sqr() {
        -w
    } else {
        w
    }
}

/// `n` pseudo-random valid divisors with `Re e ∈ [−2.5, 2.5]`,
/// `Im e ∈ [0.1, 2]`, branch points at least 0.1 apart. Same seed, same list.
pub fn sample_divisors(seed: u64, n: usize) -> Vec<BranchDivisor> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut draw = || C64::new(rng.gen_range(-2.5..2.5), rng.gen_range(0.1..2.0));
        let d = BranchDivisor { e1: draw(), e2: draw() };
        let bp = d.branch_points();
        let sep = (0..6)
            .flat_map(|i| (i + 1..6).map(move |j| (i, j)))
            .map(|(i, j)| (bp[i] - bp[j]).norm())
            .fold(f64::INFINITY, f64::min);
        if sep >= 0.1 {
            out.push(d);
        }
    }
    out
}
