//! Expansion data at a wall point and the numerical check of the
//! root-type singularity of the branch points across the wall.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::coords::{forward_of, inverse_with, CellCoordinates, InverseOptions};
use crate::differential::{normalize, Contour, ContourTag, DistinguishedDifferential, Form};
use crate::path::{integrate, PlanePath, Segment, StartSheet};
use crate::{BranchDivisor, Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest |Dsc| accepted as "on the wall".
pub const WALL_DSC_TOL: f64 = 1e-9;

/// `dη^e = Ω(x)·w/(x − z)² dx` with `Ω(x) = (e² − 1)/((x² − 1)(x − e))`.
#[derive(Clone, Copy, Debug)]
pub struct DEtaE {
    pub e: C64,
    /// The branch points other than `±1`, `e` and `ē`.
    pub others: [C64; 2],
    pub z: f64,
}

impl DEtaE {
    pub fn new(e0: &BranchDivisor, e: C64, z: f64) -> Result<Self> {
        let pts = [e0.e1, e0.e1.conj(), e0.e2, e0.e2.conj()];
        let Some(k) = pts.iter().position(|p| (p - e).norm() < 1e-14) else {
            return Err(Error::InvalidDivisor(format!("{e} is not a free branch point")));
        };
        let mut others = [C64::new(0.0, 0.0); 2];
        let mut j = 0;
        for (i, p) in pts.iter().enumerate() {
            if i != k && i != (k ^ 1) {
                others[j] = *p;
                j += 1;
            }
        }
        Ok(DEtaE { e, others, z })
    }

    pub fn omega(&self, x: C64) -> C64 {
        (self.e * self.e - 1.0) / ((x * x - 1.0) * (x - self.e))
    }

    pub fn omega_prime(&self, x: C64) -> C64 {
        let om = self.omega(x);
        -om * (2.0 * x / (x * x - 1.0) + 1.0 / (x - self.e))
    }

    /// The second algebraic form, `(e²−1)(x−ē)(x−e′)(x−ē′)/((x−z)²·w)`.
    pub fn coefficient_alt(&self, x: C64, w: C64) -> C64 {
        (self.e * self.e - 1.0) * (x - self.e.conj()) * (x - self.others[0]) * (x - self.others[1])
            / ((x - self.z) * (x - self.z) * w)
    }
}

impl Form for DEtaE {
    fn coefficient(&self, x: C64, w: C64) -> C64 {
        self.omega(x) * w / ((x - self.z) * (x - self.z))
    }
}

/// Coefficient of `dη^e` at `x` on the slit-complement branch, with both
/// algebraic forms returned.
pub fn d_eta_e_forms(d: &DistinguishedDifferential, e: C64, x: C64) -> Result<(C64, C64)> {
    let z = -0.5 * d.a;
    let scale = d.divisor.scale();
    for p in [C64::new(z, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0), e] {
        if (x - p).norm() <= 1e-12 * scale {
            return Err(Error::PoleEvaluation(format!("{x}")));
        }
    }
    let f = DEtaE::new(&d.divisor, e, z)?;
    let w = d.w_at(x)?;
    Ok((f.coefficient(x, w), f.coefficient_alt(x, w)))
}

pub fn d_eta_e(d: &DistinguishedDifferential, e: C64, x: C64) -> Result<C64> {
    Ok(d_eta_e_forms(d, e, x)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchExpansion {
    pub e: C64,
    pub omega_z: C64,
    pub domega_z: C64,
    pub i1: C64,
    pub i2: C64,
    pub ic: C64,
    pub icy: C64,
    pub ic_residue: C64,
    pub icy_residue: C64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WallExpansion {
    pub e0: BranchDivisor,
    pub a: f64,
    pub b: f64,
    pub z: f64,
    pub w_z: f64,
    pub dw_z: f64,
    pub alpha: f64,
    pub beta4: f64,
    /// Wall weights `(H1, H2, W)`.
    pub wall: CellCoordinates,
    /// Radius of the contour `C` around `z`.
    pub radius: f64,
    pub branches: [BranchExpansion; 2],
    #[serde(skip)]
    pub differential: DistinguishedDifferential,
}

fn on_wall(e0: &BranchDivisor) -> Result<DistinguishedDifferential> {
    let d = normalize(e0)?;
    if d.discriminant().abs() > WALL_DSC_TOL {
        return Err(Error::Unsupported(format!(
            "not a wall point: Dsc = {:e}",
            d.discriminant()
        )));
    }
    Ok(d)
}

/// `w(z)` and `w'(z)` on the base sheet at the double zero.
fn w_at_zero(d: &DistinguishedDifferential) -> Result<(f64, f64, f64)> {
    let z = -0.5 * d.a;
    let w = d.w_at(C64::new(z, 0.0))?;
    if !(w.re > 0.0) || w.im.abs() > 1e-10 * w.norm() {
        return Err(Error::BranchInconsistency(format!(
            "w(z) = {w} at z = {z} is not real positive"
        )));
    }
    let dw = d.divisor.sextic_derivative(C64::new(z, 0.0)).re / (2.0 * w.re);
    Ok((z, w.re, dw))
}

/// `(α, β⁴, z)` with `α³ = 1/(3w(z))`, `β⁴ = −w'(z)/(4w(z)²)`.
pub fn alpha_beta(e0: &BranchDivisor) -> Result<(f64, f64, f64)> {
    let d = on_wall(e0)?;
    let (z, w, dw) = w_at_zero(&d)?;
    Ok(((1.0 / (3.0 * w)).cbrt(), -dw / (4.0 * w * w), z))
}

/// Samples `(x, w, η)` at `n` equally spaced points of the circle
/// `|x − z| = r`, starting at `z + r` and continuing analytically.
pub fn circle_samples(d: &DistinguishedDifferential, z: f64, r: f64, n: usize) -> Result<Vec<(C64, C64, C64)>> {
    let x0 = C64::new(z + r, 0.0);
    let (mut eta, mut w) = d.eta_w(x0)?;
    let mut out = Vec::with_capacity(n);
    let (a, b) = (d.a, d.b);
    let f = |x: C64, w: C64, dx: C64| [(x * x + a * x + b) * dx / w];
    for j in 0..n {
        let th = 2.0 * PI * j as f64 / n as f64;
        out.push((C64::new(z, 0.0) + C64::from_polar(r, th), w, eta));
        let arc = PlanePath {
            segments: vec![Segment::Arc {
                center: C64::new(z, 0.0),
                radius: r,
                start: th,
                sweep: 2.0 * PI / n as f64,
            }],
        };
        let s = integrate::<1, _>(&d.divisor, &arc, StartSheet::W(w), false, &f, &d.opts)?;
        eta += s.values[0];
        w = s.w_end;
    }
    let closure = (eta - out[0].2).norm();
    if closure > 1e-10 * (1.0 + eta.norm()) || (w - out[0].1).norm() > 1e-10 * w.norm() {
        return Err(Error::BranchInconsistency(format!(
            "continuation around z does not close (Δη = {closure:e})"
        )));
    }
    Ok(out)
}

/// Taylor coefficients `c_k`, `k < kmax`, of `η(x) − W` at `z` from the
/// discrete Fourier transform of circle samples (the least-squares fit in
/// the trigonometric basis).
pub fn taylor_fit(samples: &[(C64, C64, C64)], r: f64, w: f64, kmax: usize) -> Vec<C64> {
    let n = samples.len() as f64;
    (0..kmax)
        .map(|k| {
            let mut s = C64::new(0.0, 0.0);
            for (j, (_, _, eta)) in samples.iter().enumerate() {
                let th = 2.0 * PI * j as f64 / n;
                s += (eta - w) * C64::from_polar(1.0, -(k as f64) * th);
            }
            s / (n * r.powi(k as i32))
        })
        .collect()
}

fn contour_radius(d: &DistinguishedDifferential, z: f64) -> f64 {
    let zc = C64::new(z, 0.0);
    let db = d.divisor.nearest_branch_point(zc).0;
    let ds = d.slits.distance_to(zc);
    0.5 * db.min(ds)
}

fn winding(vals: &[C64]) -> f64 {
    let mut t = 0.0;
    for k in 0..vals.len() {
        let a = vals[k];
        let b = vals[(k + 1) % vals.len()];
        t += (b / a).arg();
    }
    t / (2.0 * PI)
}

const CIRCLE_NODES: usize = 256;

/// All ingredients of the expansion at the wall point `e0`.
pub fn expansion_data(e0: &BranchDivisor) -> Result<WallExpansion> {
    let d = on_wall(e0)?;
    let fw = forward_of(d.clone())?;
    let wall = fw.coordinates;
    let CellCoordinates::GammaZero { w: wz_val, .. } = wall else {
        return Err(Error::Unsupported("wall point does not classify as GammaZero".into()));
    };
    let (z, w_z, dw_z) = w_at_zero(&d)?;
    let alpha3 = 1.0 / (3.0 * w_z);
    let alpha = alpha3.cbrt();
    let beta4 = -dw_z / (4.0 * w_z * w_z);

    let mut r = contour_radius(&d, z);
    let samples = loop {
        let s = circle_samples(&d, z, r, CIRCLE_NODES)?;
        let vals: Vec<C64> = s.iter().map(|(_, _, eta)| eta - wz_val).collect();
        if (winding(&vals) - 3.0).abs() < 1e-6 {
            break s;
        }
        r *= 0.5;
        if r < 1e-6 {
            return Err(Error::BranchInconsistency("η − W does not wind three times around z".into()));
        }
    };

    // y = (η − W)^{1/3}, continuous, real positive at z + r
    let mut ys = Vec::with_capacity(samples.len());
    let mut prev = C64::new(0.0, 0.0);
    for (j, (_, _, eta)) in samples.iter().enumerate() {
        let v = eta - wz_val;
        let root = v.powf(1.0 / 3.0);
        let y = if j == 0 {
            C64::new(v.re.cbrt(), 0.0)
        } else {
            (0..3)
                .map(|k| root * C64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0))
                .min_by(|a, b| (a - prev).norm().total_cmp(&(b - prev).norm()))
                .unwrap()
        };
        ys.push(y);
        prev = y;
    }
    if (ys[ys.len() - 1] - ys[0]).norm() > 0.2 * ys[0].norm() {
        return Err(Error::BranchInconsistency("cube root has monodromy on C".into()));
    }

    let mut branches = Vec::new();
    for e in [d.divisor.e1, d.divisor.e2] {
        let form = DEtaE::new(&d.divisor, e, z)?;
        let zc = C64::new(z, 0.0);
        let omega_z = form.omega(zc);
        let domega_z = form.omega_prime(zc);
        let ic_residue = 2.0 * PI * I * (domega_z / (3.0 * alpha3) - 4.0 * beta4 * omega_z / (9.0 * alpha3 * alpha3));
        let icy_residue = 2.0 * PI * I * omega_z / (3.0 * alpha * alpha);
        let n = samples.len() as f64;
        let mut ic = C64::new(0.0, 0.0);
        let mut icy = C64::new(0.0, 0.0);
        for (j, (x, w, _)) in samples.iter().enumerate() {
            let dx = I * (x - zc) * (2.0 * PI / n);
            let g = form.coefficient(*x, *w) * dx;
            ic += g;
            icy += ys[j] * g;
        }
        for (name, q, res) in [("IC", ic, ic_residue), ("ICy", icy, icy_residue)] {
            let rel = (q - res).norm() / res.norm();
            if !(rel <= 1e-5) {
                return Err(Error::ResidueMismatch {
                    quantity: format!("{name} at e = {e}"),
                    rel,
                });
            }
        }
        let i1 = d.period_of(&form, &d.slit_contour(1)?)?;
        let i2 = d.period_of(&form, &d.slit_contour(2)?)?;
        branches.push(BranchExpansion {
            e,
            omega_z,
            domega_z,
            i1,
            i2,
            ic,
            icy,
            ic_residue,
            icy_residue,
        });
    }
    Ok(WallExpansion {
        e0: d.divisor,
        a: d.a,
        b: d.b,
        z,
        w_z,
        dw_z,
        alpha,
        beta4,
        wall,
        radius: r,
        branches: [branches[0], branches[1]],
        differential: d,
    })
}

impl WallExpansion {
    /// The contour `C` used for `IC`, `ICy`.
    pub fn contour_c(&self) -> Contour {
        Contour::new(PlanePath::circle(C64::new(self.z, 0.0), self.radius, 0.0), ContourTag::C)
    }

    pub fn wall_weights(&self) -> (f64, f64, f64) {
        match self.wall {
            CellCoordinates::GammaZero { h1, h2, w } => (h1, h2, w),
            _ => unreachable!("wall weights are GammaZero"),
        }
    }
}

/// Tangential `(δH1, δH2, δW)` and transversal `h` displacement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    pub dh1: f64,
    pub dh2: f64,
    pub dw: f64,
    pub h: f64,
    /// `+1` towards `Γ₊`, `−1` towards `Γ₋`.
    pub sign: i8,
}

impl Displacement {
    pub fn transversal(h: f64, sign: i8) -> Self {
        Displacement {
            dh1: 0.0,
            dh2: 0.0,
            dw: 0.0,
            h,
            sign,
        }
    }

    pub fn tangential(dh1: f64, dh2: f64, dw: f64) -> Self {
        Displacement {
            dh1,
            dh2,
            dw,
            h: 0.0,
            sign: 1,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Displacement {
            dh1: self.dh1 * s,
            dh2: self.dh2 * s,
            dw: self.dw * s,
            ..*self
        }
    }

    /// The displaced coordinates next to the wall weights `(H1, H2, W)`.
    pub fn target(&self, wall: (f64, f64, f64)) -> CellCoordinates {
        let (h1, h2, w) = (wall.0 + self.dh1, wall.1 + self.dh2, wall.2 + self.dw);
        let h3 = self.h.powi(3);
        if self.h == 0.0 {
            CellCoordinates::GammaZero { h1, h2, w }
        } else if self.sign > 0 {
            CellCoordinates::GammaPlus {
                h0: 2.0 * h3,
                h1: h1 - 2.0 * h3,
                h2: h2 + 2.0 * h3,
                w,
            }
        } else {
            CellCoordinates::GammaMinus {
                h1,
                h2,
                w1: w - 2.0 * h3,
                w2: w + 2.0 * h3,
            }
        }
    }
}

/// Orientation signs of the contours `C`, `C1`, `C2` relative to the
/// counterclockwise loops used for quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orientation {
    pub c: i8,
    pub c1: i8,
    pub c2: i8,
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation { c: 1, c1: 1, c2: 1 }
    }
}

impl Orientation {
    pub fn all() -> Vec<Orientation> {
        let mut v = Vec::new();
        for c in [1, -1] {
            for c1 in [1, -1] {
                for c2 in [1, -1] {
                    v.push(Orientation { c, c1, c2 });
                }
            }
        }
        v
    }
}

/// `Δe = [i·δH1·I1 − i·δH2·I2 + δW·IC ± 3h²·ICy]/(2πi)` for branch point
/// `index` (0 for `e1`, 1 for `e2`).
pub fn predict_displacement(x: &WallExpansion, index: usize, d: &Displacement, o: Orientation) -> C64 {
    let b = &x.branches[index];
    let (s, s1, s2) = (o.c as f64, o.c1 as f64, o.c2 as f64);
    let sign = if d.sign >= 0 { 1.0 } else { -1.0 };
    let num = I * d.dh1 * s1 * b.i1 - I * d.dh2 * s2 * b.i2
        + d.dw * s * b.ic
        + sign * 3.0 * d.h * d.h * s * b.icy;
    num / (2.0 * PI * I)
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub displacement: Displacement,
    pub target: CellCoordinates,
    pub divisor: BranchDivisor,
    pub solver_residual: f64,
    pub delta_actual: [C64; 2],
    pub delta_pred: [C64; 2],
    pub residual: [f64; 2],
}

/// Solves for the displaced divisor, trying warm starts predicted under
/// each orientation before the bare wall point.
pub fn solve_displaced(x: &WallExpansion, d: &Displacement) -> Result<(BranchDivisor, f64)> {
    let target = d.target(x.wall_weights());
    let mut guesses: Vec<BranchDivisor> = Vec::new();
    for o in Orientation::all() {
        let g = BranchDivisor {
            e1: x.e0.e1 + predict_displacement(x, 0, d, o),
            e2: x.e0.e2 + predict_displacement(x, 1, d, o),
        };
        if g.validate().is_ok() && !guesses.contains(&g) {
            guesses.push(g);
        }
    }
    guesses.push(x.e0);
    let mut last = None;
    for g in guesses {
        match inverse_with(&target, &g, &InverseOptions::default()) {
            Ok(r) => return Ok(r),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

/// Residual report for one displacement under orientation `o`.
pub fn verify_with(x: &WallExpansion, d: &Displacement, o: Orientation) -> Result<VerifyReport> {
    let target = d.target(x.wall_weights());
    let (e, res) = solve_displaced(x, d)?;
    Ok(report(x, d, o, target, e, res))
}

fn report(
    x: &WallExpansion,
    d: &Displacement,
    o: Orientation,
    target: CellCoordinates,
    e: BranchDivisor,
    res: f64,
) -> VerifyReport {
    let actual = [e.e1 - x.e0.e1, e.e2 - x.e0.e2];
    let pred = [predict_displacement(x, 0, d, o), predict_displacement(x, 1, d, o)];
    VerifyReport {
        displacement: *d,
        target,
        divisor: e,
        solver_residual: res,
        delta_actual: actual,
        delta_pred: pred,
        residual: [(actual[0] - pred[0]).norm(), (actual[1] - pred[1]).norm()],
    }
}

/// Verifies the expansion at the wall point `e0` for one displacement,
/// under the default orientation.
pub fn verify_theorem(e0: &BranchDivisor, d: &Displacement) -> Result<VerifyReport> {
    let x = expansion_data(e0)?;
    verify_with(&x, d, Orientation::default())
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternResult {
    pub orientation: Orientation,
    /// `r(h)/r(h/2)` per sign (`+`, `−`), branch point and consecutive pair.
    pub h_ratios: Vec<f64>,
    /// `r(s)/r(s/2)` per branch point and consecutive pair.
    pub da_ratios: Vec<f64>,
    pub coherent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherenceReport {
    pub h_values: Vec<f64>,
    pub da_direction: Displacement,
    pub da_scales: Vec<f64>,
    pub patterns: Vec<PatternResult>,
    pub chosen: Option<Orientation>,
    /// All solves, under the chosen (or default) orientation.
    pub reports: Vec<VerifyReport>,
}

pub const H_RATIO_WINDOW: (f64, f64) = (8.0, 32.0);
pub const DA_RATIO_WINDOW: (f64, f64) = (2.8, 5.7);

/// Runs the residual-scaling experiment for all eight orientation patterns
/// and picks the one under which both scalings hold for both signs and both
/// branch points.
pub fn sign_coherence(
    x: &WallExpansion,
    h_values: &[f64],
    da_direction: &Displacement,
    da_scales: &[f64],
) -> Result<CoherenceReport> {
    let mut jobs: Vec<Displacement> = Vec::new();
    for sign in [1i8, -1] {
        for &h in h_values {
            jobs.push(Displacement::transversal(h, sign));
        }
    }
    for &s in da_scales {
        let mut d = da_direction.scaled(s);
        d.h = 0.0;
        jobs.push(d);
    }
    let solved: Vec<Result<(CellCoordinates, BranchDivisor, f64)>> = jobs
        .par_iter()
        .map(|d| {
            let t = d.target(x.wall_weights());
            solve_displaced(x, d).map(|(e, r)| (t, e, r))
        })
        .collect();
    let mut solved_ok = Vec::new();
    for s in solved {
        solved_ok.push(s?);
    }
    let nh = h_values.len();
    let mut patterns = Vec::new();
    for o in Orientation::all() {
        let reps: Vec<VerifyReport> = jobs
            .iter()
            .zip(&solved_ok)
            .map(|(d, (t, e, r))| report(x, d, o, *t, *e, *r))
            .collect();
        let mut h_ratios = Vec::new();
        for sgn in 0..2 {
            for bpt in 0..2 {
                for k in 0..nh.saturating_sub(1) {
                    let a = reps[sgn * nh + k].residual[bpt];
                    let b = reps[sgn * nh + k + 1].residual[bpt];
                    h_ratios.push(a / b);
                }
            }
        }
        let mut da_ratios = Vec::new();
        for bpt in 0..2 {
            for k in 0..da_scales.len().saturating_sub(1) {
                let a = reps[2 * nh + k].residual[bpt];
                let b = reps[2 * nh + k + 1].residual[bpt];
                da_ratios.push(a / b);
            }
        }
        let inside = |v: &[f64], w: (f64, f64)| v.iter().all(|r| *r >= w.0 && *r <= w.1);
        let coherent = inside(&h_ratios, H_RATIO_WINDOW) && inside(&da_ratios, DA_RATIO_WINDOW);
        patterns.push((
            PatternResult {
                orientation: o,
                h_ratios,
                da_ratios,
                coherent,
            },
            reps,
        ));
    }
    let chosen = patterns.iter().find(|p| p.0.coherent).map(|p| p.0.orientation);
    let pick = chosen.unwrap_or_default();
    let reports = patterns
        .iter()
        .find(|p| p.0.orientation == pick)
        .map(|p| p.1.clone())
        .unwrap_or_default();
    Ok(CoherenceReport {
        h_values: h_values.to_vec(),
        da_direction: *da_direction,
        da_scales: da_scales.to_vec(),
        patterns: patterns.into_iter().map(|p| p.0).collect(),
        chosen,
        reports,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CuspPoint {
    pub value: f64,
    pub h: f64,
    pub divisor: BranchDivisor,
    pub distance: f64,
    pub solver_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CuspFit {
    pub sign: i8,
    pub points: Vec<CuspPoint>,
    /// Log–log slope of `|e(A) − e(A₀)|` against the transversal weight.
    pub slope: f64,
    /// Log–log slope of the finite-difference derivative.
    pub derivative_slope: f64,
}

/// `h` from the transversal weight: `H0 = 2h³` or `W2 − W1 = 4h³`.
pub fn h_from_value(sign: i8, v: f64) -> f64 {
    if sign > 0 {
        (v / 2.0).cbrt()
    } else {
        (v / 4.0).cbrt()
    }
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Fits the exponent of `|e(A±) − e(A₀)|` in the transversal weight.
pub fn cusp_exponent_with(x: &WallExpansion, sign: i8, values: &[f64]) -> Result<CuspFit> {
    let solved: Vec<Result<CuspPoint>> = values
        .par_iter()
        .map(|&v| {
            let h = h_from_value(sign, v);
            let d = Displacement::transversal(h, sign);
            let (e, res) = solve_displaced(x, &d)?;
            let distance = ((e.e1 - x.e0.e1).norm_sqr() + (e.e2 - x.e0.e2).norm_sqr()).sqrt();
            Ok(CuspPoint {
                value: v,
                h,
                divisor: e,
                distance,
                solver_residual: res,
            })
        })
        .collect();
    let mut points = Vec::new();
    for p in solved {
        points.push(p?);
    }
    let used: Vec<&CuspPoint> = points.iter().filter(|p| p.solver_residual <= 1e-9).collect();
    if used.len() < 2 {
        return Err(Error::NoConvergence("too few converged sweep points for a fit".into()));
    }
    let lx: Vec<f64> = used.iter().map(|p| p.value.ln()).collect();
    let ly: Vec<f64> = used.iter().map(|p| p.distance.ln()).collect();
    let slope = lsq_slope(&lx, &ly);
    let mut dx = Vec::new();
    let mut dy = Vec::new();
    for pair in used.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let de = ((q.divisor.e1 - p.divisor.e1).norm_sqr() + (q.divisor.e2 - p.divisor.e2).norm_sqr()).sqrt();
        dx.push((p.value * q.value).sqrt().ln());
        dy.push((de / (q.value - p.value).abs()).ln());
    }
    let derivative_slope = if dx.len() >= 2 { lsq_slope(&dx, &dy) } else { f64::NAN };
    Ok(CuspFit {
        sign,
        points,
        slope,
        derivative_slope,
    })
}

pub fn cusp_exponent(e0: &BranchDivisor, sign: i8, values: &[f64]) -> Result<CuspFit> {
    let x = expansion_data(e0)?;
    cusp_exponent_with(&x, sign, values)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { hi } else { lo * (r * k as f64).exp() }).collect()
}

/// Geometric grid `lo, lo·ratio, …` up to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut x = lo;
    while x <= hi * (1.0 + 1e-12) {
        v.push(x);
        x *= ratio;
    }
    v
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TaylorCheck {
    /// Fitted third and fourth Taylor coefficients of `η − W` at `z`.
    pub c3: C64,
    pub c4: C64,
    pub alpha3: f64,
    pub beta4: f64,
    pub rel3: f64,
    pub rel4: f64,
}

/// Compares `α³`, `β⁴` with the Taylor coefficients fitted to `η` on the
/// contour `C`.
pub fn taylor_check(x: &WallExpansion) -> Result<TaylorCheck> {
    let (_, _, w) = x.wall_weights();
    let samples = circle_samples(&x.differential, x.z, x.radius, CIRCLE_NODES)?;
    let c = taylor_fit(&samples, x.radius, w, 5);
    let alpha3 = x.alpha.powi(3);
    Ok(TaylorCheck {
        c3: c[3],
        c4: c[4],
        alpha3,
        beta4: x.beta4,
        rel3: (c[3] - alpha3).norm() / alpha3.abs(),
        rel4: (c[4] - x.beta4).norm() / x.beta4.abs(),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CrossingPoint {
    pub h: f64,
    pub plus: BranchDivisor,
    pub minus: BranchDivisor,
    /// `|e(A₊) − e(A₋)|` at equal `h`.
    pub gap: f64,
}

/// Solves both sides of the wall at equal `h` (δA = 0).
pub fn crossing_gaps(x: &WallExpansion, hs: &[f64]) -> Result<Vec<CrossingPoint>> {
    hs.par_iter()
        .map(|&h| {
            let (p, _) = solve_displaced(x, &Displacement::transversal(h, 1))?;
            let (m, _) = solve_displaced(x, &Displacement::transversal(h, -1))?;
            let gap = ((p.e1 - m.e1).norm_sqr() + (p.e2 - m.e2).norm_sqr()).sqrt();
            Ok(CrossingPoint { h, plus: p, minus: m, gap })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (0..6).map(|k| (k as f64).exp()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(2.0 / 3.0)).collect();
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        assert!((lsq_slope(&lx, &ly) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn grid_is_geometric() {
        let g = geometric_grid(1e-6, 1e-3, 2.0);
        assert_eq!(g.len(), 10);
        assert!(g.windows(2).all(|p| (p[1] / p[0] - 2.0).abs() < 1e-12));
    }

    #[test]
    fn displaced_targets_follow_the_patterns() {
        let wall = (0.1, 0.2, 0.3);
        let h = 0.1;
        match Displacement::transversal(h, 1).target(wall) {
            CellCoordinates::GammaPlus { h0, h1, h2, w } => {
                assert!((h0 - 2e-3).abs() < 1e-15);
                assert!((h1 - (0.1 - 2e-3)).abs() < 1e-15);
                assert!((h2 - (0.2 + 2e-3)).abs() < 1e-15);
                assert_eq!(w, 0.3);
            }
            other => panic!("{other:?}"),
        }
        match Displacement::transversal(h, -1).target(wall) {
            CellCoordinates::GammaMinus { w1, w2, .. } => assert!((w2 - w1 - 4e-3).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }
}
