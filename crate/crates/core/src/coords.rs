//! The forward map `E ↦ (cell, weights)`, its Newton inverse and the wall
//! finder.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::differential::{normalize, normalize_fixed, DistinguishedDifferential};
use crate::graph::{candidate, GraphType, DEFAULT_WALL_TOL};
use crate::{BranchDivisor, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum CellCoordinates {
    GammaZero {
        #[serde(rename = "H1")]
        h1: f64,
        #[serde(rename = "H2")]
        h2: f64,
        #[serde(rename = "W")]
        w: f64,
    },
    GammaPlus {
        #[serde(rename = "H0")]
        h0: f64,
        #[serde(rename = "H1")]
        h1: f64,
        #[serde(rename = "H2")]
        h2: f64,
        #[serde(rename = "W")]
        w: f64,
    },
    GammaMinus {
        #[serde(rename = "H1")]
        h1: f64,
        #[serde(rename = "H2")]
        h2: f64,
        #[serde(rename = "W1")]
        w1: f64,
        #[serde(rename = "W2")]
        w2: f64,
    },
}

impl CellCoordinates {
    pub fn graph_type(&self) -> GraphType {
        match self {
            CellCoordinates::GammaZero { .. } => GraphType::GammaZero,
            CellCoordinates::GammaPlus { .. } => GraphType::GammaPlus,
            CellCoordinates::GammaMinus { .. } => GraphType::GammaMinus,
        }
    }

    /// Weight names in the order of [`values`](Self::values).
    pub fn names(&self) -> &'static [&'static str] {
        Self::names_of(self.graph_type())
    }

    pub fn names_of(t: GraphType) -> &'static [&'static str] {
        match t {
            GraphType::GammaZero => &["H1", "H2", "W"],
            GraphType::GammaPlus => &["H0", "H1", "H2", "W"],
            GraphType::GammaMinus => &["H1", "H2", "W1", "W2"],
            GraphType::Unsupported => &[],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match *self {
            CellCoordinates::GammaZero { h1, h2, w } => vec![h1, h2, w],
            CellCoordinates::GammaPlus { h0, h1, h2, w } => vec![h0, h1, h2, w],
            CellCoordinates::GammaMinus { h1, h2, w1, w2 } => vec![h1, h2, w1, w2],
        }
    }

    pub fn from_values(t: GraphType, v: &[f64]) -> Result<Self> {
        let need = if t == GraphType::GammaZero { 3 } else { 4 };
        if v.len() != need {
            return Err(Error::WeightOutOfRange(format!("{} expects {need} weights", t.name())));
        }
        Ok(match t {
            GraphType::GammaZero => CellCoordinates::GammaZero { h1: v[0], h2: v[1], w: v[2] },
            GraphType::GammaPlus => CellCoordinates::GammaPlus { h0: v[0], h1: v[1], h2: v[2], w: v[3] },
            GraphType::GammaMinus => CellCoordinates::GammaMinus { h1: v[0], h2: v[1], w1: v[2], w2: v[3] },
            GraphType::Unsupported => return Err(Error::Unsupported("no coordinates for this cell".into())),
        })
    }

    /// The polyhedron inequalities of the cell.
    pub fn check(&self) -> Result<()> {
        let v = self.values();
        if let Some(x) = v.iter().find(|x| !(**x > 0.0)) {
            return Err(Error::WeightOutOfRange(format!("non-positive weight {x} in {self:?}")));
        }
        let bad = |msg: &str| Err(Error::WeightOutOfRange(format!("{msg} fails for {self:?}")));
        match *self {
            CellCoordinates::GammaZero { h1, h2, .. } if 2.0 * (h1 + h2) >= PI => bad("2(H1+H2) < π"),
            CellCoordinates::GammaPlus { h0, h1, h2, .. } if h0 + 2.0 * (h1 + h2) >= PI => bad("H0 + 2(H1+H2) < π"),
            CellCoordinates::GammaMinus { h1, h2, .. } if 2.0 * (h1 + h2) >= PI => bad("2(H1+H2) < π"),
            CellCoordinates::GammaMinus { w1, w2, .. } if w1 >= w2 => bad("W1 < W2"),
            _ => Ok(()),
        }
    }

    pub fn max_abs_diff(&self, other: &CellCoordinates) -> f64 {
        if self.graph_type() != other.graph_type() {
            return f64::INFINITY;
        }
        self.values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Weights of cell type `t` read off `d`, without the polyhedron checks.
///
/// Fails with `Unsupported` when the critical points are not where the cell
/// requires them (real ones on `(1, ∞)`).
pub fn extract_weights(d: &DistinguishedDifferential, t: GraphType) -> Result<CellCoordinates> {
    let cs = d.critical_points();
    let h1 = d.eta(d.divisor.e1)?.im;
    let h2 = -d.eta(d.divisor.e2)?.im;
    match t {
        GraphType::GammaZero => {
            let z = -0.5 * d.a;
            if z <= 1.0 {
                return Err(Error::Unsupported(format!("wall critical point {z} not in (1, ∞)")));
            }
            let w = d.eta(C64::new(z, 0.0))?.re;
            Ok(CellCoordinates::GammaZero { h1, h2, w })
        }
        GraphType::GammaPlus => {
            if cs.dsc >= 0.0 {
                return Err(Error::WrongCell {
                    expected: "GammaPlus".into(),
                    detail: format!("discriminant {} ≥ 0", cs.dsc),
                });
            }
            let eta = d.eta(cs.z1)?;
            let h0 = eta.im;
            Ok(CellCoordinates::GammaPlus {
                h0,
                h1: h1 - h0,
                h2: h0 + h2,
                w: eta.re,
            })
        }
        GraphType::GammaMinus => {
            if cs.dsc <= 0.0 {
                return Err(Error::WrongCell {
                    expected: "GammaMinus".into(),
                    detail: format!("discriminant {} ≤ 0", cs.dsc),
                });
            }
            if cs.z2.re <= 1.0 {
                return Err(Error::Unsupported(format!("critical point {} not in (1, ∞)", cs.z2.re)));
            }
            let w1 = d.eta(cs.z1)?.re;
            let w2 = d.eta(cs.z2)?.re;
            Ok(CellCoordinates::GammaMinus { h1, h2, w1, w2 })
        }
        GraphType::Unsupported => Err(Error::Unsupported("unsupported cell".into())),
    }
}

/// Result of the forward map, keeping the (possibly relabeled) differential.
#[derive(Clone, Debug)]
pub struct ForwardResult {
    pub graph_type: GraphType,
    pub coordinates: CellCoordinates,
    pub differential: DistinguishedDifferential,
}

pub fn forward(e: &BranchDivisor) -> Result<(GraphType, CellCoordinates)> {
    let r = forward_full(e)?;
    Ok((r.graph_type, r.coordinates))
}

pub fn forward_full(e: &BranchDivisor) -> Result<ForwardResult> {
    let d = normalize(e)?;
    forward_of(d)
}

pub fn forward_of(d: DistinguishedDifferential) -> Result<ForwardResult> {
    if !d.labeled {
        return Err(Error::Unsupported(
            "Im η(e1) and Im η(e2) do not have opposite signs".into(),
        ));
    }
    let t = candidate(&d, DEFAULT_WALL_TOL);
    let c = extract_weights(&d, t)?;
    c.check()?;
    Ok(ForwardResult {
        graph_type: t,
        coordinates: c,
        differential: d,
    })
}

// ---------------------------------------------------------------- inverse

#[derive(Clone, Copy, Debug)]
pub struct InverseOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 20,
        }
    }
}

fn to_vec(e: &BranchDivisor) -> Vector4<f64> {
    Vector4::new(e.e1.re, e.e1.im, e.e2.re, e.e2.im)
}

fn from_vec(v: &Vector4<f64>) -> Result<BranchDivisor> {
    BranchDivisor::new(C64::new(v[0], v[1]), C64::new(v[2], v[3]))
}

/// Residual of the weight equations at `v`, in the labeling of `v`.
/// On the wall the fourth equation is `Dsc = 0` and the weights are read in
/// the wall chart.
fn residual(v: &Vector4<f64>, target: &CellCoordinates) -> Result<Vector4<f64>> {
    let e = from_vec(v)?;
    let d = normalize_fixed(&e)?;
    let t = target.graph_type();
    let tv = target.values();
    let r = match t {
        GraphType::GammaZero => {
            let h1 = d.eta(e.e1)?.im;
            let h2 = -d.eta(e.e2)?.im;
            let z = -0.5 * d.a;
            if z <= 1.0 {
                return Err(Error::Unsupported(format!("wall chart point {z} not in (1, ∞)")));
            }
            let w = d.eta(C64::new(z, 0.0))?.re;
            Vector4::new(h1 - tv[0], h2 - tv[1], w - tv[2], d.discriminant())
        }
        _ => {
            let c = extract_weights(&d, t)?.values();
            Vector4::new(c[0] - tv[0], c[1] - tv[1], c[2] - tv[2], c[3] - tv[3])
        }
    };
    Ok(r)
}

fn jacobian(v: &Vector4<f64>, f0: &Vector4<f64>, target: &CellCoordinates, central: bool) -> Result<Matrix4<f64>> {
    let mut j = Matrix4::zeros();
    for k in 0..4 {
        let h = 1e-6 * (1.0 + v[k].abs());
        let mut vp = *v;
        vp[k] += h;
        let col = if central {
            let mut vm = *v;
            vm[k] -= h;
            (residual(&vp, target)? - residual(&vm, target)?) / (2.0 * h)
        } else {
            match residual(&vp, target) {
                Ok(fp) => (fp - f0) / h,
                Err(_) => {
                    let mut vm = *v;
                    vm[k] -= h;
                    (f0 - residual(&vm, target)?) / h
                }
            }
        };
        j.set_column(k, &col);
    }
    Ok(j)
}

/// Damped Newton for the divisor with the given weights, starting at `guess`.
pub fn inverse(target: &CellCoordinates, guess: &BranchDivisor) -> Result<BranchDivisor> {
    inverse_with(target, guess, &InverseOptions::default()).map(|r| r.0)
}

/// Returns the solution and its final residual (max norm).
pub fn inverse_with(
    target: &CellCoordinates,
    guess: &BranchDivisor,
    opts: &InverseOptions,
) -> Result<(BranchDivisor, f64)> {
    target.check()?;
    guess.validate()?;
    let mut v = to_vec(guess);
    let mut f = residual(&v, target).map_err(|e| wrong_cell(target, e))?;
    let mut last_err: Option<Error> = None;
    for _ in 0..opts.max_iter {
        let norm = f.amax();
        if norm < opts.tol {
            return polish(v, f, target);
        }
        let mut stepped = false;
        for central in [false, true] {
            let j = jacobian(&v, &f, target, central)?;
            let Some(delta) = j.lu().solve(&(-f)) else {
                last_err = Some(Error::NoConvergence("singular Jacobian".into()));
                continue;
            };
            let mut lambda = 1.0;
            for _ in 0..=opts.max_halvings {
                let trial = v + delta * lambda;
                match residual(&trial, target) {
                    Ok(ft) if ft.amax() < norm => {
                        v = trial;
                        f = ft;
                        stepped = true;
                        break;
                    }
                    Ok(_) => {}
                    Err(e) => last_err = Some(e),
                }
                lambda *= 0.5;
            }
            if stepped {
                break;
            }
        }
        if !stepped {
            if f.amax() < 1e3 * opts.tol {
                // stagnation at the noise floor of the forward map
                return Ok((from_vec(&v)?, f.amax()));
            }
            return Err(match last_err {
                Some(e @ (Error::WrongCell { .. } | Error::Unsupported(_))) => wrong_cell(target, e),
                _ => Error::NoConvergence(format!("line search failed at residual {:e}", f.amax())),
            });
        }
    }
    let norm = f.amax();
    if norm < opts.tol {
        return Ok((from_vec(&v)?, norm));
    }
    Err(Error::NoConvergence(format!(
        "no convergence after {} iterations (residual {norm:e})",
        opts.max_iter
    )))
}

/// One extra Newton step past the tolerance, kept only if it helps: the
/// map is badly conditioned near the wall, so a weight residual of 1e-10
/// can leave the divisor off by 1e-8.
fn polish(v: Vector4<f64>, f: Vector4<f64>, target: &CellCoordinates) -> Result<(BranchDivisor, f64)> {
    let step = jacobian(&v, &f, target, false)
        .ok()
        .and_then(|j| j.lu().solve(&(-f)))
        .map(|delta| v + delta);
    if let Some(trial) = step {
        if let Ok(ft) = residual(&trial, target) {
            if ft.amax() < f.amax() {
                return Ok((from_vec(&trial)?, ft.amax()));
            }
        }
    }
    Ok((from_vec(&v)?, f.amax()))
}

fn wrong_cell(target: &CellCoordinates, e: Error) -> Error {
    match e {
        Error::WrongCell { .. } => e,
        Error::Unsupported(detail) => Error::WrongCell {
            expected: target.graph_type().name().into(),
            detail,
        },
        other => other,
    }
}

/// Repeated inverse along a path of targets, each warm-started from the
/// previous solution.
pub fn continue_path(start: &BranchDivisor, path: &[CellCoordinates]) -> Result<Vec<BranchDivisor>> {
    let mut out = Vec::with_capacity(path.len());
    let mut guess = *start;
    for (i, t) in path.iter().enumerate() {
        let (e, res) = inverse_with(t, &guess, &InverseOptions::default()).map_err(|e| match e {
            Error::NoConvergence(m) => Error::NoConvergence(format!("step {i}: {m}")),
            other => other,
        })?;
        if res >= 1e-8 {
            return Err(Error::NoConvergence(format!("step {i}: residual {res:e}")));
        }
        out.push(e);
        guess = e;
    }
    Ok(out)
}

// ------------------------------------------------------------------- wall

fn dsc_at(seed: &BranchDivisor, t: f64) -> Option<f64> {
    let e = BranchDivisor::new(seed.e1, C64::new(seed.e2.re, t)).ok()?;
    normalize_fixed(&e).ok().map(|d| d.discriminant())
}

/// Moves `Im e2` of the seed until the discriminant vanishes.
pub fn find_wall(seed: &BranchDivisor) -> Result<BranchDivisor> {
    seed.validate()?;
    let t0 = seed.e2.im;
    let f0 = dsc_at(seed, t0).ok_or_else(|| Error::NoConvergence("seed cannot be normalized".into()))?;
    let finish = |t: f64| -> Result<BranchDivisor> {
        let e = BranchDivisor::new(seed.e1, C64::new(seed.e2.re, t))?;
        Ok(normalize(&e)?.divisor)
    };
    if f0.abs() < 1e-12 {
        return Ok(*seed);
    }
    // scan outward geometrically on both sides
    let (lo_lim, hi_lim) = (0.25 * t0, 4.0 * t0);
    let mut bracket = None;
    let (mut up, mut down) = ((t0, f0), (t0, f0));
    let r = 1.03f64;
    let mut k = 0;
    while bracket.is_none() && (up.0 < hi_lim || down.0 > lo_lim) {
        k += 1;
        if k > 400 {
            break;
        }
        if up.0 < hi_lim {
            let t = (up.0 * r).min(hi_lim);
            if let Some(f) = dsc_at(seed, t) {
                if f.signum() != up.1.signum() {
                    bracket = Some(((up.0, up.1), (t, f)));
                }
                up = (t, f);
            } else {
                up = (t, up.1);
            }
        }
        if bracket.is_none() && down.0 > lo_lim {
            let t = (down.0 / r).max(lo_lim);
            if let Some(f) = dsc_at(seed, t) {
                if f.signum() != down.1.signum() {
                    bracket = Some(((t, f), (down.0, down.1)));
                }
                down = (t, f);
            } else {
                down = (t, down.1);
            }
        }
    }
    let Some(((mut a, mut fa), (mut b, mut fb))) = bracket else {
        return Err(Error::NoBracket { lo: lo_lim, hi: hi_lim });
    };
    // Illinois false position
    let mut side = 0;
    for _ in 0..200 {
        let t = (a * fb - b * fa) / (fb - fa);
        let t = if t > a.min(b) && t < a.max(b) { t } else { 0.5 * (a + b) };
        let f = dsc_at(seed, t).ok_or_else(|| Error::NoConvergence(format!("normalization failed at Im e2 = {t}")))?;
        if f.abs() < 1e-12 {
            return finish(t);
        }
        if f.signum() == fb.signum() {
            b = t;
            fb = f;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = t;
            fa = f;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if (b - a).abs() < 4.0 * f64::EPSILON * t0 {
            if f.abs() < 1e-11 {
                return finish(t);
            }
            break;
        }
    }
    Err(Error::NoConvergence("wall bisection stalled above |Dsc| < 1e-12".into()))
}
