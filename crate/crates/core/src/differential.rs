//! The distinguished differential `dη = (x² + a·x + b)/w dx`, its abelian
//! integral `η` from the base point 1, the width `W = |Re η|` and periods.

use serde::{Deserialize, Serialize};

use crate::curve::BranchDivisor;
use crate::graph::CriticalSet;
use crate::path::{integrate, PlanePath, StartSheet};
use crate::quadrature::QuadOptions;
use crate::slits::{tube, SlitSystem};
use crate::{Error, Result, C64};

/// A holomorphic or meromorphic differential `g(x, w) dx` on the curve.
pub trait Form: Sync {
    fn coefficient(&self, x: C64, w: C64) -> C64;
}

/// A differential that does not involve `w`, e.g. `dx/(x − z)`.
pub struct PlaneForm<F: Fn(C64) -> C64 + Sync>(pub F);

impl<F: Fn(C64) -> C64 + Sync> Form for PlaneForm<F> {
    fn coefficient(&self, x: C64, _w: C64) -> C64 {
        (self.0)(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContourTag {
    C1,
    C2,
    C,
    Custom,
}

/// A closed path together with the value of `w` at its start. Without an
/// explicit start value the slit-complement value is used.
#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    pub path: PlanePath,
    pub tag: ContourTag,
    pub start_w: Option<C64>,
}

impl Contour {
    pub fn new(path: PlanePath, tag: ContourTag) -> Self {
        Contour {
            path,
            tag,
            start_w: None,
        }
    }

    pub fn with_start_w(mut self, w: C64) -> Self {
        self.start_w = Some(w);
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistinguishedDifferential {
    pub divisor: BranchDivisor,
    pub a: f64,
    pub b: f64,
    /// `|∮ dη|` over the slit contours `C1`, `C2`.
    pub period_residuals: [f64; 2],
    /// Whether `Im η(e1) > 0 > Im η(e2)` holds for the stored divisor.
    #[serde(skip)]
    pub labeled: bool,
    #[serde(skip)]
    pub slits: SlitSystem,
    #[serde(skip)]
    pub opts: QuadOptions,
}

/// Normalizes and relabels so that `Im η(e1) > 0 > Im η(e2)` when possible.
pub fn normalize(e: &BranchDivisor) -> Result<DistinguishedDifferential> {
    normalize_with(e, true, &QuadOptions::default())
}

/// Normalizes keeping the given labels.
pub fn normalize_fixed(e: &BranchDivisor) -> Result<DistinguishedDifferential> {
    normalize_with(e, false, &QuadOptions::default())
}

pub fn normalize_with(e: &BranchDivisor, relabel: bool, opts: &QuadOptions) -> Result<DistinguishedDifferential> {
    e.validate()?;
    let (a, b) = solve_coefficients(e, opts)?;
    let xa = anchor_abscissa(a, b);
    let h1 = anchor_eta(e, a, b, xa, e.e1, opts)?.im;
    let h2 = anchor_eta(e, a, b, xa, e.e2, opts)?.im;
    let tie = 1e-12;
    let (divisor, labeled) = if h1 > tie && h2 < -tie {
        (*e, true)
    } else if h1 < -tie && h2 > tie && relabel {
        (e.swapped(), true)
    } else {
        (*e, false)
    };
    DistinguishedDifferential::assemble(divisor, a, b, labeled, opts)
}

/// Real-axis abscissa where anchor routes leave the axis: the outer
/// critical point's real part, or 1.
pub fn anchor_abscissa(a: f64, b: f64) -> f64 {
    CriticalSet::from_coefficients(a, b).z1.re.max(1.0)
}

fn anchor_path(xa: f64, target: C64) -> PlanePath {
    let one = C64::new(1.0, 0.0);
    if xa > 1.0 {
        PlanePath::polyline(&[one, C64::new(xa, 0.0), target])
    } else {
        PlanePath::polyline(&[one, target])
    }
}

fn anchor_eta(e: &BranchDivisor, a: f64, b: f64, xa: f64, target: C64, opts: &QuadOptions) -> Result<C64> {
    let path = anchor_path(xa, target);
    let f = |x: C64, w: C64, dx: C64| [(x * x + a * x + b) * dx / w];
    Ok(integrate::<1, _>(e, &path, StartSheet::Base, true, &f, opts)?.values[0])
}

/// The chain `e_s → f → ē_s` used for the normalization loops, with the
/// foot chosen to keep the chain away from the other branch points.
fn v_chain(e: &BranchDivisor, s: usize) -> (Vec<C64>, f64) {
    let p = if s == 1 { e.e1 } else { e.e2 };
    let others: Vec<C64> = e
        .branch_points()
        .into_iter()
        .filter(|q| (q - p).norm() > 0.0 && (q - p.conj()).norm() > 0.0)
        .collect();
    let mut best = (Vec::new(), -1.0);
    for k in 0..=12 {
        let f = C64::new(-0.75 + 0.125 * k as f64, 0.0);
        let chain = vec![p, f, p.conj()];
        let path = PlanePath::polyline(&chain);
        let d = others.iter().map(|q| path.distance_to(*q)).fold(f64::INFINITY, f64::min);
        if d > best.1 + 1e-12 {
            best = (chain, d);
        }
    }
    best
}

fn solve_coefficients(e: &BranchDivisor, opts: &QuadOptions) -> Result<(f64, f64)> {
    let mut rows = [[0.0; 3]; 2];
    for s in 1..=2 {
        let (chain, room) = v_chain(e, s);
        let p = chain[0];
        let c = (0.05 * (p - p.conj()).norm()).max(1e-2).min(0.4 * room);
        let path = tube(&chain, c);
        let x0 = path.start().unwrap();
        let w0 = e.sextic(x0).sqrt();
        let f = |x: C64, w: C64, dx: C64| {
            let g = dx / w;
            [x * x * g, x * g, g]
        };
        let r = integrate::<3, _>(e, &path, StartSheet::W(w0), false, &f, opts)?;
        // even loops carry real periods of real differentials
        let re: f64 = r.values.iter().map(|v| v.re.abs()).sum();
        let im: f64 = r.values.iter().map(|v| v.im.abs()).sum();
        for k in 0..3 {
            rows[s - 1][k] = if re >= im { r.values[k].re } else { r.values[k].im };
        }
    }
    let m = [[rows[0][1], rows[0][2]], [rows[1][1], rows[1][2]]];
    let cond = condition_2x2(m);
    if !(cond <= 1e12) {
        return Err(Error::DegenerateSystem { cond });
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let (r0, r1) = (-rows[0][0], -rows[1][0]);
    let a = (r0 * m[1][1] - m[0][1] * r1) / det;
    let b = (m[0][0] * r1 - m[1][0] * r0) / det;
    Ok((a, b))
}

fn condition_2x2(m: [[f64; 2]; 2]) -> f64 {
    let (p, q, r, s) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let t = p * p + q * q + r * r + s * s;
    let d = (p * s - q * r).abs();
    let disc = (t * t - 4.0 * d * d).max(0.0).sqrt();
    let s1 = ((t + disc) / 2.0).sqrt();
    let s2 = ((t - disc) / 2.0).max(0.0).sqrt();
    if s2 == 0.0 {
        f64::INFINITY
    } else {
        s1 / s2
    }
}

impl DistinguishedDifferential {
    /// Builds the slit system and residual periods for known coefficients.
    pub fn assemble(divisor: BranchDivisor, a: f64, b: f64, labeled: bool, opts: &QuadOptions) -> Result<Self> {
        let slits = SlitSystem::build(&divisor, anchor_abscissa(a, b))?;
        let mut d = DistinguishedDifferential {
            divisor,
            a,
            b,
            period_residuals: [0.0; 2],
            labeled: labeled && slits.anchored,
            slits,
            opts: *opts,
        };
        for s in 1..=2 {
            let p = d.period(&d.slit_contour(s)?)?;
            if p.im.abs() > 1e-9 || p.re.abs() > 1e-9 {
                // the imaginary part must vanish by symmetry; the real part by construction
                if p.im.abs() > 1e-9 {
                    return Err(Error::BranchInconsistency(format!(
                        "even period over C{s} has imaginary part {:e}",
                        p.im
                    )));
                }
            }
            d.period_residuals[s - 1] = p.norm();
        }
        Ok(d)
    }

    pub fn numerator(&self, x: C64) -> C64 {
        x * x + self.a * x + self.b
    }

    pub fn critical_points(&self) -> CriticalSet {
        CriticalSet::from_coefficients(self.a, self.b)
    }

    pub fn discriminant(&self) -> f64 {
        self.a * self.a - 4.0 * self.b
    }

    /// `(η(x), w(x))` in the slit complement, from the base point 1.
    pub fn eta_w(&self, x: C64) -> Result<(C64, C64)> {
        if x.im < 0.0 {
            let (h, w) = self.eta_w(x.conj())?;
            return Ok((-h.conj(), -w.conj()));
        }
        let route = self.slits.route(x)?;
        self.eta_along(&route)
    }

    /// `(η, w)` at `x` approached along the last leg from `via`.
    pub fn eta_w_via(&self, x: C64, via: C64) -> Result<(C64, C64)> {
        if via.im < 0.0 {
            let (h, w) = self.eta_w_via(x.conj(), via.conj())?;
            return Ok((-h.conj(), -w.conj()));
        }
        let mut route = self.slits.route(via)?;
        route.push(x);
        self.eta_along(&route)
    }

    fn eta_along(&self, route: &[C64]) -> Result<(C64, C64)> {
        if route.len() < 2 {
            return Ok((C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
        }
        let x = *route.last().unwrap();
        let at_branch = self.divisor.branch_point_at(x).is_some();
        let path = PlanePath::polyline(route);
        let (a, b) = (self.a, self.b);
        let f = |x: C64, w: C64, dx: C64| [(x * x + a * x + b) * dx / w];
        let r = integrate::<1, _>(&self.divisor, &path, StartSheet::Base, at_branch, &f, &self.opts)?;
        Ok((r.values[0], r.w_end))
    }

    pub fn eta(&self, x: C64) -> Result<C64> {
        Ok(self.eta_w(x)?.0)
    }

    /// `w(x)` on the branch fixed by the slit system.
    pub fn w_at(&self, x: C64) -> Result<C64> {
        Ok(self.eta_w(x)?.1)
    }

    pub fn width(&self, x: C64) -> Result<f64> {
        Ok(self.eta(x)?.re.abs())
    }

    /// `∮ g(x, w) dx` over a contour.
    pub fn period_of(&self, form: &dyn Form, c: &Contour) -> Result<C64> {
        let Some(x0) = c.path.start() else {
            return Ok(C64::new(0.0, 0.0));
        };
        let w0 = match c.start_w {
            Some(w) => w,
            None => self.w_at(x0)?,
        };
        let f = |x: C64, w: C64, dx: C64| [form.coefficient(x, w) * dx];
        Ok(integrate::<1, _>(&self.divisor, &c.path, StartSheet::W(w0), false, &f, &self.opts)?.values[0])
    }

    /// `∮ dη` over a contour.
    pub fn period(&self, c: &Contour) -> Result<C64> {
        self.period_of(self, c)
    }

    /// Clearance of the loop around slit `s`: the default of
    /// `max(0.05·|e − ē|, 10⁻²)`, reduced to stay clear of other singular
    /// points and of the other slit.
    pub fn slit_clearance(&self, s: usize) -> f64 {
        let chain = self.slits.chain(s);
        let path = PlanePath::polyline(&chain);
        let e = if s == 1 { self.divisor.e1 } else { self.divisor.e2 };
        let mut room = f64::INFINITY;
        for q in self.divisor.branch_points() {
            if (q - e).norm() > 1e-14 && (q - e.conj()).norm() > 1e-14 {
                room = room.min(path.distance_to(q));
            }
        }
        let cs = self.critical_points();
        room = room.min(path.distance_to(cs.z1)).min(path.distance_to(cs.z2));
        for p in self.slits.chain(3 - s) {
            room = room.min(path.distance_to(p));
        }
        let other = PlanePath::polyline(&self.slits.chain(3 - s));
        for p in &chain {
            room = room.min(other.distance_to(*p));
        }
        (0.05 * (e - e.conj()).norm()).max(1e-2).min(0.4 * room)
    }

    /// The counterclockwise loop `C_s` around the full slit `B_s`.
    pub fn slit_contour(&self, s: usize) -> Result<Contour> {
        let path = self.slits.contour(s, self.slit_clearance(s));
        let tag = if s == 1 { ContourTag::C1 } else { ContourTag::C2 };
        Ok(Contour::new(path, tag))
    }

    /// A loop around `e_s → X → ē_s` with `X > 1`: an odd cycle. `X` is
    /// picked from a few candidates to keep the chain clear of the other
    /// branch points.
    pub fn odd_contour(&self, s: usize) -> Contour {
        let e = if s == 1 { self.divisor.e1 } else { self.divisor.e2 };
        let x0 = e.re.max(1.0) + 0.5 + e.im;
        let room_of = |chain: &[C64]| {
            self.divisor
                .branch_points()
                .into_iter()
                .filter(|q| (q - e).norm() > 1e-14 && (q - e.conj()).norm() > 1e-14)
                .map(|q| PlanePath::polyline(chain).distance_to(q))
                .fold(f64::INFINITY, f64::min)
        };
        let (chain, room) = [0.0, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|dx| {
                let chain = [e, C64::new(x0 + dx * (1.0 + e.im), 0.0), e.conj()];
                (chain, room_of(&chain))
            })
            .find(|(_, r)| *r >= 0.1 * e.im)
            .unwrap_or_else(|| {
                let chain = [e, C64::new(x0, 0.0), e.conj()];
                (chain, room_of(&chain))
            });
        let c = (0.05 * e.im).max(1e-2).min(0.4 * room);
        let path = tube(&chain, c);
        let w0 = self.divisor.sextic(path.start().unwrap()).sqrt();
        Contour::new(path, ContourTag::Custom).with_start_w(w0)
    }
}

impl Form for DistinguishedDifferential {
    fn coefficient(&self, x: C64, w: C64) -> C64 {
        self.numerator(x) / w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_of_identity_and_singular() {
        assert!((condition_2x2([[1.0, 0.0], [0.0, 1.0]]) - 1.0).abs() < 1e-15);
        assert!((condition_2x2([[2.0, 0.0], [0.0, 1.0]]) - 2.0).abs() < 1e-14);
        assert!(condition_2x2([[1.0, 2.0], [2.0, 4.0]]).is_infinite());
    }
}
