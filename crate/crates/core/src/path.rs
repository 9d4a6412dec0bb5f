//! Plane paths and integration of differentials along them, with `w`
//! continued analytically node by node.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::curve::{pick_sign, sextic, BranchDivisor};
use crate::quadrature::{rule, QuadOptions};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Line { from: C64, to: C64 },
    /// `center + radius·exp(i(start + t·sweep))`, `t ∈ [0, 1]`.
    Arc {
        center: C64,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn point(&self, t: f64) -> C64 {
        match *self {
            Segment::Line { from, to } => from + (to - from) * t,
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => center + C64::from_polar(radius, start + t * sweep),
        }
    }

    /// dx/dt.
    pub fn tangent(&self, t: f64) -> C64 {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc {
                radius,
                start,
                sweep,
                ..
            } => C64::new(0.0, sweep) * C64::from_polar(radius, start + t * sweep),
        }
    }

    pub fn start(&self) -> C64 {
        self.point(0.0)
    }

    pub fn end(&self) -> C64 {
        match *self {
            Segment::Line { to, .. } => to,
            _ => self.point(1.0),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn conj(&self) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line {
                from: from.conj(),
                to: to.conj(),
            },
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => Segment::Arc {
                center: center.conj(),
                radius,
                start: -start,
                sweep: -sweep,
            },
        }
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => Segment::Arc {
                center,
                radius,
                start: start + sweep,
                sweep: -sweep,
            },
        }
    }

    /// The sub-segment for parameters `[t0, t1]`.
    pub fn sub(&self, t0: f64, t1: f64) -> Segment {
        match *self {
            Segment::Line { .. } => Segment::Line {
                from: self.point(t0),
                to: self.point(t1),
            },
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => Segment::Arc {
                center,
                radius,
                start: start + t0 * sweep,
                sweep: (t1 - t0) * sweep,
            },
        }
    }

    /// Smallest distance from `p` to the segment (sampled for arcs).
    pub fn distance_to(&self, p: C64) -> f64 {
        match *self {
            Segment::Line { from, to } => point_segment_distance(p, from, to),
            Segment::Arc { .. } => {
                let n = 64;
                (0..n)
                    .map(|k| point_segment_distance(p, self.point(k as f64 / n as f64), self.point((k + 1) as f64 / n as f64)))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

pub fn point_segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// An ordered list of line and arc segments.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanePath {
    pub segments: Vec<Segment>,
}

impl PlanePath {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn line(a: C64, b: C64) -> Self {
        PlanePath {
            segments: vec![Segment::Line { from: a, to: b }],
        }
    }

    pub fn polyline(points: &[C64]) -> Self {
        PlanePath {
            segments: points
                .windows(2)
                .filter(|p| p[0] != p[1])
                .map(|p| Segment::Line { from: p[0], to: p[1] })
                .collect(),
        }
    }

    /// Full counterclockwise circle starting at `center + radius·exp(i·start)`.
    pub fn circle(center: C64, radius: f64, start: f64) -> Self {
        PlanePath {
            segments: vec![Segment::Arc {
                center,
                radius,
                start,
                sweep: 2.0 * PI,
            }],
        }
    }

    pub fn push(&mut self, s: Segment) {
        if s.length() > 0.0 {
            self.segments.push(s);
        }
    }

    pub fn start(&self) -> Option<C64> {
        self.segments.first().map(|s| s.start())
    }

    pub fn end(&self) -> Option<C64> {
        self.segments.last().map(|s| s.end())
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) => (a - b).norm() <= tol,
            _ => false,
        }
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }

    pub fn conj(&self) -> Self {
        PlanePath {
            segments: self.segments.iter().map(|s| s.conj()).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        PlanePath {
            segments: self.segments.iter().rev().map(|s| s.reversed()).collect(),
        }
    }

    /// Points along the path, `per_segment` intervals per segment.
    pub fn sample(&self, per_segment: usize) -> Vec<C64> {
        let mut out = Vec::new();
        for (k, s) in self.segments.iter().enumerate() {
            let n = match s {
                Segment::Line { .. } => 1,
                Segment::Arc { .. } => per_segment.max(1),
            };
            let first = if k == 0 { 0 } else { 1 };
            for j in first..=n {
                out.push(s.point(j as f64 / n as f64));
            }
        }
        out
    }

    pub fn distance_to(&self, p: C64) -> f64 {
        self.segments.iter().map(|s| s.distance_to(p)).fold(f64::INFINITY, f64::min)
    }
}

/// How `w` is known at the start of an integration path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StartSheet {
    /// A regular start point with this value of `w`.
    W(C64),
    /// The path starts at the base point `x = 1` on the base sheet.
    Base,
}

#[derive(Clone, Copy, Debug)]
pub struct Integration<const N: usize> {
    pub values: [C64; N],
    pub w_end: C64,
}

const REL_FLOOR: f64 = 1e-13;

/// Parametrization of one panel over `s ∈ [0, 1]`.
#[derive(Clone, Copy, Debug)]
enum Panel {
    Regular { seg: Segment, t0: f64, t1: f64 },
    /// `x = p + (q − p)s²`, leaving the base point `p = 1`.
    SqrtStart { p: C64, q: C64, c: C64 },
    /// `x = p + (q − p)(1 − s)²`, arriving at the branch point `p`.
    SqrtEnd { p: C64, q: C64 },
}

impl Panel {
    #[inline]
    fn x(&self, s: f64) -> (C64, C64) {
        match *self {
            Panel::Regular { seg, t0, t1 } => {
                let t = t0 + (t1 - t0) * s;
                (seg.point(t), seg.tangent(t) * (t1 - t0))
            }
            Panel::SqrtStart { p, q, .. } => (p + (q - p) * (s * s), (q - p) * (2.0 * s)),
            Panel::SqrtEnd { p, q } => {
                let u = 1.0 - s;
                (p + (q - p) * (u * u), -(q - p) * (2.0 * u))
            }
        }
    }

    /// A square root of `P(x(s))`. On the square-root panels the vanishing
    /// factor is divided out exactly so that no digits are lost near the
    /// branch point.
    fn raw_w(&self, e: &BranchDivisor, s: f64, x: C64) -> C64 {
        let (p, q, t) = match *self {
            Panel::Regular { .. } => return sextic(e, x).sqrt(),
            Panel::SqrtStart { p, q, .. } => (p, q, s),
            Panel::SqrtEnd { p, q } => (p, q, 1.0 - s),
        };
        let mut rest = q - p;
        for r in e.branch_points() {
            if (r - p).norm() > 1e-13 {
                rest *= x - r;
            }
        }
        rest.sqrt() * t
    }

    fn is_regular(&self) -> bool {
        matches!(self, Panel::Regular { .. })
    }
}

/// Integrates `f(x, w, dx/ds)` along `path`, continuing `w` from `start`.
///
/// When `end_at_branch` is set the path must end exactly at a branch point,
/// where the last panel uses the square-root substitution and `w_end = 0`.
pub fn integrate<const N: usize, F>(
    e: &BranchDivisor,
    path: &PlanePath,
    start: StartSheet,
    end_at_branch: bool,
    f: &F,
    opts: &QuadOptions,
) -> Result<Integration<N>>
where
    F: Fn(C64, C64, C64) -> [C64; N],
{
    let segs: Vec<Segment> = path.segments.iter().copied().filter(|s| s.length() > 0.0).collect();
    let mut values = [C64::new(0.0, 0.0); N];
    let mut w = match start {
        StartSheet::W(w) => w,
        StartSheet::Base => C64::new(0.0, 0.0),
    };
    if segs.is_empty() {
        return Ok(Integration { values, w_end: w });
    }
    let panels = make_panels(e, &segs, start, end_at_branch, opts)?;
    let tol = opts.tol / panels.len() as f64;
    for panel in &panels {
        let (v, w1) = adapt::<N, F>(e, panel, 0.0, 1.0, w, None, tol, 0, f, opts)?;
        for k in 0..N {
            values[k] += v[k];
        }
        w = w1;
    }
    Ok(Integration { values, w_end: w })
}

fn make_panels(
    e: &BranchDivisor,
    segs: &[Segment],
    start: StartSheet,
    end_at_branch: bool,
    opts: &QuadOptions,
) -> Result<Vec<Panel>> {
    let bps = e.branch_points();
    let n = segs.len();
    let mut panels = Vec::new();
    for (k, seg) in segs.iter().enumerate() {
        let mut t_lo = 0.0;
        let mut t_hi = 1.0;
        let mut tail = None;
        if k == 0 && start == StartSheet::Base {
            let (from, to) = match *seg {
                Segment::Line { from, to } => (from, to),
                _ => return Err(Error::BranchInconsistency("a base-point path must start with a line".into())),
            };
            if (from - 1.0).norm() > 1e-14 {
                return Err(Error::BranchInconsistency(format!("base-point path starts at {from}, not 1")));
            }
            let d1 = bps[1..].iter().map(|p| (p - from).norm()).fold(f64::INFINITY, f64::min);
            let len = (to - from).norm();
            let mut lam = (0.25 * d1 / len).min(1.0);
            if n == 1 && end_at_branch {
                lam = lam.min(0.5);
            }
            let q = from + (to - from) * lam;
            let c = e.base_w_leading(q);
            panels.push(Panel::SqrtStart { p: from, q, c });
            t_lo = lam;
        }
        if k + 1 == n && end_at_branch {
            let (from, to) = match *seg {
                Segment::Line { from, to } => (from, to),
                _ => return Err(Error::BranchInconsistency("a path ending at a branch point must end with a line".into())),
            };
            if e.branch_point_at(to).is_none() {
                return Err(Error::BranchInconsistency(format!("path end {to} is not a branch point")));
            }
            let dp = bps.iter().map(|p| (p - to).norm()).filter(|d| *d > 1e-13).fold(f64::INFINITY, f64::min);
            let len = (to - from).norm();
            let mut lam = (0.25 * dp / len).min(1.0 - t_lo);
            if t_lo > 0.0 {
                lam = lam.min(0.5 * (1.0 - t_lo));
            }
            t_hi = 1.0 - lam;
            tail = Some(Panel::SqrtEnd {
                p: to,
                q: from + (to - from) * t_hi,
            });
        }
        if t_hi > t_lo {
            split_regular(e, seg, t_lo, t_hi, opts, &mut panels)?;
        }
        if let Some(t) = tail {
            panels.push(t);
        }
    }
    Ok(panels)
}

fn split_regular(
    e: &BranchDivisor,
    seg: &Segment,
    t_lo: f64,
    t_hi: f64,
    opts: &QuadOptions,
    out: &mut Vec<Panel>,
) -> Result<()> {
    let mut t = t_lo;
    let max_dt = match seg {
        // keep arcs sampled finely enough to follow their curvature
        Segment::Arc { sweep, .. } => (0.25 / sweep.abs()).min(1.0),
        _ => 1.0,
    };
    while t < t_hi {
        let x = seg.point(t);
        let speed = seg.tangent(t).norm();
        let (d, i) = e.nearest_branch_point(x);
        if d < opts.exclusion {
            return Err(Error::PathTooCloseToBranchPoint {
                point: format!("{x}"),
                branch: format!("{}", e.branch_points()[i]),
                radius: opts.exclusion,
            });
        }
        let mut dt = (opts.panel_factor * d / speed).min(max_dt);
        if t + dt > t_hi || t_hi - (t + dt) < 1e-3 * dt {
            dt = t_hi - t;
        }
        out.push(Panel::Regular {
            seg: *seg,
            t0: t,
            t1: t + dt,
        });
        t += dt;
        if out.len() > 2_000_000 {
            return Err(Error::NoConvergence("too many quadrature panels".into()));
        }
    }
    Ok(())
}

/// One Gauss–Legendre pass over `[s0, s1]` of a panel. Returns `None` when
/// the continuation of `w` moves too fast between nodes.
#[allow(clippy::too_many_arguments)]
fn eval_panel<const N: usize, F>(
    e: &BranchDivisor,
    panel: &Panel,
    s0: f64,
    s1: f64,
    w0: C64,
    f: &F,
    opts: &QuadOptions,
) -> Option<([C64; N], C64)>
where
    F: Fn(C64, C64, C64) -> [C64; N],
{
    let r = rule(opts.order);
    let h = s1 - s0;
    let mut acc = [C64::new(0.0, 0.0); N];
    let mut prev = w0;
    let regular = panel.is_regular();
    for (j, (&u, &wt)) in r.nodes.iter().zip(&r.weights).enumerate() {
        let s = s0 + h * u;
        let (x, dx) = panel.x(s);
        let raw = panel.raw_w(e, s, x);
        let w = if j == 0 && s0 == 0.0 {
            match *panel {
                Panel::SqrtStart { c, .. } => pick_sign(raw, c * s),
                _ => pick_sign(raw, prev),
            }
        } else {
            pick_sign(raw, prev)
        };
        if regular && (w - prev).norm() >= 0.5 * prev.norm() {
            return None;
        }
        let v = f(x, w, dx);
        for k in 0..N {
            acc[k] += v[k] * (wt * h);
        }
        prev = w;
    }
    let w1 = match *panel {
        Panel::SqrtEnd { .. } if s1 == 1.0 => C64::new(0.0, 0.0),
        _ => {
            let (x1, _) = panel.x(s1);
            let w1 = pick_sign(panel.raw_w(e, s1, x1), prev);
            if regular && (w1 - prev).norm() >= 0.5 * prev.norm() {
                return None;
            }
            w1
        }
    };
    Some((acc, w1))
}

#[allow(clippy::too_many_arguments)]
fn adapt<const N: usize, F>(
    e: &BranchDivisor,
    panel: &Panel,
    s0: f64,
    s1: f64,
    w0: C64,
    whole: Option<([C64; N], C64)>,
    tol: f64,
    depth: u32,
    f: &F,
    opts: &QuadOptions,
) -> Result<([C64; N], C64)>
where
    F: Fn(C64, C64, C64) -> [C64; N],
{
    let whole = match whole {
        Some(v) => Some(v),
        None => eval_panel::<N, F>(e, panel, s0, s1, w0, f, opts),
    };
    let sm = 0.5 * (s0 + s1);
    let left = eval_panel::<N, F>(e, panel, s0, sm, w0, f, opts);
    let right = left.and_then(|l| eval_panel::<N, F>(e, panel, sm, s1, l.1, f, opts));
    if let (Some(wh), Some(l), Some(r)) = (whole, left, right) {
        let mut diff: f64 = 0.0;
        let mut mag: f64 = 0.0;
        let mut sum = [C64::new(0.0, 0.0); N];
        for k in 0..N {
            sum[k] = l.0[k] + r.0[k];
            diff = diff.max((sum[k] - wh.0[k]).norm());
            mag = mag.max(l.0[k].norm() + r.0[k].norm());
        }
        let same_sheet = (r.1 - wh.1).norm() <= (r.1 + wh.1).norm();
        // relative floor: near branch points x − e is formed by cancellation,
        // which costs about |x|/|x − e| ulps in w
        let floor = if panel.is_regular() {
            let x = panel.x(sm).0;
            let (d, _) = e.nearest_branch_point(x);
            REL_FLOOR.max(16.0 * f64::EPSILON * (1.0 + x.norm()) / d)
        } else {
            REL_FLOOR
        };
        if same_sheet && diff <= tol.max(floor * mag) {
            return Ok((sum, r.1));
        }
    }
    if depth >= opts.max_depth {
        return Err(Error::NoConvergence(format!(
            "quadrature panel did not converge after {} bisections",
            opts.max_depth
        )));
    }
    let (lv, lw) = adapt::<N, F>(e, panel, s0, sm, w0, left, 0.5 * tol, depth + 1, f, opts)?;
    let (rv, rw) = adapt::<N, F>(e, panel, sm, s1, lw, None, 0.5 * tol, depth + 1, f, opts)?;
    let mut sum = [C64::new(0.0, 0.0); N];
    for k in 0..N {
        sum[k] = lv[k] + rv[k];
    }
    Ok((sum, rw))
}

/// Continues `w` along `path` from `w_start` and returns its value at the end.
pub fn continue_w(e: &BranchDivisor, path: &PlanePath, w_start: C64) -> Result<C64> {
    continue_w_with(e, path, w_start, &QuadOptions::default())
}

pub fn continue_w_with(e: &BranchDivisor, path: &PlanePath, w_start: C64, opts: &QuadOptions) -> Result<C64> {
    let Some(x0) = path.start() else {
        return Ok(w_start);
    };
    let p = sextic(e, x0);
    let rel = (w_start * w_start - p).norm() / p.norm().max(f64::MIN_POSITIVE);
    if p.norm() == 0.0 || rel > 1e-12 {
        return Err(Error::InconsistentStart {
            w: format!("{w_start}"),
            rel_err: rel,
        });
    }
    let r = integrate::<0, _>(e, path, StartSheet::W(w_start), false, &|_, _, _| [], opts)?;
    Ok(r.w_end)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn div() -> BranchDivisor {
        BranchDivisor::new(c(0.5, 1.0), c(-0.5, 0.8)).unwrap()
    }

    #[test]
    fn segment_geometry() {
        let s = Segment::Arc {
            center: c(1.0, 0.0),
            radius: 2.0,
            start: 0.0,
            sweep: PI,
        };
        assert!((s.end() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((s.length() - 2.0 * PI).abs() < 1e-15);
        assert!((s.reversed().start() - s.end()).norm() < 1e-15);
        assert!((s.conj().point(0.3) - s.point(0.3).conj()).norm() < 1e-15);
        let fd = (s.point(0.5 + 1e-6) - s.point(0.5 - 1e-6)) / 2e-6;
        assert!((fd - s.tangent(0.5)).norm() < 1e-8);
    }

    #[test]
    fn constant_path_is_identity() {
        let e = div();
        let x = c(0.1, 0.2);
        let w = e.sextic(x).sqrt();
        assert_eq!(continue_w(&e, &PlanePath::line(x, x), w).unwrap(), w);
    }

    #[test]
    fn loop_around_one_branch_point_flips_sign() {
        let e = div();
        let path = PlanePath::circle(e.e1, 0.1, 0.0);
        let x0 = path.start().unwrap();
        let w0 = e.sextic(x0).sqrt();
        let w1 = continue_w(&e, &path, w0).unwrap();
        assert!((w1 + w0).norm() < 1e-12 * w0.norm());
    }

    #[test]
    fn inconsistent_start_rejected() {
        let e = div();
        let path = PlanePath::line(c(0.1, 0.1), c(0.2, 0.1));
        assert!(matches!(
            continue_w(&e, &path, c(1.0, 1.0)),
            Err(Error::InconsistentStart { .. })
        ));
    }

    #[test]
    fn base_integration_of_inverse_sqrt() {
        // ∫_1^2 dx / w along the upper bank is real and positive
        let e = BranchDivisor::new(c(0.2, 1.0), c(-0.4, 2.0)).unwrap();
        let path = PlanePath::line(c(1.0, 0.0), c(2.0, 0.0));
        let r = integrate::<1, _>(&e, &path, StartSheet::Base, false, &|_, w, dx| [dx / w], &QuadOptions::default())
            .unwrap();
        assert!(r.values[0].re > 0.0 && r.values[0].im.abs() < 1e-15);
        assert!(r.w_end.re > 0.0);
    }
}
