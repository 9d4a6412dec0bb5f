//! Critical points of `dη`, cell classification, trajectory tracing and the
//! embedded weighted graph.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::coords::extract_weights;
use crate::differential::DistinguishedDifferential;
use crate::path::{integrate, PlanePath, StartSheet};
use crate::{Error, Result, C64};

/// Roots of `x² + a·x + b`. Real roots are ordered `z1 ≥ z2`; a complex
/// pair has `z1` in the upper half plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub z1: C64,
    pub z2: C64,
    pub dsc: f64,
}

impl CriticalSet {
    pub fn from_coefficients(a: f64, b: f64) -> Self {
        let dsc = a * a - 4.0 * b;
        if dsc >= 0.0 {
            let s = dsc.sqrt();
            let q = -0.5 * (a + if a >= 0.0 { s } else { -s });
            let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q, b / q) };
            CriticalSet {
                z1: C64::new(r1.max(r2), 0.0),
                z2: C64::new(r1.min(r2), 0.0),
                dsc,
            }
        } else {
            let z = C64::new(-0.5 * a, 0.5 * (-dsc).sqrt());
            CriticalSet {
                z1: z,
                z2: z.conj(),
                dsc,
            }
        }
    }
}

pub fn critical_points(d: &DistinguishedDifferential) -> CriticalSet {
    d.critical_points()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphType {
    GammaPlus,
    GammaZero,
    GammaMinus,
    Unsupported,
}

impl GraphType {
    pub fn name(&self) -> &'static str {
        match self {
            GraphType::GammaPlus => "GammaPlus",
            GraphType::GammaZero => "GammaZero",
            GraphType::GammaMinus => "GammaMinus",
            GraphType::Unsupported => "Unsupported",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [GraphType::GammaPlus, GraphType::GammaZero, GraphType::GammaMinus, GraphType::Unsupported]
            .into_iter()
            .find(|t| t.name() == s)
    }
}

pub const DEFAULT_WALL_TOL: f64 = 1e-10;

/// The cell candidate from the discriminant alone.
pub fn candidate(d: &DistinguishedDifferential, wall_tol: f64) -> GraphType {
    let dsc = d.discriminant();
    if dsc.abs() <= wall_tol {
        GraphType::GammaZero
    } else if dsc < 0.0 {
        GraphType::GammaPlus
    } else {
        GraphType::GammaMinus
    }
}

/// Candidate by discriminant, confirmed by weight extraction.
pub fn classify(d: &DistinguishedDifferential, wall_tol: f64) -> GraphType {
    if !d.labeled {
        return GraphType::Unsupported;
    }
    let t = candidate(d, wall_tol);
    match extract_weights(d, t).and_then(|c| c.check().map(|_| c)) {
        Ok(_) => t,
        Err(_) => GraphType::Unsupported,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceKind {
    /// `Im η` constant; steepest lines of `W`.
    Horizontal,
    /// `Re η` constant; level lines of `W`.
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TraceEnd {
    /// `Re η` reached zero (horizontal trajectories only).
    ZeroSet,
    BranchPoint(usize),
    CriticalPoint(usize),
    LengthCap,
}

#[derive(Clone, Copy, Debug)]
pub struct TraceOptions {
    pub max_length: f64,
    /// Local error tolerance of the embedded pair.
    pub step_tol: f64,
    /// Distance at which a trajectory is snapped to a singular point.
    pub snap: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            max_length: 50.0,
            step_tol: 1e-10,
            snap: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub points: Vec<C64>,
    pub etas: Vec<C64>,
    pub end: TraceEnd,
    pub w_end: C64,
}

impl Trace {
    pub fn last_eta(&self) -> C64 {
        *self.etas.last().unwrap()
    }

    pub fn last_point(&self) -> C64 {
        *self.points.last().unwrap()
    }
}

struct Tracer<'a> {
    d: &'a DistinguishedDifferential,
    kind: TraceKind,
    sigma: f64,
    level: f64,
    avoid: Vec<(C64, TraceEnd)>,
    opts: TraceOptions,
}

impl Tracer<'_> {
    fn deta(&self, x: C64, w: C64) -> C64 {
        self.d.numerator(x) / w
    }

    fn w_near(&self, x: C64, prev: C64) -> C64 {
        crate::curve::sqrt_near(&self.d.divisor, x, prev)
    }

    fn field(&self, x: C64, wprev: C64) -> C64 {
        let w = self.w_near(x, wprev);
        let g = self.deta(x, w).conj();
        let v = match self.kind {
            TraceKind::Horizontal => g,
            TraceKind::Vertical => C64::new(0.0, 1.0) * g,
        };
        v * (self.sigma / v.norm())
    }

    /// `(η, w)` at `to`, continued along the chord from `from`.
    fn chord(&self, from: C64, w: C64, eta: C64, to: C64) -> Result<(C64, C64)> {
        if to == from {
            return Ok((eta, w));
        }
        let (a, b) = (self.d.a, self.d.b);
        let f = |x: C64, w: C64, dx: C64| [(x * x + a * x + b) * dx / w];
        let r = integrate::<1, _>(
            &self.d.divisor,
            &PlanePath::line(from, to),
            StartSheet::W(w),
            false,
            &f,
            &self.d.opts,
        )?;
        Ok((eta + r.values[0], r.w_end))
    }

    fn residual(&self, eta: C64) -> f64 {
        match self.kind {
            TraceKind::Horizontal => eta.im - self.level,
            TraceKind::Vertical => eta.re - self.level,
        }
    }

    /// Newton correction back onto the level set.
    fn project(&self, mut x: C64, mut w: C64, mut eta: C64) -> Result<(C64, C64, C64)> {
        for _ in 0..4 {
            let r = self.residual(eta);
            if r.abs() < 1e-13 {
                break;
            }
            let dx = match self.kind {
                TraceKind::Horizontal => C64::new(0.0, -r) / self.deta(x, w),
                TraceKind::Vertical => C64::new(-r, 0.0) / self.deta(x, w),
            };
            let (e2, w2) = self.chord(x, w, eta, x + dx)?;
            x += dx;
            eta = e2;
            w = w2;
        }
        Ok((x, w, eta))
    }

    fn singular_distance(&self, x: C64) -> f64 {
        let mut d = self.d.divisor.nearest_branch_point(x).0;
        for (p, _) in &self.avoid {
            d = d.min((x - p).norm());
        }
        d
    }

    fn run(&self, x0: C64, w0: C64, eta0: C64) -> Result<Trace> {
        let mut x = x0;
        let mut w = w0;
        let mut eta = eta0;
        let mut pts = vec![x];
        let mut etas = vec![eta];
        let mut length = 0.0;
        let mut h = 0.05 * self.singular_distance(x).min(1.0);
        let sign0 = eta.re.signum();
        let zero_stop = self.kind == TraceKind::Horizontal && eta.re != 0.0;
        let snap = self.opts.snap * self.d.divisor.scale();
        loop {
            // singular points close by end the trajectory
            for (i, p) in self.d.divisor.branch_points().iter().enumerate() {
                if (x - p).norm() < snap {
                    pts.push(*p);
                    etas.push(eta);
                    return Ok(Trace {
                        points: pts,
                        etas,
                        end: TraceEnd::BranchPoint(i),
                        w_end: C64::new(0.0, 0.0),
                    });
                }
            }
            for (p, tag) in &self.avoid {
                if (x - p).norm() < snap {
                    pts.push(*p);
                    etas.push(eta);
                    return Ok(Trace {
                        points: pts,
                        etas,
                        end: *tag,
                        w_end: w,
                    });
                }
            }
            if length >= self.opts.max_length {
                return Ok(Trace {
                    points: pts,
                    etas,
                    end: TraceEnd::LengthCap,
                    w_end: w,
                });
            }
            let hmax = 0.1 * self.singular_distance(x);
            h = h.min(hmax);
            if h < 1e-14 {
                return Err(Error::TrajectoryStalled(format!("{x}")));
            }
            let (xn, err) = self.dopri(x, w, h);
            if err > self.opts.step_tol {
                h *= (0.9 * (self.opts.step_tol / err).powf(0.2)).max(0.1);
                continue;
            }
            let (eta_n, w_n) = self.chord(x, w, eta, xn)?;
            let (xn, w_n, eta_n) = self.project(xn, w_n, eta_n)?;
            if zero_stop && (eta_n.re == 0.0 || eta_n.re.signum() != sign0) {
                // land on the zero set of W between x and xn
                let (xl, wl, el) = self.land(x, w, eta, xn)?;
                pts.push(xl);
                etas.push(el);
                return Ok(Trace {
                    points: pts,
                    etas,
                    end: TraceEnd::ZeroSet,
                    w_end: wl,
                });
            }
            length += (xn - x).norm();
            x = xn;
            w = w_n;
            eta = eta_n;
            pts.push(x);
            etas.push(eta);
            let grow = if err > 0.0 {
                (0.9 * (self.opts.step_tol / err).powf(0.2)).min(2.0)
            } else {
                2.0
            };
            h *= grow.max(1.0);
        }
    }

    /// Newton on `Re η = 0` along the horizontal line through the bracket.
    fn land(&self, x0: C64, w0: C64, eta0: C64, x1: C64) -> Result<(C64, C64, C64)> {
        // linear guess from the two ends
        let (eta1, _) = self.chord(x0, w0, eta0, x1)?;
        let t = eta0.re / (eta0.re - eta1.re);
        let mut x = x0 + (x1 - x0) * t.clamp(0.0, 1.0);
        let (mut eta, mut w) = self.chord(x0, w0, eta0, x)?;
        for _ in 0..30 {
            let g = self.deta(x, w);
            // a real increment of η with the level kept: δx = −(Re η + i·res)/η'
            let r = C64::new(eta.re, self.residual(eta));
            if r.norm() < 1e-14 {
                break;
            }
            let dx = -r / g;
            let (e2, w2) = self.chord(x, w, eta, x + dx)?;
            x += dx;
            eta = e2;
            w = w2;
        }
        Ok((x, w, eta))
    }

    /// One Dormand–Prince 5(4) step; returns the 5th-order point and the
    /// error estimate.
    fn dopri(&self, x: C64, w: C64, h: f64) -> (C64, f64) {
        let f = |y: C64| self.field(y, w);
        let k1 = f(x);
        let k2 = f(x + k1 * (h / 5.0));
        let k3 = f(x + (k1 * (3.0 / 40.0) + k2 * (9.0 / 40.0)) * h);
        let k4 = f(x + (k1 * (44.0 / 45.0) - k2 * (56.0 / 15.0) + k3 * (32.0 / 9.0)) * h);
        let k5 = f(x + (k1 * (19372.0 / 6561.0) - k2 * (25360.0 / 2187.0) + k3 * (64448.0 / 6561.0)
            - k4 * (212.0 / 729.0))
            * h);
        let k6 = f(x + (k1 * (9017.0 / 3168.0) - k2 * (355.0 / 33.0) + k3 * (46732.0 / 5247.0)
            + k4 * (49.0 / 176.0)
            - k5 * (5103.0 / 18656.0))
            * h);
        let y5 = x + (k1 * (35.0 / 384.0) + k3 * (500.0 / 1113.0) + k4 * (125.0 / 192.0)
            - k5 * (2187.0 / 6784.0)
            + k6 * (11.0 / 84.0))
            * h;
        let k7 = f(y5);
        let y4 = x + (k1 * (5179.0 / 57600.0) + k3 * (7571.0 / 16695.0) + k4 * (393.0 / 640.0)
            - k5 * (92097.0 / 339200.0)
            + k6 * (187.0 / 2100.0)
            + k7 * (1.0 / 40.0))
            * h;
        (y5, (y5 - y4).norm())
    }
}

/// Traces the trajectory of `kind` through `start` in direction `direction`
/// (`+1` increases `Re η` for horizontal and `Im η` for vertical kinds).
///
/// A start at a branch point is seeded along its unique trajectory of the
/// requested kind; a start at a critical point along the first sector whose
/// direction matches `direction`.
pub fn trace_trajectory(
    d: &DistinguishedDifferential,
    start: C64,
    kind: TraceKind,
    direction: i32,
) -> Result<PlanePath> {
    Ok(PlanePath::polyline(&trace_full(d, start, kind, direction, &TraceOptions::default())?.points))
}

pub fn trace_full(
    d: &DistinguishedDifferential,
    start: C64,
    kind: TraceKind,
    direction: i32,
    opts: &TraceOptions,
) -> Result<Trace> {
    let sigma = if direction >= 0 { 1.0 } else { -1.0 };
    let cs = d.critical_points();
    let crit = [cs.z1, cs.z2];
    let scale = d.divisor.scale();
    if let Some(i) = d.divisor.branch_point_at(start) {
        let p = d.divisor.branch_points()[i];
        let dir = branch_direction(d, p, kind);
        return trace_seeded(d, p, None, dir, kind, None, &crit, opts);
    }
    for (k, c) in crit.iter().enumerate() {
        if (start - c).norm() <= 1e-12 * scale {
            let double = cs.dsc.abs() <= DEFAULT_WALL_TOL;
            let (eta_c, w_c) = d.eta_w(*c)?;
            let dirs = critical_directions(d, *c, w_c, double, kind);
            let want = sigma;
            for dir in dirs {
                let x0 = c + dir * 1e-4;
                let (eta0, _) = chord_from(d, *c, w_c, eta_c, x0)?;
                let delta = eta0 - eta_c;
                let s = match kind {
                    TraceKind::Horizontal => delta.re,
                    TraceKind::Vertical => delta.im,
                };
                if s * want > 0.0 {
                    return trace_seeded(d, *c, Some((eta_c, w_c)), dir, kind, Some(k), &crit, opts);
                }
            }
            return Err(Error::TrajectoryStalled(format!("no sector at {c}")));
        }
    }
    let (eta0, w0) = d.eta_w(start)?;
    let level = match kind {
        TraceKind::Horizontal => eta0.im,
        TraceKind::Vertical => eta0.re,
    };
    let tracer = Tracer {
        d,
        kind,
        sigma,
        level,
        avoid: crit
            .iter()
            .enumerate()
            .map(|(k, c)| (*c, TraceEnd::CriticalPoint(k)))
            .collect(),
        opts: *opts,
    };
    tracer.run(start, w0, eta0)
}

fn chord_from(d: &DistinguishedDifferential, from: C64, w: C64, eta: C64, to: C64) -> Result<(C64, C64)> {
    let (a, b) = (d.a, d.b);
    let f = |x: C64, w: C64, dx: C64| [(x * x + a * x + b) * dx / w];
    let r = integrate::<1, _>(&d.divisor, &PlanePath::line(from, to), StartSheet::W(w), false, &f, &d.opts)?;
    Ok((eta + r.values[0], r.w_end))
}

/// Direction of the trajectory of `kind` leaving the branch point `p`:
/// `(dη)² ≈ q0·dx²/(x − p)` with `q0 = N(p)²/P'(p)`.
fn branch_direction(d: &DistinguishedDifferential, p: C64, kind: TraceKind) -> C64 {
    let q0 = d.numerator(p).powi(2) / d.divisor.sextic_derivative(p);
    let theta = match kind {
        TraceKind::Vertical => PI - q0.arg(),
        TraceKind::Horizontal => -q0.arg(),
    };
    C64::from_polar(1.0, theta)
}

/// Separatrix directions at a critical point: `η − η(c) ≈ k·(x − c)^{m+1}`.
fn critical_directions(d: &DistinguishedDifferential, c: C64, w_c: C64, double: bool, kind: TraceKind) -> Vec<C64> {
    let (k, m) = if double {
        (1.0 / (3.0 * w_c), 2)
    } else {
        ((2.0 * c + d.a) / (2.0 * w_c), 1)
    };
    let base = match kind {
        TraceKind::Horizontal => -k.arg(),
        TraceKind::Vertical => PI / 2.0 - k.arg(),
    };
    (0..2 * (m + 1))
        .map(|j| C64::from_polar(1.0, (base + j as f64 * PI) / (m as f64 + 1.0)))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn trace_seeded(
    d: &DistinguishedDifferential,
    p: C64,
    known: Option<(C64, C64)>,
    dir: C64,
    kind: TraceKind,
    skip_crit: Option<usize>,
    crit: &[C64; 2],
    opts: &TraceOptions,
) -> Result<Trace> {
    let r0 = 1e-4 * d.divisor.scale();
    let x0 = p + dir * r0;
    let (eta0, w0) = match known {
        Some((eta_p, w_p)) => chord_from(d, p, w_p, eta_p, x0)?,
        None => d.eta_w(x0)?,
    };
    let w = crate::curve::sqrt_near(&d.divisor, x0, w0);
    let g = d.numerator(x0) / w;
    let v = match kind {
        TraceKind::Horizontal => g.conj(),
        TraceKind::Vertical => C64::new(0.0, 1.0) * g.conj(),
    };
    let sigma = if (v * dir.conj()).re >= 0.0 { 1.0 } else { -1.0 };
    // the level is that of the trajectory through p itself, not of the seed
    let eta_p = match known {
        Some((eta_p, _)) => eta_p,
        None => d.eta(p)?,
    };
    let level = match kind {
        TraceKind::Horizontal => eta_p.im,
        TraceKind::Vertical => eta_p.re,
    };
    let avoid = crit
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != skip_crit)
        .filter(|(_, c)| (**c - p).norm() > 1e-12)
        .map(|(k, c)| (*c, TraceEnd::CriticalPoint(k)))
        .collect();
    let tracer = Tracer {
        d,
        kind,
        sigma,
        level,
        avoid,
        opts: *opts,
    };
    let mut t = tracer.run(x0, w0, eta0)?;
    t.points.insert(0, p);
    t.etas.insert(0, eta_p);
    Ok(t)
}

// ------------------------------------------------------------------ graph

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    BranchPoint,
    CriticalPoint,
    /// A point where a horizontal edge lands on the zero set of `W`.
    Junction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub position: C64,
    pub kind: VertexKind,
    pub is_branch_point: bool,
    /// Multiplicity in the divisor of `(dη)²`.
    pub multiplicity: i32,
    /// `d_vert + 2·d_in − 2`.
    pub ord: i32,
    pub d_vert: i32,
    pub d_in: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    Vertical,
    Horizontal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
    /// `|dη|`-length for vertical edges, `W` increment for horizontal ones.
    pub weight: f64,
    pub path: Vec<C64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TracedGraph {
    pub graph_type: Option<GraphType>,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// Full slit chains, for drawing.
    pub slits: Vec<Vec<C64>>,
}

impl TracedGraph {
    fn vertex(&mut self, position: C64, kind: VertexKind, multiplicity: i32) -> usize {
        if let Some(i) = self
            .vertices
            .iter()
            .position(|v| (v.position - position).norm() < 1e-7)
        {
            return i;
        }
        self.vertices.push(Vertex {
            position,
            kind,
            is_branch_point: kind == VertexKind::BranchPoint,
            multiplicity,
            ord: 0,
            d_vert: 0,
            d_in: 0,
        });
        self.vertices.len() - 1
    }

    fn finish(&mut self) {
        for v in &mut self.vertices {
            v.d_vert = 0;
            v.d_in = 0;
        }
        for e in &self.edges {
            match e.kind {
                EdgeKind::Vertical => {
                    self.vertices[e.from].d_vert += 1;
                    self.vertices[e.to].d_vert += 1;
                }
                EdgeKind::Horizontal => self.vertices[e.to].d_in += 1,
            }
        }
        for v in &mut self.vertices {
            v.ord = v.d_vert + 2 * v.d_in - 2;
        }
    }

    /// Vertices that are points of the divisor of `(dη)²`.
    pub fn divisor_vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(|v| v.kind != VertexKind::Junction)
    }

    pub fn edges_of(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }
}

struct Landing {
    from: usize,
    to: usize,
    weight: f64,
    path: Vec<C64>,
}

/// Assembles the embedded graph of `d` from traced trajectories.
pub fn build_graph(d: &DistinguishedDifferential) -> Result<TracedGraph> {
    let gt = classify(d, DEFAULT_WALL_TOL);
    if gt == GraphType::Unsupported {
        return Err(Error::Unsupported(
            "only the GammaPlus, GammaZero and GammaMinus cells are assembled".into(),
        ));
    }
    let opts = TraceOptions::default();
    let e = d.divisor;
    let cs = d.critical_points();
    let mut g = TracedGraph {
        graph_type: Some(gt),
        slits: vec![d.slits.chain(1), d.slits.chain(2)],
        ..Default::default()
    };
    let bp = e.branch_points();
    let bv: Vec<usize> = bp
        .iter()
        .map(|p| g.vertex(*p, VertexKind::BranchPoint, -1))
        .collect();

    // upper critical points to trace from, with their multiplicities
    let mut crit: Vec<(usize, C64)> = Vec::new();
    let crit_pts = [cs.z1, cs.z2];
    match gt {
        GraphType::GammaZero => {
            let z = C64::new(-0.5 * d.a, 0.0);
            g.vertex(z, VertexKind::CriticalPoint, 4);
            crit.push((0, z));
        }
        GraphType::GammaPlus => {
            g.vertex(cs.z1, VertexKind::CriticalPoint, 2);
            g.vertex(cs.z2, VertexKind::CriticalPoint, 2);
            crit.push((0, cs.z1));
        }
        GraphType::GammaMinus => {
            g.vertex(cs.z1, VertexKind::CriticalPoint, 2);
            g.vertex(cs.z2, VertexKind::CriticalPoint, 2);
            crit.push((0, cs.z1));
            crit.push((1, cs.z2));
        }
        GraphType::Unsupported => unreachable!(),
    }
    let double = gt == GraphType::GammaZero;
    let avoid_pts: [C64; 2] = if double {
        [crit[0].1, crit[0].1]
    } else {
        crit_pts
    };

    // the vertical arc from e1 to e2
    let arc = trace_seeded(
        d,
        e.e1,
        None,
        branch_direction(d, e.e1, TraceKind::Vertical),
        TraceKind::Vertical,
        None,
        &avoid_pts,
        &opts,
    )?;
    if arc.end != TraceEnd::BranchPoint(4) {
        return Err(Error::Unsupported(format!(
            "vertical trajectory from e1 ends at {:?}, not at e2",
            arc.end
        )));
    }
    let eta_e1 = d.eta(e.e1)?;
    let eta_e2 = d.eta(e.e2)?;

    // descending horizontal trajectories from the critical points
    let mut axis_junctions: Vec<(f64, usize)> = Vec::new();
    let mut arc_junctions: Vec<(f64, usize)> = Vec::new();
    let mut landings: Vec<Landing> = Vec::new();
    for &(k, c) in &crit {
        let cv = g.vertex(c, VertexKind::CriticalPoint, if double { 4 } else { 2 });
        let (eta_c, w_c) = d.eta_w(c)?;
        let w_top = eta_c.re.abs();
        for dir in critical_directions(d, c, w_c, double, TraceKind::Horizontal) {
            if c.im == 0.0 && dir.im < -1e-12 {
                continue; // mirrored below
            }
            let x0 = c + dir * 1e-4 * e.scale();
            let (eta0, _) = chord_from(d, c, w_c, eta_c, x0)?;
            if eta0.re.abs() >= w_top {
                continue; // ascending
            }
            let t = trace_seeded(d, c, Some((eta_c, w_c)), dir, TraceKind::Horizontal, Some(k), &avoid_pts, &opts)?;
            let end = t.last_point();
            let (from, w_end) = match t.end {
                TraceEnd::BranchPoint(i) => (bv[i], 0.0),
                TraceEnd::CriticalPoint(j) => {
                    let p = crit_pts[j];
                    (g.vertex(p, VertexKind::CriticalPoint, 2), d.eta(p)?.re.abs())
                }
                TraceEnd::ZeroSet => {
                    let v = g.vertex(end, VertexKind::Junction, 0);
                    if end.im.abs() < 1e-9 {
                        g.vertices[v].position = C64::new(end.re, 0.0);
                        axis_junctions.push((end.re, v));
                    } else {
                        let s = (t.last_eta().im - eta_e1.im) / (eta_e2.im - eta_e1.im);
                        arc_junctions.push((s, v));
                    }
                    (v, 0.0)
                }
                TraceEnd::LengthCap => {
                    return Err(Error::Unsupported(format!(
                        "descending trajectory from {c} did not reach the zero set"
                    )))
                }
            };
            let mut path = t.points.clone();
            path.reverse();
            landings.push(Landing {
                from,
                to: cv,
                weight: w_top - w_end,
                path,
            });
        }
    }

    // horizontal edges and their mirror images
    for l in &landings {
        let on_axis = l.path.iter().all(|p| p.im.abs() < 1e-9);
        g.edges.push(Edge {
            from: l.from,
            to: l.to,
            kind: EdgeKind::Horizontal,
            weight: l.weight,
            path: l.path.clone(),
        });
        if !on_axis {
            let a = g.vertices[l.from].clone();
            let b = g.vertices[l.to].clone();
            let from = g.vertex(a.position.conj(), a.kind, a.multiplicity);
            let to = g.vertex(b.position.conj(), b.kind, b.multiplicity);
            g.edges.push(Edge {
                from,
                to,
                kind: EdgeKind::Horizontal,
                weight: l.weight,
                path: l.path.iter().map(|p| p.conj()).collect(),
            });
        }
    }

    // vertical edges along [−1, 1], split at the axis junctions
    axis_junctions.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut stops: Vec<(C64, usize)> = vec![(bp[0], bv[0])];
    for (x, v) in &axis_junctions {
        stops.push((C64::new(*x, 0.0), *v));
    }
    stops.push((bp[1], bv[1]));
    let lengths = axis_lengths(d, &stops.iter().map(|s| s.0).collect::<Vec<_>>())?;
    for (k, pair) in stops.windows(2).enumerate() {
        g.edges.push(Edge {
            from: pair[0].1,
            to: pair[1].1,
            kind: EdgeKind::Vertical,
            weight: lengths[k],
            path: vec![pair[0].0, pair[1].0],
        });
    }

    // vertical arcs e1 → e2 and their mirrors, split at the arc junctions
    arc_junctions.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut stops: Vec<(f64, usize)> = vec![(eta_e1.im, bv[2])];
    for (s, v) in &arc_junctions {
        stops.push((eta_e1.im + s * (eta_e2.im - eta_e1.im), *v));
    }
    stops.push((eta_e2.im, bv[4]));
    for pair in stops.windows(2) {
        let a = g.vertices[pair[0].1].position;
        let b = g.vertices[pair[1].1].position;
        let path = sub_polyline(&arc.points, a, b);
        let weight = (pair[1].0 - pair[0].0).abs();
        let mirror_from = g.vertex(a.conj(), g.vertices[pair[0].1].kind, g.vertices[pair[0].1].multiplicity);
        let mirror_to = g.vertex(b.conj(), g.vertices[pair[1].1].kind, g.vertices[pair[1].1].multiplicity);
        g.edges.push(Edge {
            from: pair[0].1,
            to: pair[1].1,
            kind: EdgeKind::Vertical,
            weight,
            path: path.clone(),
        });
        g.edges.push(Edge {
            from: mirror_from,
            to: mirror_to,
            kind: EdgeKind::Vertical,
            weight,
            path: path.iter().map(|p| p.conj()).collect(),
        });
    }
    g.finish();
    Ok(g)
}

/// `∫|dη|` between consecutive real points from 1 down to −1.
fn axis_lengths(d: &DistinguishedDifferential, stops: &[C64]) -> Result<Vec<f64>> {
    let (a, b) = (d.a, d.b);
    let f = |x: C64, w: C64, dx: C64| [C64::new(((x * x + a * x + b) * dx / w).norm(), 0.0)];
    let mut out = Vec::new();
    let mut w = C64::new(0.0, 0.0);
    let n = stops.len() - 1;
    for k in 0..n {
        let start = if k == 0 { StartSheet::Base } else { StartSheet::W(w) };
        let r = integrate::<1, _>(
            &d.divisor,
            &PlanePath::line(stops[k], stops[k + 1]),
            start,
            k + 1 == n,
            &f,
            &d.opts,
        )?;
        out.push(r.values[0].re);
        w = r.w_end;
    }
    Ok(out)
}

/// The part of a polyline between the points nearest to `a` and `b`.
fn sub_polyline(pts: &[C64], a: C64, b: C64) -> Vec<C64> {
    let nearest = |p: C64| {
        pts.iter()
            .enumerate()
            .min_by(|x, y| (x.1 - p).norm().total_cmp(&(y.1 - p).norm()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    };
    let (i, j) = (nearest(a), nearest(b));
    let mut out = vec![a];
    if i < j {
        out.extend_from_slice(&pts[i + 1..j]);
    }
    out.push(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots() {
        let c = CriticalSet::from_coefficients(0.0, 0.0);
        assert_eq!(c.dsc, 0.0);
        assert_eq!(c.z1, C64::new(0.0, 0.0));
        let c = CriticalSet::from_coefficients(0.0, -0.01);
        assert!((c.z1.re - 0.1).abs() < 1e-16 && (c.z2.re + 0.1).abs() < 1e-16);
        assert!((c.dsc - 0.04).abs() < 1e-16);
        let c = CriticalSet::from_coefficients(0.0, 0.01);
        assert!((c.z1.im - 0.1).abs() < 1e-16 && c.z1.re == 0.0);
        assert!((c.dsc + 0.04).abs() < 1e-16);
    }

    #[test]
    fn stable_for_tiny_root() {
        let c = CriticalSet::from_coefficients(-1e8, 1.0);
        assert!((c.z2.re - 1e-8).abs() < 1e-22);
        assert!((c.z1.re * c.z2.re - 1.0).abs() < 1e-15);
    }
}
