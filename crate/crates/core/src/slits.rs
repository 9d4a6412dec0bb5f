//! The slit system and shortest-path routing in its complement.
//!
//! Slits `B1`, `B2` join `e_s` to `ē_s` through a foot `f_s ∈ (−1, 1)`;
//! only their upper halves are stored, the lower halves are mirror images.
//! `B0±` are the real rays beyond `±1`. The upper halves are chosen to avoid
//! the anchor routes (from 1 along the real axis to the outer critical point,
//! then straight to `e_s`), so values computed along anchor routes and along
//! routed paths agree.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::curve::BranchDivisor;
use crate::path::{point_segment_distance, PlanePath, Segment};
use crate::{Error, Result, C64};

type Seg = (C64, C64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlitSystem {
    /// Upper half of `B1`: from `e1` to its foot on `(−1, 1)`.
    pub b1: Vec<C64>,
    /// Upper half of `B2`.
    pub b2: Vec<C64>,
    /// Routing clearance.
    pub clearance: f64,
    /// Whether both slits avoid the anchor routes. When they cannot, values
    /// in the slit complement and along anchor routes may differ by periods.
    pub anchored: bool,
}

impl SlitSystem {
    /// Builds the slits for `e` given the anchor abscissa `x_anchor ≥ 1`.
    pub fn build(e: &BranchDivisor, x_anchor: f64) -> Result<Self> {
        let rho = routing_clearance(e);
        let one = C64::new(1.0, 0.0);
        let xa = C64::new(x_anchor.max(1.0), 0.0);
        let anchor = |t: C64| -> Vec<Seg> {
            if (xa - one).norm() > 0.0 {
                vec![(one, xa), (xa, t)]
            } else {
                vec![(one, t)]
            }
        };
        let mut obstacles: Vec<Seg> = anchor(e.e1);
        obstacles.extend(anchor(e.e2));
        let lift = 2.0 * rho;

        // candidate slits from `tip`, shortest first
        let candidates = |tip: C64, feet: &[f64], obst: &[Seg]| -> Vec<(f64, Vec<C64>)> {
            let mut out: Vec<(f64, Vec<C64>)> = Vec::new();
            for &f in feet {
                let target = C64::new(f, lift);
                if !visible(obst, target, C64::new(f, 0.0), 0.0) {
                    continue;
                }
                if let Some(mut p) = route_points(obst, tip, target, 2.0 * rho) {
                    let len: f64 = p.windows(2).map(|s| (s[1] - s[0]).norm()).sum();
                    p.push(C64::new(f, 0.0));
                    out.push((len, p));
                }
            }
            out.sort_by(|a, b| a.0.total_cmp(&b.0));
            out
        };
        let route_slit = |tip: C64, feet: &[f64], obst: &[Seg]| -> Option<Vec<C64>> {
            candidates(tip, feet, obst).into_iter().next().map(|(_, p)| p)
        };
        let feet1_for = |f2: f64| {
            let mut feet1 = Vec::new();
            for k in 1..=4 {
                let t = k as f64 / 5.0;
                feet1.push(-1.0 + (f2 + 1.0) * t);
                feet1.push(f2 + (1.0 - f2) * t);
            }
            feet1.retain(|f: &f64| (f - f2).abs() > 6.0 * rho && (f.abs() < 1.0 - 4.0 * rho));
            feet1
        };
        let segs = |p: &[C64]| -> Vec<Seg> { p.windows(2).map(|s| (s[0], s[1])).collect() };

        let feet2 = [0.0, 0.25, -0.25, 0.5, -0.5];
        let c2 = candidates(e.e2, &feet2, &obstacles);
        // the shortest B2 may leave no anchored route for B1; take the first
        // B2 that does
        for (_, b2) in &c2 {
            let mut obst = obstacles.clone();
            obst.extend(segs(b2));
            for (_, b1) in candidates(e.e1, &feet1_for(b2.last().unwrap().re), &obst) {
                if pocket_free(&b1, b2, rho) {
                    return Ok(SlitSystem {
                        b1,
                        b2: b2.clone(),
                        clearance: rho,
                        anchored: true,
                    });
                }
            }
        }
        let mut anchored = true;
        let b2 = match c2.into_iter().next() {
            Some((_, p)) => p,
            None => {
                anchored = false;
                route_slit(e.e2, &feet2, &[])
                    .ok_or_else(|| Error::PathRoutingFailure(format!("slit from {}", e.e2)))?
            }
        };
        let b2_segs = segs(&b2);
        obstacles.extend(b2_segs.iter().copied());
        let feet1 = feet1_for(b2.last().unwrap().re);
        let b1 = match route_slit(e.e1, &feet1, &obstacles) {
            Some(p) => p,
            None => {
                anchored = false;
                route_slit(e.e1, &feet1, &b2_segs)
                    .ok_or_else(|| Error::PathRoutingFailure(format!("slit from {}", e.e1)))?
            }
        };
        Ok(SlitSystem {
            b1,
            b2,
            clearance: rho,
            anchored,
        })
    }

    pub fn upper(&self, s: usize) -> &[C64] {
        if s == 1 {
            &self.b1
        } else {
            &self.b2
        }
    }

    /// Full slit chain from `e_s` through the foot to `ē_s`.
    pub fn chain(&self, s: usize) -> Vec<C64> {
        let up = self.upper(s);
        let mut c = up.to_vec();
        c.extend(up.iter().rev().skip(1).map(|p| p.conj()));
        c
    }

    pub fn foot(&self, s: usize) -> f64 {
        self.upper(s).last().unwrap().re
    }

    fn obstacles(&self) -> Vec<Seg> {
        self.b1
            .windows(2)
            .chain(self.b2.windows(2))
            .map(|s| (s[0], s[1]))
            .collect()
    }

    /// Distance from `p` to `B1 ∪ B2` (both halves).
    pub fn distance_to(&self, p: C64) -> f64 {
        let q = if p.im < 0.0 { p.conj() } else { p };
        self.obstacles()
            .iter()
            .map(|(a, b)| point_segment_distance(q, *a, *b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Polyline from the base point 1 to `target` (closed upper half plane)
    /// avoiding the slits.
    pub fn route(&self, target: C64) -> Result<Vec<C64>> {
        if target.im < 0.0 {
            return Err(Error::PathRoutingFailure(format!("{target} lies in the lower half plane")));
        }
        let one = C64::new(1.0, 0.0);
        if target == one {
            return Ok(vec![one]);
        }
        route_points(&self.obstacles(), one, target, self.clearance)
            .ok_or_else(|| Error::PathRoutingFailure(format!("{target}")))
    }

    /// Counterclockwise loop around the full slit `B_s` at distance `c`.
    pub fn contour(&self, s: usize, c: f64) -> PlanePath {
        tube(&self.chain(s), c)
    }
}

/// Whether every stretch of `(−1, 1)` between the feet can be reached from
/// 1 without leaving the upper half plane. A slit that hooks over the other
/// one encloses a pocket that only the lower half plane connects to.
fn pocket_free(b1: &[C64], b2: &[C64], rho: f64) -> bool {
    let obst: Vec<Seg> = b1.windows(2).chain(b2.windows(2)).map(|s| (s[0], s[1])).collect();
    let (f1, f2) = (b1.last().unwrap().re, b2.last().unwrap().re);
    let mut stops = [-1.0, f1.min(f2), f1.max(f2), 1.0];
    stops.sort_by(f64::total_cmp);
    stops.windows(2).all(|w| {
        let probe = C64::new(0.5 * (w[0] + w[1]), rho);
        route_points(&obst, C64::new(1.0, 0.0), probe, rho).is_some()
    })
}

/// Clearance used when routing: a fraction of the smallest feature size.
pub fn routing_clearance(e: &BranchDivisor) -> f64 {
    let pts = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), e.e1, e.e2];
    let mut d = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.min((pts[i] - pts[j]).norm());
        }
    }
    d = d.min(e.e1.im).min(e.e2.im);
    (0.12 * d).clamp(1e-7, 0.05)
}

/// Counterclockwise tube around an open polyline at distance `c`: the right
/// offset forward, a half-turn cap, the right offset of the reversed chain,
/// and a second cap. Starts at the midpoint of the first offset segment.
pub fn tube(chain: &[C64], c: f64) -> PlanePath {
    let rev: Vec<C64> = chain.iter().rev().copied().collect();
    let mut segs = Vec::new();
    side(chain, c, &mut segs);
    side(&rev, c, &mut segs);
    // rotate so that the loop starts in the middle of the first straight piece
    let first = segs.remove(0);
    let (a, b) = match first {
        Segment::Line { from, to } => (from, to),
        _ => unreachable!(),
    };
    let m = 0.5 * (a + b);
    let mut out = PlanePath::new();
    out.push(Segment::Line { from: m, to: b });
    for s in segs {
        out.push(s);
    }
    out.push(Segment::Line { from: a, to: m });
    out
}

fn side(chain: &[C64], c: f64, out: &mut Vec<Segment>) {
    let n = chain.len();
    let normal = |k: usize| {
        let u = chain[k + 1] - chain[k];
        let u = u / u.norm();
        C64::new(0.0, -1.0) * u
    };
    for k in 0..n - 1 {
        let nk = normal(k);
        out.push(Segment::Line {
            from: chain[k] + nk * c,
            to: chain[k + 1] + nk * c,
        });
        let p = chain[k + 1];
        let start = nk.arg();
        let sweep = if k + 2 < n {
            let mut d = normal(k + 1).arg() - start;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d <= -PI {
                d += 2.0 * PI;
            }
            d
        } else {
            PI
        };
        if sweep.abs() > 1e-12 {
            out.push(Segment::Arc {
                center: p,
                radius: c,
                start,
                sweep,
            });
        }
    }
}

// ---------------------------------------------------------------- routing

#[derive(PartialEq)]
struct State(f64, usize);

impl Eq for State {}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Shortest visibility path from `start` to `target` in the upper half plane
/// avoiding `obstacles`, through rings of nodes around obstacle vertices.
pub(crate) fn route_points(obstacles: &[Seg], start: C64, target: C64, rho: f64) -> Option<Vec<C64>> {
    if visible(obstacles, start, target, rho) {
        return Some(vec![start, target]);
    }
    let mut nodes = vec![start, target];
    let mut verts: Vec<C64> = Vec::new();
    for (a, b) in obstacles {
        for v in [*a, *b] {
            if !verts.iter().any(|u| (u - v).norm() < 1e-14) {
                verts.push(v);
            }
        }
    }
    let ring = 16;
    for v in &verts {
        for radius in [rho, 2.5 * rho] {
            for k in 0..ring {
                let p = v + C64::from_polar(radius, 2.0 * PI * (k as f64 + 0.25) / ring as f64);
                if p.im <= 0.2 * rho {
                    continue;
                }
                let clear = obstacles
                    .iter()
                    .all(|(a, b)| point_segment_distance(p, *a, *b) >= 0.4 * rho);
                if clear {
                    nodes.push(p);
                }
            }
        }
    }
    let n = nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[0] = 0.0;
    heap.push(State(0.0, 0));
    while let Some(State(d, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == 1 {
            break;
        }
        for v in 1..n {
            if done[v] {
                continue;
            }
            let nd = d + (nodes[v] - nodes[u]).norm();
            if nd < dist[v] && visible(obstacles, nodes[u], nodes[v], rho) {
                dist[v] = nd;
                prev[v] = u;
                heap.push(State(nd, v));
            }
        }
    }
    if !done[1] {
        return None;
    }
    let mut out = vec![nodes[1]];
    let mut k = 1;
    while k != 0 {
        k = prev[k];
        out.push(nodes[k]);
    }
    out.reverse();
    Some(out)
}

/// A segment is usable when it crosses no obstacle and keeps a clearance
/// from each one that shrinks only near its own endpoints.
fn visible(obstacles: &[Seg], p: C64, q: C64, rho: f64) -> bool {
    if p.im < 0.0 || q.im < 0.0 {
        return false;
    }
    for &(a, b) in obstacles {
        if crosses(p, q, a, b) {
            return false;
        }
        let need = (0.5 * rho).min(
            0.9 * point_segment_distance(p, a, b).min(point_segment_distance(q, a, b)),
        );
        // obstacles sharing an endpoint give need ≈ 0 up to rounding
        if segment_distance(p, q, a, b) < need - 1e-14 {
            return false;
        }
    }
    true
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// True when `[p, q]` meets `[a, b]` anywhere except exactly at `p` or `q`.
fn crosses(p: C64, q: C64, a: C64, b: C64) -> bool {
    let r = q - p;
    let s = b - a;
    let denom = cross(r, s);
    let scale = r.norm() * s.norm();
    let eps = 1e-13;
    if denom.abs() <= eps * scale {
        // parallel: only collinear overlaps count
        if cross(a - p, r).abs() > eps * r.norm() * (a - p).norm().max(1e-300) {
            return false;
        }
        let rr = r.norm_sqr();
        if rr == 0.0 {
            return false;
        }
        let t0 = ((a - p) * r.conj()).re / rr;
        let t1 = ((b - p) * r.conj()).re / rr;
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        return hi.min(1.0) - lo.max(0.0) > 1e-12;
    }
    let t = cross(a - p, s) / denom;
    let u = cross(a - p, r) / denom;
    let tol = 1e-12;
    if !(-tol..=1.0 + tol).contains(&t) || !(-tol..=1.0 + tol).contains(&u) {
        return false;
    }
    let hit = p + r * t;
    let at_end = (hit - p).norm() <= 1e-12 * (1.0 + p.norm()) || (hit - q).norm() <= 1e-12 * (1.0 + q.norm());
    !at_end
}

fn segment_distance(p: C64, q: C64, a: C64, b: C64) -> f64 {
    point_segment_distance(p, a, b)
        .min(point_segment_distance(q, a, b))
        .min(point_segment_distance(a, p, q))
        .min(point_segment_distance(b, p, q))
}
