//! Deterministic SVG drawings of traced graphs.

use std::fmt::Write;

use crate::graph::{EdgeKind, TracedGraph, VertexKind};
use crate::C64;

#[derive(Clone, Debug)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub title: Option<String>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            width: 800.0,
            height: 600.0,
            margin: 40.0,
            title: None,
        }
    }
}

const STYLE: &str = "\
.axis{stroke:#999;stroke-width:0.8}\
.slit{stroke:#888;stroke-width:1;stroke-dasharray:4 3;fill:none}\
.edge-vertical{stroke:#1f4e9c;stroke-width:2.2;fill:none}\
.edge-horizontal{stroke:#c0392b;stroke-width:1.4;fill:none}\
.vertex{stroke:#000;stroke-width:1}\
.branch{fill:#000}\
.critical{fill:#c0392b}\
.junction{fill:#fff;stroke:#1f4e9c;stroke-width:1}";

/// Renders `g`; the same graph always gives the same bytes.
pub fn render_svg(g: &TracedGraph, opts: &SvgOptions) -> String {
    let mut pts: Vec<C64> = vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)];
    pts.extend(g.vertices.iter().map(|v| v.position));
    for e in &g.edges {
        pts.extend(e.path.iter().copied());
    }
    for s in &g.slits {
        pts.extend(s.iter().copied());
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    if g.vertices.is_empty() {
        (x0, x1, y0, y1) = (-2.0, 2.0, -1.5, 1.5);
    }
    let pad = 0.08 * (x1 - x0).max(y1 - y0).max(1.0);
    let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
    let sx = (opts.width - 2.0 * opts.margin) / (x1 - x0);
    let sy = (opts.height - 2.0 * opts.margin) / (y1 - y0);
    let s = sx.min(sy);
    let cx = 0.5 * (x0 + x1);
    let cy = 0.5 * (y0 + y1);
    let map = |p: C64| -> (f64, f64) {
        (
            0.5 * opts.width + (p.re - cx) * s,
            0.5 * opts.height - (p.im - cy) * s,
        )
    };
    let poly = |path: &[C64]| -> String {
        path.iter()
            .map(|p| {
                let (x, y) = map(*p);
                format!("{x:.3},{y:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(out, "<style>{STYLE}</style>");
    let _ = writeln!(
        out,
        r##"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#c0392b"/></marker></defs>"##
    );
    if let Some(t) = &opts.title {
        let _ = writeln!(out, r#"<title>{}</title>"#, escape(t));
    }
    let (ax0, ay) = map(C64::new(x0, 0.0));
    let (ax1, _) = map(C64::new(x1, 0.0));
    let _ = writeln!(out, r#"<line class="axis" x1="{ax0:.3}" y1="{ay:.3}" x2="{ax1:.3}" y2="{ay:.3}"/>"#);
    let (bx, by0) = map(C64::new(0.0, y1));
    let (_, by1) = map(C64::new(0.0, y0));
    let _ = writeln!(out, r#"<line class="axis" x1="{bx:.3}" y1="{by0:.3}" x2="{bx:.3}" y2="{by1:.3}"/>"#);
    for sl in &g.slits {
        let _ = writeln!(out, r#"<polyline class="slit" points="{}"/>"#, poly(sl));
    }
    for e in g.edges.iter().filter(|e| e.kind == EdgeKind::Vertical) {
        let _ = writeln!(out, r#"<polyline class="edge-vertical" points="{}"/>"#, poly(&e.path));
    }
    for e in g.edges.iter().filter(|e| e.kind == EdgeKind::Horizontal) {
        let _ = writeln!(
            out,
            r#"<polyline class="edge-horizontal" marker-end="url(#arrow)" points="{}"/>"#,
            poly(&e.path)
        );
    }
    for v in &g.vertices {
        let (x, y) = map(v.position);
        match v.kind {
            VertexKind::Junction => {
                let _ = writeln!(out, r#"<circle class="junction" cx="{x:.3}" cy="{y:.3}" r="3"/>"#);
            }
            VertexKind::BranchPoint => {
                let _ = writeln!(
                    out,
                    r#"<circle class="vertex branch" data-ord="{}" cx="{x:.3}" cy="{y:.3}" r="4.5"/>"#,
                    v.ord
                );
            }
            VertexKind::CriticalPoint => {
                let _ = writeln!(
                    out,
                    r#"<circle class="vertex critical" data-ord="{}" cx="{x:.3}" cy="{y:.3}" r="4.5"/>"#,
                    v.ord
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Number of divisor-point markers in a rendered document.
pub fn count_vertex_markers(svg: &str) -> usize {
    svg.matches(r#"class="vertex "#).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_has_axes_only() {
        let s = render_svg(&TracedGraph::default(), &SvgOptions::default());
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("class=\"axis\"").count(), 2);
        assert_eq!(count_vertex_markers(&s), 0);
        assert!(!s.contains("<polyline"));
    }

    #[test]
    fn deterministic() {
        let g = TracedGraph::default();
        assert_eq!(render_svg(&g, &SvgOptions::default()), render_svg(&g, &SvgOptions::default()));
    }
}
