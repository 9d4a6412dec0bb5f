mod common;

use common::{c, cell_representatives, wall};
use moduli_walls::graph::{trace_full, EdgeKind, TraceEnd, TraceOptions, VertexKind, DEFAULT_WALL_TOL};
use moduli_walls::svg::{count_vertex_markers, render_svg, SvgOptions};
use moduli_walls::{build_graph, classify, normalize, CriticalSet, GraphType, TraceKind, TracedGraph};

#[test]
fn critical_points_from_coefficients() {
    let s = CriticalSet::from_coefficients(0.0, 0.0);
    assert_eq!((s.z1, s.z2, s.dsc), (c(0.0, 0.0), c(0.0, 0.0), 0.0));
    let s = CriticalSet::from_coefficients(0.0, -0.01);
    assert!((s.dsc - 0.04).abs() < 1e-15);
    assert!((s.z1 - c(0.1, 0.0)).norm() < 1e-15 && (s.z2 - c(-0.1, 0.0)).norm() < 1e-15);
    let s = CriticalSet::from_coefficients(0.0, 0.01);
    assert!((s.dsc + 0.04).abs() < 1e-15);
    assert!((s.z1 - c(0.0, 0.1)).norm() < 1e-15 && (s.z2 - c(0.0, -0.1)).norm() < 1e-15);
}

#[test]
fn cells_are_classified_on_both_sides_of_the_wall() {
    let [w, plus, minus] = cell_representatives();
    let t = |e| classify(&normalize(&e).unwrap(), DEFAULT_WALL_TOL);
    assert_eq!(t(w), GraphType::GammaZero);
    assert_eq!(t(plus), GraphType::GammaPlus);
    assert_eq!(t(minus), GraphType::GammaMinus);
}

#[test]
fn vertical_trajectory_from_a_branch_point_stays_on_the_zero_set() {
    let d = normalize(&wall()).unwrap();
    for dir in [1, -1] {
        let tr = trace_full(&d, d.divisor.e1, TraceKind::Vertical, dir, &TraceOptions::default()).unwrap();
        let step = (tr.points.len() / 25).max(1);
        for p in tr.points.iter().step_by(step) {
            assert!(d.width(*p).unwrap() < 1e-6, "W({p}) = {}", d.width(*p).unwrap());
        }
    }
}

#[test]
fn horizontal_trajectory_descends_to_the_zero_set() {
    let [_, _, minus] = cell_representatives();
    let d = normalize(&minus).unwrap();
    let z = d.critical_points().z1;
    let tr = trace_full(&d, z + c(0.0, 1e-3), TraceKind::Horizontal, -1, &TraceOptions::default()).unwrap();
    assert_eq!(tr.end, TraceEnd::ZeroSet);
    // W is monotone along a steepest line and ends on Γ_|
    let ws: Vec<f64> = tr.points.iter().step_by(5).map(|p| d.width(*p).unwrap()).collect();
    assert!(ws.windows(2).all(|p| p[1] <= p[0] + 1e-9));
    assert!(d.width(tr.last_point()).unwrap() < 1e-8);
}

fn check_orders(g: &TracedGraph) {
    for v in &g.vertices {
        assert_eq!(v.ord, v.d_vert + 2 * v.d_in - 2);
        match v.kind {
            VertexKind::BranchPoint => assert_eq!((v.ord, v.d_vert, v.d_in), (-1, 1, 0)),
            VertexKind::Junction => assert_eq!(v.ord, 0),
            VertexKind::CriticalPoint => assert_eq!(v.ord, v.multiplicity),
        }
    }
}

#[test]
fn vertex_orders_follow_the_degree_formula() {
    let [w, plus, minus] = cell_representatives();
    let gw = build_graph(&normalize(&w).unwrap()).unwrap();
    check_orders(&gw);
    // the double zero of dη is a zero of order 4 of (dη)²
    let z: Vec<_> = gw.vertices.iter().filter(|v| v.kind == VertexKind::CriticalPoint).collect();
    assert_eq!(z.len(), 1);
    assert_eq!((z[0].ord, z[0].d_vert, z[0].d_in), (4, 0, 3));
    assert_eq!(gw.divisor_vertices().count(), 7);
    for e in [plus, minus] {
        let g = build_graph(&normalize(&e).unwrap()).unwrap();
        check_orders(&g);
        let zs: Vec<_> = g.vertices.iter().filter(|v| v.kind == VertexKind::CriticalPoint).collect();
        assert_eq!(zs.len(), 2);
        assert!(zs.iter().all(|v| (v.ord, v.d_vert, v.d_in) == (2, 0, 2)));
        assert_eq!(g.divisor_vertices().count(), 8);
    }
}

#[test]
fn mirror_edges_carry_equal_weights() {
    for e in cell_representatives() {
        let g = build_graph(&normalize(&e).unwrap()).unwrap();
        for ed in &g.edges {
            let (a, b) = (g.vertices[ed.from].position, g.vertices[ed.to].position);
            let twin = g.edges.iter().find(|f| {
                f.kind == ed.kind
                    && (g.vertices[f.from].position - a.conj()).norm() < 1e-7
                    && (g.vertices[f.to].position - b.conj()).norm() < 1e-7
            });
            let twin = twin.unwrap_or_else(|| panic!("no mirror of {a} -> {b}"));
            assert!((twin.weight - ed.weight).abs() < 1e-9);
        }
    }
}

#[test]
fn axis_edge_has_the_complementary_height() {
    for e in cell_representatives() {
        let d = normalize(&e).unwrap();
        let g = build_graph(&d).unwrap();
        let (t, w) = moduli_walls::forward(&d.divisor).unwrap();
        assert_ne!(t, GraphType::Unsupported);
        let v = w.values();
        let (h1, h2) = match t {
            GraphType::GammaPlus => (v[1], v[2]),
            _ => (v[0], v[1]),
        };
        let axis = g
            .edges_of(EdgeKind::Vertical)
            .find(|ed| g.vertices[ed.to].position.re < 0.0 && g.vertices[ed.to].position.im == 0.0)
            .unwrap();
        assert!((axis.weight - (std::f64::consts::PI - 2.0 * (h1 + h2))).abs() < 1e-8);
    }
}

#[test]
fn svg_marks_each_divisor_vertex_once() {
    let [w, plus, minus] = cell_representatives();
    let count = |e| count_vertex_markers(&render_svg(&build_graph(&normalize(&e).unwrap()).unwrap(), &SvgOptions::default()));
    assert_eq!(count(w), 7);
    assert_eq!(count(plus), 8);
    assert_eq!(count(minus), 8);
}

#[test]
fn empty_graph_renders_axes_only() {
    let svg = render_svg(&TracedGraph::default(), &SvgOptions::default());
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("axis"));
    assert_eq!(count_vertex_markers(&svg), 0);
}

#[test]
fn graph_construction_is_deterministic() {
    let d = normalize(&wall()).unwrap();
    let (a, b) = (build_graph(&d).unwrap(), build_graph(&d).unwrap());
    assert_eq!(a, b);
    let o = SvgOptions::default();
    assert_eq!(render_svg(&a, &o), render_svg(&b, &o));
}
