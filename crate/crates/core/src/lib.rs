//! Coordinates on the moduli space of real genus-2 curves with one real oval
//! and a marked point.
//!
//! A curve is given by its two free branch points `e1`, `e2` in the upper half
//! plane (the pair `±1` is pinned). The distinguished third-kind differential
//! `dη = (x² + a·x + b)/w dx` with purely imaginary periods foliates the plane;
//! the embedded weighted graph built from that foliation gives coordinates
//! (weights) on each cell of the moduli space. This crate computes
//!
//! * the forward map branch points → (graph type, weights),
//! * its Newton inverse weights → branch points,
//! * the expansion data at the wall between the `Γ₊` and `Γ₋` cells and the
//!   numerical verification of the root-type singularity there.

pub mod cli;
pub mod coords;
pub mod curve;
pub mod differential;
pub mod error;
pub mod graph;
pub mod json;
pub mod path;
pub mod quadrature;
pub mod slits;
pub mod svg;
pub mod wall;

pub use num_complex::Complex64 as C64;

pub use coords::{continue_path, find_wall, forward, inverse, CellCoordinates, InverseOptions};
pub use curve::{sample_divisors, sextic, BranchDivisor};
pub use differential::{normalize, Contour, ContourTag, DistinguishedDifferential};
pub use error::{Error, Result};
pub use graph::{
    build_graph, classify, critical_points, trace_trajectory, CriticalSet, GraphType,
    TraceKind, TracedGraph,
};
pub use path::{continue_w, PlanePath, Segment};
pub use slits::SlitSystem;
pub use wall::{
    alpha_beta, cusp_exponent, expansion_data, predict_displacement, taylor_check, verify_theorem,
    Displacement, Orientation, WallExpansion,
};
