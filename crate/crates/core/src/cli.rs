//! Commands behind the `moduli-walls` binary: configuration, reports and
//! artifact files. Every command is a pure function of its configuration.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::coords::{find_wall, forward_full, inverse_with, CellCoordinates, InverseOptions};
use crate::graph::{build_graph, GraphType};
use crate::svg::{render_svg, SvgOptions};
use crate::wall::{
    crossing_gaps, cusp_exponent_with, expansion_data, geometric_grid, sign_coherence, solve_displaced,
    taylor_check, CoherenceReport, CrossingPoint, CuspFit, Displacement, TaylorCheck, WallExpansion,
};
use crate::{json, sample_divisors, BranchDivisor, Error, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Forward,
    Inverse,
    Wall,
    Verify,
    Sweep,
    Render,
}

/// Seed of the wall search when none is configured.
pub fn default_wall_seed() -> BranchDivisor {
    BranchDivisor {
        e1: C64::new(1.8, 0.31606005),
        e2: C64::new(2.0, 1.0),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Input divisor (`forward`, `render`) or wall seed (`wall`, `verify`, `sweep`).
    pub divisor: Option<BranchDivisor>,
    /// When set and `divisor` is absent, `forward` runs on this many seeded samples.
    pub samples: Option<usize>,
    pub weights: Option<CellCoordinates>,
    pub guess: Option<BranchDivisor>,
    pub tol: f64,
    pub seed: u64,
    /// Transversal-weight grid of the cusp sweeps.
    pub h_min: f64,
    pub h_max: f64,
    pub h_ratio: f64,
    /// `h` values of the error-scaling experiment, halving.
    pub h_values: Vec<f64>,
    /// Tangential direction `(δH1, δH2, δW)` and its scales.
    pub da_direction: [f64; 3],
    pub da_scales: Vec<f64>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            divisor: None,
            samples: None,
            weights: None,
            guess: None,
            tol: 1e-10,
            seed: 0,
            h_min: 1e-6,
            h_max: 1e-3,
            h_ratio: 2.0,
            h_values: vec![0.05, 0.025, 0.0125],
            da_direction: [0.3, -0.2, 0.5],
            da_scales: vec![0.004, 0.002, 0.001],
            out: None,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Run(Error::InvalidDivisor(_)) => 1,
            CliError::Run(e) if e.is_infeasible() => 2,
            CliError::Run(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[0] < p[1])
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad config: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Usage(m.into()));
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.h_min > 0.0 && self.h_max > self.h_min) {
            return bad("need 0 < h_min < h_max");
        }
        if !(self.h_ratio > 1.0) {
            return bad("h_ratio must exceed 1");
        }
        let mut hs = self.h_values.clone();
        hs.reverse();
        if hs.is_empty() || hs[0] <= 0.0 || !strictly_increasing(&hs) {
            return bad("h_values must be positive and strictly decreasing");
        }
        let mut ds = self.da_scales.clone();
        ds.reverse();
        if ds.is_empty() || ds[0] <= 0.0 || !strictly_increasing(&ds) {
            return bad("da_scales must be positive and strictly decreasing");
        }
        if let Some(d) = &self.divisor {
            d.validate()?;
        }
        if let Some(d) = &self.guess {
            d.validate()?;
        }
        Ok(())
    }

    pub fn sweep_grid(&self) -> Vec<f64> {
        geometric_grid(self.h_min, self.h_max, self.h_ratio)
    }

    fn inverse_options(&self) -> InverseOptions {
        InverseOptions {
            tol: self.tol,
            ..InverseOptions::default()
        }
    }
}

/// The JSON report plus named artifact files.
#[derive(Clone, Debug, Default)]
pub struct Output {
    pub report: String,
    pub files: Vec<(String, String)>,
}

#[derive(Serialize)]
struct ForwardReport {
    divisor: BranchDivisor,
    #[serde(rename = "type")]
    graph_type: &'static str,
    weights: CellCoordinates,
    a: f64,
    b: f64,
    dsc: f64,
    period_residuals: [f64; 2],
}

#[derive(Serialize)]
#[serde(untagged)]
enum ForwardEntry {
    Ok(ForwardReport),
    Failed { divisor: BranchDivisor, error: String, code: i32 },
}

fn forward_report(e: &BranchDivisor) -> Result<ForwardReport, Error> {
    let r = forward_full(e)?;
    let d = &r.differential;
    Ok(ForwardReport {
        divisor: d.divisor,
        graph_type: r.graph_type.name(),
        weights: r.coordinates,
        a: d.a,
        b: d.b,
        dsc: d.discriminant(),
        period_residuals: d.period_residuals,
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    json::to_string(v).map_err(|e| CliError::Io(e.to_string()))
}

pub fn cmd_forward(cfg: &RunConfig) -> Result<Output, CliError> {
    if let Some(e) = &cfg.divisor {
        return Ok(Output {
            report: to_json(&forward_report(e)?)?,
            files: vec![],
        });
    }
    let Some(n) = cfg.samples else {
        return Err(CliError::Usage("forward needs a divisor or a sample count".into()));
    };
    let entries: Vec<ForwardEntry> = sample_divisors(cfg.seed, n)
        .iter()
        .map(|e| match forward_report(e) {
            Ok(r) => ForwardEntry::Ok(r),
            Err(err) => ForwardEntry::Failed {
                divisor: *e,
                error: err.to_string(),
                code: CliError::Run(err).exit_code(),
            },
        })
        .collect();
    Ok(Output {
        report: to_json(&entries)?,
        files: vec![],
    })
}

#[derive(Serialize)]
struct InverseReport {
    divisor: BranchDivisor,
    target: CellCoordinates,
    residual: f64,
}

pub fn cmd_inverse(cfg: &RunConfig) -> Result<Output, CliError> {
    let target = cfg
        .weights
        .ok_or_else(|| CliError::Usage("inverse needs weights".into()))?;
    let guess = cfg
        .guess
        .ok_or_else(|| CliError::Usage("inverse needs a guess divisor".into()))?;
    let (divisor, residual) = inverse_with(&target, &guess, &cfg.inverse_options())?;
    Ok(Output {
        report: to_json(&InverseReport {
            divisor,
            target,
            residual,
        })?,
        files: vec![],
    })
}

#[derive(Serialize)]
struct WallReport<'a> {
    seed: BranchDivisor,
    wall: BranchDivisor,
    eta_minus_one: C64,
    dsc: f64,
    expansion: &'a WallExpansion,
}

fn wall_expansion(cfg: &RunConfig) -> Result<(BranchDivisor, WallExpansion), CliError> {
    let seed = cfg.divisor.unwrap_or_else(default_wall_seed);
    let wall = find_wall(&seed)?;
    Ok((seed, expansion_data(&wall)?))
}

pub fn cmd_wall(cfg: &RunConfig) -> Result<Output, CliError> {
    let (seed, x) = wall_expansion(cfg)?;
    let d = &x.differential;
    Ok(Output {
        report: to_json(&WallReport {
            seed,
            wall: x.e0,
            eta_minus_one: d.eta(C64::new(-1.0, 0.0))?,
            dsc: d.discriminant(),
            expansion: &x,
        })?,
        files: vec![],
    })
}

/// Both cusp sweeps over the configured grid.
fn sweeps(cfg: &RunConfig, x: &WallExpansion) -> Result<[CuspFit; 2], CliError> {
    let grid = cfg.sweep_grid();
    Ok([cusp_exponent_with(x, 1, &grid)?, cusp_exponent_with(x, -1, &grid)?])
}

pub const CSV_HEADER: [&str; 11] = [
    "h", "H0", "A1", "A2", "A3", "A4", "e1_re", "e1_im", "e2_re", "e2_im", "residual",
];

/// One CSV row per sweep point; `H0` holds the transversal weight
/// (`H0` for `Γ₊`, `W2 − W1` for `Γ₋`) and `A1..A4` the target weights.
pub fn sweep_csv(x: &WallExpansion, fit: &CuspFit) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for p in &fit.points {
        let t = Displacement::transversal(p.h, fit.sign).target(x.wall_weights());
        let mut row = vec![json::fmt17(p.h), json::fmt17(p.value)];
        row.extend(t.values().into_iter().map(json::fmt17));
        for c in [p.divisor.e1, p.divisor.e2] {
            row.push(json::fmt17(c.re));
            row.push(json::fmt17(c.im));
        }
        row.push(json::fmt17(p.solver_residual));
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Serialize)]
struct FitSummary {
    sign: i8,
    slope: f64,
    derivative_slope: f64,
    points: usize,
}

impl From<&CuspFit> for FitSummary {
    fn from(f: &CuspFit) -> Self {
        FitSummary {
            sign: f.sign,
            slope: f.slope,
            derivative_slope: f.derivative_slope,
            points: f.points.len(),
        }
    }
}

#[derive(Serialize)]
struct SweepReport {
    wall: BranchDivisor,
    grid: Vec<f64>,
    fits: Vec<FitSummary>,
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let (_, x) = wall_expansion(cfg)?;
    let fits = sweeps(cfg, &x)?;
    Ok(Output {
        report: to_json(&SweepReport {
            wall: x.e0,
            grid: cfg.sweep_grid(),
            fits: fits.iter().map(FitSummary::from).collect(),
        })?,
        files: vec![
            ("sweep_plus.csv".into(), sweep_csv(&x, &fits[0])?),
            ("sweep_minus.csv".into(), sweep_csv(&x, &fits[1])?),
        ],
    })
}

fn graph_svg(e: &BranchDivisor, title: &str) -> Result<String, CliError> {
    let d = forward_full(e)?.differential;
    let g = build_graph(&d)?;
    Ok(render_svg(
        &g,
        &SvgOptions {
            title: Some(title.into()),
            ..SvgOptions::default()
        },
    ))
}

pub fn cmd_render(cfg: &RunConfig) -> Result<Output, CliError> {
    let e = cfg
        .divisor
        .ok_or_else(|| CliError::Usage("render needs a divisor".into()))?;
    let (t, _) = crate::forward(&e)?;
    let svg = graph_svg(&e, t.name())?;
    Ok(Output {
        report: svg.clone(),
        files: vec![("graph.svg".into(), svg)],
    })
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    seed: BranchDivisor,
    wall: BranchDivisor,
    eta_minus_one: C64,
    expansion: &'a WallExpansion,
    taylor: TaylorCheck,
    coherence: CoherenceReport,
    fits: Vec<FitSummary>,
    crossing: Vec<CrossingPoint>,
    grid: Vec<f64>,
    figures: Vec<String>,
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let (seed, x) = wall_expansion(cfg)?;
    let taylor = taylor_check(&x)?;
    let [a, b, c] = cfg.da_direction;
    let coherence = sign_coherence(&x, &cfg.h_values, &Displacement::tangential(a, b, c), &cfg.da_scales)?;
    let fits = sweeps(cfg, &x)?;
    let crossing = crossing_gaps(&x, &cfg.h_values)?;

    let h = cfg.h_values[0];
    let (plus, _) = solve_displaced(&x, &Displacement::transversal(h, 1))?;
    let (minus, _) = solve_displaced(&x, &Displacement::transversal(h, -1))?;
    let mut files = vec![
        ("sweep_plus.csv".to_string(), sweep_csv(&x, &fits[0])?),
        ("sweep_minus.csv".to_string(), sweep_csv(&x, &fits[1])?),
    ];
    for (name, e, t) in [
        ("graph_gamma_zero.svg", x.e0, GraphType::GammaZero),
        ("graph_gamma_plus.svg", plus, GraphType::GammaPlus),
        ("graph_gamma_minus.svg", minus, GraphType::GammaMinus),
    ] {
        files.push((name.to_string(), graph_svg(&e, t.name())?));
    }
    let report = VerifyReport {
        seed,
        wall: x.e0,
        eta_minus_one: x.differential.eta(C64::new(-1.0, 0.0))?,
        expansion: &x,
        taylor,
        coherence,
        fits: fits.iter().map(FitSummary::from).collect(),
        crossing,
        grid: cfg.sweep_grid(),
        figures: files.iter().filter(|f| f.0.ends_with(".svg")).map(|f| f.0.clone()).collect(),
    };
    Ok(Output {
        report: to_json(&report)?,
        files,
    })
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    cfg.validate()?;
    match cmd {
        Command::Forward => cmd_forward(cfg),
        Command::Inverse => cmd_inverse(cfg),
        Command::Wall => cmd_wall(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Render => cmd_render(cfg),
    }
}
