use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use moduli_walls::cli::{run, CliError, Command, Output, RunConfig};

#[derive(Parser)]
#[command(name = "moduli-walls", about = "Graph coordinates and wall asymptotics for real genus-2 curves")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the report and artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long = "h-min", global = true)]
    h_min: Option<f64>,
    #[arg(long = "h-max", global = true)]
    h_max: Option<f64>,
    #[arg(long = "h-ratio", global = true)]
    h_ratio: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Graph type and weights of a divisor.
    Forward,
    /// Divisor with given weights, by Newton iteration from a guess.
    Inverse,
    /// Locate a wall point and its expansion data.
    Wall,
    /// Full verification run: scaling, cusp fits, continuity, figures.
    Verify,
    /// Cusp sweeps on both sides of the wall.
    Sweep,
    /// SVG drawing of the graph of a divisor.
    Render,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = &args.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = args.tol {
        cfg.tol = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.h_min {
        cfg.h_min = v;
    }
    if let Some(v) = args.h_max {
        cfg.h_max = v;
    }
    if let Some(v) = args.h_ratio {
        cfg.h_ratio = v;
    }
    Ok(cfg)
}

fn write_all(dir: &Path, report_name: &str, out: &Output) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(report_name), &out.report).map_err(io)?;
    for (name, body) in &out.files {
        std::fs::write(dir.join(name), body).map_err(io)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Ok(n) = std::env::var("MODULI_WALLS_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("usage error: MODULI_WALLS_THREADS must be a positive integer");
                return ExitCode::from(1);
            }
        }
    }
    let cmd = match args.command {
        Cmd::Forward => Command::Forward,
        Cmd::Inverse => Command::Inverse,
        Cmd::Wall => Command::Wall,
        Cmd::Verify => Command::Verify,
        Cmd::Sweep => Command::Sweep,
        Cmd::Render => Command::Render,
    };
    let result = load(&args).and_then(|cfg| {
        let out = run(cmd, &cfg)?;
        let default_dir = matches!(cmd, Command::Verify | Command::Sweep).then(|| PathBuf::from("moduli-walls-out"));
        if let Some(dir) = cfg.out.clone().or(default_dir) {
            let name = if cmd == Command::Render { "graph.svg" } else { "report.json" };
            write_all(&dir, name, &out)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("moduli-walls: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
