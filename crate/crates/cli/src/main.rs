use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use polarfit_core::eval::{evaluate, DEFAULT_GRID, DEFAULT_IOU_THRESHOLD};
use polarfit_core::fit::{fit, FitAngleMode, FitConfig, FitTrace};
use polarfit_core::geometry::to_polar;
use polarfit_core::gradcheck::{self, GradcheckConfig};
use polarfit_core::io::{self, Style};
use polarfit_core::{
    polygon_iou, resample_oracle, resample_triangle, resample_vector, shapes, CartesianPolygon, Error,
    LossWeights, OriginMode, Point, PolarPolygon,
};

#[derive(Parser)]
#[command(name = "polarfit", version, about = "Fit, resample and evaluate polar polygons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a polar polygon to the first polygon of a target document.
    Fit(FitArgs),
    /// Sample every polygon of a document along uniform rays.
    Resample(ResampleArgs),
    /// Match predictions to ground truth and report precision, recall and F1.
    Eval(EvalArgs),
    /// Compare taped gradients with central differences on random inputs.
    Gradcheck(GradcheckArgs),
    /// Fit a built-in shape and write snapshot SVGs and the loss trace.
    Demo(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AngleModeArg {
    Cumsum,
    BinOffset,
    Fixed,
}

impl From<AngleModeArg> for FitAngleMode {
    fn from(a: AngleModeArg) -> Self {
        match a {
            AngleModeArg::Cumsum => FitAngleMode::Cumsum,
            AngleModeArg::BinOffset => FitAngleMode::BinOffset,
            AngleModeArg::Fixed => FitAngleMode::Fixed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OriginModeArg {
    Centroid,
    Bbox,
    VertexMean,
}

impl From<OriginModeArg> for OriginMode {
    fn from(a: OriginModeArg) -> Self {
        match a {
            OriginModeArg::Centroid => OriginMode::Centroid,
            OriginModeArg::Bbox => OriginMode::BboxCenter,
            OriginModeArg::VertexMean => OriginMode::VertexMean,
        }
    }
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 24)]
    k: usize,
    #[arg(long, default_value_t = 360)]
    m: usize,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, value_enum, default_value = "cumsum")]
    angle_mode: AngleModeArg,
    #[arg(long, value_enum, default_value = "centroid")]
    origin_mode: OriginModeArg,
    /// Origin loss weight.
    #[arg(long, default_value_t = 1.0)]
    w1: f64,
    /// Polar IoU loss weight.
    #[arg(long, default_value_t = 1.0)]
    w2: f64,
    /// Smoothness loss weight.
    #[arg(long, default_value_t = 0.1)]
    w3: f64,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    #[arg(long)]
    out_trace: Option<PathBuf>,
    /// Comma-separated 1-based iterations to draw in the SVG.
    #[arg(long, value_delimiter = ',')]
    snapshot_iters: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Triangle,
    Vector,
    Oracle,
}

#[derive(clap::Args)]
struct ResampleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 360)]
    m: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phase: f64,
    #[arg(long, value_enum, default_value = "vector")]
    method: Method,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    iou_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

#[derive(clap::Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 12)]
    k: usize,
    #[arg(long, default_value_t = 90)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    /// Relative tolerance; near-zero components use an absolute 1e-7.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Star,
    Crosswalk,
    Lshape,
}

#[derive(clap::Args)]
struct DemoArgs {
    #[arg(long, value_enum, default_value = "star")]
    shape: Shape,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

const TARGET_COLOR: &str = "#1f4fd1";
const SNAPSHOT_COLORS: [&str; 4] = ["#f2b8b8", "#e57373", "#d03434", "#a00000"];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Resample(a) => cmd_resample(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Demo(a) => cmd_demo(a),
    };
    match result {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn fit_summary(target: &CartesianPolygon, polygon: &PolarPolygon, trace: &FitTrace) -> Result<Value, Failure> {
    let iou = polygon_iou(&polygon.to_cartesian(), target, DEFAULT_GRID)?;
    let last = trace.last().loss;
    Ok(json!({
        "origin_loss": last.origin,
        "iou_loss": last.polar_iou,
        "smooth_loss": last.smoothness,
        "total": last.total,
        "iou": iou,
        "iterations": trace.iterations(),
    }))
}

/// Target in blue, then snapshots from faint to strong red.
fn overlay(target: &CartesianPolygon, trace: &FitTrace) -> Vec<(CartesianPolygon, Style)> {
    let mut shapes = vec![(target.clone(), Style::filled(TARGET_COLOR, TARGET_COLOR))];
    let n = trace.snapshots.len();
    for (i, s) in trace.snapshots.iter().enumerate() {
        let shade = SNAPSHOT_COLORS[(SNAPSHOT_COLORS.len() - n.min(SNAPSHOT_COLORS.len()) + i).min(SNAPSHOT_COLORS.len() - 1)];
        shapes.push((s.polygon.to_cartesian(), Style::outline(shade)));
    }
    shapes
}

fn cmd_fit(a: FitArgs) -> Result<Value, Failure> {
    let cfg = FitConfig {
        k: a.k,
        m: a.m,
        max_iters: a.iters,
        learning_rate: a.lr,
        weights: LossWeights::new(a.w1, a.w2, a.w3)?,
        angle_mode: a.angle_mode.into(),
        origin_mode: a.origin_mode.into(),
        seed: a.seed,
        snapshot_iters: if a.snapshot_iters.is_empty() {
            vec![a.iters]
        } else {
            a.snapshot_iters.clone()
        },
        ..Default::default()
    };
    cfg.validate()?;
    let polys = io::read_polygons(&a.target)?;
    let (id, target) = polys
        .into_iter()
        .next()
        .ok_or_else(|| usage(format!("{}: document contains no polygons", a.target.display())))?;
    eprintln!("fitting '{id}' with k = {}, m = {}, {} iterations", cfg.k, cfg.m, cfg.max_iters);
    let (polygon, trace) = fit(&target, &cfg)?;
    if let Some(path) = &a.out_trace {
        io::write_trace_csv(&trace, path)?;
    }
    if let Some(path) = &a.out_svg {
        io::write_svg(&overlay(&target, &trace), path)?;
    }
    let summary = fit_summary(&target, &polygon, &trace)?;
    eprintln!("done: total loss {:.6}, IoU {:.4}", trace.last().loss.total, summary["iou"]);
    Ok(summary)
}

fn cmd_resample(a: ResampleArgs) -> Result<Value, Failure> {
    let doc = io::read_document(&a.input)?;
    let polys = doc.polygons()?;
    let mut profiles = Vec::with_capacity(polys.len());
    for ((id, poly), entry) in polys.into_iter().zip(&doc.polygons) {
        let origin = entry
            .origin
            .map_or_else(|| poly.geometric_centroid(), |[x, y]| Point::new(x, y));
        let profile = match a.method {
            Method::Triangle => {
                let polar = to_polar(&poly, origin).map_err(|e| usage(format!("polygon '{id}': {e}")))?;
                resample_triangle(&polar, a.m, a.phase)
            }
            Method::Vector => resample_vector(&poly, origin, a.m, a.phase),
            Method::Oracle => resample_oracle(&poly, origin, a.m, a.phase),
        }
        .map_err(|e| Failure {
            code: if e.is_numerical() { 2 } else { 1 },
            message: format!("polygon '{id}': {e}"),
        })?;
        profiles.push((id, profile));
    }
    io::write_profiles_csv(&profiles, &a.out)?;
    eprintln!("wrote {} profiles of {} rays to {}", profiles.len(), a.m, a.out.display());
    Ok(json!({
        "polygons": profiles.len(),
        "m": a.m,
        "out": a.out.display().to_string(),
    }))
}

fn cmd_eval(a: EvalArgs) -> Result<Value, Failure> {
    let preds: Vec<_> = io::read_polygons(&a.pred)?.into_iter().map(|(_, p)| p).collect();
    let gts: Vec<_> = io::read_polygons(&a.gt)?.into_iter().map(|(_, p)| p).collect();
    let report = evaluate(&preds, &gts, a.iou_threshold, a.grid)?;
    eprintln!(
        "{} predictions, {} ground truths, {} matches",
        preds.len(),
        gts.len(),
        report.assignments.len()
    );
    Ok(json!({
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "assignments": report.assignments,
    }))
}

fn cmd_gradcheck(a: GradcheckArgs) -> Result<Value, Failure> {
    let cfg = GradcheckConfig {
        k: a.k,
        m: a.m,
        trials: a.trials,
        eps: a.eps,
        tolerance: a.tolerance,
        seed: a.seed,
        ..Default::default()
    };
    let r = gradcheck::run(&cfg)?;
    eprintln!(
        "{} trials ({} excluded near branch boundaries), {} components, {} failures",
        r.trials, r.excluded, r.components, r.failures
    );
    let line = json!({
        "k": r.k,
        "m": r.m,
        "trials": r.trials,
        "excluded": r.excluded,
        "max_rel_error": r.max_rel_error,
        "max_abs_error_near_zero": r.max_abs_error_near_zero,
        "passed": r.passed,
    });
    if r.passed {
        Ok(line)
    } else {
        println!("{line}");
        Err(Failure {
            code: 2,
            message: format!("{} gradient components outside tolerance", r.failures),
        })
    }
}

const DEMO_SNAPSHOTS: [usize; 3] = [1, 200, 500];

fn cmd_demo(a: DemoArgs) -> Result<Value, Failure> {
    let target = match a.shape {
        Shape::Star => shapes::demo_star(),
        Shape::Crosswalk => shapes::crosswalk(),
        Shape::Lshape => shapes::lshape(Point::new(0.0, 0.0), 3.0, 3.0, 1.3, 1.3),
    };
    let cfg = FitConfig {
        k: 24,
        m: 360,
        max_iters: 500,
        snapshot_iters: DEMO_SNAPSHOTS.to_vec(),
        ..Default::default()
    };
    std::fs::create_dir_all(&a.out_dir).map_err(|e| usage(format!("{}: {e}", a.out_dir.display())))?;
    let (polygon, trace) = fit(&target, &cfg)?;
    let out = |name: &str| -> PathBuf { Path::new(&a.out_dir).join(name) };
    for s in &trace.snapshots {
        let shapes = [
            (target.clone(), Style::filled(TARGET_COLOR, TARGET_COLOR)),
            (s.polygon.to_cartesian(), Style::outline("#d03434")),
        ];
        io::write_svg(&shapes, out(&format!("iter_{:03}.svg", s.iteration)))?;
    }
    io::write_svg(&overlay(&target, &trace), out("overlay.svg"))?;
    io::write_trace_csv(&trace, out("trace.csv"))?;
    let mut summary = fit_summary(&target, &polygon, &trace)?;
    summary["first_total"] = json!(trace.first().loss.total);
    eprintln!(
        "demo written to {}: IoU {:.4}, total loss {:.6} -> {:.6}",
        a.out_dir.display(),
        summary["iou"],
        trace.first().loss.total,
        trace.last().loss.total
    );
    Ok(summary)
}
