//! The `plateau` command line: scenario loading, runs, artifacts and exit codes.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::barrier::{hausdorff_to_cap, solve_plateau, FrozenSet, PlateauOptions, PlateauRun, RunStatus, Tag};
use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::io::{self, fmt_f64, Meta};
use crate::ma::{exact_solution, fitted_order, pogorelov_variation, solve_dirichlet, verify_bounds, ProblemFile, SolveOptions};
use crate::suite::{convex_suite, duality_suite, GroupResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "plateau", version = crate::VERSION, about = "Constant Gauss curvature graphs and Plateau problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario or problem file (TOML, or JSON with --json).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed recorded in every artifact; overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Read the config as JSON.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Dirichlet problem for a strictly convex graph.
    Solve,
    /// Volume-minimising Plateau run.
    Plateau,
    /// Convex-kernel and duality property suites.
    Suite,
    /// Convergence study over a list of spacings.
    Study,
}

impl Command {
    fn kind(self) -> &'static str {
        match self {
            Command::Solve => "dirichlet",
            Command::Plateau => "plateau",
            Command::Suite => "geometry_suite",
            Command::Study => "convergence_study",
        }
    }
}

/// Machine-readable result of a run, written to `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub kind: String,
    pub status: String,
    pub meta: Meta,
    pub metrics: Value,
    pub artifacts: Vec<String>,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
}

fn parse_failure(error: Error) -> Failure {
    Failure { code: EXIT_PARSE, error }
}

fn solver_failure(error: Error) -> Failure {
    Failure { code: EXIT_SOLVER, error }
}

/// Line-delimited JSON event on stderr.
fn log(event: &str, fields: Value) {
    let mut v = json!({ "event": event });
    if let (Some(m), Value::Object(f)) = (v.as_object_mut(), fields) {
        m.extend(f);
    }
    if let Ok(s) = io::to_json(&v) {
        eprintln!("{s}");
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            print_summary(&summary);
            if summary.status == "ok" {
                EXIT_OK
            } else {
                EXIT_SOLVER
            }
        }
        Err(f) => {
            log("error", json!({ "code": f.code, "message": f.error.to_string() }));
            println!("plateau: {}", f.error);
            f.code
        }
    }
}

fn print_summary(s: &Summary) {
    println!("{} run: {}", s.kind, s.status);
    if let Value::Object(m) = &s.metrics {
        for (k, v) in m {
            match v {
                Value::Number(n) if n.is_f64() => println!("  {k}: {}", n.as_f64().map_or_else(|| n.to_string(), fmt_f64)),
                Value::Number(n) => println!("  {k}: {n}"),
                Value::String(t) => println!("  {k}: {t}"),
                Value::Bool(b) => println!("  {k}: {b}"),
                _ => {}
            }
        }
    }
    for a in &s.artifacts {
        println!("  wrote {a}");
    }
}

/// Executes a parsed command line, writing artifacts under `--out`.
pub fn execute(cli: &Cli) -> std::result::Result<Summary, Failure> {
    if let Some(t) = cli.threads {
        // the global pool can only be built once per process; later calls keep it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let text = match &cli.config {
        Some(p) => fs::read_to_string(p).map_err(|e| parse_failure(Error::Parse(format!("{}: {e}", p.display()))))?,
        None if cli.command == Command::Suite => String::new(),
        None => return Err(parse_failure(Error::Parse("--config is required".into()))),
    };
    let base = cli.config.as_deref().and_then(Path::parent).unwrap_or(Path::new(".")).to_path_buf();
    fs::create_dir_all(&cli.out).map_err(|e| solver_failure(e.into()))?;
    let started = Instant::now();
    log("start", json!({ "kind": cli.command.kind(), "version": io::version_string() }));
    let summary = match cli.command {
        Command::Solve => run_solve(cli, &text, &base),
        Command::Plateau => run_plateau(cli, &text, &base),
        Command::Suite => run_suite(cli, &text),
        Command::Study => run_study(cli, &text, &base),
    }?;
    let path = cli.out.join("summary.json");
    fs::write(&path, io::to_json(&summary).map_err(solver_failure)? + "\n").map_err(|e| solver_failure(e.into()))?;
    log("done", json!({ "status": summary.status, "elapsed_s": started.elapsed().as_secs_f64() }));
    Ok(summary)
}

fn parse_config<T: for<'de> Deserialize<'de>>(text: &str, json: bool) -> std::result::Result<T, Failure> {
    if json {
        serde_json::from_str(text).map_err(|e| parse_failure(e.into()))
    } else {
        toml::from_str(text).map_err(|e| parse_failure(e.into()))
    }
}

fn write(out: &Path, name: &str, contents: impl AsRef<[u8]>, artifacts: &mut Vec<String>) -> std::result::Result<(), Failure> {
    fs::write(out.join(name), contents).map_err(|e| solver_failure(e.into()))?;
    artifacts.push(name.to_string());
    Ok(())
}

fn meta_comments(meta: &Meta) -> Vec<String> {
    vec![format!("version {}", meta.version), format!("seed {}", meta.seed), format!("scenario_hash {}", meta.scenario_hash)]
}

fn run_solve(cli: &Cli, text: &str, base: &Path) -> std::result::Result<Summary, Failure> {
    let file: ProblemFile = parse_config(text, cli.json)?;
    let prob = file.build(base).map_err(parse_failure)?;
    let meta = Meta::new(cli.seed.unwrap_or(0), text);
    let sol = solve_dirichlet(&prob, &SolveOptions::default()).map_err(solver_failure)?;
    for s in &sol.steps {
        log("continuation_step", serde_json::to_value(s).unwrap_or(Value::Null));
    }
    let bounds = verify_bounds(&sol, &prob).map_err(solver_failure)?;
    let mut metrics = json!({
        "nodes": sol.grid.len(),
        "h": prob.h,
        "residual": sol.diagnostics.residual,
        "sup_f": sol.diagnostics.sup_f,
        "sup_gradient": sol.diagnostics.sup_gradient,
        "pogorelov": sol.diagnostics.pogorelov,
        "min_eigenvalue": sol.diagnostics.min_eigenvalue,
        "c0_bound_holds": bounds.c0_holds,
        "c1_bound_holds": bounds.c1_holds,
        "strictly_convex": sol.is_strictly_convex(),
        "continuation_steps": sol.steps.len(),
    });
    if let Some(exact) = exact_solution(&prob) {
        metrics["sup_error"] = json!(sol.sup_error(&exact));
    }
    let mut artifacts = Vec::new();
    let mut csv = format!("# version {} seed {} scenario_hash {}\r\n", meta.version, meta.seed, meta.scenario_hash);
    csv.push_str(&io::solution_csv(&sol));
    write(&cli.out, "solution.csv", csv, &mut artifacts)?;
    let grid = io::solution_grid(&sol);
    io::write_grid(&grid, &cli.out.join("solution.bin")).map_err(solver_failure)?;
    artifacts.push("solution.bin".into());
    artifacts.push("solution.bin.json".into());
    let status = if sol.is_strictly_convex() && bounds.holds() { "ok" } else { "failed" };
    Ok(Summary { kind: "dirichlet".into(), status: status.into(), meta, metrics, artifacts })
}

/// Convergence study configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub problem: ProblemRef,
    pub hs: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Path(PathBuf),
    Inline(Box<ProblemFile>),
}

fn run_study(cli: &Cli, text: &str, base: &Path) -> std::result::Result<Summary, Failure> {
    let cfg: StudyConfig = parse_config(text, cli.json)?;
    if cfg.hs.len() < 3 || cfg.hs.iter().any(|h| !(*h > 0.0)) {
        return Err(parse_failure(Error::Parse("a study needs at least three positive spacings".into())));
    }
    let (file, pbase) = match &cfg.problem {
        ProblemRef::Inline(p) => ((**p).clone(), base.to_path_buf()),
        ProblemRef::Path(p) => {
            let path = base.join(p);
            let t = fs::read_to_string(&path).map_err(|e| parse_failure(Error::Parse(format!("{}: {e}", path.display()))))?;
            let f = if path.extension().is_some_and(|e| e == "json") { ProblemFile::parse_json(&t) } else { ProblemFile::parse(&t) };
            (f.map_err(parse_failure)?, path.parent().unwrap_or(Path::new(".")).to_path_buf())
        }
    };
    let prob = file.build(&pbase).map_err(parse_failure)?;
    let meta = Meta::new(cli.seed.unwrap_or(0), text);
    let opts = SolveOptions::default();
    let mut csv = format!("# version {} seed {} scenario_hash {}\r\n", meta.version, meta.seed, meta.scenario_hash);
    let mut metrics = json!({ "levels": cfg.hs.len() });
    match exact_solution(&prob) {
        Some(exact) => {
            let rows = crate::ma::convergence_study(&prob, &cfg.hs, &exact, &opts).map_err(solver_failure)?;
            csv.push_str("h,sup_error,observed_order\r\n");
            for r in &rows {
                let order = r.observed_order.map(fmt_f64).unwrap_or_default();
                csv.push_str(&format!("{},{},{}\r\n", fmt_f64(r.h), fmt_f64(r.sup_error), order));
                log("study_row", serde_json::to_value(r).unwrap_or(Value::Null));
            }
            metrics["fitted_order"] = json!(fitted_order(&rows));
            metrics["min_observed_order"] = json!(rows.iter().filter_map(|r| r.observed_order).fold(f64::INFINITY, f64::min));
            metrics["finest_sup_error"] = json!(rows.last().map(|r| r.sup_error));
            metrics["pogorelov_variation"] = json!(pogorelov_variation(&rows));
            metrics["monotone"] = json!(rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error));
        }
        None => {
            csv.push_str("h,residual\r\n");
            for &h in &cfg.hs {
                let mut p = prob.clone();
                p.h = h;
                let sol = solve_dirichlet(&p, &opts).map_err(solver_failure)?;
                csv.push_str(&format!("{},{}\r\n", fmt_f64(h), fmt_f64(sol.diagnostics.residual)));
                log("study_row", json!({ "h": h, "residual": sol.diagnostics.residual }));
            }
            metrics["oracle"] = json!("unavailable");
        }
    }
    let mut artifacts = Vec::new();
    write(&cli.out, "study.csv", csv, &mut artifacts)?;
    Ok(Summary { kind: "convergence_study".into(), status: "ok".into(), meta, metrics, artifacts })
}

/// Property suite configuration; every field has a default.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub cases: usize,
    pub polygons: usize,
    pub angular_res_deg: f64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { cases: 1000, polygons: 100, angular_res_deg: 1.0, seed: 0 }
    }
}

fn run_suite(cli: &Cli, text: &str) -> std::result::Result<Summary, Failure> {
    let cfg: SuiteConfig = if text.trim().is_empty() { SuiteConfig::default() } else { parse_config(text, cli.json)? };
    let seed = cli.seed.unwrap_or(cfg.seed);
    let meta = Meta::new(seed, text);
    let mut groups: Vec<GroupResult> = convex_suite(seed, cfg.cases);
    groups.extend(duality_suite(seed, cfg.polygons, cfg.angular_res_deg));
    let mut metrics = serde_json::Map::new();
    for g in &groups {
        log("suite_group", serde_json::to_value(g).unwrap_or(Value::Null));
        metrics.insert(g.name.clone(), json!(if g.pass { "pass" } else { "fail" }));
    }
    let all = groups.iter().all(|g| g.pass);
    let mut artifacts = Vec::new();
    let report = json!({ "meta": meta, "groups": groups });
    write(&cli.out, "suite.json", io::to_json(&report).map_err(solver_failure)? + "\n", &mut artifacts)?;
    Ok(Summary {
        kind: "geometry_suite".into(),
        status: if all { "ok" } else { "failed" }.into(),
        meta,
        metrics: Value::Object(metrics),
        artifacts,
    })
}

/// Plateau scenario.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateauScenario {
    /// `"ball radius=… subdivisions=…"`, `"disk radius=… samples=…"`, or a body file.
    pub body: String,
    pub frozen_set: FrozenSpec,
    pub k: f64,
    #[serde(rename = "tol_H", alias = "tol_h", default = "default_tol_h")]
    pub tol_h: f64,
    #[serde(default = "default_tol_kappa")]
    pub tol_kappa: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub seed: u64,
    /// Frozen-set membership tolerance; defaults to `1e-3 · diameter`.
    pub frozen_tol: Option<f64>,
}

fn default_tol_h() -> f64 {
    1e-3
}

fn default_tol_kappa() -> f64 {
    0.1
}

fn default_max_iters() -> usize {
    8
}

/// `"hemisphere"` (lower half along the last axis), a cap
/// `{ normal = [...], offset = ... }` meaning `⟨p, normal⟩ ≤ offset`, or a
/// sample file `{ samples = "points.csv" }`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FrozenSpec {
    Named(String),
    Cap { normal: Vec<f64>, offset: f64 },
    Samples { samples: PathBuf },
}

/// Builtin body with the radius of its round equator, if any.
fn scenario_body(spec: &str, base: &Path) -> Result<(ConvexBody, Option<f64>)> {
    let mut parts = spec.split_whitespace();
    let head = parts.next().ok_or_else(|| Error::Parse("empty body".into()))?;
    let mut kv = std::collections::BTreeMap::new();
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {p:?}")))?;
        let v: f64 = v.parse().map_err(|_| Error::Parse(format!("bad number {v:?}")))?;
        kv.insert(k.to_string(), v);
    }
    let radius = kv.get("radius").copied().unwrap_or(1.0);
    if !(radius > 0.0) {
        return Err(Error::Parse("radius must be positive".into()));
    }
    match head {
        "ball" => {
            let s = kv.get("subdivisions").copied().unwrap_or(5.0);
            if !(0.0..=7.0).contains(&s) {
                return Err(Error::Parse("subdivisions must lie in 0..=7".into()));
            }
            Ok((ConvexBody::ball(Point::zeros(), radius, s as u32), Some(radius)))
        }
        "disk" => {
            let m = kv.get("samples").copied().unwrap_or(720.0);
            if !(m >= 3.0) {
                return Err(Error::Parse("disk needs at least 3 samples".into()));
            }
            Ok((ConvexBody::disk(Point::zeros(), radius, m as usize), Some(radius)))
        }
        _ => Ok((io::read_body(&base.join(spec.trim()))?, None)),
    }
}

fn frozen_set(spec: &FrozenSpec, body: &ConvexBody, tol: f64, base: &Path) -> Result<FrozenSet> {
    let dim = body.dim();
    match spec {
        FrozenSpec::Named(s) if s == "hemisphere" || s == "lower_half" => FrozenSet::lower_half(dim, tol),
        FrozenSpec::Named(s) => Err(Error::Parse(format!("unknown frozen set {s:?}"))),
        FrozenSpec::Cap { normal, offset } => {
            let n = geom::from_slice(normal).filter(|_| normal.len() == dim);
            let n = n.ok_or_else(|| Error::Parse(format!("cap normal must have {dim} components")))?;
            FrozenSet::half_space(n, *offset, tol)
        }
        FrozenSpec::Samples { samples } => {
            let path = base.join(samples);
            let pts = io::parse_polyline_csv(&fs::read_to_string(&path)?)?;
            FrozenSet::from_samples(pts, tol)
        }
    }
}

fn plateau_metrics(run: &PlateauRun, equator: Option<f64>, hemisphere: bool) -> Value {
    let counts = run.counts();
    let volumes = run.state.volumes();
    let strictly_decreasing = volumes.windows(2).all(|w| w[1] < w[0]);
    let drops: f64 = run.state.history.iter().map(|r| r.volume_before - r.volume_after).sum();
    let mut m = json!({
        "status": run.status,
        "iterations": run.log.len(),
        "excisions": run.state.history.len(),
        "volume_initial": volumes.first(),
        "volume_final": volumes.last(),
        "volume_strictly_decreasing": strictly_decreasing,
        "volume_drop_total": drops,
        "frozen": counts.frozen,
        "collar": counts.collar,
        "smooth_constant_k": counts.smooth_constant_k,
        "needs_excision": counts.needs_excision,
        "lgp_singular": counts.lgp_singular,
    });
    if let (Some(r), true) = (equator, hemisphere) {
        m["hausdorff_to_oracle"] = json!(hausdorff_to_cap(&run.state, r));
    }
    m
}

fn run_plateau(cli: &Cli, text: &str, base: &Path) -> std::result::Result<Summary, Failure> {
    let sc: PlateauScenario = parse_config(text, cli.json)?;
    if !(sc.k > 0.0) || !(sc.tol_h > 0.0) || !(sc.tol_kappa > 0.0) {
        return Err(parse_failure(Error::Parse("k, tol_H and tol_kappa must be positive".into())));
    }
    let (body, equator) = scenario_body(&sc.body, base).map_err(parse_failure)?;
    let tol = sc.frozen_tol.unwrap_or(1e-3 * body.diameter());
    let frozen = frozen_set(&sc.frozen_set, &body, tol, base).map_err(parse_failure)?;
    let hemisphere = matches!(&sc.frozen_set, FrozenSpec::Named(s) if s == "hemisphere" || s == "lower_half");
    let meta = Meta::new(cli.seed.unwrap_or(sc.seed), text);
    let opts = PlateauOptions { tol_h: sc.tol_h, max_iters: sc.max_iters, ..PlateauOptions::default() };
    let opts = PlateauOptions { classify: crate::barrier::ClassifyOptions { tol_kappa: sc.tol_kappa, ..opts.classify.clone() }, ..opts };
    let run = solve_plateau(body, frozen, sc.k, &opts).map_err(solver_failure)?;

    let mut artifacts = Vec::new();
    let mut lines = String::new();
    for entry in &run.log {
        let s = io::to_json(entry).map_err(solver_failure)?;
        log("iteration", serde_json::from_str(&s).unwrap_or(Value::Null));
        lines.push_str(&s);
        lines.push('\n');
    }
    write(&cli.out, "iterations.jsonl", lines, &mut artifacts)?;
    let history = json!({ "meta": meta, "excisions": run.state.history });
    write(&cli.out, "history.json", io::to_json(&history).map_err(solver_failure)? + "\n", &mut artifacts)?;

    let body = &run.state.body;
    if body.dim() == 3 {
        write(&cli.out, "surface.obj", io::body_to_obj(body, &meta_comments(&meta)), &mut artifacts)?;
    } else {
        let mut csv = format!("# version {} seed {} scenario_hash {}\r\n", meta.version, meta.seed, meta.scenario_hash);
        csv.push_str(&io::write_polyline_csv(body.vertices()));
        write(&cli.out, "surface.csv", csv, &mut artifacts)?;
    }
    let mut free = format!("# version {} seed {} scenario_hash {}\r\nx,y,z,kappa,tag\r\n", meta.version, meta.seed, meta.scenario_hash);
    for c in run.classification.iter().filter(|c| c.tag != Tag::Frozen) {
        let tag = serde_json::to_value(c.tag).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let kappa = c.curvature.map(fmt_f64).unwrap_or_default();
        free.push_str(&format!("{},{},{},{kappa},{tag}\r\n", fmt_f64(c.point.x), fmt_f64(c.point.y), fmt_f64(c.point.z)));
    }
    write(&cli.out, "free_surface.csv", free, &mut artifacts)?;

    let metrics = plateau_metrics(&run, equator, hemisphere);
    let counts = run.counts();
    let ok = run.status == RunStatus::Converged && counts.lgp_singular == 0;
    Ok(Summary { kind: "plateau".into(), status: if ok { "ok" } else { "failed" }.into(), meta, metrics, artifacts })
}
