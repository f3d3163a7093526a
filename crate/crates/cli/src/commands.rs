use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;

use fearbd_core::solver::upper_solution_margin;
use fearbd_core::turing::Verdict;
use fearbd_core::{
    bound_monitor, solve_coexistence, AnalysisReport, BoundCheck, Field, Grid1D, RunSummary, Solver, DEFAULT_ROOT_TOL,
};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{InitialCondition, RunConfig};
use crate::embedded;
use crate::error::{CliError, ConfigError};
use crate::manifest::{SweepManifest, AGGREGATE_FILE};
use crate::svg;

pub const OUT_ENV: &str = "FEARBD_OUT";
pub const DEFAULT_OUT: &str = "results";

pub const CSV_FILE: &str = "snapshots.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ANALYSIS_FILE: &str = "analysis.json";

/// `FEARBD_OUT` when set, else `results`.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from)
}

/// Explicit directory, else the config's own `[output] dir`, else root/name.
pub fn run_dir(cfg: &RunConfig, explicit: Option<&Path>, root: &Path) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| root.join(&cfg.name))
}

pub fn initial_field(cfg: &RunConfig, grid: &Grid1D) -> Result<Field, CliError> {
    let field = match &cfg.initial {
        InitialCondition::Constant { u, v } => Field::constant(grid, *u, *v)?,
        InitialCondition::EquilibriumCosine { amp_u, freq_u, amp_v, freq_v } => {
            let eq = solve_coexistence(&cfg.params, DEFAULT_ROOT_TOL)?;
            Field::from_fn(grid, |x| (eq.u_star + amp_u * (freq_u * x).cos(), eq.v_star + amp_v * (freq_v * x).cos()))
                .map_err(|e| ConfigError::field("initial", e.to_string()))?
        }
        InitialCondition::File { path } => read_initial_csv(path, grid)?,
    };
    Ok(field)
}

fn read_initial_csv(path: &Path, grid: &Grid1D) -> Result<Field, CliError> {
    let bad = |msg: String| CliError::Config(ConfigError::field("initial.path", msg));
    let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty file".into()))?.split(',').map(str::trim).collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (cu, cv) = (col("u").ok_or_else(|| bad("missing column u".into()))?, col("v").ok_or_else(|| bad("missing column v".into()))?);
    let ct = col("t");
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |c: usize| -> Result<f64, CliError> {
            cells.get(c).and_then(|s| s.parse().ok()).ok_or_else(|| bad(format!("row {}: bad number", i + 2)))
        };
        rows.push((ct.map(num).transpose()?.unwrap_or(0.0), num(cu)?, num(cv)?));
    }
    let t_last = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let (u, v): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.0 == t_last).map(|r| (r.1, r.2)).unzip();
    Field::new(grid, u, v, 0.0).map_err(|e| bad(e.to_string()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs the linear analysis and writes `analysis.json` into `dir`.
pub fn analyze(cfg: &RunConfig, dir: &Path) -> Result<AnalysisReport, CliError> {
    let report =
        AnalysisReport::build(&cfg.params, cfg.length, cfg.analysis.n_modes, cfg.analysis.mu_lower, cfg.analysis.poincare_const)?;
    fs::create_dir_all(dir)?;
    let mut value = report.to_json();
    value["config_hash"] = json!(cfg.hash());
    write_json(&dir.join(ANALYSIS_FILE), &value)?;
    Ok(report)
}

/// Exit code for a finished analysis: 2 when there is no coexistence state.
pub fn analysis_exit_code(report: &AnalysisReport) -> i32 {
    if report.verdict == Verdict::NoCoexistence {
        2
    } else {
        0
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub dir: PathBuf,
    pub config_hash: String,
    pub summary: RunSummary,
    pub bounds: Vec<BoundCheck>,
    pub upper_solution_margin: f64,
}

struct Recorded {
    times: Vec<f64>,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

/// Consumes snapshots on its own thread so stepping never waits on i/o.
fn spawn_writer(path: PathBuf, xs: Vec<f64>) -> Result<(mpsc::Sender<Field>, thread::JoinHandle<std::io::Result<Recorded>>), CliError> {
    let file = File::create(&path)?;
    let (tx, rx) = mpsc::channel::<Field>();
    let handle = thread::spawn(move || {
        let mut out = BufWriter::new(file);
        writeln!(out, "t,x,u,v")?;
        let mut rec = Recorded { times: Vec::new(), u: Vec::new(), v: Vec::new() };
        for field in rx {
            for (j, x) in xs.iter().enumerate() {
                writeln!(out, "{},{},{},{}", field.t, x, field.u[j], field.v[j])?;
            }
            rec.times.push(field.t);
            rec.u.push(field.u);
            rec.v.push(field.v);
        }
        out.flush()?;
        Ok(rec)
    });
    Ok((tx, handle))
}

/// Integrates one configuration and writes the CSV snapshots, summary JSON and
/// SVG plots into `dir`. On a numerical failure the CSV written so far is kept.
pub fn simulate(cfg: &RunConfig, dir: &Path) -> Result<SimulationOutcome, CliError> {
    let grid = cfg.grid()?;
    let init = initial_field(cfg, &grid)?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.cfg"), cfg.to_ini())?;
    let hash = cfg.hash();

    let mut solver = Solver::for_params(&cfg.params, grid, cfg.solver)?;
    let (tx, writer) = spawn_writer(dir.join(CSV_FILE), grid.nodes())?;
    let result = solver.run(&init, |field, _| {
        // A closed receiver means the writer failed; its error surfaces on join.
        let _ = tx.send(field.clone());
    });
    drop(tx);
    let recorded = writer.join().expect("writer thread panicked")?;

    let summary = match result {
        Ok(summary) => summary,
        Err(e) => {
            write_json(
                &dir.join(SUMMARY_FILE),
                &json!({ "name": cfg.name, "config_hash": hash, "status": "error", "error": e.to_string(), "config": cfg.to_ini() }),
            )?;
            return Err(e.into());
        }
    };
    let bounds = bound_monitor(&summary, &cfg.params);
    let margin = upper_solution_margin(&summary.monitors, &cfg.params, 1e-6)?;
    write_json(
        &dir.join(SUMMARY_FILE),
        &json!({
            "name": cfg.name,
            "config_hash": hash,
            "status": "ok",
            "classification": summary.classification,
            "summary": summary,
            "bounds": bounds,
            "upper_solution_margin": margin,
            "params": cfg.params,
            "config": cfg.to_ini(),
        }),
    )?;

    let xs = grid.nodes();
    fs::write(dir.join("u_heatmap.svg"), svg::heatmap(&format!("{}: u(x, t)", cfg.name), &xs, &recorded.times, &recorded.u))?;
    fs::write(dir.join("v_heatmap.svg"), svg::heatmap(&format!("{}: v(x, t)", cfg.name), &xs, &recorded.times, &recorded.v))?;
    let last = &summary.final_field;
    fs::write(
        dir.join("final_profile.svg"),
        svg::profiles(&format!("{}: profiles at t = {}", cfg.name, last.t), &xs, &last.u, &last.v),
    )?;
    Ok(SimulationOutcome { dir: dir.to_path_buf(), config_hash: hash, summary, bounds, upper_solution_margin: margin })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub status: String,
    pub classification: Option<String>,
    pub final_variance_u: Option<f64>,
    pub max_u: Option<f64>,
    pub max_v: Option<f64>,
    pub config_hash: String,
    pub run_dir: String,
}

fn csv_cell(text: &str) -> String {
    text.replace([',', '\n', '\r'], ";")
}

/// Runs every value of the manifest (up to `jobs` at a time) under
/// root/name/, then writes `aggregate.csv` sorted by swept value.
pub fn sweep(manifest: &SweepManifest, root: &Path, jobs: usize) -> Result<Vec<SweepRow>, CliError> {
    let runs = manifest.runs()?;
    let dir = root.join(&manifest.name);
    fs::create_dir_all(&dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(ConfigError::field("jobs", e.to_string())))?;
    let mut rows: Vec<SweepRow> = pool.install(|| {
        runs.par_iter()
            .map(|(value, cfg)| {
                let run_dir = dir.join(&cfg.name);
                let base = SweepRow {
                    value: *value,
                    status: "ok".into(),
                    classification: None,
                    final_variance_u: None,
                    max_u: None,
                    max_v: None,
                    config_hash: cfg.hash(),
                    run_dir: cfg.name.clone(),
                };
                match simulate(cfg, &run_dir) {
                    Ok(out) => {
                        let last = out.summary.monitors.last().expect("at least one monitor");
                        SweepRow {
                            classification: Some(out.summary.classification.as_str().to_string()),
                            final_variance_u: Some(out.summary.variance_u),
                            max_u: Some(last.max_u),
                            max_v: Some(last.max_v),
                            ..base
                        }
                    }
                    Err(e) => SweepRow { status: format!("error (exit {}): {}", e.exit_code(), csv_cell(&e.to_string())), ..base },
                }
            })
            .collect()
    });
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));

    let mut out = BufWriter::new(File::create(dir.join(AGGREGATE_FILE))?);
    writeln!(out, "{},status,classification,final_variance_u,max_u,max_v,config_hash,run_dir", manifest.parameter)?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.value,
            r.status,
            r.classification.as_deref().unwrap_or(""),
            opt(r.final_variance_u),
            opt(r.max_u),
            opt(r.max_v),
            r.config_hash,
            r.run_dir
        )?;
    }
    out.flush()?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub enum Reproduction {
    Run(SimulationOutcome),
    Sweep(Vec<SweepRow>),
}

/// Figures 1 and 2 are single runs; 3 to 6 are d2 sweeps.
pub fn reproduce(figure: u32, root: &Path, jobs: usize) -> Result<Reproduction, CliError> {
    match figure {
        1 | 2 => {
            let cfg = embedded::figure_config(figure)?;
            let dir = root.join(&cfg.name);
            Ok(Reproduction::Run(simulate(&cfg, &dir)?))
        }
        3..=6 => {
            let manifest = embedded::figure_manifest(figure)?;
            Ok(Reproduction::Sweep(sweep(&manifest, root, jobs)?))
        }
        other => Err(CliError::Config(ConfigError::field("figure", format!("unknown figure {other}; expected 1 to 6")))),
    }
}
