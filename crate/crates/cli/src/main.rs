//! Workbench CLI: validation, entropies, pressure queries, Manhattan-curve
//! tracing, rigidity reports and oracle cross-checks over JSON-configured
//! representation pairs.
//!
//! Exit codes: 0 success, 1 mathematical-condition failure, 2 config error,
//! 3 numerical failure.

mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use manhattan_core::curve::{bowen_root, rigidity_report, trace_curve, CurvePoint};
use manhattan_core::orbit::{delta_estimate, supermultiplicativity_check, thurston_ratio};
use manhattan_core::par;
use manhattan_core::pressure::{EstimatorMode, PressureContext, WeightedPotentialQuery};
use manhattan_core::schottky::ConditionReport;

use config::{ConfigError, RunConfig};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "manhattan", version, about = "Manhattan curves and critical exponents for Fuchsian representation pairs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override truncation.n_max.
    #[arg(long)]
    n_max: Option<usize>,
    /// Override truncation.max_power.
    #[arg(long)]
    max_power: Option<i32>,
    /// Override solver.rays.
    #[arg(long)]
    rays: Option<usize>,
    /// Override the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override solver.tol_root.
    #[arg(long)]
    tol_root: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify the Schottky conditions (C1)-(C3) for both representations.
    Validate(Common),
    /// Compute the entropies h1, h2 (axis Bowen roots) with error bars.
    Entropy(Common),
    /// Evaluate the Gurevich pressure at one (a, b, t).
    Pressure {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long)]
        t: f64,
    },
    /// Trace the Manhattan curve and write curve.csv.
    Curve(Common),
    /// Full rigidity report (entropies, Bishop-Steger, Thurston) as JSON.
    Rigidity(Common),
    /// Cross-check Bowen roots against the orbit-counting oracle.
    Oracle(Common),
    /// Rigidity verdicts plus oracle-side consistency checks in one report.
    Compare(Common),
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("MANHATTAN_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => par::configure_threads(n),
            _ => {
                eprintln!("config error: MANHATTAN_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let code = match &cli.cmd {
        Cmd::Validate(c) => run(c, cmd_validate),
        Cmd::Entropy(c) => run(c, cmd_entropy),
        Cmd::Pressure { common, a, b, t } => {
            let (a, b, t) = (*a, *b, *t);
            run(common, move |env| cmd_pressure(env, a, b, t))
        }
        Cmd::Curve(c) => run(c, cmd_curve),
        Cmd::Rigidity(c) => run(c, cmd_rigidity),
        Cmd::Oracle(c) => run(c, cmd_oracle),
        Cmd::Compare(c) => run(c, cmd_compare),
    };
    ExitCode::from(code)
}

/// Everything a subcommand needs: parsed config with CLI overrides applied.
struct Env {
    cfg: RunConfig,
    hash: String,
    out: Option<PathBuf>,
}

fn run<F: FnOnce(&Env) -> Result<u8, AppError>>(common: &Common, f: F) -> u8 {
    let env = match load_env(common) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    match f(&env) {
        Ok(code) => code,
        Err(AppError::Config(e)) => {
            eprintln!("{e}");
            2
        }
        Err(AppError::Numerical(e)) => {
            eprintln!("numerical failure: {e}");
            3
        }
        Err(AppError::Io(e)) => {
            eprintln!("io error: {e}");
            2
        }
    }
}

enum AppError {
    Config(ConfigError),
    Numerical(manhattan_core::Error),
    Io(std::io::Error),
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e)
    }
}
impl From<manhattan_core::Error> for AppError {
    fn from(e: manhattan_core::Error) -> Self {
        AppError::Numerical(e)
    }
}
impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

fn load_env(common: &Common) -> Result<Env, ConfigError> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(n) = common.n_max {
        cfg.truncation.n_max = n;
    }
    if let Some(m) = common.max_power {
        cfg.truncation.max_power = m;
    }
    if let Some(r) = common.rays {
        cfg.solver.rays = r;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.tol_root {
        cfg.solver.tol_root = t;
    }
    // the hash covers the effective config, overrides included
    let hash = cfg.hash();
    Ok(Env {
        cfg,
        hash,
        out: common.out.clone(),
    })
}

fn write_artifact(env: &Env, name: &str, contents: &str) -> Result<(), AppError> {
    if let Some(dir) = &env.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn build_context(env: &Env) -> Result<PressureContext, AppError> {
    let pair = env.cfg.build_pair()?;
    let params = env.cfg.truncation_params(&pair)?;
    Ok(PressureContext::new(pair, params, EstimatorMode::PairFactorized)?)
}

fn report_json(rep: &str, r: &ConditionReport) -> serde_json::Value {
    json!({
        "rep": rep,
        "extended": r.extended,
        "all_pass": r.all_pass,
        "entries": r.entries.iter().map(|e| json!({
            "condition": e.condition,
            "pass": e.pass,
            "detail": e.detail,
        })).collect::<Vec<_>>(),
    })
}

fn cmd_validate(env: &Env) -> Result<u8, AppError> {
    let pair = env.cfg.build_pair()?;
    let r1 = pair.rho1.verify_conditions(30, 2000);
    let r2 = pair.rho2.verify_conditions(30, 2000);
    println!("{r1}");
    println!("{r2}");
    let doc = json!({
        "config_hash": env.hash,
        "tool_version": TOOL_VERSION,
        "reports": [report_json("rho1", &r1), report_json("rho2", &r2)],
    });
    write_artifact(env, "validate.json", &format!("{doc:#}\n"))?;
    Ok(if r1.all_pass && r2.all_pass { 0 } else { 1 })
}

fn axis_roots(env: &Env, ctx: &PressureContext) -> Result<(CurvePoint, CurvePoint), AppError> {
    let solve = env.cfg.solve_params();
    let h1 = bowen_root(ctx, 1.0, 0.0, &solve)?;
    let h2 = bowen_root(ctx, 0.0, 1.0, &solve)?;
    Ok((h1, h2))
}

fn cmd_entropy(env: &Env) -> Result<u8, AppError> {
    let ctx = build_context(env)?;
    let (h1, h2) = axis_roots(env, &ctx)?;
    println!("h1 = {:.8} +- {:.2e}", h1.t_root, h1.t_err);
    println!("h2 = {:.8} +- {:.2e}", h2.t_root, h2.t_err);
    let doc = json!({
        "config_hash": env.hash,
        "tool_version": TOOL_VERSION,
        "h1": h1.t_root, "h1_err": h1.t_err,
        "h2": h2.t_root, "h2_err": h2.t_err,
    });
    write_artifact(env, "entropy.json", &format!("{doc:#}\n"))?;
    Ok(0)
}

fn cmd_pressure(env: &Env, a: f64, b: f64, t: f64) -> Result<u8, AppError> {
    let ctx = build_context(env)?;
    let q = WeightedPotentialQuery::new(a, b, t)?;
    let est = ctx.pressure_estimate(&q)?;
    let doc = match est.value.finite() {
        Some(v) => json!({
            "config_hash": env.hash,
            "tool_version": TOOL_VERSION,
            "a": a, "b": b, "t": t,
            "pressure": v,
            "error_bar": est.error_bar,
            "per_n": est.per_n,
            "tail": est.tail_report.iter().map(|e| json!({
                "letter": e.letter,
                "mass_fraction": e.mass_fraction,
                "log_z_uncertainty": e.log_z_uncertainty,
            })).collect::<Vec<_>>(),
        }),
        None => json!({
            "config_hash": env.hash,
            "tool_version": TOOL_VERSION,
            "a": a, "b": b, "t": t,
            "pressure": "infinite",
        }),
    };
    println!("{doc:#}");
    write_artifact(env, "pressure.json", &format!("{doc:#}\n"))?;
    Ok(0)
}

/// Fixed-width scientific float formatting, the reproducibility contract of
/// every CSV cell.
fn cell(x: f64) -> String {
    format!("{x:.12e}")
}

fn curve_csv(env: &Env, points: &[CurvePoint]) -> String {
    let mut rows: Vec<(f64, &CurvePoint)> = points
        .iter()
        .map(|p| (p.ray.1.atan2(p.ray.0), p))
        .collect();
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = String::new();
    out.push_str(&format!("# tool_version={TOOL_VERSION}\n"));
    out.push_str(&format!("# config_hash={}\n", env.hash));
    out.push_str("theta,a,b,t_root,residual,error_bar\n");
    for (theta, p) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell(theta),
            cell(p.a),
            cell(p.b),
            cell(p.t_root),
            cell(p.residual),
            cell(p.t_err)
        ));
    }
    out
}

fn cmd_curve(env: &Env) -> Result<u8, AppError> {
    let ctx = build_context(env)?;
    let points = trace_curve(&ctx, env.cfg.solver.rays, &env.cfg.solve_params())?;
    let csv = curve_csv(env, &points);
    print!("{csv}");
    write_artifact(env, "curve.csv", &csv)?;
    Ok(0)
}

fn rigidity_json(env: &Env, r: &manhattan_core::curve::RigidityReport) -> serde_json::Value {
    json!({
        "config_hash": env.hash,
        "tool_version": TOOL_VERSION,
        "h1": r.h1,
        "h2": r.h2,
        "delta11": r.delta11,
        "bishop_steger_bound": r.bishop_steger_bound,
        "intersection_number": r.intersection_number,
        "line_deviation": r.line_deviation,
        "bishop_steger_gap": r.bishop_steger_gap.0,
        "bishop_steger_gap_err": r.bishop_steger_gap.1,
        "thurston_gap": r.thurston_gap.0,
        "thurston_gap_err": r.thurston_gap.1,
        "verdicts": {
            "conjugate_consistent": r.verdicts.conjugate_consistent,
            "bishop_steger_strict": r.verdicts.bishop_steger_strict,
            "thurston_strict": r.verdicts.thurston_strict,
        },
    })
}

fn cmd_rigidity(env: &Env) -> Result<u8, AppError> {
    let ctx = build_context(env)?;
    let report = rigidity_report(&ctx, env.cfg.solver.rays, &env.cfg.solve_params(), 1e-3)?;
    let doc = rigidity_json(env, &report);
    println!("{doc:#}");
    write_artifact(env, "rigidity.json", &format!("{doc:#}\n"))?;
    Ok(0)
}

fn cmd_oracle(env: &Env) -> Result<u8, AppError> {
    let ctx = build_context(env)?;
    let pair = ctx.pair().clone();
    let solve = env.cfg.solve_params();
    let budget = env.cfg.budget();
    let mut out = String::new();
    out.push_str(&format!("# tool_version={TOOL_VERSION}\n"));
    out.push_str(&format!("# config_hash={}\n", env.hash));
    out.push_str("a,b,bowen_root,oracle_delta,oracle_ci,rel_err\n");
    for &(a, b) in &env.cfg.oracle.weights {
        let root = bowen_root(&ctx, a, b, &solve)?;
        let de = delta_estimate(&pair, a, b, &budget)?;
        let rel = (root.t_root - de.delta).abs() / root.t_root;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell(a),
            cell(b),
            cell(root.t_root),
            cell(de.delta),
            cell(de.half_width),
            cell(rel)
        ));
    }
    print!("{out}");
    write_artifact(env, "oracle.csv", &out)?;
    Ok(0)
}

fn cmd_compare(env: &Env) -> Result<u8, AppError> {
    let ctx = build_context(env)?;
    let pair = ctx.pair().clone();
    let report = rigidity_report(&ctx, env.cfg.solver.rays, &env.cfg.solve_params(), 1e-3)?;
    let o = &env.cfg.oracle;
    let ratio = thurston_ratio(&pair, o.thurston_period, o.thurston_power, o.thurston_cap, false)?;
    let supermult = supermultiplicativity_check(&pair, 1.0, 1.0, &env.cfg.budget())?;
    let doc = json!({
        "rigidity": rigidity_json(env, &report),
        "oracle": {
            "thurston_ratio": ratio.ratio,
            "thurston_classes": ratio.classes,
            "slope_intersection_number": report.intersection_number,
            "supermultiplicativity": {
                "n_shift": supermult.n_shift,
                "c": supermult.c,
                "violations": supermult.violations,
                "tested_pairs": supermult.tested_pairs,
            },
        },
    });
    println!("{doc:#}");
    write_artifact(env, "compare.json", &format!("{doc:#}\n"))?;
    Ok(0)
}
