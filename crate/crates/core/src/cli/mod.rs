//! Experiment runner behind the `geoflow` binary.
//!
//! Every artifact is a pure function of the configuration. CSV columns are
//! fixed per subcommand (see the constants below) and floats are printed in
//! shortest round-trip form. Wall-clock timings go only to `*.log` sidecars.

mod config;

pub use config::{ExperimentConfig, Flow, SolverSettings, SweepSettings};

use crate::data::{generate_data, DataFamily};
use crate::error::{Error, Result};
use crate::grid::{write_snapshot, Field, SpaceTimeField};
use crate::heat::caloric_extension;
use crate::hmflow::{solve_hmf, wellposedness_sweep, SweepReport};
use crate::lcflow::{lc_sweep, solve_lc};
use crate::norms::{bmo_inv_norm, bmo_seminorm, carleson_bmo, vmo_profile, x_norm, x_seminorm, y_norm, z_norm};
use crate::verify::{run_suite, CriterionOutcome};
use serde_json::json;
use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

/// Column order of `norms.csv`.
pub const NORMS_COLUMNS: &[&str] = &[
    "family",
    "alpha",
    "seed",
    "radius",
    "bmo",
    "bmo_ball_averaged",
    "carleson_bmo",
    "bmo_inv",
    "x_norm",
    "x_seminorm",
    "y_norm",
    "z_norm",
];

/// Column order of `sweep.csv`.
pub const SWEEP_COLUMNS: &[&str] = &[
    "family",
    "alpha",
    "seed",
    "data_size",
    "solution_size",
    "constraint_defect",
    "residual",
    "iterations",
    "converged",
    "theta",
    "c0_ratio",
    "lipschitz",
];

/// Column order of `verify.csv`.
pub const VERIFY_COLUMNS: &[&str] = &["criterion", "name", "passed", "metric", "value"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Extend,
    Norms,
    SolveHmf,
    SolveLc,
    Sweep,
    Verify,
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Picard iteration stopped without converging; the report is written.
    NotConverged,
    /// Some verification criterion failed; the report is written.
    ChecksFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::NotConverged => 2,
            Outcome::ChecksFailed => 1,
        }
    }
}

/// Shortest round-trip decimal; scientific outside `[1e-4, 1e16)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_csv(path: &Path, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = columns.join(",");
    text.push('\n');
    for r in rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn snapshot(path: &Path, f: &Field) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_snapshot(&mut w, f)
}

fn write_slices(dir: &Path, prefix: &str, f: &SpaceTimeField, which: &[usize]) -> Result<()> {
    for &j in which {
        if j >= f.ladder().slices() {
            return Err(Error::Config(format!(
                "snapshot slice {j} outside ladder with {} slices",
                f.ladder().slices()
            )));
        }
        snapshot(&dir.join(format!("{prefix}_{j:05}.gfs")), f.slice(j))?;
    }
    Ok(())
}

/// Runs one experiment, writing artifacts into `out`.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    match command {
        Command::Extend => extend(cfg, out),
        Command::Norms => norms(cfg, out),
        Command::SolveHmf => solve_hmf_cmd(cfg, out),
        Command::SolveLc => solve_lc_cmd(cfg, out),
        Command::Sweep => sweep(cfg, out),
        Command::Verify => verify(cfg, out),
    }
}

fn family_json(f: &DataFamily) -> serde_json::Value {
    serde_json::to_value(f).unwrap_or(serde_json::Value::Null)
}

fn extend(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let ladder = cfg.ladder()?;
    let fam = cfg.data()?;
    let u0 = generate_data(fam, &grid, cfg.seed)?;
    let ext = caloric_extension(&u0, &ladder);
    let x = x_norm(&ext);
    let sup_per_slice: Vec<f64> = ext.slices().iter().map(Field::sup_norm).collect();
    write_json(
        &out.join("extension.json"),
        &json!({
            "data": family_json(fam),
            "seed": cfg.seed,
            "x_norm": x.to_json(),
            "sup_norm_per_slice": sup_per_slice,
        }),
    )?;
    snapshot(&out.join("data.gfs"), &u0)?;
    write_slices(out, "extension", &ext, &cfg.snapshots)?;
    Ok(Outcome::Ok)
}

fn norms(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let ladder = cfg.ladder()?;
    let fam = cfg.data()?;
    let r = cfg.radius()?;
    let u0 = generate_data(fam, &grid, cfg.seed)?;
    let bmo = bmo_seminorm(&u0, r)?;
    let carl = carleson_bmo(&u0, r, &ladder)?;
    let inv = match &cfg.velocity {
        Some(v) => Some(bmo_inv_norm(&generate_data(v, &grid, cfg.seed)?, r, &ladder)?),
        None if u0.components() == grid.dim => Some(bmo_inv_norm(&u0, r, &ladder)?),
        None => None,
    };
    let ext = caloric_extension(&u0, &ladder);
    let x = x_norm(&ext);
    let y = y_norm(&ext);
    let z = z_norm(&ext);
    let profile: Vec<[f64; 2]> = vmo_profile(&u0).into_iter().map(|(a, b)| [a, b]).collect();
    write_json(
        &out.join("norms.json"),
        &json!({
            "data": family_json(fam),
            "seed": cfg.seed,
            "radius": r,
            "bmo": bmo.to_json(),
            "carleson_bmo": carl.to_json(),
            "bmo_inv": inv.as_ref().map(|n| n.to_json()),
            "x_norm": x.to_json(),
            "y_norm": y.to_json(),
            "z_norm": z.to_json(),
            "vmo_profile": profile,
        }),
    )?;
    let row = vec![
        fam.name().to_string(),
        fmt_opt(fam.alpha()),
        cfg.seed.to_string(),
        fmt_f64(r),
        fmt_f64(bmo.value),
        fmt_opt(bmo.term("ball_averaged")),
        fmt_f64(carl.value),
        fmt_opt(inv.map(|n| n.value)),
        fmt_f64(x.value),
        fmt_f64(x_seminorm(&x)),
        fmt_f64(y.value),
        fmt_f64(z.value),
    ];
    write_csv(&out.join("norms.csv"), NORMS_COLUMNS, &[row])?;
    Ok(Outcome::Ok)
}

fn not_converged(out: &Path, file: &str, increments: &[f64]) -> Result<Outcome> {
    write_json(
        &out.join(file),
        &json!({
            "converged": false,
            "iterations": increments.len(),
            "increments": increments,
            "contraction_estimates": crate::hmflow::contraction_estimates(increments),
        }),
    )?;
    Ok(Outcome::NotConverged)
}

fn solve_hmf_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let scfg = cfg.solver_config()?;
    let u0 = generate_data(cfg.data()?, &scfg.grid, cfg.seed)?;
    match solve_hmf(&u0, &scfg) {
        Ok(res) => {
            write_json(&out.join("diagnostics.json"), &res.diagnostics())?;
            write_slices(out, "solution", &res.solution, &cfg.snapshots)?;
            Ok(Outcome::Ok)
        }
        Err(Error::NoConvergence { increments, .. }) => not_converged(out, "diagnostics.json", &increments),
        Err(e) => Err(e),
    }
}

fn solve_lc_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let scfg = cfg.solver_config()?;
    let u0 = generate_data(cfg.velocity()?, &scfg.grid, cfg.seed)?;
    let d0 = generate_data(cfg.data()?, &scfg.grid, cfg.seed.wrapping_add(1))?;
    match solve_lc(&u0, &d0, &scfg) {
        Ok(res) => {
            write_json(&out.join("diagnostics.json"), &res.diagnostics())?;
            write_slices(out, "velocity", &res.state.u, &cfg.snapshots)?;
            write_slices(out, "director", &res.state.d, &cfg.snapshots)?;
            Ok(Outcome::Ok)
        }
        Err(Error::NoConvergence { increments, .. }) => not_converged(out, "diagnostics.json", &increments),
        Err(e) => Err(e),
    }
}

fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let scfg = cfg.solver_config()?;
    let settings = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("missing `sweep`".into()))?;
    let fam = cfg.data()?;
    let grid = scfg.grid;
    let r = cfg.radius()?;
    let report: SweepReport = match settings.flow {
        Flow::Hmf => wellposedness_sweep(
            |a| generate_data(&fam.with_alpha(a), &grid, cfg.seed),
            &settings.amplitudes,
            &scfg,
            r,
        )?,
        Flow::Lc => {
            let vel = cfg.velocity()?;
            lc_sweep(
                |a| {
                    Ok((
                        generate_data(&vel.with_alpha(a), &grid, cfg.seed)?,
                        generate_data(&fam.with_alpha(a), &grid, cfg.seed.wrapping_add(1))?,
                    ))
                },
                &settings.amplitudes,
                &scfg,
                r,
            )?
        }
    };
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|row| {
            vec![
                fam.name().to_string(),
                fmt_f64(row.amplitude),
                cfg.seed.to_string(),
                fmt_f64(row.data_size),
                fmt_f64(row.solution_size),
                fmt_f64(row.constraint_defect),
                fmt_f64(row.residual),
                row.iterations.to_string(),
                row.converged.to_string(),
                fmt_f64(row.theta),
                fmt_f64(row.c0_ratio),
                fmt_opt(row.lipschitz),
            ]
        })
        .collect();
    write_csv(&out.join("sweep.csv"), SWEEP_COLUMNS, &rows)?;
    write_json(&out.join("sweep.json"), &serde_json::to_value(&report)?)?;
    Ok(Outcome::Ok)
}

fn verify(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let start = Instant::now();
    let outcomes = run_suite(cfg.profile)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut rows = Vec::new();
    for o in &outcomes {
        for (name, v) in &o.metrics {
            rows.push(vec![
                o.id.to_string(),
                o.name.clone(),
                o.passed.to_string(),
                name.clone(),
                fmt_f64(*v),
            ]);
        }
    }
    write_csv(&out.join("verify.csv"), VERIFY_COLUMNS, &rows)?;
    write_json(&out.join("verify.json"), &verify_json(&outcomes))?;
    let mut log = String::new();
    let _ = writeln!(log, "profile {:?}", cfg.profile);
    let _ = writeln!(log, "elapsed_secs {elapsed:.3}");
    for o in &outcomes {
        let _ = writeln!(log, "{}", o.summary());
    }
    fs::write(out.join("verify.log"), log)?;
    Ok(if outcomes.iter().all(|o| o.passed) {
        Outcome::Ok
    } else {
        Outcome::ChecksFailed
    })
}

fn verify_json(outcomes: &[CriterionOutcome]) -> serde_json::Value {
    let list: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|o| {
            let metrics: serde_json::Map<String, serde_json::Value> =
                o.metrics.iter().map(|(n, v)| (n.clone(), json!(v))).collect();
            json!({
                "criterion": o.id,
                "name": o.name,
                "passed": o.passed,
                "metrics": metrics,
                "detail": o.detail,
            })
        })
        .collect();
    json!({ "criteria": list, "all_passed": outcomes.iter().all(|o| o.passed) })
}
