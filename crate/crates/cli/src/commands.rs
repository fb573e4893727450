use std::time::Instant;

use proxygap_core::dual::{bell_gap_bound, constrained_energy_min, gap_energy_scan, ScanRow};
use proxygap_core::oracle::max_entropy_separable_lower;
use proxygap_core::thermo_limit::theorem3_region;
use proxygap_core::witness::dicke_field_range;
use proxygap_core::Error;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Cell, Csv, OutDir};
use crate::CliError;

/// Outcome of a command that finished writing its outputs.
pub enum Status {
    Ok,
    NotConverged,
    Violation(String),
}

fn scan_csv(rows: &[ScanRow], n: usize) -> String {
    let mut csv = Csv::new(&["E", "E_per_site", "beta", "T", "S_gibbs", "S_dual", "delta_S", "detected", "converged"]);
    for r in rows {
        csv.row(&[
            Cell::Num(r.energy),
            Cell::Num(r.energy / n as f64),
            Cell::Num(r.beta),
            Cell::Num(1.0 / r.beta),
            Cell::Num(r.s_gibbs),
            Cell::Num(r.s_dual),
            Cell::Num(r.delta_s),
            Cell::Bool(r.detected),
            Cell::Bool(r.converged),
        ]);
    }
    csv.into_string()
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

pub fn gap_scan(cfg: &RunConfig, out: &OutDir) -> Result<Status, CliError> {
    let started = Instant::now();
    let n = cfg.model()?.n();
    let model = cfg.dual_model()?;
    let result = gap_energy_scan(&model, &cfg.scan)?;
    let s = &result.summary;
    let nonconverged = result.rows.iter().filter(|r| !r.converged).count();
    let emin_converged = result.energy_min.as_ref().map_or(true, |m| m.converged);
    let per_site = |x: Option<f64>| x.map(|e| e / n as f64);
    out.write("scan.csv", &scan_csv(&result.rows, n))?;
    out.write_json(
        "summary.json",
        &json!({
            "n": n,
            "entropy": cfg.scan.entropy,
            "gap_tolerance": cfg.scan.tolerance(),
            "E0": s.e0,
            "E0_per_site": s.e0 / n as f64,
            "E_max": s.e_max,
            "E_min_constrained": result.energy_min.as_ref().map(|m| json!({
                "lower": m.lower,
                "upper": finite_or_null(m.upper),
                "lower_per_site": m.lower / n as f64,
                "converged": m.converged,
            })),
            "E_min_gap": s.e_min_gap,
            "E_min_gap_per_site": per_site(s.e_min_gap),
            "E_max_gap": s.e_max_gap,
            "E_max_gap_per_site": per_site(s.e_max_gap),
            "T_min": s.t_min,
            "T_max": s.t_max,
            "detection_fraction": s.detection_fraction,
            "rows": result.rows.len(),
            "nonconverged_rows": nonconverged,
            "wall_time_s": started.elapsed().as_secs_f64(),
        }),
    )?;
    Ok(if nonconverged > 0 || !emin_converged { Status::NotConverged } else { Status::Ok })
}

pub fn ppt_emin(cfg: &RunConfig, out: &OutDir) -> Result<Status, CliError> {
    let started = Instant::now();
    let n = cfg.model()?.n();
    let model = cfg.dual_model()?;
    if model.n_witness() == 0 && model.n_slots() == 0 {
        return Err(CliError::Config("ppt-emin needs at least one constraint".into()));
    }
    let m = constrained_energy_min(&model, &cfg.scan.solver)?;
    let e0 = model.spectrum()[0];
    out.write_json(
        "emin.json",
        &json!({
            "n": n,
            "E0": e0,
            "E0_per_site": e0 / n as f64,
            "lower": m.lower,
            "upper": finite_or_null(m.upper),
            "lower_per_site": m.lower / n as f64,
            "upper_per_site": finite_or_null(m.upper / n as f64),
            "converged": m.converged,
            "wall_time_s": started.elapsed().as_secs_f64(),
        }),
    )?;
    Ok(if m.converged { Status::Ok } else { Status::NotConverged })
}

pub fn thermo_limit(cfg: &RunConfig, out: &OutDir) -> Result<Status, CliError> {
    let started = Instant::now();
    let spec = cfg.thermo_limit.as_ref().ok_or_else(|| CliError::Config("config has no thermo_limit section".into()))?;
    let region = theorem3_region(spec.r, &spec.h_grid, &spec.t_grid)?;
    let mut curve = Csv::new(&["r", "h", "alpha_density", "T_max"]);
    for p in &region.curve {
        curve.row(&[Cell::Num(p.r), Cell::Num(p.h), Cell::Num(p.alpha_density), Cell::Num(p.t_max)]);
    }
    let mut grid = Csv::new(&["r", "h", "T", "beta", "expression", "detected"]);
    for p in &region.grid {
        grid.row(&[Cell::Num(p.r), Cell::Num(p.h), Cell::Num(p.t), Cell::Num(p.beta), Cell::Num(p.expression), Cell::Bool(p.detected)]);
    }
    out.write("tmax_curve.csv", &curve.into_string())?;
    out.write("region.csv", &grid.into_string())?;
    out.write_json(
        "summary.json",
        &json!({
            "r": spec.r,
            "points": region.grid.len(),
            "detected_points": region.grid.iter().filter(|p| p.detected).count(),
            "max_T_max": region.curve.iter().map(|p| p.t_max).fold(0.0, f64::max),
            "conjecture_conditional": region.conjecture_conditional,
            "wall_time_s": started.elapsed().as_secs_f64(),
        }),
    )?;
    Ok(Status::Ok)
}

pub fn bell_gap(beta: f64, nu: f64, dims: &[f64], out: &OutDir) -> Result<Status, CliError> {
    if dims.is_empty() {
        return Err(CliError::Config("bell-gap needs at least one dimension".into()));
    }
    let mut csv = Csv::new(&["d", "bound"]);
    let mut bounds = Vec::with_capacity(dims.len());
    for &d in dims {
        let b = bell_gap_bound(beta, d, nu)?;
        csv.row(&[Cell::Num(d), Cell::Num(b)]);
        bounds.push((d, b));
    }
    out.write("bell_gap.csv", &csv.into_string())?;
    let mut sorted = bounds.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = sorted.windows(2).find(|w| w[1].1 < w[0].1 - 1e-12) {
        return Ok(Status::Violation(format!("bound decreases from d = {} to d = {}", w[0].0, w[1].0)));
    }
    if let Some(&(d, b)) = bounds.iter().find(|p| p.1 > nu + 1e-12) {
        return Ok(Status::Violation(format!("bound {b} exceeds nu = {nu} at d = {d}")));
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct SandwichRow {
    energy: f64,
    oracle_lower: Option<f64>,
    dual_upper: f64,
    margin: Option<f64>,
}

pub fn oracle(cfg: &RunConfig, seed: u64, out: &OutDir) -> Result<Status, CliError> {
    let h = cfg.model()?.dense()?;
    let model = cfg.dual_model()?;
    let scan = gap_energy_scan(&model, &cfg.scan)?;
    let mut rows = Vec::with_capacity(scan.rows.len());
    for r in &scan.rows {
        let lower = match max_entropy_separable_lower(&h, r.energy, cfg.oracle.ensemble_size, seed) {
            Ok(x) => Some(x),
            // No product state in the dictionary reaches this energy.
            Err(Error::DictionaryInfeasible { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        rows.push(SandwichRow { energy: r.energy, oracle_lower: lower, dual_upper: r.s_dual, margin: lower.map(|l| r.s_dual - l) });
    }
    let worst = rows.iter().filter_map(|r| r.margin).fold(f64::INFINITY, f64::min);
    out.write_json("oracle.json", &json!({ "seed": seed, "rows": rows, "min_margin": finite_or_null(worst) }))?;
    if worst < -1e-6 {
        return Ok(Status::Violation(format!("weak duality violated: margin {worst:.3e}")));
    }
    Ok(Status::Ok)
}

pub fn dicke_range(n: usize, m: usize, delta_j: f64) -> Result<serde_json::Value, CliError> {
    let (lo, hi) = dicke_field_range(n, m, delta_j)?;
    Ok(json!({ "n": n, "m": m, "delta_j": delta_j, "b_min": lo, "b_max": hi }))
}
