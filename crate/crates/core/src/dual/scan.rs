//! Entropy gaps over a grid of mean energies and the detection window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::emin::{constrained_energy_min, EnergyMinimum};
use super::linear::lin_dual_minimize;
use super::model::DualModel;
use super::solver::{minimize_dual, SolverOptions};
use crate::error::{Error, Result};
use crate::thermo::{beta_from_energy, gibbs_at, linear_entropy_max_spectrum};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyGrid {
    /// `points` energies evenly spaced in `(E0, tr H / d]`.
    Uniform { points: usize },
    Energies(Vec<f64>),
    Temperatures(Vec<f64>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    #[default]
    VonNeumann,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanOptions {
    pub grid: EnergyGrid,
    pub entropy: EntropyKind,
    /// `Delta S` above this value counts as a detection. Defaults to 1e-4
    /// for the von Neumann entropy and 1e-6 for the linear entropy, whose
    /// gap closes quadratically.
    pub gap_tolerance: Option<f64>,
    pub bisection_steps: usize,
    /// Compute the constrained energy minimum to locate the lower edge.
    pub energy_min: bool,
    pub solver: SolverOptions,
}

impl ScanOptions {
    pub fn tolerance(&self) -> f64 {
        self.gap_tolerance.unwrap_or(match self.entropy {
            EntropyKind::VonNeumann => 1e-4,
            EntropyKind::Linear => 1e-6,
        })
    }
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid: EnergyGrid::Uniform { points: 40 },
            entropy: EntropyKind::VonNeumann,
            gap_tolerance: None,
            bisection_steps: 40,
            energy_min: true,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub energy: f64,
    pub beta: f64,
    /// Unconstrained maximal entropy at this energy: the Gibbs entropy, or
    /// the maximal linear entropy.
    pub s_gibbs: f64,
    /// `-inf` where no state satisfies the constraints.
    pub s_dual: f64,
    pub delta_s: f64,
    pub detected: bool,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSummary {
    pub e0: f64,
    pub e_max: f64,
    /// Lower edge of the detection window: the certified constrained
    /// energy minimum.
    pub e_min_gap: Option<f64>,
    /// Upper edge of the detection window.
    pub e_max_gap: Option<f64>,
    /// `(E_max,gap - E0) / (E_max - E0)`.
    pub detection_fraction: f64,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapScanResult {
    pub rows: Vec<ScanRow>,
    pub summary: ScanSummary,
    pub energy_min: Option<EnergyMinimum>,
}

fn row_at(model: &DualModel, energy: f64, emin_lower: f64, opts: &ScanOptions) -> Result<ScanRow> {
    let beta = beta_from_energy(model.spectrum(), energy)?;
    let s_gibbs = match opts.entropy {
        EntropyKind::VonNeumann => gibbs_at(model.spectrum(), beta)?.entropy,
        EntropyKind::Linear => linear_entropy_max_spectrum(model.spectrum(), energy)?.value,
    };
    if energy < emin_lower {
        return Ok(ScanRow {
            energy,
            beta,
            s_gibbs,
            s_dual: f64::NEG_INFINITY,
            delta_s: f64::INFINITY,
            detected: true,
            converged: true,
        });
    }
    let (s_dual, converged) = match opts.entropy {
        EntropyKind::VonNeumann => {
            let sol = minimize_dual(model, energy, &opts.solver)?;
            (sol.value, sol.converged)
        }
        EntropyKind::Linear => {
            let sol = lin_dual_minimize(model, energy, &opts.solver)?;
            (sol.value, sol.converged)
        }
    };
    let delta_s = s_gibbs - s_dual;
    Ok(ScanRow { energy, beta, s_gibbs, s_dual, delta_s, detected: delta_s > opts.tolerance(), converged })
}

fn grid_energies(model: &DualModel, grid: &EnergyGrid) -> Result<Vec<f64>> {
    let spec = model.spectrum();
    let e0 = spec[0];
    let mean = spec.iter().sum::<f64>() / spec.len() as f64;
    let mut out = match grid {
        EnergyGrid::Uniform { points } => {
            if *points == 0 {
                return Err(Error::InvalidParameter("grid needs at least one point".into()));
            }
            (1..=*points).map(|k| e0 + (mean - e0) * k as f64 / *points as f64).collect()
        }
        EnergyGrid::Energies(es) => es.clone(),
        EnergyGrid::Temperatures(ts) => ts
            .iter()
            .map(|&t| {
                if !(t > 0.0) {
                    return Err(Error::InvalidParameter(format!("temperature {t} must be positive")));
                }
                Ok(gibbs_at(spec, 1.0 / t)?.energy)
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    for &e in &out {
        if !(e > e0 && e <= mean + 1e-12 * mean.abs().max(1.0)) {
            return Err(Error::EnergyOutOfRange { energy: e, lo: e0, hi: mean });
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// Scans the entropy gap over the grid and locates the detection window.
pub fn gap_energy_scan(model: &DualModel, opts: &ScanOptions) -> Result<GapScanResult> {
    let spec = model.spectrum();
    let e0 = spec[0];
    let e_top = spec[spec.len() - 1];
    let energies = grid_energies(model, &opts.grid)?;
    let constrained = model.n_witness() > 0 || model.n_slots() > 0;
    let energy_min = if opts.energy_min && constrained { Some(constrained_energy_min(model, &opts.solver)?) } else { None };
    let emin_lower = energy_min.as_ref().map_or(f64::NEG_INFINITY, |m| m.lower);
    let rows: Vec<ScanRow> = energies
        .par_iter()
        .map(|&e| row_at(model, e, emin_lower, opts))
        .collect::<Result<_>>()?;

    // The gap decreases with energy; bracket its crossing of the tolerance
    // between the last detected point and the next one.
    let last_detected = rows.iter().rposition(|r| r.detected);
    let e_max_gap = match last_detected {
        None => None,
        Some(i) if i + 1 == rows.len() => Some(rows[i].energy),
        Some(i) => {
            let (mut lo, mut hi) = (rows[i].energy, rows[i + 1].energy);
            for _ in 0..opts.bisection_steps {
                let mid = 0.5 * (lo + hi);
                if row_at(model, mid, emin_lower, opts)?.detected {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(lo)
        }
    };
    let e_min_gap = match (&energy_min, e_max_gap) {
        (Some(m), Some(_)) => Some(m.lower.max(e0)),
        (None, Some(_)) => rows.iter().find(|r| r.detected).map(|r| r.energy),
        _ => None,
    };
    let temperature = |e: f64| -> Result<Option<f64>> {
        if e <= e0 {
            return Ok(Some(0.0));
        }
        Ok(Some(1.0 / beta_from_energy(spec, e)?))
    };
    let t_min = match e_min_gap {
        Some(e) => temperature(e)?,
        None => None,
    };
    let t_max = match e_max_gap {
        Some(e) => temperature(e)?,
        None => None,
    };
    let detection_fraction = match e_max_gap {
        Some(e) if e_top > e0 => (e - e0) / (e_top - e0),
        _ => 0.0,
    };
    Ok(GapScanResult {
        rows,
        summary: ScanSummary { e0, e_max: e_top, e_min_gap, e_max_gap, detection_fraction, t_min, t_max },
        energy_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Bipartition;
    use crate::models::chains::{heisenberg_chain, HeisenbergParams};
    use crate::witness::ConstraintSet;

    #[test]
    fn empty_constraints_detect_nothing() {
        let h = heisenberg_chain(&HeisenbergParams::xxx(3, -1.0, 0.3)).unwrap();
        let m = DualModel::dense(&h, &ConstraintSet::empty()).unwrap();
        let r = gap_energy_scan(&m, &ScanOptions { grid: EnergyGrid::Uniform { points: 8 }, ..Default::default() }).unwrap();
        assert!(r.rows.iter().all(|row| !row.detected && row.delta_s.abs() < 1e-6));
        assert_eq!(r.summary.detection_fraction, 0.0);
        assert!(r.summary.e_max_gap.is_none());
    }

    #[test]
    fn three_site_ring_fraction() {
        let h = heisenberg_chain(&HeisenbergParams::xxx(3, -1.0, 0.0)).unwrap();
        let m = DualModel::dense(&h, &ConstraintSet::ppt(vec![Bipartition::even_odd(3).unwrap()])).unwrap();
        let r = gap_energy_scan(&m, &ScanOptions { grid: EnergyGrid::Uniform { points: 10 }, ..Default::default() }).unwrap();
        assert!((r.summary.detection_fraction - 0.2).abs() < 0.03, "{:?}", r.summary);
        assert!(r.rows.windows(2).all(|w| w[0].energy < w[1].energy));
        assert!(r.summary.t_min.unwrap() <= r.summary.t_max.unwrap());
    }
}
