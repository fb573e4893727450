//! Minimal mean energy over states satisfying the constraints.
//!
//! The lower bound comes from the Lagrangian `lambda_min(H - sum nu_i W_i -
//! sum X_A^{T_A})`, valid for any `nu >= 0`, `X >= 0`. Good multipliers are
//! found by minimizing the dual at fixed `mu = -beta` for increasing
//! `beta`, which smooths the eigenvalue. The upper bound is the energy of
//! the smoothed optimal state mixed with the maximally mixed state just
//! enough to satisfy every constraint.

use serde::Serialize;

use super::model::DualModel;
use super::point::DualPoint;
use super::solver::{projected_newton, spg, SolverOptions};
use crate::error::Result;
use crate::linalg::{eigvalsh, Bipartition, HermitianOperator};
use crate::witness::ConstraintSet;

#[derive(Clone, Debug, Serialize)]
pub struct EnergyMinimum {
    /// Certified lower bound.
    pub lower: f64,
    /// Energy of an explicit feasible state; `inf` if none was built.
    pub upper: f64,
    pub converged: bool,
    #[serde(skip)]
    pub certificate: DualPoint,
}

impl EnergyMinimum {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Smoothing parameters in units of `1 / ||H||`.
const CONTINUATION: [f64; 4] = [10.0, 100.0, 1e3, 1e4];
/// Stationarity tolerance before the last smoothing stage.
const INTERMEDIATE_TOL: f64 = 1e-5;
/// Continuation stops once the bounds agree to this fraction of `||H||`.
const GAP_TOL: f64 = 1e-3;

/// Lower bound certified by the multipliers of `p` with `mu = -1`.
fn certified_lower(model: &DualModel, p: &DualPoint) -> Result<f64> {
    let q = DualPoint { mu: -1.0, ..p.clone() };
    Ok(-model.exponent_range(&q)?.1)
}

/// Smallest mixing weight with `1/d` that satisfies every constraint, or
/// `None` when mixing cannot help.
fn mixing_weight(model: &DualModel, p: &DualPoint, witness_values: &[f64]) -> Result<Option<f64>> {
    let d = model.dim() as f64;
    let mut t: f64 = 0.0;
    for (&ws, &w0) in witness_values.iter().zip(&model.witness_means()?) {
        if ws < 0.0 {
            if w0 <= 0.0 {
                return Ok(None);
            }
            t = t.max(-ws / (w0 - ws));
        }
    }
    if model.n_slots() > 0 {
        let sigma = model.dense_state(p)?;
        for pt in model.slot_transposes(&sigma)? {
            let lo = eigvalsh(&pt)?[0];
            if lo < 0.0 {
                t = t.max(-lo / (1.0 / d - lo));
            }
        }
    }
    Ok(Some(t.min(1.0)))
}

pub fn constrained_energy_min(model: &DualModel, opts: &SolverOptions) -> Result<EnergyMinimum> {
    let spec = model.spectrum();
    let norm = spec[0].abs().max(spec[spec.len() - 1].abs()).max(1e-300);
    let mean = spec.iter().sum::<f64>() / spec.len() as f64;
    if model.n_witness() == 0 && model.n_slots() == 0 {
        return Ok(EnergyMinimum { lower: spec[0], upper: spec[0], converged: true, certificate: model.gibbs_point(-1.0) });
    }
    let mut p = model.gibbs_point(-CONTINUATION[0] / norm);
    let mut scaled_prev = None;
    let mut converged = true;
    let mut best_lower = f64::NEG_INFINITY;
    let mut best_cert = p.clone();
    let mut upper = f64::INFINITY;
    for (stage, &c) in CONTINUATION.iter().enumerate() {
        let beta = c / norm;
        if let Some(prev) = scaled_prev {
            p = p.scaled(beta / prev);
        }
        p.mu = -beta;
        let f = |q: &DualPoint| -> Result<(f64, DualPoint)> {
            let e = model.evaluate(q, 0.0)?;
            let mut g = e.grad;
            g.mu = 0.0;
            Ok((e.value, g))
        };
        let stage_opts = if stage + 1 < CONTINUATION.len() {
            SolverOptions { tol: opts.tol.max(INTERMEDIATE_TOL), ..opts.clone() }
        } else {
            opts.clone()
        };
        let mut out = if model.n_slots() == 0 {
            projected_newton(model, 0.0, p.clone(), true, None, &stage_opts)?
        } else {
            spg(&f, p.clone(), true, None, &stage_opts)?
        };
        if !out.converged && model.n_slots() == 0 {
            out = spg(&f, out.point, true, None, &stage_opts)?;
        }
        converged = out.converged;
        p = out.point;
        scaled_prev = Some(beta);
        let cert = p.scaled(1.0 / beta);
        let lower = certified_lower(model, &cert)?;
        if lower > best_lower {
            best_lower = lower;
            best_cert = DualPoint { mu: -1.0, ..cert };
        }
        let ev = model.evaluate(&p, 0.0)?;
        if let Some(t) = mixing_weight(model, &p, &ev.witness_values)? {
            upper = upper.min((1.0 - t) * ev.energy + t * mean);
        }
        if upper - best_lower <= GAP_TOL * norm {
            break;
        }
    }
    Ok(EnergyMinimum { lower: best_lower, upper: upper.max(best_lower), converged, certificate: best_cert })
}

/// Minimal energy over states with positive partial transpose on every cut.
pub fn ppt_energy_min(h: &HermitianOperator, cuts: &[Bipartition]) -> Result<EnergyMinimum> {
    let model = DualModel::dense(h, &ConstraintSet::ppt(cuts.to_vec()))?;
    constrained_energy_min(&model, &SolverOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::chains::{heisenberg_chain, HeisenbergParams};

    #[test]
    fn identity_hamiltonian() {
        let h = HermitianOperator::identity(vec![2, 2, 2]);
        let r = ppt_energy_min(&h, &Bipartition::all(3).unwrap()).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-9 && (r.upper - 1.0).abs() < 1e-9);
    }

    #[test]
    fn three_site_ring_all_cuts() {
        let h = heisenberg_chain(&HeisenbergParams::xxx(3, -1.0, 0.0)).unwrap();
        let r = ppt_energy_min(&h, &Bipartition::all(3).unwrap()).unwrap();
        assert!(r.lower <= r.upper + 1e-12);
        assert!((r.lower / 3.0 + 0.6).abs() < 2e-3, "lower = {}", r.lower / 3.0);
        assert!(r.gap() < 0.05, "gap = {}", r.gap());
    }
}
