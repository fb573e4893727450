//! Entropy-gap bounds that need no optimization, and the sensitivity of
//! the dual bound to perturbations of `H`.

use serde::Serialize;

use super::model::DualModel;
use super::point::DualPoint;
use super::solver::{minimize_dual, minimize_dual_from, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, Matrix};

/// `ln tr exp(-beta H) - ln tr exp(-beta H + sum nu_i W_i + sum X_A^{T_A})`,
/// a lower bound on the entropy gap at inverse temperature `beta` for any
/// feasible `nu`, `X`. The `mu` of `p` is ignored.
pub fn gap_lower_bound(model: &DualModel, beta: f64, p: &DualPoint) -> Result<f64> {
    if !p.is_feasible()? {
        return Err(Error::InvalidParameter("multipliers must be nonnegative and matrices positive".into()));
    }
    let q = DualPoint { mu: -beta, ..p.clone() };
    let free = model.gibbs_point(-beta);
    Ok(model.log_trace_exp(&free)? - model.log_trace_exp(&q)?)
}

/// `ln(sum_{k=a}^{b-1} exp(-beta k))`.
fn ln_geometric(beta: f64, a: f64, b: f64) -> f64 {
    -beta * a + (-(-beta * (b - a)).exp_m1()).ln() - (-(-beta).exp_m1()).ln()
}

fn ln_add_exp(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

/// Gap bound for the Bell-staircase Hamiltonian `sum_k k |Psi_k><Psi_k|` on
/// `C^d (x) C^d` with the witness `1/d - P`, `P` the projector on the
/// lowest `d` levels:
/// `ln[S(0, d^2) / (S(0, d) e^{-nu (1 - 1/d)} + S(d, d^2) e^{nu / d})]`
/// with `S(a, b) = sum_{k=a}^{b-1} e^{-beta k}`.
pub fn bell_gap_bound(beta: f64, d: f64, nu: f64) -> Result<f64> {
    if !(d >= 2.0) || !(beta > 0.0) || !(nu >= 0.0) {
        return Err(Error::InvalidParameter(format!("need d >= 2, beta > 0, nu >= 0 (got {d}, {beta}, {nu})")));
    }
    let dd = d * d;
    let num = ln_geometric(beta, 0.0, dd);
    let low = ln_geometric(beta, 0.0, d) - nu * (1.0 - 1.0 / d);
    let high = ln_geometric(beta, d, dd) + nu / d;
    Ok(num - ln_add_exp(low, high))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sensitivity {
    /// Change of the minimized dual under `H -> H + eps P`.
    pub delta: f64,
    /// `2 |mu*| eps ||P||`.
    pub bound: f64,
    pub within_bound: bool,
}

/// Re-minimizes the dual for `H + eps P` from the unperturbed optimum.
pub fn perturbation_sensitivity(model: &DualModel, p_op: &Matrix, eps: f64, energy: f64, opts: &SolverOptions) -> Result<Sensitivity> {
    let base = minimize_dual(model, energy, opts)?;
    let pert = model.perturbed(p_op, eps)?;
    let moved = minimize_dual_from(&pert, energy, base.point.clone(), opts)?;
    let norm = eigvalsh(p_op)?.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let delta = (moved.value - base.value).abs();
    let bound = 2.0 * base.point.mu.abs() * eps.abs() * norm;
    Ok(Sensitivity { delta, bound, within_bound: delta <= bound + 1e-9 })
}
