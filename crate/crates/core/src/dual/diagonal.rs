//! The dual for a single ground-state witness `W = alpha - |g><g|`, which
//! is diagonal in the eigenbasis of `H`:
//! `l(mu, nu) = ln sum_i exp(mu E_i + nu (alpha - delta_ig)) - mu E`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::thermo::beta_from_energy;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagonalDual {
    pub value: f64,
    pub mu: f64,
    pub nu: f64,
    pub iterations: usize,
}

struct Eval {
    value: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
}

fn evaluate(spectrum: &[f64], alpha: f64, g: usize, energy: f64, mu: f64, nu: f64) -> Eval {
    let exps: Vec<f64> = spectrum
        .iter()
        .enumerate()
        .map(|(i, &e)| mu * e + nu * (alpha - if i == g { 1.0 } else { 0.0 }))
        .collect();
    let shift = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = exps.iter().map(|x| (x - shift).exp()).collect();
    let z: f64 = w.iter().sum();
    let mut m_e = 0.0;
    let mut m_ee = 0.0;
    for (wi, &e) in w.iter().zip(spectrum) {
        let p = wi / z;
        m_e += p * e;
        m_ee += p * e * e;
    }
    let pg = w[g] / z;
    let eg = spectrum[g];
    // Second variable is `alpha - delta_ig`; its covariances follow from
    // those of the indicator.
    Eval {
        value: shift + z.ln() - mu * energy,
        grad: [m_e - energy, alpha - pg],
        hess: [[m_ee - m_e * m_e, -(pg * eg - pg * m_e)], [-(pg * eg - pg * m_e), pg * (1.0 - pg)]],
    }
}

const INFEASIBLE_FLOOR: f64 = -1e-6;

/// Minimizes the two-variable dual by projected Newton with `nu >= 0`.
/// Returns `-inf` when the dual certifies that no state is feasible.
pub fn diagonal_dual(spectrum: &[f64], alpha: f64, ground_index: usize, energy: f64) -> Result<DiagonalDual> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    if ground_index >= spectrum.len() {
        return Err(Error::InvalidParameter("ground index out of range".into()));
    }
    if spectrum.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("spectrum must be sorted".into()));
    }
    let mut mu = -beta_from_energy(spectrum, energy)?;
    let mut nu = 0.0;
    let mut ev = evaluate(spectrum, alpha, ground_index, energy, mu, nu);
    const TOL: f64 = 1e-12;
    for it in 0..200 {
        if ev.value < INFEASIBLE_FLOOR {
            // Entropies are nonnegative: no state meets the constraint.
            return Ok(DiagonalDual { value: f64::NEG_INFINITY, mu, nu, iterations: it });
        }
        let fix_nu = nu == 0.0 && ev.grad[1] > 0.0;
        let pg_nu = if fix_nu { 0.0 } else { ev.grad[1] };
        if ev.grad[0].abs() <= TOL && pg_nu.abs() <= TOL {
            return Ok(DiagonalDual { value: ev.value, mu, nu, iterations: it });
        }
        let (dmu, dnu) = if fix_nu {
            (-ev.grad[0] / ev.hess[0][0].max(1e-300), 0.0)
        } else {
            let [[a, b], [_, c]] = ev.hess;
            let det = a * c - b * b;
            if det > 1e-300 * (a * c).abs().max(1e-300) {
                ((-c * ev.grad[0] + b * ev.grad[1]) / det, (b * ev.grad[0] - a * ev.grad[1]) / det)
            } else {
                (-ev.grad[0] / a.max(1e-300), -ev.grad[1] / c.max(1e-300))
            }
        };
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let (m2, n2) = (mu + t * dmu, (nu + t * dnu).max(0.0));
            let e2 = evaluate(spectrum, alpha, ground_index, energy, m2, n2);
            let decrease = ev.grad[0] * (m2 - mu) + ev.grad[1] * (n2 - nu);
            if e2.value.is_finite() && e2.value <= ev.value + 1e-4 * decrease.min(0.0) {
                moved = e2.value < ev.value || (m2, n2) != (mu, nu);
                mu = m2;
                nu = n2;
                ev = e2;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            return Ok(DiagonalDual { value: ev.value, mu, nu, iterations: it });
        }
    }
    Err(Error::NoConvergence { what: "diagonal dual", iterations: 200, residual: ev.grad[0].abs().max(ev.grad[1].abs()) })
}

/// Whether `alpha < exp(-beta E0) / Z`, the condition under which the
/// Gibbs state at `beta` is entangled for a ground-state witness.
pub fn theorem3_check(alpha: f64, beta: f64, spectrum: &[f64]) -> bool {
    let e0 = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    // -beta E0 - ln Z = -ln sum exp(-beta (E_i - E0)).
    let rhs = -spectrum.iter().map(|&e| (-beta * (e - e0)).exp()).sum::<f64>().ln();
    alpha.ln() < rhs
}
