//! First- and second-order minimization of the reduced dual over
//! `mu` free, `nu >= 0`, `X >= 0`.

use serde::{Deserialize, Serialize};

use super::model::DualModel;
use super::point::DualPoint;
use crate::error::Result;
use crate::thermo::{beta_from_energy, gibbs_at};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Stop when the projected-gradient norm falls below this value.
    pub tol: f64,
    pub max_iter: usize,
    /// Window of the nonmonotone line search.
    pub memory: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 20_000, memory: 10 }
    }
}

/// Minimizer of the dual at one energy.
#[derive(Clone, Debug)]
pub struct DualSolution {
    /// Upper bound on the constrained maximal entropy; `-inf` when the
    /// constraints admit no state at this energy.
    pub value: f64,
    pub point: DualPoint,
    pub converged: bool,
    pub iterations: usize,
    pub pg_norm: f64,
    /// Set when the dual was driven below zero, which certifies that no
    /// state satisfies the constraints at this energy.
    pub infeasible: bool,
}

/// Oracle for value and gradient.
pub(crate) type ValueGrad<'a> = dyn Fn(&DualPoint) -> Result<(f64, DualPoint)> + Sync + 'a;

pub(crate) struct Outcome {
    pub point: DualPoint,
    pub value: f64,
    pub iterations: usize,
    pub pg_norm: f64,
    pub converged: bool,
    pub below_floor: bool,
}

fn projected_gradient(x: &DualPoint, g: &DualPoint, step: f64, fix_mu: bool) -> Result<DualPoint> {
    let mut y = x.clone();
    y.axpy(-step, g);
    if fix_mu {
        y.mu = x.mu;
    }
    y.project()?;
    Ok(y.sub(x))
}

/// Nonmonotone spectral projected gradient with Barzilai-Borwein steps.
pub(crate) fn spg(f: &ValueGrad, x0: DualPoint, fix_mu: bool, floor: Option<f64>, opts: &SolverOptions) -> Result<Outcome> {
    const GAMMA: f64 = 1e-4;
    const STEP_MIN: f64 = 1e-12;
    const STEP_MAX: f64 = 1e12;
    let mut x = x0.projected()?;
    let (mut fx, mut g) = f(&x)?;
    let mut best = (x.clone(), fx);
    let mut history = vec![fx];
    let d0 = projected_gradient(&x, &g, 1.0, fix_mu)?;
    let mut step = if d0.norm_inf() > 0.0 { (1.0 / d0.norm_inf()).clamp(STEP_MIN, STEP_MAX) } else { 1.0 };
    let mut pg = d0.norm();
    for it in 0..opts.max_iter {
        if floor.is_some_and(|fl| best.1 < fl) {
            return Ok(Outcome { point: best.0, value: best.1, iterations: it, pg_norm: pg, converged: false, below_floor: true });
        }
        let d = projected_gradient(&x, &g, step, fix_mu)?;
        // |P(x - t g) - x| grows with t while |P(x - t g) - x| / t shrinks,
        // so the step-one norm is only recomputed when it may be small.
        let lower = if step >= 1.0 { d.norm() / step } else { d.norm() };
        pg = if lower <= opts.tol { projected_gradient(&x, &g, 1.0, fix_mu)?.norm() } else { lower };
        if pg <= opts.tol {
            return Ok(Outcome { point: best.0, value: best.1, iterations: it, pg_norm: pg, converged: true, below_floor: false });
        }
        let gtd = g.dot(&d);
        let f_ref = history.iter().rev().take(opts.memory.max(1)).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut lam = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut xn = x.clone();
            xn.axpy(lam, &d);
            let (fnew, gnew) = f(&xn)?;
            if fnew.is_finite() && fnew <= f_ref + GAMMA * lam * gtd {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            let denom = fnew - fx - lam * gtd;
            let trial = if fnew.is_finite() && denom > 0.0 { -0.5 * lam * lam * gtd / denom } else { 0.5 * lam };
            lam = if trial >= 0.1 * lam && trial <= 0.9 * lam { trial } else { 0.5 * lam };
        }
        let Some((xn, fnew, gnew)) = accepted else {
            // No acceptable step along the projected direction: stationary
            // to working precision.
            return Ok(Outcome { point: best.0, value: best.1, iterations: it, pg_norm: pg, converged: pg <= 10.0 * opts.tol, below_floor: false });
        };
        let s = xn.sub(&x);
        let mut y = gnew.sub(&g);
        if fix_mu {
            y.mu = 0.0;
        }
        let sty = s.dot(&y);
        step = if sty > 0.0 { (s.dot(&s) / sty).clamp(STEP_MIN, STEP_MAX) } else { STEP_MAX.min(step * 10.0) };
        x = xn;
        fx = fnew;
        g = gnew;
        if fix_mu {
            g.mu = 0.0;
        }
        if fx < best.1 {
            best = (x.clone(), fx);
        }
        history.push(fx);
    }
    Ok(Outcome { point: best.0, value: best.1, iterations: opts.max_iter, pg_norm: pg, converged: pg <= opts.tol, below_floor: false })
}

/// Solves `A x = b` for a small symmetric positive definite `A`.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    Some(x)
}

fn to_vec(p: &DualPoint) -> Vec<f64> {
    let mut v = vec![p.mu];
    v.extend_from_slice(&p.nus);
    v
}

fn from_vec(v: &[f64]) -> DualPoint {
    DualPoint { mu: v[0], nus: v[1..].to_vec(), xs: Vec::new() }
}

/// Relative size of the smallest verifiable decrease of the dual value.
const DECREMENT_RESOLUTION: f64 = 1e-13;

/// Projected Newton for problems with scalar variables only, with
/// Levenberg damping and an Armijo search along the projection arc.
/// With `fix_mu` only the multipliers move.
pub(crate) fn projected_newton(model: &DualModel, energy: f64, x0: DualPoint, fix_mu: bool, floor: Option<f64>, opts: &SolverOptions) -> Result<Outcome> {
    let k = model.n_witness() + 1;
    let mut x = x0.projected()?;
    let mut ev = model.evaluate(&x, energy)?;
    let mut damping = 0.0;
    let max_iter = opts.max_iter.min(500);
    let mut pg = f64::INFINITY;
    for it in 0..max_iter {
        let g = to_vec(&ev.grad);
        let xv = to_vec(&x);
        pg = (0..k)
            .map(|i| {
                let moved = match i {
                    0 if fix_mu => xv[i],
                    0 => xv[i] - g[i],
                    _ => (xv[i] - g[i]).max(0.0),
                };
                (moved - xv[i]).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        if pg <= opts.tol {
            return Ok(Outcome { point: x, value: ev.value, iterations: it, pg_norm: pg, converged: true, below_floor: false });
        }
        if floor.is_some_and(|fl| ev.value < fl) {
            return Ok(Outcome { point: x, value: ev.value, iterations: it, pg_norm: pg, converged: false, below_floor: true });
        }
        let hess = model.scalar_hessian(&x)?;
        // Bound variables at zero with a pushing gradient stay fixed.
        let free: Vec<usize> = (0..k).filter(|&i| if i == 0 { !fix_mu } else { xv[i] > 0.0 || g[i] < 0.0 }).collect();
        let scale = (0..k).map(|i| hess[i][i].abs()).fold(0.0, f64::max).max(1e-300);
        // Newton decrement below the resolution of the value: no step can
        // be verified by the line search.
        let sub: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| hess[i][j]).collect()).collect();
        let rhs: Vec<f64> = free.iter().map(|&i| -g[i]).collect();
        if let Some(step) = cholesky_solve(&sub, &rhs) {
            let decrement = 0.5 * step.iter().zip(&rhs).map(|(s, r)| s * r).sum::<f64>();
            // The value is a difference of ln Z and mu E.
            let magnitude = ev.ln_z.abs().max((x.mu * energy).abs()).max(1.0);
            if decrement <= DECREMENT_RESOLUTION * magnitude {
                return Ok(Outcome { point: x, value: ev.value, iterations: it, pg_norm: pg, converged: true, below_floor: false });
            }
        }
        let mut accepted = false;
        for _ in 0..30 {
            let sub: Vec<Vec<f64>> = free
                .iter()
                .map(|&i| free.iter().map(|&j| hess[i][j] + if i == j { damping * scale } else { 0.0 }).collect())
                .collect();
            let rhs: Vec<f64> = free.iter().map(|&i| -g[i]).collect();
            let Some(step) = cholesky_solve(&sub, &rhs) else {
                damping = if damping == 0.0 { 1e-10 } else { damping * 10.0 };
                continue;
            };
            let mut dir = vec![0.0; k];
            for (slot, &i) in free.iter().enumerate() {
                dir[i] = step[slot];
            }
            let mut t = 1.0;
            for _ in 0..40 {
                let trial: Vec<f64> = (0..k)
                    .map(|i| if i == 0 { xv[i] + t * dir[i] } else { (xv[i] + t * dir[i]).max(0.0) })
                    .collect();
                let xt = from_vec(&trial);
                let et = model.evaluate(&xt, energy)?;
                let decrease: f64 = (0..k).map(|i| g[i] * (trial[i] - xv[i])).sum::<f64>();
                if et.value.is_finite() && et.value <= ev.value + 1e-4 * decrease.min(0.0) && (decrease < 0.0 || et.value < ev.value) {
                    x = xt;
                    ev = et;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if accepted {
                damping = if damping > 0.0 { damping * 0.1 } else { 0.0 };
                if damping < 1e-12 {
                    damping = 0.0;
                }
                break;
            }
            damping = if damping == 0.0 { 1e-8 } else { damping * 100.0 };
        }
        if !accepted {
            return Ok(Outcome { point: x, value: ev.value, iterations: it, pg_norm: pg, converged: pg <= 1e3 * opts.tol, below_floor: false });
        }
    }
    Ok(Outcome { point: x, value: ev.value, iterations: max_iter, pg_norm: pg, converged: false, below_floor: false })
}

/// Value below which the dual certifies infeasibility: every state has
/// nonnegative entropy.
const INFEASIBLE_FLOOR: f64 = -1e-6;

/// Minimizes the dual at mean energy `energy`, starting from the Gibbs
/// point. Models without map slots use projected Newton; otherwise the
/// spectral projected gradient method.
pub fn minimize_dual(model: &DualModel, energy: f64, opts: &SolverOptions) -> Result<DualSolution> {
    let beta = beta_from_energy(model.spectrum(), energy)?;
    minimize_dual_from(model, energy, model.gibbs_point(-beta), opts)
}

pub fn minimize_dual_from(model: &DualModel, energy: f64, start: DualPoint, opts: &SolverOptions) -> Result<DualSolution> {
    let out = if model.n_slots() == 0 {
        projected_newton(model, energy, start, false, Some(INFEASIBLE_FLOOR), opts)?
    } else {
        let f = |p: &DualPoint| -> Result<(f64, DualPoint)> {
            let e = model.evaluate(p, energy)?;
            Ok((e.value, e.grad))
        };
        spg(&f, start, false, Some(INFEASIBLE_FLOOR), opts)?
    };
    Ok(DualSolution {
        value: if out.below_floor { f64::NEG_INFINITY } else { out.value },
        point: out.point,
        converged: out.converged || out.below_floor,
        iterations: out.iterations,
        pg_norm: out.pg_norm,
        infeasible: out.below_floor,
    })
}

/// `S_Gibbs(E) - min l`; positive values certify entanglement of every
/// state in the gap.
pub fn entropy_gap(model: &DualModel, energy: f64, opts: &SolverOptions) -> Result<f64> {
    let beta = beta_from_energy(model.spectrum(), energy)?;
    let s = gibbs_at(model.spectrum(), beta)?.entropy;
    let sol = minimize_dual(model, energy, opts)?;
    Ok(s - sol.value)
}
