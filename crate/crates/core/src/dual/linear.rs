//! Dual of the constrained linear-entropy maximization,
//! `l = tr K^2 / 4 + 1 - lambda - mu E` with
//! `K = lambda + mu H + sum nu_i W_i + X_0 + sum X_A^{T_A}`, minimized over
//! `nu >= 0`, `X >= 0`. The optimal primal state is `K / 2`.

use super::model::DualModel;
use super::solver::SolverOptions;
use crate::error::{Error, Result};
use crate::linalg::{eigh, partial_transpose_matrix, psd_project_matrix, Bipartition, Matrix};
use crate::thermo::linear_entropy_max_spectrum;

#[derive(Clone, Debug)]
pub struct LinearDualSolution {
    /// Upper bound on the constrained maximal linear entropy.
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub pg_norm: f64,
}

#[derive(Clone, Debug)]
struct LinPoint {
    lambda: f64,
    mu: f64,
    nus: Vec<f64>,
    /// `X_0` first, then one matrix per cut.
    xs: Vec<Matrix>,
}

impl LinPoint {
    fn dot(&self, o: &LinPoint) -> f64 {
        self.lambda * o.lambda
            + self.mu * o.mu
            + self.nus.iter().zip(&o.nus).map(|(a, b)| a * b).sum::<f64>()
            + self.xs.iter().zip(&o.xs).map(|(a, b)| a.inner_re(b)).sum::<f64>()
    }

    fn axpy(&mut self, a: f64, o: &LinPoint) {
        self.lambda += a * o.lambda;
        self.mu += a * o.mu;
        for (x, y) in self.nus.iter_mut().zip(&o.nus) {
            *x += a * y;
        }
        for (x, y) in self.xs.iter_mut().zip(&o.xs) {
            x.axpy(a, y);
        }
    }

    fn sub(&self, o: &LinPoint) -> LinPoint {
        let mut out = self.clone();
        out.axpy(-1.0, o);
        out
    }

    fn project(&mut self) -> Result<()> {
        for v in &mut self.nus {
            *v = v.max(0.0);
        }
        for x in &mut self.xs {
            x.symmetrize();
            *x = psd_project_matrix(x)?;
        }
        Ok(())
    }
}

struct Problem<'a> {
    h: &'a Matrix,
    ws: &'a [Matrix],
    cuts: &'a [Bipartition],
    local_dims: &'a [usize],
    energy: f64,
}

impl Problem<'_> {
    /// The part of `K` linear in the variables.
    fn k_of(&self, p: &LinPoint) -> Matrix {
        let mut k = self.h.scale(p.mu);
        k.shift_diag(p.lambda);
        for (w, &nu) in self.ws.iter().zip(&p.nus) {
            k.axpy(nu, w);
        }
        k.axpy(1.0, &p.xs[0]);
        for (x, cut) in p.xs[1..].iter().zip(self.cuts) {
            k.axpy(1.0, &partial_transpose_matrix(x, self.local_dims, cut));
        }
        k
    }

    fn value(&self, p: &LinPoint, k: &Matrix) -> f64 {
        0.25 * k.inner_re(k) + 1.0 - p.lambda - p.mu * self.energy
    }

    fn grad(&self, k: &Matrix) -> LinPoint {
        let mut xs = vec![k.scale(0.5)];
        xs.extend(self.cuts.iter().map(|cut| partial_transpose_matrix(k, self.local_dims, cut).scale(0.5)));
        LinPoint {
            lambda: 0.5 * k.trace().re - 1.0,
            mu: 0.5 * k.trace_product_re(self.h) - self.energy,
            nus: self.ws.iter().map(|w| 0.5 * k.trace_product_re(w)).collect(),
            xs,
        }
    }

    fn projected_step(&self, x: &LinPoint, g: &LinPoint, step: f64) -> Result<LinPoint> {
        let mut y = x.clone();
        y.axpy(-step, g);
        y.project()?;
        Ok(y.sub(x))
    }
}

/// Minimizes the linear-entropy dual at mean energy `energy`, starting from
/// the unconstrained water-filling optimum. Dense models only.
pub fn lin_dual_minimize(model: &DualModel, energy: f64, opts: &SolverOptions) -> Result<LinearDualSolution> {
    let (h, ws, cuts, local_dims) = model
        .dense_parts()
        .ok_or_else(|| Error::InvalidParameter("the linear-entropy dual needs a dense model".into()))?;
    let pr = Problem { h, ws, cuts, local_dims, energy };
    let d = h.rows();

    let water = linear_entropy_max_spectrum(model.spectrum(), energy)?;
    let (a, b) = (water.a, water.b);
    let x0 = eigh(h)?.apply(|e| 2.0 * (-(a + b * e)).max(0.0));
    let mut xs = vec![x0];
    xs.extend(cuts.iter().map(|_| Matrix::zeros(d, d)));
    let mut x = LinPoint { lambda: 2.0 * a, mu: 2.0 * b, nus: vec![0.0; ws.len()], xs };
    x.project()?;

    let mut k = pr.k_of(&x);
    let mut fx = pr.value(&x, &k);
    let mut g = pr.grad(&k);
    let mut step = 1.0;
    let mut pg = f64::INFINITY;
    for it in 0..opts.max_iter {
        if fx < -1e-6 {
            // Linear entropy is nonnegative: no state meets the constraints.
            return Ok(LinearDualSolution { value: f64::NEG_INFINITY, converged: true, iterations: it, pg_norm: pg });
        }
        let dir = pr.projected_step(&x, &g, step)?;
        let lower = if step >= 1.0 { dir.dot(&dir).sqrt() / step } else { dir.dot(&dir).sqrt() };
        pg = lower;
        if lower <= opts.tol {
            pg = {
                let full = pr.projected_step(&x, &g, 1.0)?;
                full.dot(&full).sqrt()
            };
            if pg <= opts.tol {
                return Ok(LinearDualSolution { value: fx, converged: true, iterations: it, pg_norm: pg });
            }
        }
        // K is linear in the variables, so the objective along `dir` is an
        // exact quadratic.
        let kd = pr.k_of(&dir);
        let curv = 0.5 * kd.inner_re(&kd);
        let slope = g.dot(&dir);
        if slope >= 0.0 {
            return Ok(LinearDualSolution { value: fx, converged: pg <= 10.0 * opts.tol, iterations: it, pg_norm: pg });
        }
        let t = if curv > 0.0 { (-slope / curv).min(1.0) } else { 1.0 };
        x.axpy(t, &dir);
        k.axpy(t, &kd);
        if it % 100 == 99 {
            // Clear accumulated rounding in the incremental update.
            k = pr.k_of(&x);
        }
        let gn = pr.grad(&k);
        let sy = t * gn.sub(&g).dot(&dir);
        step = if sy > 0.0 { (t * t * dir.dot(&dir) / sy).clamp(1e-12, 1e12) } else { (step * 10.0).min(1e12) };
        fx = pr.value(&x, &k);
        g = gn;
    }
    Ok(LinearDualSolution { value: fx, converged: false, iterations: opts.max_iter, pg_norm: pg })
}

/// Maximal linear entropy at `energy` minus the dual bound.
pub fn linear_entropy_gap(model: &DualModel, energy: f64, opts: &SolverOptions) -> Result<f64> {
    let reference = linear_entropy_max_spectrum(model.spectrum(), energy)?.value;
    Ok(reference - lin_dual_minimize(model, energy, opts)?.value)
}
