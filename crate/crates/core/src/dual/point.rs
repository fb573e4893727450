use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::{psd_project_matrix, Matrix};

/// Dual variables: `mu` (free), `nus` (nonnegative, one per witness) and
/// `xs` (positive semidefinite, one per map slot).
#[derive(Clone, Debug, PartialEq)]
pub struct DualPoint {
    pub mu: f64,
    pub nus: Vec<f64>,
    pub xs: Vec<Matrix>,
}

impl DualPoint {
    pub fn zeros(n_witness: usize, n_slots: usize, dim: usize) -> Self {
        Self {
            mu: 0.0,
            nus: vec![0.0; n_witness],
            xs: (0..n_slots).map(|_| Matrix::zeros(dim, dim)).collect(),
        }
    }

    /// The Gibbs point `(mu, 0, 0)`.
    pub fn gibbs(mu: f64, n_witness: usize, n_slots: usize, dim: usize) -> Self {
        Self { mu, ..Self::zeros(n_witness, n_slots, dim) }
    }

    pub fn same_shape(&self, other: &DualPoint) -> bool {
        self.nus.len() == other.nus.len()
            && self.xs.len() == other.xs.len()
            && self.xs.iter().zip(&other.xs).all(|(a, b)| a.rows() == b.rows())
    }

    pub fn dot(&self, other: &DualPoint) -> f64 {
        self.mu * other.mu
            + self.nus.iter().zip(&other.nus).map(|(a, b)| a * b).sum::<f64>()
            + self.xs.iter().zip(&other.xs).map(|(a, b)| a.inner_re(b)).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        let mut m = self.mu.abs();
        for v in &self.nus {
            m = m.max(v.abs());
        }
        for x in &self.xs {
            m = m.max(x.max_abs());
        }
        m
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &DualPoint) {
        self.mu += a * other.mu;
        for (x, y) in self.nus.iter_mut().zip(&other.nus) {
            *x += a * y;
        }
        for (x, y) in self.xs.iter_mut().zip(&other.xs) {
            x.axpy(a, y);
        }
    }

    pub fn scaled(&self, a: f64) -> DualPoint {
        DualPoint {
            mu: a * self.mu,
            nus: self.nus.iter().map(|v| a * v).collect(),
            xs: self.xs.iter().map(|x| x.scale(a)).collect(),
        }
    }

    pub fn sub(&self, other: &DualPoint) -> DualPoint {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Euclidean projection onto `nu >= 0`, `X >= 0`.
    pub fn project(&mut self) -> Result<()> {
        for v in &mut self.nus {
            *v = v.max(0.0);
        }
        self.xs.par_iter_mut().try_for_each(|x| {
            x.symmetrize();
            *x = psd_project_matrix(x)?;
            Ok(())
        })
    }

    pub fn projected(&self) -> Result<DualPoint> {
        let mut p = self.clone();
        p.project()?;
        Ok(p)
    }

    pub fn is_feasible(&self) -> Result<bool> {
        if self.nus.iter().any(|&v| v < -1e-12) {
            return Ok(false);
        }
        for x in &self.xs {
            let ev = crate::linalg::eigvalsh(x)?;
            if ev.first().is_some_and(|&l| l < -1e-10 * x.max_abs().max(1.0)) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
