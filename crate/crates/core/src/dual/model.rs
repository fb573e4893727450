//! The reduced dual `l(mu, nu, X) = ln tr exp(mu H + sum nu_i W_i +
//! sum_A X_A^{T_A}) - mu E` with its gradient and Hessian.

use rayon::prelude::*;

use super::point::DualPoint;
use crate::error::{Error, Result};
use crate::linalg::{eigh, eigvalsh, partial_transpose_matrix, Bipartition, HermitianOperator, Matrix};
use crate::models::pauli::{restrict, SparseOperator};
use crate::models::sectors::{is_translation_invariant, MomentumSector};
use crate::models::states::sector_basis;
use crate::witness::ConstraintSet;

/// One block of a block-diagonal model.
#[derive(Clone, Debug)]
struct Block {
    h: Matrix,
    ws: Vec<Matrix>,
    /// Set when every witness block is a multiple of the identity: the
    /// eigenvalues of `h` and the witness multiples.
    scalar: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Clone, Debug)]
enum Backend {
    Dense {
        h: Matrix,
        ws: Vec<Matrix>,
        cuts: Vec<Bipartition>,
        local_dims: Vec<usize>,
    },
    Blocked {
        blocks: Vec<Block>,
    },
}

/// Hamiltonian and constraints in the form needed to evaluate the dual.
#[derive(Clone, Debug)]
pub struct DualModel {
    backend: Backend,
    n_witness: usize,
    n_slots: usize,
    dim: usize,
    spectrum: Vec<f64>,
    labels: Vec<String>,
}

/// Value and gradient at a dual point.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: f64,
    pub grad: DualPoint,
    /// `ln tr exp(M)`.
    pub ln_z: f64,
    /// `tr(sigma H)` for the normalized `sigma = exp(M) / tr exp(M)`.
    pub energy: f64,
    /// `tr(sigma W_i)`.
    pub witness_values: Vec<f64>,
}

/// Eigen-data of `M` for one block.
struct BlockEig {
    values: Vec<f64>,
    vectors: Option<Matrix>,
}

/// `exp(a - shift) * expm1(b - a) / (b - a)`, the divided difference of the
/// exponential, stable for `a ≈ b`.
#[inline]
fn exp_divided_difference(a: f64, b: f64, shift: f64) -> f64 {
    let d = b - a;
    let base = (a - shift).exp();
    if d.abs() < 1e-12 {
        base * (1.0 + 0.5 * d)
    } else {
        base * d.exp_m1() / d
    }
}

fn is_scalar_multiple(m: &Matrix) -> Option<f64> {
    let n = m.rows();
    if n == 0 {
        return Some(0.0);
    }
    let c = m[(0, 0)];
    let scale = m.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { c } else { crate::linalg::matrix::ZERO };
            if (m[(i, j)] - expect).norm() > 1e-13 * scale {
                return None;
            }
        }
    }
    Some(c.re)
}

impl DualModel {
    /// Dense model on the full Hilbert space.
    pub fn dense(h: &HermitianOperator, cs: &ConstraintSet) -> Result<Self> {
        cs.validate_for(h.local_dims())?;
        let spectrum = h.eigenvalues()?;
        Ok(Self {
            backend: Backend::Dense {
                h: h.matrix().clone(),
                ws: cs.witnesses.iter().map(|w| w.operator.matrix().clone()).collect(),
                cuts: cs.map_slots.clone(),
                local_dims: h.local_dims().to_vec(),
            },
            n_witness: cs.witnesses.len(),
            n_slots: cs.map_slots.len(),
            dim: h.dim(),
            spectrum,
            labels: cs.witnesses.iter().map(|w| w.label.clone()).collect(),
        })
    }

    /// Block-diagonal model for a Hamiltonian and witnesses that conserve
    /// the magnetization. Momentum blocks are used when every operator is
    /// also translation invariant. Positive-map slots are not supported.
    pub fn blocked(h: &dyn SparseOperator, ws: &[&dyn SparseOperator]) -> Result<Self> {
        let n = h.num_qubits();
        if ws.iter().any(|w| w.num_qubits() != n) {
            return Err(Error::Dimension("witness and Hamiltonian qubit counts differ".into()));
        }
        if n > 24 {
            return Err(Error::TooLarge { qubits: n, cap: 24 });
        }
        let conserving = crate::models::pauli::conserves_magnetization(h)
            && ws.iter().all(|w| crate::models::pauli::conserves_magnetization(*w));
        if !conserving {
            return Err(Error::NotConserving { defect: f64::NAN });
        }
        let momentum = is_translation_invariant(h) && ws.iter().all(|w| is_translation_invariant(*w));
        let mut raw: Vec<(Matrix, Vec<Matrix>)> = Vec::new();
        for k in 0..=n {
            if momentum {
                for ms in MomentumSector::all(n, k) {
                    if ms.dim() > 0 {
                        raw.push((ms.block(h), ws.iter().map(|w| ms.block(*w)).collect()));
                    }
                }
            } else {
                let basis = sector_basis(n, k);
                raw.push((restrict(h, &basis), ws.iter().map(|w| restrict(*w, &basis)).collect()));
            }
        }
        let blocks: Vec<Block> = raw
            .into_par_iter()
            .map(|(h, ws)| {
                let multiples: Option<Vec<f64>> = ws.iter().map(is_scalar_multiple).collect();
                let scalar = match multiples {
                    Some(c) => Some((eigvalsh(&h)?, c)),
                    None => None,
                };
                Ok(Block { h, ws, scalar })
            })
            .collect::<Result<_>>()?;
        let mut spectrum = Vec::with_capacity(1 << n);
        for b in &blocks {
            match &b.scalar {
                Some((e, _)) => spectrum.extend_from_slice(e),
                None => spectrum.extend(eigvalsh(&b.h)?),
            }
        }
        spectrum.sort_by(f64::total_cmp);
        Ok(Self {
            backend: Backend::Blocked { blocks },
            n_witness: ws.len(),
            n_slots: 0,
            dim: 1 << n,
            spectrum,
            labels: (0..ws.len()).map(|i| format!("w{i}")).collect(),
        })
    }

    pub fn n_witness(&self) -> usize {
        self.n_witness
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Ascending eigenvalues of `H`.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn witness_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_blocked(&self) -> bool {
        matches!(self.backend, Backend::Blocked { .. })
    }

    pub fn num_blocks(&self) -> usize {
        match &self.backend {
            Backend::Dense { .. } => 1,
            Backend::Blocked { blocks } => blocks.len(),
        }
    }

    pub fn gibbs_point(&self, mu: f64) -> DualPoint {
        DualPoint::gibbs(mu, self.n_witness, self.n_slots, self.dim)
    }

    fn check_point(&self, p: &DualPoint) -> Result<()> {
        if p.nus.len() != self.n_witness || p.xs.len() != self.n_slots {
            return Err(Error::Dimension(format!(
                "dual point has {} multipliers and {} matrices, model needs {} and {}",
                p.nus.len(),
                p.xs.len(),
                self.n_witness,
                self.n_slots
            )));
        }
        if p.xs.iter().any(|x| x.rows() != self.dim || x.cols() != self.dim) {
            return Err(Error::Dimension("dual matrix size mismatch".into()));
        }
        Ok(())
    }

    fn dense_exponent(&self, p: &DualPoint) -> Matrix {
        let Backend::Dense { h, ws, cuts, local_dims } = &self.backend else {
            unreachable!("dense exponent on a blocked model")
        };
        let mut m = h.scale(p.mu);
        for (w, &nu) in ws.iter().zip(&p.nus) {
            if nu != 0.0 {
                m.axpy(nu, w);
            }
        }
        for (x, cut) in p.xs.iter().zip(cuts) {
            if x.max_abs() != 0.0 {
                m.axpy(1.0, &partial_transpose_matrix(x, local_dims, cut));
            }
        }
        m.symmetrize();
        m
    }

    fn block_exponent(b: &Block, p: &DualPoint) -> Matrix {
        let mut m = b.h.scale(p.mu);
        for (w, &nu) in b.ws.iter().zip(&p.nus) {
            if nu != 0.0 {
                m.axpy(nu, w);
            }
        }
        m.symmetrize();
        m
    }

    fn eig_blocks(&self, p: &DualPoint, want_vectors: bool) -> Result<Vec<BlockEig>> {
        match &self.backend {
            Backend::Dense { .. } => {
                let m = self.dense_exponent(p);
                Ok(vec![if want_vectors {
                    let s = eigh(&m)?;
                    BlockEig { values: s.eigenvalues, vectors: Some(s.eigenvectors) }
                } else {
                    BlockEig { values: eigvalsh(&m)?, vectors: None }
                }])
            }
            Backend::Blocked { blocks } => blocks
                .par_iter()
                .map(|b| match &b.scalar {
                    Some((e, c)) => {
                        let offset: f64 = c.iter().zip(&p.nus).map(|(c, nu)| c * nu).sum();
                        Ok(BlockEig { values: e.iter().map(|x| p.mu * x + offset).collect(), vectors: None })
                    }
                    None => {
                        let m = Self::block_exponent(b, p);
                        if want_vectors {
                            let s = eigh(&m)?;
                            Ok(BlockEig { values: s.eigenvalues, vectors: Some(s.eigenvectors) })
                        } else {
                            Ok(BlockEig { values: eigvalsh(&m)?, vectors: None })
                        }
                    }
                })
                .collect(),
        }
    }

    fn shift_and_z(eigs: &[BlockEig]) -> (f64, f64) {
        let shift = eigs
            .iter()
            .flat_map(|b| b.values.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = eigs
            .iter()
            .flat_map(|b| b.values.iter())
            .map(|&x| (x - shift).exp())
            .sum();
        (shift, z)
    }

    /// `ln tr exp(M(p))`.
    pub fn log_trace_exp(&self, p: &DualPoint) -> Result<f64> {
        self.check_point(p)?;
        let eigs = self.eig_blocks(p, false)?;
        let (shift, z) = Self::shift_and_z(&eigs);
        Ok(shift + z.ln())
    }

    /// Smallest and largest eigenvalue of `M(p)`.
    pub fn exponent_range(&self, p: &DualPoint) -> Result<(f64, f64)> {
        self.check_point(p)?;
        let eigs = self.eig_blocks(p, false)?;
        let all = eigs.iter().flat_map(|b| b.values.iter().copied());
        Ok(all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x))))
    }

    pub fn value(&self, p: &DualPoint, energy: f64) -> Result<f64> {
        Ok(self.log_trace_exp(p)? - p.mu * energy)
    }

    /// Value and gradient. With `sigma = exp(M) / tr exp(M)` the partial
    /// derivatives are `tr(sigma H) - E`, `tr(sigma W_i)` and
    /// `sigma^{T_A}`.
    pub fn evaluate(&self, p: &DualPoint, energy: f64) -> Result<Evaluation> {
        self.check_point(p)?;
        let eigs = self.eig_blocks(p, true)?;
        let (shift, z) = Self::shift_and_z(&eigs);
        let ln_z = shift + z.ln();
        let mut e_h = 0.0;
        let mut e_w = vec![0.0; self.n_witness];
        let mut xs_grad = Vec::with_capacity(self.n_slots);
        match &self.backend {
            Backend::Dense { h, ws, cuts, local_dims } => {
                let b = &eigs[0];
                let weights: Vec<f64> = b.values.iter().map(|&x| (x - shift).exp() / z).collect();
                let sigma = crate::linalg::eigen::weighted_projector_sum(b.vectors.as_ref().unwrap(), &weights);
                e_h = sigma.trace_product_re(h);
                for (slot, w) in e_w.iter_mut().zip(ws) {
                    *slot = sigma.trace_product_re(w);
                }
                for cut in cuts {
                    xs_grad.push(partial_transpose_matrix(&sigma, local_dims, cut));
                }
            }
            Backend::Blocked { blocks } => {
                let parts: Vec<(f64, Vec<f64>)> = blocks
                    .par_iter()
                    .zip(eigs.par_iter())
                    .map(|(blk, b)| {
                        let weights: Vec<f64> = b.values.iter().map(|&x| (x - shift).exp() / z).collect();
                        match &blk.scalar {
                            Some((e, c)) => {
                                let mass: f64 = weights.iter().sum();
                                let eh = weights.iter().zip(e).map(|(w, e)| w * e).sum();
                                (eh, c.iter().map(|c| c * mass).collect())
                            }
                            None => {
                                let sigma = crate::linalg::eigen::weighted_projector_sum(b.vectors.as_ref().unwrap(), &weights);
                                (sigma.trace_product_re(&blk.h), blk.ws.iter().map(|w| sigma.trace_product_re(w)).collect())
                            }
                        }
                    })
                    .collect();
                for (eh, ew) in parts {
                    e_h += eh;
                    for (slot, v) in e_w.iter_mut().zip(ew) {
                        *slot += v;
                    }
                }
            }
        }
        let grad = DualPoint { mu: e_h - energy, nus: e_w.clone(), xs: xs_grad };
        Ok(Evaluation { value: ln_z - p.mu * energy, grad, ln_z, energy: e_h, witness_values: e_w })
    }

    /// Hessian of the value with respect to `(mu, nu_1, ..., nu_k)`, the
    /// matrices `X_A` held fixed (Kubo-Mori form).
    pub fn scalar_hessian(&self, p: &DualPoint) -> Result<Vec<Vec<f64>>> {
        self.check_point(p)?;
        let eigs = self.eig_blocks(p, true)?;
        let (shift, z) = Self::shift_and_z(&eigs);
        let k = self.n_witness + 1;
        let mut second = vec![vec![0.0; k]; k];
        let mut first = vec![0.0; k];
        let accumulate = |ops: Vec<Matrix>, b: &BlockEig, second: &mut Vec<Vec<f64>>, first: &mut Vec<f64>| {
            // ops are already in the eigenbasis of the block.
            let lam = &b.values;
            let d = lam.len();
            for (a, oa) in ops.iter().enumerate() {
                for j in 0..d {
                    first[a] += oa[(j, j)].re * (lam[j] - shift).exp() / z;
                }
                for (c, oc) in ops.iter().enumerate().skip(a) {
                    let mut acc = 0.0;
                    for j in 0..d {
                        for l in 0..d {
                            let prod = oa[(j, l)] * oc[(l, j)];
                            if prod.re != 0.0 {
                                acc += prod.re * exp_divided_difference(lam[j], lam[l], shift);
                            }
                        }
                    }
                    second[a][c] += acc / z;
                }
            }
        };
        match &self.backend {
            Backend::Dense { h, ws, .. } => {
                let v = eigs[0].vectors.as_ref().unwrap();
                let vd = v.adjoint();
                let mut ops = vec![vd.matmul(h).matmul(v)];
                ops.extend(ws.iter().map(|w| vd.matmul(w).matmul(v)));
                accumulate(ops, &eigs[0], &mut second, &mut first);
            }
            Backend::Blocked { blocks } => {
                let parts: Vec<(Vec<Vec<f64>>, Vec<f64>)> = blocks
                    .par_iter()
                    .zip(eigs.par_iter())
                    .map(|(blk, b)| {
                        let mut s2 = vec![vec![0.0; k]; k];
                        let mut s1 = vec![0.0; k];
                        match &blk.scalar {
                            Some((e, c)) => {
                                for (j, &lam) in b.values.iter().enumerate() {
                                    let w = (lam - shift).exp() / z;
                                    let mut diag = Vec::with_capacity(k);
                                    diag.push(e[j]);
                                    diag.extend_from_slice(c);
                                    for a in 0..k {
                                        s1[a] += diag[a] * w;
                                        for cc in a..k {
                                            s2[a][cc] += diag[a] * diag[cc] * w;
                                        }
                                    }
                                }
                            }
                            None => {
                                let v = b.vectors.as_ref().unwrap();
                                let vd = v.adjoint();
                                let mut ops = vec![vd.matmul(&blk.h).matmul(v)];
                                ops.extend(blk.ws.iter().map(|w| vd.matmul(w).matmul(v)));
                                accumulate(ops, b, &mut s2, &mut s1);
                            }
                        }
                        (s2, s1)
                    })
                    .collect();
                for (s2, s1) in parts {
                    for a in 0..k {
                        first[a] += s1[a];
                        for c in a..k {
                            second[a][c] += s2[a][c];
                        }
                    }
                }
            }
        }
        let mut hess = vec![vec![0.0; k]; k];
        for a in 0..k {
            for c in a..k {
                let v = second[a][c] - first[a] * first[c];
                hess[a][c] = v;
                hess[c][a] = v;
            }
        }
        Ok(hess)
    }

    /// `H`, witnesses, cuts and local dimensions of a dense model.
    pub(crate) fn dense_parts(&self) -> Option<(&Matrix, &[Matrix], &[Bipartition], &[usize])> {
        match &self.backend {
            Backend::Dense { h, ws, cuts, local_dims } => Some((h, ws, cuts, local_dims)),
            Backend::Blocked { .. } => None,
        }
    }

    /// `exp(M) / tr exp(M)` on the full space (dense only).
    pub fn dense_state(&self, p: &DualPoint) -> Result<Matrix> {
        if self.is_blocked() {
            return Err(Error::InvalidParameter("full state needs a dense model".into()));
        }
        self.check_point(p)?;
        let s = eigh(&self.dense_exponent(p))?;
        let shift = s.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = s.eigenvalues.iter().map(|&x| (x - shift).exp()).collect();
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= z);
        Ok(crate::linalg::eigen::weighted_projector_sum(&s.eigenvectors, &w))
    }

    /// Partial transposes on each map slot of a full-space matrix.
    pub fn slot_transposes(&self, rho: &Matrix) -> Result<Vec<Matrix>> {
        let Backend::Dense { cuts, local_dims, .. } = &self.backend else {
            return Ok(Vec::new());
        };
        Ok(cuts.iter().map(|cut| partial_transpose_matrix(rho, local_dims, cut)).collect())
    }

    /// `tr(W_i) / d` for each witness.
    pub fn witness_means(&self) -> Result<Vec<f64>> {
        Ok(self.evaluate(&self.gibbs_point(0.0), 0.0)?.witness_values)
    }

    /// The same model with `H` replaced by `H + eps * P` (dense only).
    pub fn perturbed(&self, p_op: &Matrix, eps: f64) -> Result<Self> {
        let Backend::Dense { h, ws, cuts, local_dims } = &self.backend else {
            return Err(Error::InvalidParameter("perturbation needs a dense model".into()));
        };
        if p_op.rows() != self.dim {
            return Err(Error::Dimension("perturbation size mismatch".into()));
        }
        let mut h2 = h.clone();
        h2.axpy(eps, p_op);
        h2.symmetrize();
        let spectrum = eigvalsh(&h2)?;
        Ok(Self {
            backend: Backend::Dense { h: h2, ws: ws.clone(), cuts: cuts.clone(), local_dims: local_dims.clone() },
            spectrum,
            ..self.clone()
        })
    }
}
