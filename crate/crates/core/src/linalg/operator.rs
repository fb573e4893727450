//! Hermitian operators on tensor-product spaces.

use serde::{Deserialize, Serialize};

use super::eigen::{self, SpectralDecomposition};
use super::matrix::{Matrix, C64};
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance applied on construction.
const HERMITIAN_RTOL: f64 = 1e-12;

/// A dense Hermitian matrix acting on `⊗_k C^{local_dims[k]}`.
///
/// Subsystem 0 is the most significant digit of the basis index, matching
/// the ordering produced by [`kron`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    local_dims: Vec<usize>,
    mat: Matrix,
}

impl HermitianOperator {
    pub fn new(mat: Matrix, local_dims: Vec<usize>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let prod: usize = local_dims.iter().product();
        if local_dims.is_empty() || local_dims.contains(&0) || prod != mat.rows() {
            return Err(Error::Dimension(format!(
                "local dims {:?} do not multiply to {}",
                local_dims,
                mat.rows()
            )));
        }
        let defect = mat.hermiticity_defect();
        if defect > HERMITIAN_RTOL * mat.max_abs().max(f64::MIN_POSITIVE) && defect > 0.0 {
            return Err(Error::NotHermitian { defect });
        }
        let mut mat = mat;
        mat.symmetrize();
        Ok(Self { local_dims, mat })
    }

    /// Operator on `n` qubits.
    pub fn qubits(mat: Matrix, n: usize) -> Result<Self> {
        Self::new(mat, vec![2; n])
    }

    /// A single system without tensor structure.
    pub fn single(mat: Matrix) -> Result<Self> {
        let d = mat.rows();
        Self::new(mat, vec![d])
    }

    pub fn identity(local_dims: Vec<usize>) -> Self {
        let d = local_dims.iter().product();
        Self {
            local_dims,
            mat: Matrix::identity(d),
        }
    }

    pub fn zeros(local_dims: Vec<usize>) -> Self {
        let d = local_dims.iter().product();
        Self {
            local_dims,
            mat: Matrix::zeros(d, d),
        }
    }

    pub fn projector(psi: &[C64], local_dims: Vec<usize>) -> Result<Self> {
        Self::new(Matrix::outer(psi, psi), local_dims)
    }

    /// Unchecked constructor for results of operations that preserve
    /// Hermiticity exactly.
    pub(crate) fn from_parts(mat: Matrix, local_dims: Vec<usize>) -> Self {
        debug_assert_eq!(mat.rows(), local_dims.iter().product::<usize>());
        Self { local_dims, mat }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn num_subsystems(&self) -> usize {
        self.local_dims.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// `tr(self * other)`.
    pub fn inner(&self, other: &HermitianOperator) -> f64 {
        self.mat.trace_product_re(&other.mat)
    }

    pub fn expectation(&self, psi: &[C64]) -> f64 {
        self.mat.sandwich(psi, psi).re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_parts(self.mat.scale(s), self.local_dims.clone())
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self::from_parts(self.mat.add(&other.mat), self.local_dims.clone()))
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self::from_parts(self.mat.sub(&other.mat), self.local_dims.clone()))
    }

    pub fn axpy(&mut self, a: f64, other: &HermitianOperator) {
        self.mat.axpy(a, &other.mat);
    }

    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.mat.clone();
        m.shift_diag(c);
        Self::from_parts(m, self.local_dims.clone())
    }

    fn check_same_space(&self, other: &HermitianOperator) -> Result<()> {
        if self.local_dims != other.local_dims {
            return Err(Error::Dimension(format!(
                "{:?} vs {:?}",
                self.local_dims, other.local_dims
            )));
        }
        Ok(())
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        eigen::eigh(&self.mat)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigen::eigvalsh(&self.mat)
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev.first().map_or(0.0, |a| a.abs()).max(ev.last().map_or(0.0, |b| b.abs())))
    }
}

/// The "A" side of a bipartition: a nonempty proper subset of subsystems.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    subset: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut subset: Vec<usize>, num_subsystems: usize) -> Result<Self> {
        subset.sort_unstable();
        subset.dedup();
        if subset.is_empty() || subset.len() >= num_subsystems {
            return Err(Error::InvalidCut(format!(
                "{subset:?} must be a nonempty proper subset of {num_subsystems} subsystems"
            )));
        }
        if let Some(&bad) = subset.iter().find(|&&i| i >= num_subsystems) {
            return Err(Error::InvalidCut(format!(
                "subsystem {bad} out of range for {num_subsystems} subsystems"
            )));
        }
        Ok(Self { subset })
    }

    /// Sites with even index (0-based), i.e. sites 1, 3, 5, ... in 1-based
    /// labelling.
    pub fn even_odd(num_subsystems: usize) -> Result<Self> {
        Self::new((0..num_subsystems).step_by(2).collect(), num_subsystems)
    }

    /// Every bipartition exactly once (the side containing subsystem 0 is
    /// taken as "A"): `2^(n-1) - 1` cuts.
    pub fn all(num_subsystems: usize) -> Result<Vec<Self>> {
        if !(2..=16).contains(&num_subsystems) {
            return Err(Error::InvalidParameter(format!(
                "bipartition enumeration supports 2..=16 subsystems, got {num_subsystems}"
            )));
        }
        let n = num_subsystems;
        let full = (1usize << n) - 1;
        Ok((0..(1usize << (n - 1)))
            .map(|rest| (rest << 1) | 1)
            .filter(|&mask| mask != full)
            .map(|mask| Self {
                subset: (0..n).filter(|i| mask >> i & 1 == 1).collect(),
            })
            .collect())
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn contains(&self, site: usize) -> bool {
        self.subset.binary_search(&site).is_ok()
    }

    pub fn complement(&self, num_subsystems: usize) -> Vec<usize> {
        (0..num_subsystems).filter(|i| !self.contains(*i)).collect()
    }

    pub fn validate_for(&self, local_dims: &[usize]) -> Result<()> {
        Self::new(self.subset.clone(), local_dims.len()).map(|_| ())
    }
}

/// Kronecker product; local dimensions are concatenated.
pub fn kron(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    let (da, db) = (a.dim(), b.dim());
    let d = da * db;
    let mut out = Matrix::zeros(d, d);
    for i in 0..da {
        for j in 0..da {
            let aij = a.mat[(i, j)];
            if aij == super::matrix::ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b.mat[(k, l)];
                }
            }
        }
    }
    let mut dims = a.local_dims.clone();
    dims.extend_from_slice(&b.local_dims);
    HermitianOperator::from_parts(out, dims)
}

/// Index permutation realising the partial transpose: entry `(i, j)` of the
/// result is entry `perm(i, j)` of the input.
struct PartialTransposeMap {
    strides: Vec<usize>,
    local_dims: Vec<usize>,
    flipped: Vec<usize>,
}

impl PartialTransposeMap {
    fn new(local_dims: &[usize], cut: &Bipartition) -> Self {
        let n = local_dims.len();
        let mut strides = vec![1; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * local_dims[k + 1];
        }
        Self {
            strides,
            local_dims: local_dims.to_vec(),
            flipped: cut.subset().to_vec(),
        }
    }

    #[inline]
    fn source(&self, i: usize, j: usize) -> (usize, usize) {
        let (mut si, mut sj) = (i, j);
        for &k in &self.flipped {
            let s = self.strides[k];
            let di = (i / s) % self.local_dims[k];
            let dj = (j / s) % self.local_dims[k];
            si = si - di * s + dj * s;
            sj = sj - dj * s + di * s;
        }
        (si, sj)
    }
}

/// Transposes the subsystems on the "A" side of `cut`.
pub fn partial_transpose(m: &HermitianOperator, cut: &Bipartition) -> Result<HermitianOperator> {
    cut.validate_for(&m.local_dims)?;
    Ok(HermitianOperator::from_parts(
        partial_transpose_matrix(&m.mat, &m.local_dims, cut),
        m.local_dims.clone(),
    ))
}

/// Partial transpose of a raw matrix; `cut` must already be valid for
/// `local_dims`.
pub fn partial_transpose_matrix(m: &Matrix, local_dims: &[usize], cut: &Bipartition) -> Matrix {
    let map = PartialTransposeMap::new(local_dims, cut);
    let d = m.rows();
    Matrix::from_fn(d, d, |i, j| {
        let (si, sj) = map.source(i, j);
        m[(si, sj)]
    })
}

/// `V diag(f(lambda)) V^dagger`, keeping the tensor structure of `like`.
pub fn spectral_fn(
    decomposition: &SpectralDecomposition,
    local_dims: Vec<usize>,
    f: impl Fn(f64) -> f64,
) -> Result<HermitianOperator> {
    if decomposition.eigenvalues.iter().any(|&x| !f(x).is_finite()) {
        return Err(Error::InvalidParameter(
            "spectral function is not finite on the spectrum".into(),
        ));
    }
    HermitianOperator::new(decomposition.apply(f), local_dims)
}

/// Nearest positive semidefinite matrix in Frobenius distance.
pub fn psd_project(m: &HermitianOperator) -> Result<HermitianOperator> {
    Ok(HermitianOperator::from_parts(
        psd_project_matrix(&m.mat)?,
        m.local_dims.clone(),
    ))
}

pub fn psd_project_matrix(m: &Matrix) -> Result<Matrix> {
    let s = eigen::eigh(m)?;
    if s.eigenvalues.first().is_some_and(|&x| x >= 0.0) {
        return Ok(m.clone());
    }
    let mut out = s.apply(|x| x.max(0.0));
    out.symmetrize();
    Ok(out)
}
