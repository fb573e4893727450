//! Dense linear algebra kernel.

pub mod eigen;
pub mod matrix;
pub mod operator;

pub use eigen::{eigh, eigvalsh, SpectralDecomposition};
pub use matrix::{Matrix, C64};
pub use operator::{
    kron, partial_transpose, partial_transpose_matrix, psd_project, psd_project_matrix,
    spectral_fn, Bipartition, HermitianOperator,
};

use crate::error::Result;

/// Eigendecomposition of a Hermitian operator.
pub fn eig_hermitian(m: &HermitianOperator) -> Result<SpectralDecomposition> {
    m.eig()
}

/// Single-qubit Pauli matrices in the basis {|0>, |1>} with `Z|0> = |0>`.
pub mod pauli {
    use super::matrix::{Matrix, C64};

    pub fn x() -> Matrix {
        Matrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y() -> Matrix {
        let i = C64::new(0.0, 1.0);
        Matrix::from_vec(2, 2, vec![C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)])
    }

    pub fn z() -> Matrix {
        Matrix::from_diag(&[1.0, -1.0])
    }
}
