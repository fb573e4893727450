use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("invalid bipartition: {0}")]
    InvalidCut(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{qubits} qubits exceeds the dense memory guard of {cap} (set PROXYGAP_MAX_QUBITS to override)")]
    TooLarge { qubits: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("energy {energy} outside the admissible range [{lo}, {hi}]")]
    EnergyOutOfRange { energy: f64, lo: f64, hi: f64 },

    #[error("operator does not commute with the total magnetization (defect {defect:.3e})")]
    NotConserving { defect: f64 },

    #[error("input vectors are not orthonormal (Gram defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },

    #[error("energy {energy} not reachable by the product-state dictionary (reachable [{lo}, {hi}])")]
    DictionaryInfeasible { energy: f64, lo: f64, hi: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
