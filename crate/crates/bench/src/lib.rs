//! Fixtures shared by the benchmarks.

use proxygap_core::dual::DualModel;
use proxygap_core::linalg::{Bipartition, Matrix, C64};
use proxygap_core::models::chains::{heisenberg_chain, heisenberg_pauli, HeisenbergParams};
use proxygap_core::witness::{ConstraintSet, DickeWitness};

/// Deterministic dense Hermitian matrix.
pub fn hermitian(d: usize) -> Matrix {
    let mut m = Matrix::from_fn(d, d, |i, j| {
        let x = ((i * 7919 + j * 104_729) % 1000) as f64 / 500.0 - 1.0;
        let y = ((i * 3571 + j * 2749) % 1000) as f64 / 500.0 - 1.0;
        C64::new(x, y)
    });
    m.symmetrize();
    m
}

/// Antiferromagnetic ring with one PPT constraint across the even-odd cut.
pub fn ppt_ring(n: usize) -> DualModel {
    let h = heisenberg_chain(&HeisenbergParams::xxx(n, -1.0, 0.0)).unwrap();
    DualModel::dense(&h, &ConstraintSet::ppt(vec![Bipartition::even_odd(n).unwrap()])).unwrap()
}

/// Sector-blocked XXZ ring with a Dicke witness.
pub fn dicke_ring(n: usize, m: usize, delta_j: f64, b: f64) -> DualModel {
    let h = heisenberg_pauli(&HeisenbergParams::xxz(n, 1.0, delta_j, b)).unwrap();
    let w = DickeWitness::new(n, m).unwrap();
    DualModel::blocked(&h, &[&w]).unwrap()
}
