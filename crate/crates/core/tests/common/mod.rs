#![allow(dead_code)]

use proxygap_core::dual::DualPoint;
use proxygap_core::linalg::{HermitianOperator, Matrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// GUE-like Hermitian matrix with entries of unit scale.
pub fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    m = m.add(&m.adjoint()).scale(0.5);
    m.symmetrize();
    m
}

/// `A A^dagger` scaled to trace `scale`.
pub fn random_psd(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let a = Matrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let mut p = a.matmul(&a.adjoint());
    let t = p.trace().re;
    p.scale_mut(scale / t);
    p.symmetrize();
    p
}

pub fn random_qubit_hamiltonian(n: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    HermitianOperator::qubits(random_hermitian(1 << n, rng), n).unwrap()
}

pub fn random_point(n_witness: usize, n_slots: usize, d: usize, rng: &mut ChaCha8Rng) -> DualPoint {
    DualPoint {
        mu: -3.0 * rng.random::<f64>(),
        nus: (0..n_witness).map(|_| 2.0 * rng.random::<f64>()).collect(),
        xs: (0..n_slots).map(|_| random_psd(d, 0.5 * rng.random::<f64>(), rng)).collect(),
    }
}

pub fn random_direction(n_witness: usize, n_slots: usize, d: usize, rng: &mut ChaCha8Rng) -> DualPoint {
    DualPoint {
        mu: rng.sample(StandardNormal),
        nus: (0..n_witness).map(|_| rng.sample(StandardNormal)).collect(),
        xs: (0..n_slots).map(|_| random_hermitian(d, rng).scale(0.3)).collect(),
    }
}

pub fn rel_close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}
