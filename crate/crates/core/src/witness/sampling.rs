//! Random pure states from the separable classes used by witnesses.

use rand::Rng;
use rand_distr::StandardNormal;

use super::SeparableClass;
use crate::linalg::matrix::{kron_vec, normalize};
use crate::linalg::{Bipartition, C64};

/// Haar-random unit vector in `C^d`.
pub fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..d)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    normalize(&mut v);
    v
}

/// Tensor product of local vectors, subsystem 0 first.
pub fn product_state(factors: &[Vec<C64>]) -> Vec<C64> {
    factors
        .iter()
        .fold(vec![C64::new(1.0, 0.0)], |acc, f| kron_vec(&acc, f))
}

pub fn random_product_state<R: Rng + ?Sized>(local_dims: &[usize], rng: &mut R) -> Vec<C64> {
    let factors: Vec<Vec<C64>> = local_dims.iter().map(|&d| haar_vector(d, rng)).collect();
    product_state(&factors)
}

/// `|a>|b>` with `a` Haar-random on the A side of `cut` and `b` on the rest.
pub fn random_cut_product_state<R: Rng + ?Sized>(local_dims: &[usize], cut: &Bipartition, rng: &mut R) -> Vec<C64> {
    let a_sites = cut.subset();
    let b_sites = cut.complement(local_dims.len());
    let da: usize = a_sites.iter().map(|&k| local_dims[k]).product();
    let db: usize = b_sites.iter().map(|&k| local_dims[k]).product();
    let a = haar_vector(da, rng);
    let b = haar_vector(db, rng);
    let n = local_dims.len();
    let dim: usize = local_dims.iter().product();
    let mut psi = vec![C64::new(0.0, 0.0); dim];
    let mut digits = vec![0usize; n];
    for (idx, slot) in psi.iter_mut().enumerate() {
        let mut rem = idx;
        for k in (0..n).rev() {
            digits[k] = rem % local_dims[k];
            rem /= local_dims[k];
        }
        let row = a_sites.iter().fold(0, |acc, &k| acc * local_dims[k] + digits[k]);
        let col = b_sites.iter().fold(0, |acc, &k| acc * local_dims[k] + digits[k]);
        *slot = a[row] * b[col];
    }
    psi
}

/// A pure state drawn from the given class.
pub fn sample_separable<R: Rng + ?Sized>(class: &SeparableClass, local_dims: &[usize], rng: &mut R) -> Vec<C64> {
    match class {
        SeparableClass::FullyProduct => random_product_state(local_dims, rng),
        SeparableClass::ProductAcross(cuts) => {
            let cut = &cuts[rng.random_range(0..cuts.len())];
            random_cut_product_state(local_dims, cut, rng)
        }
    }
}
