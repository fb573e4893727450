//! Heuristic bounds over fully product states for small systems, used to
//! sandwich the dual certificates. None of these certify entanglement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::matrix::{vec_dot, vec_norm};
use crate::linalg::{eigh, eigvalsh, HermitianOperator, Matrix, C64};
use crate::witness::sampling::{haar_vector, product_state};

/// Largest number of subsystems for the product-state searches.
pub const PRODUCT_SEARCH_CAP: usize = 6;
/// Largest number of subsystems for the separable entropy search.
pub const ENTROPY_SEARCH_CAP: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct ProductStateSample {
    /// Local unit vectors, subsystem 0 first.
    #[serde(skip)]
    pub factors: Vec<Vec<C64>>,
    /// Bloch angles `(theta, phi)` per site for qubit factors.
    pub angles: Vec<(f64, f64)>,
    #[serde(skip)]
    pub vector: Vec<C64>,
}

impl ProductStateSample {
    pub fn new(factors: Vec<Vec<C64>>) -> Self {
        let angles = factors
            .iter()
            .map(|f| {
                if f.len() != 2 {
                    return (f64::NAN, f64::NAN);
                }
                let theta = 2.0 * f[1].norm().atan2(f[0].norm());
                let phi = if f[0].norm() > 0.0 && f[1].norm() > 0.0 { (f[1] / f[0]).arg() } else { 0.0 };
                (theta, phi)
            })
            .collect();
        let vector = product_state(&factors);
        Self { factors, angles, vector }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductMinimum {
    /// Upper bound on the minimal energy over separable states.
    pub energy: f64,
    pub best: ProductStateSample,
}

fn check_size(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::TooLarge { qubits: n, cap });
    }
    Ok(())
}

fn random_factors(local_dims: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<C64>> {
    local_dims.iter().map(|&d| haar_vector(d, rng)).collect()
}

/// Product states `|phi_1 .. e_a .. phi_n>` for each basis vector `e_a` of
/// site `k`.
fn site_frame(factors: &[Vec<C64>], k: usize) -> Vec<Vec<C64>> {
    let d = factors[k].len();
    (0..d)
        .map(|a| {
            let mut f = factors.to_vec();
            f[k] = vec![C64::new(0.0, 0.0); d];
            f[k][a] = C64::new(1.0, 0.0);
            product_state(&f)
        })
        .collect()
}

/// Coordinate descent from one start: each site is replaced by the ground
/// state of its effective local Hamiltonian.
fn descend(h: &Matrix, mut factors: Vec<Vec<C64>>) -> Result<(f64, Vec<Vec<C64>>)> {
    let mut energy = f64::INFINITY;
    for _ in 0..1000 {
        let mut e = energy;
        for k in 0..factors.len() {
            let frame = site_frame(&factors, k);
            let images: Vec<Vec<C64>> = frame.iter().map(|v| h.matvec(v)).collect();
            let d = frame.len();
            let mut local = Matrix::from_fn(d, d, |a, b| vec_dot(&frame[a], &images[b]));
            local.symmetrize();
            let s = eigh(&local)?;
            factors[k] = s.eigenvector(0);
            e = s.eigenvalues[0];
        }
        let done = energy - e <= 1e-13 * e.abs().max(1.0);
        energy = e;
        if done {
            break;
        }
    }
    Ok((energy, factors))
}

/// Smallest energy found over product states from `restarts` seeded random
/// starts.
pub fn min_energy_product(h: &HermitianOperator, restarts: usize, seed: u64) -> Result<ProductMinimum> {
    check_size(h.num_subsystems(), PRODUCT_SEARCH_CAP)?;
    let runs: Vec<(f64, Vec<Vec<C64>>)> = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r));
            descend(h.matrix(), random_factors(h.local_dims(), &mut rng))
        })
        .collect::<Result<_>>()?;
    let (energy, factors) = runs.into_iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("at least one restart");
    Ok(ProductMinimum { energy, best: ProductStateSample::new(factors) })
}

/// Largest squared overlap of `psi` with a fully product state found by
/// alternating site updates. Always at least `1 / d`.
pub fn alpha_product_bruteforce(psi: &[C64], local_dims: &[usize], restarts: usize, seed: u64) -> Result<f64> {
    check_size(local_dims.len(), PRODUCT_SEARCH_CAP)?;
    let dim: usize = local_dims.iter().product();
    if psi.len() != dim {
        return Err(Error::Dimension(format!("state has length {}, subsystems give {dim}", psi.len())));
    }
    let norm = vec_norm(psi);
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("zero state".into()));
    }
    let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
    let climb = |mut factors: Vec<Vec<C64>>| -> f64 {
        let mut best = 0.0;
        for _ in 0..1000 {
            let mut val = 0.0;
            for k in 0..factors.len() {
                // The optimal site vector is the conditional amplitude.
                let frame = site_frame(&factors, k);
                let mut c: Vec<C64> = frame.iter().map(|v| vec_dot(v, &psi)).collect();
                let cn = vec_norm(&c);
                if cn > 0.0 {
                    c.iter_mut().for_each(|z| *z /= cn);
                    factors[k] = c;
                }
                val = cn * cn;
            }
            let done = val - best <= 1e-15;
            best = f64::max(best, val);
            if done {
                break;
            }
        }
        best
    };
    // Start from the largest basis amplitude, which guarantees the floor.
    let top = (0..dim).max_by(|&a, &b| psi[a].norm().total_cmp(&psi[b].norm())).expect("nonempty");
    let mut digits = Vec::with_capacity(local_dims.len());
    let mut rem = top;
    for &d in local_dims.iter().rev() {
        digits.push(rem % d);
        rem /= d;
    }
    digits.reverse();
    let basis_start: Vec<Vec<C64>> = local_dims
        .iter()
        .zip(&digits)
        .map(|(&d, &a)| (0..d).map(|i| C64::new(if i == a { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    let from_basis = climb(basis_start);
    let from_random = (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r));
            climb(random_factors(local_dims, &mut rng))
        })
        .reduce(|| 0.0, f64::max);
    Ok(from_basis.max(from_random).min(1.0))
}

fn entropy_of(rho: &Matrix) -> Result<f64> {
    Ok(eigvalsh(rho)?.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum())
}

/// Euclidean projection onto `{p >= 0, sum p = 1, sum p e = E}`:
/// `p = (q - a - b e)_+` with the two multipliers found by nested bisection.
fn project_slice(q: &[f64], e: &[f64], energy: f64) -> Vec<f64> {
    let weights = |a: f64, b: f64| -> Vec<f64> { q.iter().zip(e).map(|(qi, ei)| (qi - a - b * ei).max(0.0)).collect() };
    let offset_for = |b: f64| -> f64 {
        // Total mass decreases in `a`.
        let vals: Vec<f64> = q.iter().zip(e).map(|(qi, ei)| qi - b * ei).collect();
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut lo_a, mut hi_a) = (hi - 1.0, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo_a + hi_a);
            let mass: f64 = vals.iter().map(|v| (v - mid).max(0.0)).sum();
            if mass > 1.0 {
                lo_a = mid;
            } else {
                hi_a = mid;
            }
        }
        0.5 * (lo_a + hi_a)
    };
    let mean_energy = |b: f64| -> f64 {
        let p = weights(offset_for(b), b);
        p.iter().zip(e).map(|(pi, ei)| pi * ei).sum::<f64>() / p.iter().sum::<f64>()
    };
    // The mean energy decreases in `b`.
    let spread = e.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let mut lo_b = -1.0 / spread;
    let mut hi_b = 1.0 / spread;
    while mean_energy(lo_b) < energy && lo_b > -1e12 {
        lo_b *= 2.0;
    }
    while mean_energy(hi_b) > energy && hi_b < 1e12 {
        hi_b *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo_b + hi_b);
        if mean_energy(mid) > energy {
            lo_b = mid;
        } else {
            hi_b = mid;
        }
    }
    let b = 0.5 * (lo_b + hi_b);
    let mut p = weights(offset_for(b), b);
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

fn mixture(states: &[Vec<C64>], p: &[f64]) -> Matrix {
    let d = states[0].len();
    let mut rho = Matrix::zeros(d, d);
    for (v, &w) in states.iter().zip(p) {
        if w > 0.0 {
            rho.axpy(w, &Matrix::outer(v, v));
        }
    }
    rho.symmetrize();
    rho
}

/// Lower bound on the maximal entropy of a separable state with mean energy
/// `energy`: the best mixture of a dictionary of product states containing
/// the product basis, locally optimized extremal states and random states.
pub fn max_entropy_separable_lower(h: &HermitianOperator, energy: f64, ensemble_size: usize, seed: u64) -> Result<f64> {
    check_size(h.num_subsystems(), ENTROPY_SEARCH_CAP)?;
    let dims = h.local_dims().to_vec();
    let dim = h.dim();
    let mut dict: Vec<Vec<C64>> = (0..dim)
        .map(|s| (0..dim).map(|i| C64::new(if i == s { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    let neg = h.scale(-1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extremal = ensemble_size.max(2) / 2;
    for r in 0..extremal {
        let target = if r % 2 == 0 { h } else { &neg };
        let (_, f) = descend(target.matrix(), random_factors(&dims, &mut rng))?;
        dict.push(product_state(&f));
    }
    while dict.len() < dim + ensemble_size {
        dict.push(product_state(&random_factors(&dims, &mut rng)));
    }
    let e: Vec<f64> = dict.iter().map(|v| h.expectation(v)).collect();
    let (lo, hi) = e.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if energy < lo || energy > hi {
        return Err(Error::DictionaryInfeasible { energy, lo, hi });
    }

    let mut p = project_slice(&vec![1.0 / dict.len() as f64; dict.len()], &e, energy);
    let mut rho = mixture(&dict, &p);
    let mut s = entropy_of(&rho)?;
    let mut step = 1.0;
    for _ in 0..500 {
        // dS/dp_k = -<phi_k| ln rho + 1 |phi_k>.
        let log_rho = eigh(&rho)?.apply(|l| l.max(1e-300).ln());
        let grad: Vec<f64> = dict.iter().map(|v| -log_rho.sandwich(v, v).re - 1.0).collect();
        let mut improved = false;
        for _ in 0..40 {
            let q: Vec<f64> = p.iter().zip(&grad).map(|(pi, g)| pi + step * g).collect();
            let pn = project_slice(&q, &e, energy);
            let rn = mixture(&dict, &pn);
            let sn = entropy_of(&rn)?;
            if sn > s + 1e-15 {
                p = pn;
                rho = rn;
                s = sn;
                step *= 2.0;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli};
    use crate::models::chains::{heisenberg_chain, HeisenbergParams};
    use crate::models::states::dicke_state;
    use crate::witness::max_schmidt_overlap;

    fn bond() -> HermitianOperator {
        let p = |m: Matrix| HermitianOperator::single(m).unwrap();
        let xx = kron(&p(pauli::x()), &p(pauli::x()));
        let yy = kron(&p(pauli::y()), &p(pauli::y()));
        let zz = kron(&p(pauli::z()), &p(pauli::z()));
        xx.add(&yy).unwrap().add(&zz).unwrap()
    }

    #[test]
    fn antiferromagnetic_bond() {
        let r = min_energy_product(&bond(), 20, 1).unwrap();
        assert!((r.energy + 1.0).abs() < 1e-9);
        let s = max_entropy_separable_lower(&bond(), -1.0, 40, 2).unwrap();
        assert!(s > 0.5, "s = {s}");
    }

    #[test]
    fn diagonal_hamiltonian_reaches_ground() {
        let h = HermitianOperator::new(Matrix::from_diag(&[3.0, -1.0, 0.5, 2.0]), vec![2, 2]).unwrap();
        let r = min_energy_product(&h, 10, 3).unwrap();
        assert!((r.energy + 1.0).abs() < 1e-10);
    }

    #[test]
    fn three_site_ring_above_ppt_minimum() {
        let h = heisenberg_chain(&HeisenbergParams::xxx(3, -1.0, 0.0)).unwrap();
        let r = min_energy_product(&h, 50, 4).unwrap();
        assert!(r.energy / 3.0 >= -0.6 - 1e-9);
    }

    #[test]
    fn overlaps() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = vec![C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(0.0, 0.0)];
        let a = alpha_product_bruteforce(&singlet, &[2, 2], 20, 5).unwrap();
        let cut = crate::linalg::Bipartition::new(vec![0], 2).unwrap();
        assert!((a - max_schmidt_overlap(&singlet, &[2, 2], &cut).unwrap()).abs() < 1e-8);
        assert!((a - 0.5).abs() < 1e-8);
        let d = dicke_state(4, 2).unwrap();
        let a = alpha_product_bruteforce(&d, &[2; 4], 50, 6).unwrap();
        assert!((a - 0.375).abs() < 1e-6, "alpha = {a}");
        let prod = product_state(&[vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]]);
        assert!((alpha_product_bruteforce(&prod, &[2, 2], 5, 7).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_hamiltonian_is_maximally_mixed() {
        let h = HermitianOperator::zeros(vec![2, 2]);
        let s = max_entropy_separable_lower(&h, 0.0, 10, 8).unwrap();
        assert!((s - 4f64.ln()).abs() < 1e-6, "s = {s}");
    }
}
