//! Special states and the Bell-staircase Hamiltonian.

use super::pauli::{check_dense_size, site_bit};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SpectralDecomposition, C64};

/// Binomial coefficient as a float, exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Basis indices with exactly `k` excitations, ascending.
pub fn sector_basis(n: usize, k: usize) -> Vec<u64> {
    (0..1u64 << n).filter(|s| s.count_ones() as usize == k).collect()
}

/// Uniform superposition of all basis states with `m` excitations.
pub fn dicke_state(n: usize, m: usize) -> Result<Vec<C64>> {
    if m > n {
        return Err(Error::InvalidParameter(format!("Dicke state needs m <= n, got m={m}, n={n}")));
    }
    check_dense_size(n)?;
    let amp = C64::new(binomial(n, m).sqrt().recip(), 0.0);
    let mut psi = vec![C64::new(0.0, 0.0); 1 << n];
    for s in sector_basis(n, m) {
        psi[s as usize] = amp;
    }
    Ok(psi)
}

/// Computational basis state with the given sites excited.
pub fn basis_state(n: usize, excited: &[usize]) -> Vec<C64> {
    let idx = excited.iter().fold(0u64, |acc, &k| acc | site_bit(n, k));
    let mut psi = vec![C64::new(0.0, 0.0); 1 << n];
    psi[idx as usize] = C64::new(1.0, 0.0);
    psi
}

/// Generalized Bell basis on `C^d ⊗ C^d`:
/// `|Psi_{j d + k}> = d^{-1/2} sum_i w^{ij} |i>|i + k mod d>`.
/// The first `d` vectors (`j = 0`) are the states `|Psi_k>`.
pub fn bell_basis(d: usize) -> Matrix {
    let dd = d * d;
    let mut v = Matrix::zeros(dd, dd);
    let norm = (d as f64).sqrt().recip();
    for j in 0..d {
        for k in 0..d {
            let col = j * d + k;
            for i in 0..d {
                let phase = 2.0 * std::f64::consts::PI * (i * j) as f64 / d as f64;
                v[(i * d + (i + k) % d, col)] = C64::from_polar(norm, phase);
            }
        }
    }
    v
}

/// `H = sum_k k |Psi_k><Psi_k|` over the generalized Bell basis of `n` qubits
/// split into two halves of `n/2`.
pub fn bell_staircase(n: usize) -> Result<SpectralDecomposition> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidParameter(format!("Bell staircase needs an even qubit count, got {n}")));
    }
    check_dense_size(n)?;
    let d = 1usize << (n / 2);
    Ok(SpectralDecomposition {
        eigenvalues: (0..d * d).map(|k| k as f64).collect(),
        eigenvectors: bell_basis(d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{vec_dot, vec_norm};

    #[test]
    fn dicke_small_cases() {
        let d10 = dicke_state(1, 0).unwrap();
        assert_eq!(d10, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let d21 = dicke_state(2, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d21[1].re - s).abs() < 1e-15 && (d21[2].re - s).abs() < 1e-15);
        assert_eq!(d21[0], C64::new(0.0, 0.0));
        assert!((vec_norm(&dicke_state(11, 5).unwrap()) - 1.0).abs() < 1e-12);
        assert!(dicke_state(3, 4).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(13, 6), 1716.0);
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(3, 5), 0.0);
    }

    #[test]
    fn bell_staircase_two_qubits() {
        let s = bell_staircase(2).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 2.0, 3.0]);
        let psi0 = s.eigenvector(0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((psi0[0].re - r).abs() < 1e-15 && (psi0[3].re - r).abs() < 1e-15);
        assert!(vec_dot(&psi0, &s.eigenvector(1)).norm() < 1e-15);
        assert!(bell_staircase(3).is_err());
    }

    #[test]
    fn bell_basis_is_unitary() {
        let v = bell_basis(4);
        let gram = v.adjoint().matmul(&v);
        assert!(gram.sub(&Matrix::identity(16)).max_abs() < 1e-13);
    }
}
