use super::{SeparableClass, Witness};
use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, C64};
use crate::models::pauli::{check_dense_size, to_matrix, SparseOperator};
use crate::models::states::binomial;

/// Linear Dicke witness `W^n_m`, summed over unordered pairs of `m`-subsets
/// that share `m - 1` sites:
///
/// `1/2 sum (-|d_b><d_a| - |d_a><d_b| + |d_{a∩b}><d_{a∩b}| + |d_{a∪b}><d_{a∪b}|)`.
///
/// On the `m`-excitation sector this is minus one half of the Johnson-graph
/// adjacency matrix. Every `(m-1)`-subset is the intersection of
/// `C(n-m+1, 2)` pairs and every `(m+1)`-subset the union of `C(m+1, 2)`
/// pairs, so the neighbouring sectors carry multiples of the identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DickeWitness {
    n: usize,
    m: usize,
}

impl DickeWitness {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m == 0 || m >= n || n > 63 {
            return Err(Error::InvalidParameter(format!("Dicke witness needs 1 <= m <= n-1, got n={n}, m={m}")));
        }
        Ok(Self { n, m })
    }

    pub fn excitations(&self) -> usize {
        self.m
    }

    pub fn lower_weight(&self) -> f64 {
        0.5 * binomial(self.n - self.m + 1, 2)
    }

    pub fn upper_weight(&self) -> f64 {
        0.5 * binomial(self.m + 1, 2)
    }

    /// `<D^n_m| W |D^n_m> = -m (n - m) / 2`.
    pub fn dicke_expectation(&self) -> f64 {
        -0.5 * (self.m * (self.n - self.m)) as f64
    }
}

impl SparseOperator for DickeWitness {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn column(&self, s: u64) -> Vec<(u64, C64)> {
        let k = s.count_ones() as usize;
        if k + 1 == self.m {
            return vec![(s, C64::new(self.lower_weight(), 0.0))];
        }
        if k == self.m + 1 {
            return vec![(s, C64::new(self.upper_weight(), 0.0))];
        }
        if k != self.m {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(k * (self.n - k));
        for i in 0..self.n {
            let bi = 1u64 << i;
            if s & bi == 0 {
                continue;
            }
            for j in 0..self.n {
                let bj = 1u64 << j;
                if s & bj == 0 {
                    out.push((s ^ bi ^ bj, C64::new(-0.5, 0.0)));
                }
            }
        }
        out
    }
}

/// Dense Dicke witness. Its expectation is nonnegative on fully product
/// states: for those `|rho_ab| = sqrt(rho_{a∩b} rho_{a∪b})` for every pair.
pub fn dicke_witness(n: usize, m: usize) -> Result<Witness> {
    let w = DickeWitness::new(n, m)?;
    check_dense_size(n)?;
    let op = HermitianOperator::qubits(to_matrix(&w)?, n)?;
    Ok(Witness::new(op, format!("dicke_n{n}_m{m}"), SeparableClass::FullyProduct)
        .with_target(format!("Dicke state with {m} of {n} excitations")))
}

/// Open interval of fields `B` for which `|D^n_m>` is the XXZ ground state:
/// `-(n-2m+1)/(n-1) dJ < B < -(n-2m-1)/(n-1) dJ`.
pub fn dicke_field_range(n: usize, m: usize, delta_j: f64) -> Result<(f64, f64)> {
    if n < 2 || m > n || delta_j <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "field range needs n >= 2, m <= n, dJ > 0 (got n={n}, m={m}, dJ={delta_j})"
        )));
    }
    let (n, m) = (n as f64, m as f64);
    Ok((-(n - 2.0 * m + 1.0) / (n - 1.0) * delta_j, -(n - 2.0 * m - 1.0) / (n - 1.0) * delta_j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::models::states::dicke_state;

    fn brute_force(n: usize, m: usize) -> Matrix {
        // Literal sum over unordered pairs of m-subsets meeting in m-1 sites.
        let d = 1usize << n;
        let subsets: Vec<usize> = (0..d).filter(|s| s.count_ones() as usize == m).collect();
        let mut w = Matrix::zeros(d, d);
        for (ia, &a) in subsets.iter().enumerate() {
            for &b in &subsets[ia + 1..] {
                if (a & b).count_ones() as usize != m - 1 {
                    continue;
                }
                let (i, u) = (a & b, a | b);
                w[(b, a)] -= C64::new(0.5, 0.0);
                w[(a, b)] -= C64::new(0.5, 0.0);
                w[(i, i)] += C64::new(0.5, 0.0);
                w[(u, u)] += C64::new(0.5, 0.0);
            }
        }
        w
    }

    #[test]
    fn sparse_action_matches_literal_sum() {
        for (n, m) in [(3, 1), (4, 2), (5, 2), (6, 3)] {
            let w = dicke_witness(n, m).unwrap();
            assert!(w.operator.matrix().sub(&brute_force(n, m)).max_abs() < 1e-14, "n={n} m={m}");
        }
    }

    #[test]
    fn dicke_expectations() {
        let w = dicke_witness(4, 2).unwrap();
        let psi = dicke_state(4, 2).unwrap();
        assert!((w.operator.expectation(&psi) + 2.0).abs() < 1e-13);
        let w = dicke_witness(11, 5).unwrap();
        let psi = dicke_state(11, 5).unwrap();
        let v = w.operator.expectation(&psi);
        assert!(v < 0.0 && (v - DickeWitness::new(11, 5).unwrap().dicke_expectation()).abs() < 1e-9);
    }

    #[test]
    fn sector_structure() {
        let w = dicke_witness(5, 2).unwrap();
        let m = w.operator.matrix();
        for i in 0..32usize {
            for j in 0..32usize {
                if m[(i, j)].norm() > 0.0 {
                    let (ki, kj) = (i.count_ones() as i32, j.count_ones() as i32);
                    assert!((ki - kj).abs() <= 1);
                    assert!((ki - 2).abs() <= 1);
                }
            }
        }
    }

    #[test]
    fn field_ranges() {
        assert_eq!(dicke_field_range(11, 5, 10.0).unwrap(), (-2.0, 0.0));
        assert_eq!(dicke_field_range(13, 6, 12.0).unwrap(), (-2.0, 0.0));
        assert_eq!(dicke_field_range(4, 2, 3.0).unwrap(), (-1.0, 1.0));
        assert!(dicke_field_range(4, 2, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_excitation() {
        assert!(DickeWitness::new(4, 0).is_err());
        assert!(DickeWitness::new(4, 4).is_err());
    }
}
