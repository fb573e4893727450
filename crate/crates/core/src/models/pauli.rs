//! Sparse sums of Pauli strings on qubits.

use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, Matrix, C64};

/// Default dense memory guard in qubits, overridable through
/// `PROXYGAP_MAX_QUBITS`.
pub const DEFAULT_MAX_QUBITS: usize = 14;

pub fn max_qubits() -> usize {
    std::env::var("PROXYGAP_MAX_QUBITS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

pub(crate) fn check_dense_size(n: usize) -> Result<()> {
    let cap = max_qubits();
    if n > cap {
        return Err(Error::TooLarge { qubits: n, cap });
    }
    Ok(())
}

/// Bit of site `k` in an `n`-qubit basis index. Site 0 is the most
/// significant bit, consistent with `kron` ordering.
#[inline]
pub fn site_bit(n: usize, k: usize) -> u64 {
    1u64 << (n - 1 - k)
}

/// `coeff * P_1 ⊗ ... ⊗ P_n`, encoded by an X mask and a Z mask. Sites with
/// both bits set carry a Y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub x: u64,
    pub z: u64,
}

impl PauliTerm {
    /// Image of the basis state `s`: `P|s> = amp |s ^ x>`.
    #[inline]
    pub fn apply(&self, s: u64) -> (u64, C64) {
        // Y = i X Z on every site in x & z.
        let ny = (self.x & self.z).count_ones();
        let sign = if (s & self.z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let c = self.coeff * sign;
        let amp = match ny % 4 {
            0 => C64::new(c, 0.0),
            1 => C64::new(0.0, c),
            2 => C64::new(-c, 0.0),
            _ => C64::new(0.0, -c),
        };
        (s ^ self.x, amp)
    }
}

/// An operator on `n` qubits given by its action on computational basis
/// states.
pub trait SparseOperator {
    fn num_qubits(&self) -> usize;

    /// Nonzero images `(target, amplitude)` of the basis state `s`.
    fn column(&self, s: u64) -> Vec<(u64, C64)>;
}

/// Dense matrix of a sparse operator.
pub fn to_matrix<O: SparseOperator + ?Sized>(op: &O) -> Result<Matrix> {
    let n = op.num_qubits();
    check_dense_size(n)?;
    let d = 1usize << n;
    let mut m = Matrix::zeros(d, d);
    for s in 0..d as u64 {
        for (t, amp) in op.column(s) {
            m[(t as usize, s as usize)] += amp;
        }
    }
    Ok(m)
}

/// Matrix restricted to the span of the given basis states, which must be
/// sorted. Images outside the span are dropped.
pub fn restrict<O: SparseOperator + ?Sized>(op: &O, basis: &[u64]) -> Matrix {
    let d = basis.len();
    let mut m = Matrix::zeros(d, d);
    for (j, &s) in basis.iter().enumerate() {
        for (t, amp) in op.column(s) {
            if let Ok(i) = basis.binary_search(&t) {
                m[(i, j)] += amp;
            }
        }
    }
    m
}

/// Whether the operator maps each magnetization sector into itself.
pub fn conserves_magnetization<O: SparseOperator + ?Sized>(op: &O) -> bool {
    let n = op.num_qubits();
    if n > 24 {
        return false;
    }
    (0..1u64 << n).all(|s| {
        let k = s.count_ones();
        op.column(s).iter().all(|(t, _)| t.count_ones() == k)
    })
}

/// Hermitian operator as a real combination of Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn new(n: usize) -> Self {
        assert!((1..=63).contains(&n), "qubit count out of range");
        Self { n, terms: Vec::new() }
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Adds `coeff` times the product of the given single-site Paulis, each
    /// given as `(site, 'x' | 'y' | 'z')`.
    pub fn add(&mut self, coeff: f64, ops: &[(usize, char)]) -> &mut Self {
        let (mut x, mut z) = (0u64, 0u64);
        for &(site, p) in ops {
            assert!(site < self.n, "site {site} out of range");
            let b = site_bit(self.n, site);
            assert!((x | z) & b == 0, "site {site} repeated in Pauli string");
            match p {
                'x' | 'X' => x |= b,
                'y' | 'Y' => {
                    x |= b;
                    z |= b;
                }
                'z' | 'Z' => z |= b,
                _ => panic!("unknown Pauli '{p}'"),
            }
        }
        if coeff != 0.0 {
            self.terms.push(PauliTerm { coeff, x, z });
        }
        self
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        to_matrix(self)
    }

    pub fn to_dense(&self) -> Result<HermitianOperator> {
        HermitianOperator::qubits(self.to_matrix()?, self.n)
    }

    pub fn conserves_magnetization(&self) -> bool {
        conserves_magnetization(self)
    }
}

impl SparseOperator for PauliSum {
    fn num_qubits(&self) -> usize {
        self.n
    }

    /// Terms that share a target are merged.
    fn column(&self, s: u64) -> Vec<(u64, C64)> {
        let mut out: Vec<(u64, C64)> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let (target, amp) = t.apply(s);
            match out.iter_mut().find(|(u, _)| *u == target) {
                Some(slot) => slot.1 += amp,
                None => out.push((target, amp)),
            }
        }
        out.retain(|(_, a)| a.norm() > 1e-14);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli};

    fn single(m: Matrix) -> HermitianOperator {
        HermitianOperator::single(m).unwrap()
    }

    #[test]
    fn strings_match_kron() {
        let mut p = PauliSum::new(2);
        p.add(1.0, &[(0, 'x'), (1, 'y')]);
        let dense = p.to_matrix().unwrap();
        let expect = kron(&single(pauli::x()), &single(pauli::y()));
        assert!(dense.sub(expect.matrix()).max_abs() < 1e-15);

        let mut q = PauliSum::new(2);
        q.add(0.5, &[(0, 'y'), (1, 'z')]);
        let expect = kron(&single(pauli::y()), &single(pauli::z())).scale(0.5);
        assert!(q.to_matrix().unwrap().sub(expect.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn xx_plus_yy_conserves() {
        let mut p = PauliSum::new(3);
        p.add(1.0, &[(0, 'x'), (1, 'x')]).add(1.0, &[(0, 'y'), (1, 'y')]);
        assert!(p.conserves_magnetization());
        p.add(0.1, &[(2, 'x')]);
        assert!(!p.conserves_magnetization());
    }

    #[test]
    fn memory_guard() {
        let p = PauliSum::new(40);
        assert!(matches!(p.to_matrix(), Err(Error::TooLarge { .. })));
    }
}
