//! Block structure from conservation of the total magnetization and, for
//! translation-invariant rings, of the lattice momentum.

use std::f64::consts::PI;

use super::pauli::{restrict, SparseOperator};
use super::states::sector_basis;
use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, HermitianOperator, Matrix, C64};

/// Block of an operator on one excitation-number sector.
#[derive(Clone, Debug)]
pub struct Sector {
    /// Number of excited sites `k`; the total `sum Z` equals `n - 2k`.
    pub excitations: usize,
    pub indices: Vec<usize>,
    pub block: Matrix,
}

impl Sector {
    pub fn magnetization(&self, n: usize) -> i64 {
        n as i64 - 2 * self.excitations as i64
    }
}

#[derive(Clone, Debug)]
pub struct SectorBlocks {
    pub n: usize,
    pub sectors: Vec<Sector>,
}

impl SectorBlocks {
    pub fn sizes(&self) -> Vec<usize> {
        self.sectors.iter().map(|s| s.indices.len()).collect()
    }

    /// Eigenvalues of all blocks, merged and sorted.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut all = Vec::new();
        for s in &self.sectors {
            all.extend(eigvalsh(&s.block)?);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    /// Dense matrix assembled from the blocks.
    pub fn reassemble(&self) -> Matrix {
        let d = 1usize << self.n;
        let mut m = Matrix::zeros(d, d);
        for s in &self.sectors {
            for (a, &i) in s.indices.iter().enumerate() {
                for (b, &j) in s.indices.iter().enumerate() {
                    m[(i, j)] = s.block[(a, b)];
                }
            }
        }
        m
    }
}

fn qubit_count(h: &HermitianOperator) -> Result<usize> {
    if h.local_dims().iter().any(|&d| d != 2) {
        return Err(Error::Dimension("sector split needs a qubit operator".into()));
    }
    Ok(h.num_subsystems())
}

/// Splits a dense qubit operator into excitation-number blocks after
/// checking that it commutes with `sum Z`.
pub fn sector_split(h: &HermitianOperator) -> Result<SectorBlocks> {
    let n = qubit_count(h)?;
    let m = h.matrix();
    let d = h.dim();
    let mut defect: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if (i as u64).count_ones() != (j as u64).count_ones() {
                defect = defect.max(m[(i, j)].norm());
            }
        }
    }
    if defect > 1e-10 {
        return Err(Error::NotConserving { defect });
    }
    let sectors = (0..=n)
        .map(|k| {
            let indices: Vec<usize> = sector_basis(n, k).into_iter().map(|s| s as usize).collect();
            let block = Matrix::from_fn(indices.len(), indices.len(), |a, b| m[(indices[a], indices[b])]);
            Sector { excitations: k, indices, block }
        })
        .collect();
    Ok(SectorBlocks { n, sectors })
}

/// Excitation-number blocks built directly from a sparse operator.
pub fn magnetization_blocks<O: SparseOperator + ?Sized>(op: &O) -> Result<SectorBlocks> {
    let n = op.num_qubits();
    if n > 24 {
        return Err(Error::TooLarge { qubits: n, cap: 24 });
    }
    if !super::pauli::conserves_magnetization(op) {
        return Err(Error::NotConserving { defect: f64::NAN });
    }
    let sectors = (0..=n)
        .map(|k| {
            let basis = sector_basis(n, k);
            let block = restrict(op, &basis);
            Sector {
                excitations: k,
                indices: basis.into_iter().map(|s| s as usize).collect(),
                block,
            }
        })
        .collect();
    Ok(SectorBlocks { n, sectors })
}

/// Cyclic shift of all sites by one position.
#[inline]
pub fn translate(n: usize, s: u64) -> u64 {
    (s >> 1) | ((s & 1) << (n - 1))
}

/// Smallest translate of `s` and the shift `l` with `T^l(rep) = s`.
fn representative(n: usize, s: u64) -> (u64, usize) {
    let mut best = s;
    let mut best_a = 0;
    let mut t = s;
    for a in 1..n {
        t = translate(n, t);
        if t < best {
            best = t;
            best_a = a;
        }
    }
    (best, (n - best_a) % n)
}

/// Momentum eigenbasis of a translation-closed set of basis states of an
/// `n`-site ring: `|r, q> = p_r^{-1/2} sum_{l < p_r} e^{-i q l} T^l |r>`
/// with `q = 2 pi j / n`.
#[derive(Clone, Debug)]
pub struct MomentumSector {
    pub n: usize,
    pub momentum: usize,
    pub reps: Vec<u64>,
    pub periods: Vec<usize>,
}

impl MomentumSector {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn q(&self) -> f64 {
        2.0 * PI * self.momentum as f64 / self.n as f64
    }

    /// All momentum sectors of the `k`-excitation sector.
    pub fn all(n: usize, k: usize) -> Vec<Self> {
        Self::from_states(n, &sector_basis(n, k))
    }

    /// All momentum sectors of the basis states with `popcount % 2 == parity`.
    pub fn parity(n: usize, parity: u32) -> Vec<Self> {
        let states: Vec<u64> = (0..1u64 << n).filter(|s| s.count_ones() % 2 == parity).collect();
        Self::from_states(n, &states)
    }

    /// All momentum sectors of a set of basis states closed under
    /// translation.
    pub fn from_states(n: usize, states: &[u64]) -> Vec<Self> {
        let mut sorted = states.to_vec();
        sorted.sort_unstable();
        let mut reps: Vec<(u64, usize)> = Vec::new();
        for &s in &sorted {
            let (r, _) = representative(n, s);
            if r == s {
                let mut t = translate(n, s);
                let mut p = 1;
                while t != s {
                    t = translate(n, t);
                    p += 1;
                }
                reps.push((s, p));
            }
        }
        (0..n)
            .map(|j| {
                let (r, p): (Vec<u64>, Vec<usize>) =
                    reps.iter().filter(|&&(_, p)| (j * p) % n == 0).copied().unzip();
                MomentumSector { n, momentum: j, reps: r, periods: p }
            })
            .collect()
    }

    /// Matrix of a translation-invariant operator in this basis.
    pub fn block<O: SparseOperator + ?Sized>(&self, op: &O) -> Matrix {
        let d = self.dim();
        let q = self.q();
        let mut m = Matrix::zeros(d, d);
        for (b, (&r, &pr)) in self.reps.iter().zip(&self.periods).enumerate() {
            for (s, amp) in op.column(r) {
                let (rep, l) = representative(self.n, s);
                if let Ok(a) = self.reps.binary_search(&rep) {
                    let ratio = (pr as f64 / self.periods[a] as f64).sqrt();
                    m[(a, b)] += amp * C64::from_polar(ratio, q * l as f64);
                }
            }
        }
        m.symmetrize();
        m
    }

    /// Expands a vector given in this basis into the full `2^n` space.
    pub fn expand(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut psi = vec![C64::new(0.0, 0.0); 1 << self.n];
        let q = self.q();
        for ((&r, &p), &c) in self.reps.iter().zip(&self.periods).zip(coeffs) {
            let norm = (p as f64).sqrt().recip();
            let mut t = r;
            for l in 0..p {
                psi[t as usize] += c * C64::from_polar(norm, -q * l as f64);
                t = translate(self.n, t);
            }
        }
        psi
    }
}

/// Checks `T O T^dagger = O` on every basis state.
pub fn is_translation_invariant<O: SparseOperator + ?Sized>(op: &O) -> bool {
    let n = op.num_qubits();
    if n > 24 {
        return false;
    }
    (0..1u64 << n).all(|s| {
        let mut lhs = op.column(translate(n, s));
        let mut rhs: Vec<(u64, C64)> = op.column(s).into_iter().map(|(t, a)| (translate(n, t), a)).collect();
        lhs.sort_by_key(|x| x.0);
        rhs.sort_by_key(|x| x.0);
        lhs.len() == rhs.len()
            && lhs.iter().zip(&rhs).all(|(a, b)| a.0 == b.0 && (a.1 - b.1).norm() < 1e-12)
    })
}

/// Extremal spectrum data of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct EnergyExtremes {
    pub e0: f64,
    pub ground: Vec<C64>,
    /// Number of eigenvalues within `1e-9 * ||H||` of `e0`.
    pub degeneracy: usize,
    pub e_max: f64,
}

pub fn energy_extremes(h: &HermitianOperator) -> Result<EnergyExtremes> {
    let s = h.eig()?;
    let ev = &s.eigenvalues;
    let e0 = ev[0];
    let e_max = *ev.last().expect("nonempty spectrum");
    let scale = e0.abs().max(e_max.abs()).max(1.0);
    let degeneracy = ev.iter().take_while(|&&x| x - e0 <= 1e-9 * scale).count();
    Ok(EnergyExtremes { e0, ground: s.eigenvector(0), degeneracy, e_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::chains::{heisenberg_chain, heisenberg_pauli, HeisenbergParams};
    use crate::models::pauli::PauliSum;

    #[test]
    fn xxx_sector_sizes() {
        let h = heisenberg_chain(&HeisenbergParams::xxx(4, -1.0, 0.0)).unwrap();
        let blocks = sector_split(&h).unwrap();
        assert_eq!(blocks.sizes(), vec![1, 4, 6, 4, 1]);
        assert!(blocks.reassemble().sub(h.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn blocks_reproduce_dense_spectrum() {
        let p = HeisenbergParams::xxz(6, 1.0, 0.7, -0.3);
        let h = heisenberg_chain(&p).unwrap();
        let dense = h.eigenvalues().unwrap();
        let split = sector_split(&h).unwrap().eigenvalues().unwrap();
        let sparse = magnetization_blocks(&heisenberg_pauli(&p).unwrap()).unwrap().eigenvalues().unwrap();
        for ((a, b), c) in dense.iter().zip(&split).zip(&sparse) {
            assert!((a - b).abs() < 1e-9 && (a - c).abs() < 1e-9);
        }
    }

    #[test]
    fn transverse_field_rejected() {
        let mut p = PauliSum::new(3);
        p.add(1.0, &[(0, 'z'), (1, 'z')]).add(0.5, &[(2, 'x')]);
        assert!(matches!(sector_split(&p.to_dense().unwrap()), Err(Error::NotConserving { .. })));
        assert!(magnetization_blocks(&p).is_err());
    }

    #[test]
    fn momentum_blocks_reproduce_sector_spectrum() {
        let p = heisenberg_pauli(&HeisenbergParams::xxz(8, 1.0, 2.0, -0.5)).unwrap();
        assert!(is_translation_invariant(&p));
        for k in [2, 4] {
            let sector = restrict(&p, &sector_basis(8, k));
            let mut expect = eigvalsh(&sector).unwrap();
            let mut got = Vec::new();
            let sectors = MomentumSector::all(8, k);
            assert_eq!(sectors.iter().map(|s| s.dim()).sum::<usize>(), sector.rows());
            for ms in &sectors {
                let b = ms.block(&p);
                assert!(b.hermiticity_defect() < 1e-12);
                got.extend(eigvalsh(&b).unwrap());
            }
            got.sort_by(f64::total_cmp);
            expect.sort_by(f64::total_cmp);
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn momentum_states_are_eigenvectors() {
        let p = heisenberg_pauli(&HeisenbergParams::xxx(6, -1.0, 0.0)).unwrap();
        let dense = p.to_matrix().unwrap();
        for ms in MomentumSector::all(6, 3) {
            if ms.dim() == 0 {
                continue;
            }
            let s = crate::linalg::eigh(&ms.block(&p)).unwrap();
            let psi = ms.expand(&s.eigenvector(0));
            let hpsi = dense.matvec(&psi);
            let resid: f64 = hpsi
                .iter()
                .zip(&psi)
                .map(|(a, b)| (a - b * s.eigenvalues[0]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-10);
        }
    }

    #[test]
    fn extremes() {
        let h = heisenberg_chain(&HeisenbergParams::xxx(4, -1.0, 0.0)).unwrap();
        let x = energy_extremes(&h).unwrap();
        assert!((x.e0 / 4.0 + 2.0).abs() < 1e-9);
        assert_eq!(x.degeneracy, 1);
        let id = HermitianOperator::identity(vec![2, 2]);
        let x = energy_extremes(&id).unwrap();
        assert_eq!((x.e0, x.e_max, x.degeneracy), (1.0, 1.0, 4));
    }
}
