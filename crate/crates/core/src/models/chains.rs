//! Spin-chain Hamiltonians.

use serde::{Deserialize, Serialize};

use super::pauli::PauliSum;
use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;

/// `H = -sum_<ij> (jx XX + jy YY + jz ZZ) + b sum_i Z`.
///
/// Positive couplings are ferromagnetic; `J = -1` is the antiferromagnet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergParams {
    pub n: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub b: f64,
    pub periodic: bool,
}

impl HeisenbergParams {
    /// Isotropic XXX ring.
    pub fn xxx(n: usize, j: f64, b: f64) -> Self {
        Self { n, jx: j, jy: j, jz: j, b, periodic: true }
    }

    /// XXZ ring with `jz` fixed and `jx = jy = jz + delta_j`.
    pub fn xxz(n: usize, jz: f64, delta_j: f64, b: f64) -> Self {
        Self { n, jx: jz + delta_j, jy: jz + delta_j, jz, b, periodic: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("chain needs n >= 2, got {}", self.n)));
        }
        if self.n > 63 {
            return Err(Error::InvalidParameter(format!("chain length {} too large", self.n)));
        }
        Ok(())
    }
}

/// Nearest-neighbour bonds; a periodic ring adds `(n-1, 0)`, so the `n = 2`
/// ring counts its single bond twice.
pub fn bonds(n: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if periodic {
        out.push((n - 1, 0));
    }
    out
}

pub fn heisenberg_pauli(p: &HeisenbergParams) -> Result<PauliSum> {
    p.validate()?;
    let mut h = PauliSum::new(p.n);
    for (i, j) in bonds(p.n, p.periodic) {
        h.add(-p.jx, &[(i, 'x'), (j, 'x')]);
        h.add(-p.jy, &[(i, 'y'), (j, 'y')]);
        h.add(-p.jz, &[(i, 'z'), (j, 'z')]);
    }
    for i in 0..p.n {
        h.add(p.b, &[(i, 'z')]);
    }
    Ok(h)
}

pub fn heisenberg_chain(p: &HeisenbergParams) -> Result<HermitianOperator> {
    heisenberg_pauli(p)?.to_dense()
}

/// `H = -sum_i ((1+r)/2 XX + (1-r)/2 YY + h Z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XYParams {
    pub n: usize,
    pub r: f64,
    pub h: f64,
    #[serde(default = "default_true")]
    pub periodic: bool,
}

fn default_true() -> bool {
    true
}

impl XYParams {
    pub fn ring(n: usize, r: f64, h: f64) -> Self {
        Self { n, r, h, periodic: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.r) {
            return Err(Error::InvalidParameter(format!("anisotropy r = {} not in [0, 1]", self.r)));
        }
        if self.n < 2 || self.n > 63 {
            return Err(Error::InvalidParameter(format!("chain length {} out of range", self.n)));
        }
        Ok(())
    }
}

pub fn xy_pauli(p: &XYParams) -> Result<PauliSum> {
    p.validate()?;
    let mut h = PauliSum::new(p.n);
    for (i, j) in bonds(p.n, p.periodic) {
        h.add(-(1.0 + p.r) / 2.0, &[(i, 'x'), (j, 'x')]);
        h.add(-(1.0 - p.r) / 2.0, &[(i, 'y'), (j, 'y')]);
    }
    for i in 0..p.n {
        h.add(-p.h, &[(i, 'z')]);
    }
    Ok(h)
}

pub fn xy_chain(p: &XYParams) -> Result<HermitianOperator> {
    xy_pauli(p)?.to_dense()
}

/// Total `sum_i Z_i` as a diagonal.
pub fn total_z_diag(n: usize) -> Vec<f64> {
    (0..1u64 << n).map(|s| n as f64 - 2.0 * s.count_ones() as f64).collect()
}
