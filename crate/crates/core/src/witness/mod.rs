//! Entanglement witnesses and constraint sets.

mod dicke;
mod overlap;
pub mod sampling;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use dicke::{dicke_field_range, dicke_witness, DickeWitness};
pub use overlap::{bipartite_matrix, max_schmidt_overlap, projector_witness, ProjectorAlpha};

use crate::error::{Error, Result};
use crate::linalg::{Bipartition, HermitianOperator};

/// States on which a witness is guaranteed to have a nonnegative
/// expectation value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeparableClass {
    /// Mixtures of fully product states.
    FullyProduct,
    /// Mixtures of states that are product across any one of the cuts.
    ProductAcross(Vec<Bipartition>),
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub operator: HermitianOperator,
    pub label: String,
    pub detects: String,
    pub class: SeparableClass,
}

impl Witness {
    pub fn new(operator: HermitianOperator, label: impl Into<String>, class: SeparableClass) -> Self {
        Self { operator, label: label.into(), detects: String::new(), class }
    }

    pub fn with_target(mut self, detects: impl Into<String>) -> Self {
        self.detects = detects.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// Writes the operator as CSV rows `row,col,re,im` for every nonzero
    /// entry, preceded by a header and the label.
    pub fn export_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# {}", self.label)?;
        writeln!(out, "row,col,re,im")?;
        let m = self.operator.matrix();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = m[(i, j)];
                if z.re != 0.0 || z.im != 0.0 {
                    writeln!(out, "{i},{j},{:.17e},{:.17e}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}

/// `tr(rho W)`.
pub fn witness_expectation(w: &Witness, rho: &HermitianOperator) -> Result<f64> {
    if rho.dim() != w.dim() {
        return Err(Error::Dimension(format!("state dim {} vs witness dim {}", rho.dim(), w.dim())));
    }
    Ok(rho.inner(&w.operator))
}

/// Witness constraints `tr(rho W_i) >= 0` together with positive-map slots:
/// each cut in `map_slots` requires the partial transpose on its A side to
/// leave the state positive semidefinite.
#[derive(Clone, Debug, Default)]
pub struct ConstraintSet {
    pub witnesses: Vec<Witness>,
    pub map_slots: Vec<Bipartition>,
}

impl ConstraintSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn ppt(cuts: Vec<Bipartition>) -> Self {
        Self { witnesses: Vec::new(), map_slots: cuts }
    }

    pub fn witness(w: Witness) -> Self {
        Self { witnesses: vec![w], map_slots: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.witnesses.is_empty() && self.map_slots.is_empty()
    }

    /// Checks that every constraint fits the given tensor structure.
    pub fn validate_for(&self, local_dims: &[usize]) -> Result<()> {
        let dim: usize = local_dims.iter().product();
        for w in &self.witnesses {
            if w.operator.dim() != dim {
                return Err(Error::Dimension(format!(
                    "witness '{}' has dim {} but the model has dim {dim}",
                    w.label,
                    w.operator.dim()
                )));
            }
        }
        for cut in &self.map_slots {
            cut.validate_for(local_dims)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn expectation_sanity() {
        let w = Witness::new(
            HermitianOperator::single(Matrix::from_diag(&[0.5, -1.0, 2.0])).unwrap(),
            "diag",
            SeparableClass::FullyProduct,
        );
        let mixed = HermitianOperator::identity(vec![3]).scale(1.0 / 3.0);
        assert!((witness_expectation(&w, &mixed).unwrap() - 1.5 / 3.0).abs() < 1e-15);
        let pure = HermitianOperator::single(Matrix::from_diag(&[0.0, 1.0, 0.0])).unwrap();
        assert!((witness_expectation(&w, &pure).unwrap() + 1.0).abs() < 1e-15);
        let mix = mixed.scale(0.25).add(&pure.scale(0.75)).unwrap();
        let lin = 0.25 * witness_expectation(&w, &mixed).unwrap() + 0.75 * witness_expectation(&w, &pure).unwrap();
        assert!((witness_expectation(&w, &mix).unwrap() - lin).abs() < 1e-15);
        assert!(witness_expectation(&w, &HermitianOperator::identity(vec![2])).is_err());
    }

    #[test]
    fn csv_export_lists_nonzeros() {
        let w = Witness::new(
            HermitianOperator::single(Matrix::from_diag(&[1.0, 0.0])).unwrap(),
            "proj",
            SeparableClass::FullyProduct,
        );
        let mut buf = Vec::new();
        w.export_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("0,0,1.00000000000000000e0,0.00000000000000000e0"));
    }
}
