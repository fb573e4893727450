//! JSON run configuration.
//!
//! ```json
//! {
//!   "model": { "type": "heisenberg", "n": 4, "jx": -1, "jy": -1, "jz": -1, "b": 0 },
//!   "constraints": { "ppt": "even_odd" },
//!   "scan": { "grid": { "uniform": { "points": 40 } }, "entropy": "von_neumann" },
//!   "seed": 7
//! }
//! ```

use std::path::{Path, PathBuf};

use proxygap_core::dual::{DualModel, ScanOptions};
use proxygap_core::linalg::{Bipartition, HermitianOperator};
use proxygap_core::models::chains::{heisenberg_pauli, xy_pauli, HeisenbergParams, XYParams};
use proxygap_core::models::PauliSum;
use proxygap_core::witness::{dicke_witness, ConstraintSet, DickeWitness};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Heisenberg chain, `J = -1` antiferromagnetic.
    Heisenberg {
        n: usize,
        jx: f64,
        jy: f64,
        jz: f64,
        #[serde(default)]
        b: f64,
        #[serde(default = "yes")]
        periodic: bool,
    },
    /// XXZ ring with `jx = jy = jz + delta_j`.
    Xxz { n: usize, jz: f64, delta_j: f64, b: f64 },
    /// Anisotropic XY ring in a transverse field.
    Xy { n: usize, r: f64, h: f64 },
}

fn yes() -> bool {
    true
}

impl ModelSpec {
    pub fn n(&self) -> usize {
        match *self {
            ModelSpec::Heisenberg { n, .. } | ModelSpec::Xxz { n, .. } | ModelSpec::Xy { n, .. } => n,
        }
    }

    pub fn pauli(&self) -> Result<PauliSum, CliError> {
        let sum = match *self {
            ModelSpec::Heisenberg { n, jx, jy, jz, b, periodic } => heisenberg_pauli(&HeisenbergParams { n, jx, jy, jz, b, periodic })?,
            ModelSpec::Xxz { n, jz, delta_j, b } => heisenberg_pauli(&HeisenbergParams::xxz(n, jz, delta_j, b))?,
            ModelSpec::Xy { n, r, h } => xy_pauli(&XYParams::ring(n, r, h))?,
        };
        Ok(sum)
    }

    pub fn dense(&self) -> Result<HermitianOperator, CliError> {
        Ok(self.pauli()?.to_dense()?)
    }
}

/// `"even_odd"`, `"all"` or an explicit list of A sides.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Cuts {
    Named(String),
    Explicit(Vec<Vec<usize>>),
}

impl Cuts {
    pub fn resolve(&self, n: usize) -> Result<Vec<Bipartition>, CliError> {
        match self {
            Cuts::Named(s) if s == "even_odd" => Ok(vec![Bipartition::even_odd(n)?]),
            Cuts::Named(s) if s == "all" => Ok(Bipartition::all(n)?),
            Cuts::Named(s) => Err(CliError::Config(format!("unknown cut set '{s}' (expected even_odd, all or a list)"))),
            Cuts::Explicit(sets) => sets.iter().map(|a| Ok(Bipartition::new(a.clone(), n)?)).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSpec {
    pub ppt: Option<Cuts>,
    /// Excitation number `m` of the Dicke witness.
    pub dicke: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoLimitSpec {
    pub r: f64,
    pub h_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSpec {
    pub ensemble_size: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self { ensemble_size: 200 }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelSpec>,
    pub constraints: ConstraintSpec,
    pub scan: ScanOptions,
    pub thermo_limit: Option<ThermoLimitSpec>,
    pub oracle: OracleSpec,
    pub seed: Option<u64>,
    /// Output directory, overridden by `--out`.
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn model(&self) -> Result<&ModelSpec, CliError> {
        self.model.as_ref().ok_or_else(|| CliError::Config("config has no model".into()))
    }

    pub fn constraint_set(&self) -> Result<ConstraintSet, CliError> {
        let n = self.model()?.n();
        let mut cs = match &self.constraints.ppt {
            Some(c) => ConstraintSet::ppt(c.resolve(n)?),
            None => ConstraintSet::empty(),
        };
        if let Some(m) = self.constraints.dicke {
            cs.witnesses.push(dicke_witness(n, m)?);
        }
        Ok(cs)
    }

    /// Sector-blocked model for a Dicke witness alone on a
    /// magnetization-conserving chain, dense otherwise.
    pub fn dual_model(&self) -> Result<DualModel, CliError> {
        let spec = self.model()?;
        if let (Some(m), None) = (self.constraints.dicke, &self.constraints.ppt) {
            let h = spec.pauli()?;
            if h.conserves_magnetization() {
                let w = DickeWitness::new(spec.n(), m)?;
                return Ok(DualModel::blocked(&h, &[&w])?);
            }
        }
        Ok(DualModel::dense(&spec.dense()?, &self.constraint_set()?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c: RunConfig = serde_json::from_str(
            r#"{"model": {"type": "heisenberg", "n": 3, "jx": -1, "jy": -1, "jz": -1}, "constraints": {"ppt": "even_odd"}}"#,
        )
        .unwrap();
        assert_eq!(c.model().unwrap().n(), 3);
        assert_eq!(c.constraint_set().unwrap().map_slots.len(), 1);
    }

    #[test]
    fn explicit_cuts() {
        let c: RunConfig = serde_json::from_str(
            r#"{"model": {"type": "xy", "n": 4, "r": 1, "h": 0.5}, "constraints": {"ppt": [[0], [0, 1]]}}"#,
        )
        .unwrap();
        assert_eq!(c.constraint_set().unwrap().map_slots.len(), 2);
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"modle": {}}"#).is_err());
        let bad: RunConfig = serde_json::from_str(r#"{"model": {"type": "xy", "n": 4, "r": 1, "h": 0}, "constraints": {"ppt": "odd"}}"#).unwrap();
        assert!(matches!(bad.constraint_set(), Err(CliError::Config(_))));
    }

    #[test]
    fn dicke_alone_is_blocked() {
        let c: RunConfig = serde_json::from_str(
            r#"{"model": {"type": "xxz", "n": 6, "jz": 1, "delta_j": 4, "b": -1}, "constraints": {"dicke": 3}}"#,
        )
        .unwrap();
        assert!(c.dual_model().unwrap().is_blocked());
    }
}
