//! Dual certificates for the constrained maximal entropy.

pub mod bounds;
pub mod diagonal;
pub mod emin;
pub mod linear;
pub mod model;
pub mod point;
pub mod scan;
pub mod solver;

pub use bounds::{bell_gap_bound, gap_lower_bound, perturbation_sensitivity, Sensitivity};
pub use diagonal::{diagonal_dual, theorem3_check, DiagonalDual};
pub use emin::{constrained_energy_min, ppt_energy_min, EnergyMinimum};
pub use linear::{lin_dual_minimize, linear_entropy_gap, LinearDualSolution};
pub use model::{DualModel, Evaluation};
pub use point::DualPoint;
pub use scan::{gap_energy_scan, EnergyGrid, EntropyKind, GapScanResult, ScanOptions, ScanRow, ScanSummary};
pub use solver::{entropy_gap, minimize_dual, minimize_dual_from, DualSolution, SolverOptions};
