//! Hamiltonians, special states and symmetry blocks.

pub mod chains;
pub mod pauli;
pub mod sectors;
pub mod states;

pub use chains::{heisenberg_chain, heisenberg_pauli, xy_chain, xy_pauli, HeisenbergParams, XYParams};
pub use pauli::{max_qubits, PauliSum, SparseOperator};
pub use sectors::{
    energy_extremes, magnetization_blocks, sector_split, EnergyExtremes, MomentumSector, Sector,
    SectorBlocks,
};
pub use states::{bell_basis, bell_staircase, binomial, dicke_state, sector_basis};
