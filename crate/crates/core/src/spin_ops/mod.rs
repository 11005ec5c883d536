//! Single-site operator algebra, operator labels and MPO forms of the medium
//! Hamiltonian.

mod brute;
pub mod dense;
mod label;
mod local;
mod mpo;

pub use brute::{
    brute_force_generator, brute_force_generator_with, medium_hamiltonian, DenseGenerator, BRUTE_FORCE_MAX_SITES,
    DENSE_HAMILTONIAN_MAX_SITES,
};
pub(crate) use label::digit_at;
pub use label::{label_index_map, LabelMap, OperatorLabel, MAX_SITES};
pub use local::{LocalOp, Mat2};
pub use mpo::{bond_detuning, bond_mpo, contract_chain, longrange_mpo, BondMpo, LongRangeMpo, OpMatrix};
