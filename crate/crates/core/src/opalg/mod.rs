//! Dense complex operator algebra on `H_d^(x)N`.

mod eig;
mod hermitian;
mod matrix;
mod subsystem;

pub use eig::EigenDecomposition;
pub use hermitian::{eig_hermitian, inv_sqrt, pauli, HermitianOperator, TAU_HERM, TAU_PD};
pub use matrix::ComplexMatrix;
pub(crate) use subsystem::basis_permutation;
pub use subsystem::{
    adjacent_transpositions, all_permutations, inverse_permutation, partial_trace,
    permute_subsystems, tensor, tensor_power, SubsystemShape, MAX_DIM,
};
