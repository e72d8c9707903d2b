//! Density operators, POVMs, the Born rule, minimal informationally complete
//! measurements and dual-frame reconstruction.

mod density;
mod frame;
mod povm;

pub(crate) use density::check_weights;
pub use density::{
    density_from_bloch, ensemble_to_density, trace_distance, BlochVector, DensityOperator,
    Ensemble, TAU_PSD, TAU_TRACE,
};
pub use frame::{dual_frame, hermitian_basis, reconstruct_operator, DualFrame, TAU_FRAME};
pub(crate) use povm::clip_probabilities;
pub use povm::{
    born, build_minimal_ic_povm, minimal_ic_projectors, tetrahedron_directions, tetrahedron_povm,
    IcStep, Povm, TAU_GRAM, TAU_IDENTITY,
};
