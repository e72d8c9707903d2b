//! Exchangeability and de Finetti representations for quantum states and
//! classical sequences.
//!
//! The numerical core is generic over [`Real`] (`f32`, `f64`); the classical
//! linear-feasibility and urn code is generic over [`Field`], which also
//! covers exact [`Rational`] arithmetic. The aliases below fix the usual
//! `f64` instantiation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes_tomo;
pub mod classical;
pub mod cli;
pub mod definetti;
pub mod error;
pub mod exchange;
pub mod opalg;
pub mod random;
pub mod realhilbert;
pub mod scalar;
pub mod states_povm;

pub use error::{Error, Result};
pub use scalar::{Field, Rational, Real};

pub type Matrix = opalg::ComplexMatrix<f64>;
pub type Operator = opalg::HermitianOperator<f64>;
pub type Density = states_povm::DensityOperator<f64>;
pub type Bloch = states_povm::BlochVector<f64>;
pub type StateEnsemble = states_povm::Ensemble<f64>;
pub type Measurement = states_povm::Povm<f64>;
pub type Frame = states_povm::DualFrame<f64>;
pub type MultiState = exchange::MultiSystemState<f64>;
pub type Sequences = definetti::SequenceDistribution<f64>;
pub type Prior = bayes_tomo::PriorGrid<f64>;
pub type RealOperator = realhilbert::RealSymmetricOperator<f64>;
pub type Joint = classical::JointDistribution<f64>;
pub type ExactJoint = classical::JointDistribution<Rational>;
pub type Counts = classical::CountDistribution<f64>;
pub type ExactCounts = classical::CountDistribution<Rational>;
