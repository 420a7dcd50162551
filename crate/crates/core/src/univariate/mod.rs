//! Univariate building blocks: nested point sequences, the hierarchical
//! Newton basis, Lebesgue constants, and orthonormal families.

mod lebesgue;
mod leja;
mod ortho;

pub use lebesgue::{lebesgue_constants, LebesgueEstimate, DEFAULT_GRID};
pub use leja::{
    hierarchical_basis_all, hierarchical_basis_eval, newton_denominators, PointSequence,
    SequenceKind,
};
pub use ortho::{hermite_radius, HermiteCdfTable, Measure, OrthoFamily, HERMITE_TABLE_NODES};
