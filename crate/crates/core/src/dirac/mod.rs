//! Dirac matrix algebra, potentials and the one-dimensional Dirac operator.

pub mod assemble;
pub mod matrices;
pub mod potential;

pub use assemble::{assemble_dirac_1d, assemble_dirac_1d_with_mass, component_positions, effective_length};
pub use matrices::{dirac_matrices, DiracMatrices, PhysicalConstants, UNITS};
pub use potential::{
    check_admissible, eval_potential, homogeneity_check, AdmissibilityReport, Coupling, FourierProfile,
    HomogeneityReport, PotentialSpec,
};
