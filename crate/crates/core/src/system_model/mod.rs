//! The 60f spin⊗orbital manifold, its control Hamiltonians and error
//! generators.

mod hamiltonians;
mod space;
pub mod units;

pub use hamiltonians::{
    control_hamiltonian, error_generators, fine_structure_h0, magnetic_moment_ops, orbital_bilinear,
    quadratic_position_op, raman_hamiltonian, raw_error_operators, zeeman_hamiltonian, zero_intermultiplet, Axis,
    ErrorModel, FieldConfig, FineStructure, PulseTag, RamanFields, DEFAULT_RAMAN_SCALE, DEFAULT_RAMAN_SCALE_PRIME,
    ERROR_NAMES,
};
pub use space::{build_space, AncillaBound, BasisState, CodeLabel, LevelSpace, RYDBERG_CODE};
