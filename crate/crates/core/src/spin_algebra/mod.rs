//! Exact angular-momentum machinery.

mod angular;
mod cg;
mod half_int;

pub use angular::{
    angular_momentum_ops, cartesian_rank2, couple_basis, coupled_labels, tensor_component, uncoupled_labels,
    AngularMomentumOps,
};
pub use cg::{clebsch_gordan, clebsch_gordan_exact, ExactCg};
pub use half_int::{h, HalfInt};
