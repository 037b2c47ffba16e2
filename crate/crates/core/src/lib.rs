//! Zeno-style coherence protection of a spin qubit stored in the 60f
//! manifold of a Rydberg alkali atom.
//!
//! * [`spin_algebra`]: exact Clebsch-Gordan coefficients, angular-momentum
//!   matrices, spherical tensors and the coupled basis.
//! * [`system_model`]: the 14-dimensional spin⊗orbital space, Zeeman and
//!   Raman control Hamiltonians, the six error generators, fine structure.
//! * [`control`]: pulse propagators, the coding objective, timing
//!   optimization and decoding.
//! * [`zeno_cycle`]: pump, code, error, decode, project and repump cycles.
//! * [`kinetics`]: three-photon projection rates, density-matrix kinetics
//!   and the coherence-transfer efficiency.
//!
//! The numerical core is generic over [`Real`] (`f32`/`f64`); the aliases
//! below fix it to `f64`, which the optimizer and the cycle simulator use.

pub mod control;
pub mod error;
pub mod kinetics;
pub mod operator;
pub mod rng;
pub mod scalar;
pub mod spin_algebra;
pub mod system_model;
pub mod zeno_cycle;

pub use error::{Error, Result};
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;

pub type Operator = operator::Operator<f64>;
pub type Operator32 = operator::Operator<f32>;
pub type BasisChange = operator::BasisChange<f64>;
pub type ErrorModel = system_model::ErrorModel<f64>;
pub type CodingReport = control::CodingReport<f64>;
pub type AngularMomentumOps = spin_algebra::AngularMomentumOps<f64>;
pub type KineticsParams = kinetics::KineticsParams<f64>;
pub type KineticsState = kinetics::KineticsState<f64>;
