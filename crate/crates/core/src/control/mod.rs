//! Non-holonomic control: products of alternating pulse propagators, the
//! coding objective, timing optimization and the decoding recipe.

mod coding;
mod optimize;
mod propagator;
mod sequence;
mod toy;

pub use coding::{
    coding_residual, coding_residual_for, condition_blocks, traceless_deviation_sq, CodingProblem, CodingReport,
    CodingSummary, ENTRIES_PER_ERROR,
};
pub use optimize::{optimize_problem, optimize_timings, NonConvergence, Optimized, OptimizerSettings};
pub use propagator::{propagator, SpectralPropagator};
pub use sequence::{
    decode_sequence, decoding_propagator, sequence_propagator, DecodedSequence, Pulse, PulseSequence, PUBLISHED_TIMINGS,
};
pub use toy::{toy_instance, ToyInstance};
