//! Relative frequencies of observation sequences, simulation of contexts,
//! and natural density on the integers.

pub mod density;
pub mod sequence;
pub mod simulate;

pub use density::{
    counterexample, density, density_algebra_check, density_checkpoints, CounterexampleReport, DensityAlgebraReport,
    DensitySet,
};
pub use sequence::{
    estimate_frequencies, stabilization_diagnostic, Checkpoint, SSequence, StabilizationDiagnostic, StreamSource,
    DEFAULT_N_MIN,
};
pub use simulate::{empirical_context_data, simulate_context, ContextStreams, EmpiricalContext};
