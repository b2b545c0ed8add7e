//! Contextual probability for a pair of dichotomous observables: the
//! interference coefficients of the total probability formula, the
//! Kolmogorov joint-distribution test, complex amplitudes with Born-rule
//! reconstruction, and frequency-based estimation.

pub mod error;
pub mod frequency;
pub mod hilbert;
pub mod io;
pub mod kolmogorov;
pub mod model;
pub mod report;
pub mod supplementarity;

pub use error::{Error, Result};
pub use model::{ContextData, Direction, Observable, ProbVector, Tolerances, TransitionMatrix};
