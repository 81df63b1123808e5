//! Simulation and Monte Carlo verification toolkit for Lévy random measures
//! (gamma, stable, tempered stable) and Poisson–Dirichlet laws.
//!
//! The canonical parameter space is `[0,1]` carrying `θ·Lebesgue`; random
//! measures are truncated inverse-tail series with a recorded tail bound.

pub mod density;
pub mod error;
pub mod levy;
pub mod measure;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod special;
pub mod stats;
pub mod suites;
pub mod transform;

pub use error::{Error, Result};
pub use levy::LevyModel;
pub use measure::{
    conic_part, functional_f_a, log1p_integral, log_integral, normalize, Atom, BaseSpace, ConicSequence,
    DiscreteMeasure, FunctionSpec, SimplexSequence, StepFunction, TestFunction,
};
pub use rng::RandomStream;
