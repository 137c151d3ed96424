//! Random greedy independent set process on dense graphs.
//!
//! The crate samples `G(n, p)` hosts, runs the greedy process while tracking
//! induced degrees against their expected trajectory, checks pseudorandomness
//! (typicality) of hosts, builds randomized covers of the non-edges by
//! independent sets, and estimates coverage probabilities by Monte Carlo.

pub mod analytics;
pub mod cover;
pub mod error;
pub mod graph;
pub mod montecarlo;
pub mod process;
pub mod rng;
pub mod typicality;

pub use analytics::{chernoff_bound, freedman_bound, BoundFormulas, EnvelopePoint, ParamSet};
pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};
pub use process::{run, ProcessRun, ProcessState, StepRecord};

/// Version of the JSON report layouts.
pub const SCHEMA_VERSION: u32 = 1;
