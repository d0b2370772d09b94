//! Exact simulation of multivariate Hawkes processes with piecewise-constant
//! interaction kernels.
//!
//! Intensities are stored as ordered sets of `(time, jump)` events
//! ([`scheduler::Scheduler`]). Two simulators are provided: a full scan that
//! updates every node at every point, and a local variant that only touches
//! the children of the firing node in the dependence graph. A brute-force
//! thinning simulator, goodness-of-fit tests and a scaling benchmark support
//! validation.

// `!(x > 0.0)` is used on purpose so that NaN takes the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod fullscan;
pub mod gof;
pub mod graph;
pub mod hawkes;
pub mod localgraph;
pub mod oracle;
pub mod rng;
pub mod sampling;
pub mod scheduler;
pub mod sim;

pub use fullscan::simulate_fullscan;
pub use graph::DependenceGraph;
pub use hawkes::{HawkesNetwork, InteractionKernel, ModelError};
pub use localgraph::simulate_localgraph;
pub use oracle::simulate_naive;
pub use rng::RngStream;
pub use scheduler::{Event, Scheduler};
pub use sim::{SimError, SimulationResult};
