//! Team assignment as algebraic-connectivity maximization on
//! edge-dependent vertex-weighted hypergraphs.
//!
//! Agents are nodes, tasks are hyperedges. A task is weighted by the energy
//! it needs and an agent's weight inside a task is the energy it spends
//! there. The optimizers ([`csa`], [`greedy`]) search integer assignments
//! that satisfy budget and energy constraints while maximizing the second
//! eigenvalue of the hypergraph Laplacian; [`resilience`] measures how well
//! an assignment recovers from agent removal.

pub mod bipartite;
pub mod csa;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod greedy;
pub mod instance;
pub mod par;
pub mod resilience;
pub mod rng;
pub mod spectral;
pub mod synthetic;

pub use error::{Error, Result};
pub use instance::{Assignment, ProblemInstance};
