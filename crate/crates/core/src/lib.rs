//! Simulation and analysis tools for building photonic graph states with
//! polarizing beam splitters (PBS).
//!
//! - [`pauli`]: Pauli strings and stabilizer groups.
//! - [`graph`]: graph states, the PBS gate and its join rule.
//! - [`fock`]: a dense few-photon linear-optics simulator used as an
//!   independent oracle for the stabilizer picture.
//! - [`analytics`]: closed-form efficiency model of the divide-and-conquer
//!   tree protocol.
//! - [`sim`]: event-level Monte Carlo of the same protocol.
//! - [`planner`]: construction schedules and their execution.
//! - [`stats`]: binomial confidence intervals and summaries.

pub mod analytics;
pub mod fock;
pub mod graph;
pub mod pauli;
pub mod planner;
pub mod sim;
pub mod stats;

pub use graph::{
    apply_pbs_gate, graph_to_stabilizers, pbs_join_graphs, stabilizers_to_graph, Graph,
};
pub use pauli::{PauliString, Postselected, StabilizerGroup};
