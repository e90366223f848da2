//! Simulation library for distributed average consensus over fixed undirected
//! networks using consensus ADMM with finite-bit bounded quantization.
//!
//! The exact (real-valued) baseline lives in [`cadmm`]. The quantized state
//! machine with convergence/cycle detection is in [`bq`], its repeated-offset
//! extension in [`ebq`]. Step-size policies are in [`params`], and the seeded
//! Monte Carlo harness with the algorithm registry is in [`experiments`] and
//! [`strategy`].

pub mod bq;
pub mod cadmm;
pub mod cli;
pub mod ebq;
pub mod experiments;
pub mod graph;
pub mod linalg;
pub mod params;
pub mod quantizer;
pub mod rng;
pub mod strategy;

pub use bq::{BqConfig, BqError, BoundSet, IntState, OutcomeKind, RunOutcome};
pub use ebq::{EbqError, EbqOptions, EbqOutcome};
pub use graph::{Graph, GraphError, GraphMatrices, SpectralInfo};
pub use params::{RhoSchedule, ScheduleError, ScheduleOutcome};
pub use quantizer::{QuantizerError, QuantizerSpec};
pub use strategy::{AlgoResult, AlgorithmRegistry, ConsensusAlgorithm, ResolvedRho, RunContext, RunError};
