//! Analytical and simulation engine for a heterogeneous LTE/Wi-Fi cluster
//! under bit-rate based network selection.
//!
//! The analytic path runs
//! [`mobility`] → [`demand`] → [`markov`] → [`metrics`]: random-waypoint
//! statistics give per-zone arrival and handover rates, which drive a
//! continuous-time Markov chain over bandwidth-occupancy states whose
//! stationary distribution weights the bit-rate and blocking figures.
//! [`sim`] provides discrete-event oracles for every stage, and
//! [`experiment`] ties everything to a configuration file and parameter
//! sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod demand;
pub mod emit;
pub mod experiment;
pub mod geometry;
mod interp;
pub mod markov;
pub mod metrics;
pub mod mobility;
pub mod quadrature;
pub mod sim;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, ResultRow};

use thiserror::Error;

/// Top-level error, grouped so front ends can map failures to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Mobility(#[from] mobility::MobilityError),
    #[error(transparent)]
    Demand(#[from] demand::DemandError),
    #[error(transparent)]
    Model(#[from] markov::ModelError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("nothing to emit")]
    EmptyResults,
}

impl Error {
    /// `true` for problems with the input rather than with the computation.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_)) || matches!(self, Error::Sim(sim::SimError::ConfigInvalid(_)))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
