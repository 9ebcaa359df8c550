//! Discrete-event oracles: a leg-based mobility oracle, a jump simulation
//! of the occupancy chain, and a user-level network simulation.

mod agent;
mod chain;
mod queue;
mod trajectory;

pub use agent::{
    run, select_network, spawn_agent, step_mobility, Decision, Network, SimConfig, SimReport, UserAgent, ZoneCrossing,
};
pub use chain::{simulate_chain, ChainReport, ChainSimConfig};
pub use queue::EventQueue;
pub use trajectory::{
    calibrate_cv, disk_interval, run_trajectories, segment_circle_crossings, uniform_in_disk, BoundaryCrossing,
    TrajectoryConfig, TrajectoryReport,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation configuration:\n  {}", .0.join("\n  "))]
    ConfigInvalid(Vec<String>),
    #[error("capacity exceeded at t = {time}")]
    CapacityViolated { time: f64 },
    #[error("held units disagree with connect/release counts at t = {time}")]
    UnitsNotConserved { time: f64 },
    #[error("state {state} has no outgoing transitions")]
    Absorbing { state: usize },
    #[error("transition leaves the state space: {target:?}")]
    OutsideStateSpace { target: Vec<u32> },
}
