//! Continuous-time Markov chain over bandwidth-occupancy states.

mod generator;
mod rates;
mod solver;
mod state;

pub use generator::{build_generator, TransitionModel};
pub use rates::{Direction, SelectionRule, ServiceRates, StageModel, Transition, TransitionRates};
pub use solver::{
    gauss_seidel, gth, stationary, total_variation, StationaryDistribution, DENSE_LIMIT, RESIDUAL_TARGET,
};
pub use state::{enumerate_states, Capacities, OccupancyState, StateLayout, StateSpace, DEFAULT_STATE_CAP};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("state space exceeds the configured cap of {cap} states")]
    StateSpaceTooLarge { cap: usize },
    #[error("state space is empty")]
    EmptyStateSpace,
    #[error("capacity list has {got} Wi-Fi entries, layout expects {expected}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("transition from state {from} leaves the state space: {target:?}")]
    TargetOutsideSpace { from: usize, target: Vec<u32> },
    #[error("invalid rate {rate} out of state {from}")]
    InvalidRate { from: usize, rate: f64 },
    #[error("entry ({row}, {col}) outside a {dim}x{dim} generator")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },
    #[error("chain is reducible: {} strongly connected components (first: {:?})", components.len(), components.first())]
    ReducibleChain { components: Vec<Vec<usize>> },
    #[error("stationary solver failed: residual {residual:e} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },
}
