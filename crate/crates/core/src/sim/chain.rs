//! Jump-by-jump simulation of the occupancy chain straight from its
//! transition lists, bypassing the assembled generator and the solver.

use super::SimError;
use crate::markov::{total_variation, StateSpace, TransitionRates};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSimConfig {
    /// Jumps to simulate, warm-up included.
    pub events: u64,
    pub warmup_fraction: f64,
    pub seed: u64,
    /// ChaCha stream, one per replication.
    pub stream: u64,
    pub start: usize,
}

impl ChainSimConfig {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.events == 0 {
            out.push("simulation.events must be >= 1".to_string());
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            out.push("simulation.warmup_fraction must be in [0, 1)".to_string());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    /// Time spent in each state after warm-up.
    pub state_time: Vec<f64>,
    /// Jumps counted after warm-up.
    pub events: u64,
    pub replications: u32,
}

impl ChainReport {
    pub fn observed_time(&self) -> f64 {
        self.state_time.iter().sum()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.observed_time();
        self.state_time.iter().map(|t| t / total).collect()
    }

    pub fn tv_distance(&self, pi: &[f64]) -> f64 {
        total_variation(&self.frequencies(), pi)
    }

    pub fn merge(&mut self, other: &ChainReport) {
        assert_eq!(self.state_time.len(), other.state_time.len());
        for (a, b) in self.state_time.iter_mut().zip(&other.state_time) {
            *a += b;
        }
        self.events += other.events;
        self.replications += other.replications;
    }
}

/// Total exit rate and targets of one state.
type Outflow = (f64, Vec<(usize, f64)>);

pub fn simulate_chain<R: TransitionRates>(
    space: &StateSpace,
    rates: &R,
    cfg: &ChainSimConfig,
) -> Result<ChainReport, SimError> {
    let mut problems = cfg.problems();
    if cfg.start >= space.len() {
        problems.push(format!(
            "start state {} outside a {}-state space",
            cfg.start,
            space.len()
        ));
    }
    if !problems.is_empty() {
        return Err(SimError::ConfigInvalid(problems));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(cfg.stream);
    let mut cache: Vec<Option<Outflow>> = vec![None; space.len()];
    let warmup = (cfg.events as f64 * cfg.warmup_fraction).floor() as u64;
    let mut report = ChainReport {
        state_time: vec![0.0; space.len()],
        events: 0,
        replications: 1,
    };
    let mut current = cfg.start;
    for step in 0..cfg.events {
        if cache[current].is_none() {
            let mut out = Vec::new();
            for t in rates.transitions(space.state(current)) {
                let j = space.index_of(&t.target).ok_or_else(|| SimError::OutsideStateSpace {
                    target: t.target.units().to_vec(),
                })?;
                if t.rate > 0.0 && j != current {
                    out.push((j, t.rate));
                }
            }
            let total = out.iter().map(|&(_, q)| q).sum();
            cache[current] = Some((total, out));
        }
        let (total, out) = cache[current].as_ref().expect("filled above");
        if !(*total > 0.0) {
            return Err(SimError::Absorbing { state: current });
        }
        let dwell = -(1.0 - rng.random::<f64>()).ln() / total;
        if step >= warmup {
            report.state_time[current] += dwell;
            report.events += 1;
        }
        let mut u = rng.random::<f64>() * total;
        let mut next = out[out.len() - 1].0;
        for &(j, q) in out {
            if u < q {
                next = j;
                break;
            }
            u -= q;
        }
        current = next;
    }
    Ok(report)
}
