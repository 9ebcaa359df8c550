//! Bit-rate and blocking figures for a sub-cell, weighted by the stationary
//! distribution of the occupancy chain.

use crate::demand::{DemandRates, ServiceProfile};
use crate::markov::{OccupancyState, StateSpace, StationaryDistribution};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkProfile {
    /// `B_sp`, Hz.
    pub subcarrier_bandwidth_hz: f64,
    /// `K`, number of frequencies (sub-carriers).
    pub frequencies: f64,
    /// `B`, symbols per second.
    pub symbol_rate: f64,
    /// `E_i`
    pub modulation_efficiency: f64,
    /// `BLER_i`
    pub bler: f64,
}

impl LinkProfile {
    /// 16-QAM over 72 sub-carriers in a 1.4 MHz carrier.
    pub fn reference() -> Self {
        Self {
            subcarrier_bandwidth_hz: 1.4e6,
            frequencies: 72.0,
            symbol_rate: 6.0,
            modulation_efficiency: 1.4766,
            bler: 0.5,
        }
    }

    pub fn with_bler(self, bler: f64) -> Self {
        Self { bler, ..self }
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("subcarrier_bandwidth_hz", self.subcarrier_bandwidth_hz),
            ("frequencies", self.frequencies),
            ("symbol_rate", self.symbol_rate),
            ("modulation_efficiency", self.modulation_efficiency),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                out.push(format!("link.{name} must be finite and >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.bler) {
            out.push("link.bler must be in [0, 1]".to_string());
        }
        out
    }
}

/// `D = B_sp · K · B · E_i · (1 − BLER_i)`
pub fn instantaneous_bitrate(link: &LinkProfile) -> f64 {
    link.subcarrier_bandwidth_hz * link.frequencies * link.symbol_rate * link.modulation_efficiency * (1.0 - link.bler)
}

/// Congestion factor `1 − s·√occupancy`, floored at zero.
fn congestion(occupancy_fraction: f64, sensitivity: f64) -> f64 {
    (1.0 - sensitivity * occupancy_fraction.clamp(0.0, 1.0).sqrt()).max(0.0)
}

/// `D(E) = D · (1 − Λ √occ)`
pub fn state_bitrate(bitrate: f64, occupancy_fraction: f64, sensitivity: f64) -> f64 {
    bitrate * congestion(occupancy_fraction, sensitivity)
}

/// `P_B(E) = P_B · (1 − Θ √occ)`
pub fn state_block(block: f64, occupancy_fraction: f64, sensitivity: f64) -> f64 {
    block * congestion(occupancy_fraction, sensitivity)
}

/// Erlang-B loss probability for offered load `rho` on `servers` servers,
/// via `B(ρ, n) = ρ B(ρ, n−1) / (n + ρ B(ρ, n−1))`.
pub fn erlang_block(rho: f64, servers: u32) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    (1..=servers).fold(1.0, |b, n| rho * b / (n as f64 + rho * b))
}

/// Offered load of a sub-cell in erlangs, `Σ_k λ_{C_i}^k · T_k`.
pub fn offered_load(demand: &DemandRates, services: &[ServiceProfile], cell: usize) -> f64 {
    demand
        .services
        .iter()
        .zip(services)
        .map(|(d, s)| d.cell_rate[cell] * s.mean_holding_time_s)
        .sum()
}

/// Per-service weight `λ_{C_i}^k + P(C_i → C_1)`. The transfer term is the
/// share of the sub-cell's total demand that is vertical handover of `k`,
/// unless the profile overrides it.
pub fn service_weights(demand: &DemandRates, services: &[ServiceProfile], cell: usize) -> Vec<f64> {
    let total: f64 = demand
        .services
        .iter()
        .map(|d| d.cell_rate[cell] + d.vertical[cell])
        .sum();
    demand
        .services
        .iter()
        .zip(services)
        .map(|(d, s)| {
            let transfer = s
                .transfer_weight
                .unwrap_or(if total > 0.0 { d.vertical[cell] / total } else { 0.0 });
            d.cell_rate[cell] + transfer
        })
        .collect()
}

/// Everything the weighted sums need besides `π` and the sensitivity.
#[derive(Clone, Debug)]
pub struct MetricContext<'a> {
    pub space: &'a StateSpace,
    /// 0-based sub-cell the figures refer to.
    pub cell: usize,
    pub weights: Vec<f64>,
    /// When set, every state's congestion factor uses this occupancy
    /// fraction instead of its own.
    pub occupancy: Option<f64>,
    /// Overrides the bit-rate normaliser `η`.
    pub normalizer: Option<f64>,
}

impl MetricContext<'_> {
    fn occupancy_of(&self, s: &OccupancyState) -> f64 {
        self.occupancy.unwrap_or_else(|| {
            self.space
                .layout()
                .occupancy_fraction(s, self.space.capacities(), self.cell)
        })
    }

    /// Whether one more session of `service` still fits on LTE.
    fn admits(&self, s: &OccupancyState, service: usize) -> bool {
        let layout = self.space.layout();
        layout.lte_total(s) + layout.prb(service) <= self.space.capacities().lte_units
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BitrateSummary {
    /// `D^tot`
    pub total: f64,
    /// `η`
    pub normalizer: f64,
    /// `D̄ = D^tot / η`
    pub mean: f64,
}

/// Weighted mean LTE bit rate over states that can still admit a session.
/// By default `η` is the total weight in the numerator, making `D̄` a proper
/// weighted mean in bits/s.
pub fn mean_bitrate(
    pi: &StationaryDistribution,
    ctx: &MetricContext<'_>,
    bitrate: f64,
    sensitivity: f64,
) -> BitrateSummary {
    let mut total = 0.0;
    let mut weight = 0.0;
    for (s, &p) in ctx.space.states().iter().zip(&pi.probabilities) {
        if p == 0.0 {
            continue;
        }
        let d = state_bitrate(bitrate, ctx.occupancy_of(s), sensitivity);
        for (k, &w) in ctx.weights.iter().enumerate() {
            if ctx.admits(s, k) {
                total += w * p * d;
                weight += w * p;
            }
        }
    }
    let normalizer = ctx.normalizer.unwrap_or(weight);
    let mean = if normalizer > 0.0 { total / normalizer } else { 0.0 };
    BitrateSummary {
        total,
        normalizer,
        mean,
    }
}

/// Weighted blocking over states that cannot admit another session,
/// normalised by the total service weight.
pub fn mean_block(pi: &StationaryDistribution, ctx: &MetricContext<'_>, block: f64, sensitivity: f64) -> f64 {
    let total_weight: f64 = ctx.weights.iter().sum();
    if !(total_weight > 0.0) {
        return 0.0;
    }
    let mut acc = 0.0;
    for (s, &p) in ctx.space.states().iter().zip(&pi.probabilities) {
        if p == 0.0 {
            continue;
        }
        let b = state_block(block, ctx.occupancy_of(s), sensitivity);
        for (k, &w) in ctx.weights.iter().enumerate() {
            if !ctx.admits(s, k) {
                acc += w * p * b;
            }
        }
    }
    (acc / total_weight).clamp(0.0, 1.0)
}
