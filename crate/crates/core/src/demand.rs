//! Fresh-arrival and handover demand per zone and service.

use crate::geometry::ZoneId;
use crate::mobility::MobilityStats;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DemandError {
    #[error("residence time must be positive, got {0}")]
    DivisionByZero(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceProfile {
    pub id: u32,
    /// Session arrival rate over the whole cluster (sessions/s).
    pub cluster_arrival_rate: f64,
    pub mean_holding_time_s: f64,
    /// LTE bandwidth units one session occupies.
    pub prb_demand: u32,
    /// Overrides the derived C_i → C_1 transfer term in the metric weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer_weight: Option<f64>,
}

impl ServiceProfile {
    pub fn new(id: u32, cluster_arrival_rate: f64, mean_holding_time_s: f64, prb_demand: u32) -> Self {
        Self {
            id,
            cluster_arrival_rate,
            mean_holding_time_s,
            prb_demand,
            transfer_weight: None,
        }
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let tag = format!("services[id={}]", self.id);
        if !(self.cluster_arrival_rate >= 0.0) || !self.cluster_arrival_rate.is_finite() {
            out.push(format!("{tag}.cluster_arrival_rate must be finite and >= 0"));
        }
        if !(self.mean_holding_time_s > 0.0) || !self.mean_holding_time_s.is_finite() {
            out.push(format!("{tag}.mean_holding_time_s must be finite and > 0"));
        }
        if self.prb_demand < 1 {
            out.push(format!("{tag}.prb_demand must be >= 1"));
        }
        if let Some(w) = self.transfer_weight {
            if !(w >= 0.0) || !w.is_finite() {
                out.push(format!("{tag}.transfer_weight must be finite and >= 0"));
            }
        }
        out
    }
}

/// `λ_{C_i} = P(C_i) · λ_{C_1}`
pub fn fresh_rate(zone_probability: f64, cluster_rate: f64) -> f64 {
    zone_probability * cluster_rate
}

/// `η = P(C_0) / Δ`
pub fn exit_flow(residual_probability: f64, residence_time: f64) -> Result<f64, DemandError> {
    if !(residence_time > 0.0) {
        return Err(DemandError::DivisionByZero(residence_time));
    }
    Ok(residual_probability / residence_time)
}

/// `τ = u · η`; horizontal or vertical depending on the exit flow supplied.
pub fn handover_rate(mean_users: f64, exit_flow: f64) -> f64 {
    mean_users * exit_flow
}

/// Little's-law population estimate `u = λ · T`.
pub fn mean_population(zone_rate: f64, holding_time: f64) -> f64 {
    zone_rate * holding_time
}

/// Demand figures for one service.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ServiceDemand {
    /// `λ_{C_0}`
    pub residual_rate: f64,
    /// `λ_{C_i}` per sub-cell.
    pub cell_rate: Vec<f64>,
    /// `u_{C_0}`
    pub residual_population: f64,
    /// `τ^H` towards the LTE network of the cluster, `u · η_{C_0}^{C_1}`.
    pub horizontal_to_lte: f64,
    /// `τ^H` between `C_0` and each sub-cell, `u · η_{C_0}^{C_i}`.
    pub horizontal: Vec<f64>,
    /// `τ^V` between `C_0` and each sub-cell's Wi-Fi.
    pub vertical: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemandRates {
    pub services: Vec<ServiceDemand>,
    /// `η_{C_0}^{C_1} = P(C_0) / Δ_0`
    pub residual_exit_flow: f64,
    /// `η_{C_0}^{C_i} = P(C_0) / Δ_i`
    pub cell_exit_flow: Vec<f64>,
    /// Label for the horizontal handover direction used in the rates.
    pub horizontal_direction: String,
}

impl DemandRates {
    pub fn derive(mobility: &MobilityStats, services: &[ServiceProfile]) -> Result<Self, DemandError> {
        let p0 = mobility.residual_probability;
        let residual_exit_flow = if mobility.residual_residence_time.is_finite() {
            exit_flow(p0, mobility.residual_residence_time)?
        } else {
            0.0
        };
        let cell_exit_flow = mobility
            .residence_time
            .iter()
            .map(|&dt| exit_flow(p0, dt))
            .collect::<Result<Vec<_>, _>>()?;
        let services = services
            .iter()
            .map(|s| {
                let residual_rate = fresh_rate(p0, s.cluster_arrival_rate);
                let u = mean_population(residual_rate, s.mean_holding_time_s);
                ServiceDemand {
                    residual_rate,
                    cell_rate: mobility
                        .cell_probability
                        .iter()
                        .map(|&p| fresh_rate(p, s.cluster_arrival_rate))
                        .collect(),
                    residual_population: u,
                    horizontal_to_lte: handover_rate(u, residual_exit_flow),
                    horizontal: cell_exit_flow.iter().map(|&e| handover_rate(u, e)).collect(),
                    vertical: cell_exit_flow.iter().map(|&e| handover_rate(u, e)).collect(),
                }
            })
            .collect();
        Ok(Self {
            services,
            residual_exit_flow,
            cell_exit_flow,
            horizontal_direction: format!("{} -> C1 (LTE)", ZoneId::Residual),
        })
    }

    pub fn is_finite(&self) -> bool {
        let vals = self.services.iter().flat_map(|s| {
            [s.residual_rate, s.residual_population, s.horizontal_to_lte]
                .into_iter()
                .chain(s.cell_rate.iter().copied())
                .chain(s.horizontal.iter().copied())
                .chain(s.vertical.iter().copied())
        });
        vals.chain([self.residual_exit_flow])
            .chain(self.cell_exit_flow.iter().copied())
            .all(|v| v.is_finite() && v >= 0.0)
    }
}
