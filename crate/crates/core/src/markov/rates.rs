//! Stage 1–6 transition rates.
//!
//! Notation per service `k` and sub-cell `i`: `a` is the LTE occupancy in
//! `C_0`, `c` the LTE occupancy in `C_i`, `w` the Wi-Fi occupancy in `C_i`,
//! `N` the PRB demand, `L` the total LTE occupancy and `W_i` the Wi-Fi
//! occupancy of the sub-cell. LTE has room for `k` when `L + N ≤ B_1`.
//!
//! | stage | up (`E_{p,1}`)                      | down (`E_{p,2}`)                  |
//! |-------|-------------------------------------|-----------------------------------|
//! | 1     | connect on LTE in `C_0`             | disconnect on LTE in `C_0`        |
//! | 2     | connect on LTE in `C_i`             | disconnect on LTE in `C_i`        |
//! | 3     | connect on Wi-Fi in `C_i`           | disconnect on Wi-Fi in `C_i`      |
//! | 4     | LTE `C_i` → LTE `C_0` (horizontal)  | LTE `C_0` → LTE `C_i`             |
//! | 5     | Wi-Fi `C_i` → LTE `C_0` (vertical)  | LTE `C_0` → Wi-Fi `C_i`           |
//! | 6     | Wi-Fi `C_i` → LTE `C_i` (switch)    | LTE `C_i` → Wi-Fi `C_i`           |

use super::state::{Capacities, OccupancyState, StateLayout};
use crate::demand::DemandRates;
use crate::mobility::MobilityStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub target: OccupancyState,
    pub rate: f64,
    pub stage: u8,
    pub direction: Direction,
    pub service: usize,
    /// Sub-cell involved, `None` for stage 1.
    pub cell: Option<usize>,
}

/// Anything that can list the outgoing transitions of a state.
pub trait TransitionRates: Sync {
    fn transitions(&self, state: &OccupancyState) -> Vec<Transition>;
}

/// Bit-rate based choice between LTE and Wi-Fi for a new session in a
/// sub-cell when both have room.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionRule {
    /// Instantaneous LTE bit rate `D_1^avg`.
    pub lte_bitrate: f64,
    /// Congestion sensitivity `Λ` used to scale the LTE rate.
    pub sensitivity: f64,
    /// Nominal Wi-Fi bit rate.
    pub wifi_bitrate: f64,
}

impl SelectionRule {
    pub fn lte_state_bitrate(&self, occupancy_fraction: f64) -> f64 {
        crate::metrics::state_bitrate(self.lte_bitrate, occupancy_fraction, self.sensitivity)
    }

    /// Ties go to LTE.
    pub fn prefers_lte(&self, occupancy_fraction: f64) -> bool {
        self.lte_state_bitrate(occupancy_fraction) >= self.wifi_bitrate
    }
}

/// Per-service rate inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ServiceRates {
    /// `λ_{C_0}`
    pub residual_arrival: f64,
    /// `λ_{N_1}^H`, horizontal handover demand towards LTE.
    pub horizontal_to_lte: f64,
    /// `λ_{C_i}` per sub-cell.
    pub cell_arrival: Vec<f64>,
    /// `τ^H_{(C_0←C_i)}` per sub-cell.
    pub horizontal: Vec<f64>,
    /// `τ^V_{(C_0←C_i)}` per sub-cell.
    pub vertical: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct StageModel {
    pub layout: StateLayout,
    pub caps: Capacities,
    pub services: Vec<ServiceRates>,
    /// `Δ` used by stage 1 (residence time of `C_0`).
    pub residual_residence_time: f64,
    /// `η_{C_0}^{C_1}`
    pub residual_exit_flow: f64,
    /// `Δ_i` per sub-cell.
    pub cell_residence_time: Vec<f64>,
    /// Probability of switching networks on arrival in a sub-cell; the same
    /// value serves both switch directions.
    pub switch_probability: f64,
    /// `None` means LTE is always preferred while it has room.
    pub selection: Option<SelectionRule>,
}

impl StageModel {
    pub fn from_demand(
        layout: StateLayout,
        caps: Capacities,
        mobility: &MobilityStats,
        demand: &DemandRates,
        switch_probability: f64,
        selection: Option<SelectionRule>,
    ) -> Self {
        let services = demand
            .services
            .iter()
            .map(|d| ServiceRates {
                residual_arrival: d.residual_rate,
                horizontal_to_lte: d.horizontal_to_lte,
                cell_arrival: d.cell_rate.clone(),
                horizontal: d.horizontal.clone(),
                vertical: d.vertical.clone(),
            })
            .collect();
        Self {
            layout,
            caps,
            services,
            residual_residence_time: mobility.residual_residence_time,
            residual_exit_flow: demand.residual_exit_flow,
            cell_residence_time: mobility.residence_time.clone(),
            switch_probability,
            selection,
        }
    }

    fn prefers_lte(&self, state: &OccupancyState, cell: usize) -> bool {
        match &self.selection {
            None => true,
            Some(rule) => rule.prefers_lte(self.layout.occupancy_fraction(state, &self.caps, cell)),
        }
    }

    pub fn stage_rates(&self, state: &OccupancyState) -> Vec<Transition> {
        let layout = &self.layout;
        let caps = &self.caps;
        let b = &state.0;
        let lte_total = layout.lte_total(state);
        let mut out = Vec::new();

        let mut push = |delta: &[(usize, i64)], rate: f64, stage: u8, direction, service, cell| {
            if !(rate > 0.0) {
                return;
            }
            let mut t = b.clone();
            for &(pos, d) in delta {
                t[pos] = (t[pos] as i64 + d) as u32;
            }
            out.push(Transition {
                target: OccupancyState(t),
                rate,
                stage,
                direction,
                service,
                cell,
            });
        };

        let stay0 = if self.residual_residence_time.is_finite() && self.residual_residence_time > 0.0 {
            1.0 / self.residual_residence_time
        } else {
            0.0
        };

        for (k, sr) in self.services.iter().enumerate() {
            let n = layout.prb(k);
            let nf = n as f64;
            let lte_room = lte_total + n <= caps.lte_units;
            let ia = layout.residual_lte(k);
            let a = b[ia] as f64 / nf;

            // Stage 1
            let base1 = (sr.residual_arrival + sr.horizontal_to_lte) * (stay0 + self.residual_exit_flow);
            if lte_room {
                push(&[(ia, n as i64)], base1 * (a + 1.0), 1, Direction::Up, k, None);
            }
            if b[ia] >= n {
                push(&[(ia, -(n as i64))], base1 * a, 1, Direction::Down, k, None);
            }

            for cell in 0..layout.subcells() {
                let ic = layout.cell_lte(cell, k);
                let iw = layout.cell_wifi(cell, k);
                let c = b[ic] as f64 / nf;
                let w = b[iw] as f64;
                let wifi_total = layout.wifi_total(state, cell);
                let wifi_room = wifi_total < caps.wifi_units[cell];
                let dt = self.cell_residence_time[cell];
                let stay = if dt.is_finite() && dt > 0.0 { 1.0 / dt } else { 0.0 };
                let lam = sr.cell_arrival[cell] * (1.0 + self.switch_probability);

                // Stages 2 and 3: a new session goes to LTE when Wi-Fi is
                // full, to Wi-Fi when LTE is saturated, and otherwise to
                // whichever network offers the higher bit rate.
                let to_lte = lte_room && (!wifi_room || self.prefers_lte(state, cell));
                let to_wifi = wifi_room && !to_lte;
                if to_lte {
                    push(
                        &[(ic, n as i64)],
                        lam * (c + 1.0) * stay,
                        2,
                        Direction::Up,
                        k,
                        Some(cell),
                    );
                }
                if b[ic] >= n {
                    push(&[(ic, -(n as i64))], lam * c * stay, 2, Direction::Down, k, Some(cell));
                }
                if to_wifi {
                    push(&[(iw, 1)], lam * (w + 1.0) * stay, 3, Direction::Up, k, Some(cell));
                }
                if b[iw] >= 1 {
                    push(&[(iw, -1)], lam * w * stay, 3, Direction::Down, k, Some(cell));
                }

                // Stage 4: horizontal handover on LTE.
                let th = sr.horizontal[cell];
                if b[ic] >= n {
                    push(
                        &[(ia, n as i64), (ic, -(n as i64))],
                        (a + 1.0) * c * th,
                        4,
                        Direction::Up,
                        k,
                        Some(cell),
                    );
                }
                if b[ia] >= n {
                    push(
                        &[(ia, -(n as i64)), (ic, n as i64)],
                        a * (c + 1.0) * th,
                        4,
                        Direction::Down,
                        k,
                        Some(cell),
                    );
                }

                // Stage 5: vertical handover between C_0's LTE and C_i's Wi-Fi.
                let tv = sr.vertical[cell];
                if b[iw] >= 1 && lte_room {
                    push(
                        &[(iw, -1), (ia, n as i64)],
                        w * (a + 1.0) * tv,
                        5,
                        Direction::Up,
                        k,
                        Some(cell),
                    );
                }
                if b[ia] >= n && wifi_room {
                    push(
                        &[(ia, -(n as i64)), (iw, 1)],
                        (w + 1.0) * a * tv,
                        5,
                        Direction::Down,
                        k,
                        Some(cell),
                    );
                }

                // Stage 6: network switch inside the sub-cell.
                if b[iw] >= 1 && lte_room {
                    push(
                        &[(iw, -1), (ic, n as i64)],
                        (c + 1.0) * w * stay,
                        6,
                        Direction::Up,
                        k,
                        Some(cell),
                    );
                }
                if b[ic] >= n && wifi_room {
                    push(
                        &[(ic, -(n as i64)), (iw, 1)],
                        c * (w + 1.0) * stay,
                        6,
                        Direction::Down,
                        k,
                        Some(cell),
                    );
                }
            }
        }
        out
    }
}

impl TransitionRates for StageModel {
    fn transitions(&self, state: &OccupancyState) -> Vec<Transition> {
        self.stage_rates(state)
    }
}
