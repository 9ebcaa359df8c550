use super::ModelError;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Capacities {
    /// Unicast LTE bandwidth units shared by the whole cluster.
    pub lte_units: u32,
    /// Wi-Fi units per sub-cell.
    pub wifi_units: Vec<u32>,
}

/// Where each occupancy counter lives in the flat state vector.
///
/// The vector holds the LTE block first, zone by zone (`C_0`, then each
/// sub-cell) with one entry per service, followed by the Wi-Fi block,
/// sub-cell by sub-cell, again with one entry per service.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateLayout {
    prb: Vec<u32>,
    subcells: usize,
}

impl StateLayout {
    pub fn new(prb: Vec<u32>, subcells: usize) -> Self {
        assert!(prb.iter().all(|&n| n >= 1), "PRB demand must be >= 1");
        Self { prb, subcells }
    }

    pub fn services(&self) -> usize {
        self.prb.len()
    }

    pub fn subcells(&self) -> usize {
        self.subcells
    }

    pub fn prb(&self, service: usize) -> u32 {
        self.prb[service]
    }

    pub fn len(&self) -> usize {
        self.services() * (2 * self.subcells + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// LTE units of `service` in `C_0`.
    pub fn residual_lte(&self, service: usize) -> usize {
        service
    }

    /// LTE units of `service` in sub-cell `cell` (0-based).
    pub fn cell_lte(&self, cell: usize, service: usize) -> usize {
        (cell + 1) * self.services() + service
    }

    /// Wi-Fi units of `service` in sub-cell `cell` (0-based).
    pub fn cell_wifi(&self, cell: usize, service: usize) -> usize {
        self.services() * (self.subcells + 1) + cell * self.services() + service
    }

    fn lte_block(&self) -> usize {
        self.services() * (self.subcells + 1)
    }

    pub fn lte_total(&self, s: &OccupancyState) -> u32 {
        s.0[..self.lte_block()].iter().sum()
    }

    pub fn wifi_total(&self, s: &OccupancyState, cell: usize) -> u32 {
        (0..self.services()).map(|k| s.0[self.cell_wifi(cell, k)]).sum()
    }

    /// `Σ_j (b_{1j} + b_j) / (B_1 + B_i)` for sub-cell `cell`.
    pub fn occupancy_fraction(&self, s: &OccupancyState, caps: &Capacities, cell: usize) -> f64 {
        let denom = caps.lte_units + caps.wifi_units[cell];
        if denom == 0 {
            return 0.0;
        }
        (self.lte_total(s) + self.wifi_total(s, cell)) as f64 / denom as f64
    }

    /// Whether the state satisfies every capacity and granularity constraint.
    pub fn admissible(&self, s: &OccupancyState, caps: &Capacities) -> bool {
        if s.0.len() != self.len() || caps.wifi_units.len() != self.subcells {
            return false;
        }
        let granular = (0..=self.subcells)
            .all(|zone| (0..self.services()).all(|k| s.0[zone * self.services() + k].is_multiple_of(self.prb[k])));
        granular
            && self.lte_total(s) <= caps.lte_units
            && (0..self.subcells).all(|i| self.wifi_total(s, i) <= caps.wifi_units[i])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OccupancyState(pub Vec<u32>);

impl OccupancyState {
    pub fn zeros(layout: &StateLayout) -> Self {
        Self(vec![0; layout.len()])
    }

    pub fn units(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for OccupancyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Indexed, lexicographically ordered enumeration of every admissible state.
#[derive(Clone, Debug)]
pub struct StateSpace {
    layout: StateLayout,
    caps: Capacities,
    states: Vec<OccupancyState>,
    index: HashMap<OccupancyState, usize>,
}

impl StateSpace {
    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    pub fn capacities(&self) -> &Capacities {
        &self.caps
    }

    pub fn states(&self) -> &[OccupancyState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: &OccupancyState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn state(&self, idx: usize) -> &OccupancyState {
        &self.states[idx]
    }
}

pub fn enumerate_states(layout: &StateLayout, caps: &Capacities, cap_limit: usize) -> Result<StateSpace, ModelError> {
    if caps.wifi_units.len() != layout.subcells() {
        return Err(ModelError::LayoutMismatch {
            expected: layout.subcells(),
            got: caps.wifi_units.len(),
        });
    }
    let s = layout.services();
    let lte_slots = s * (layout.subcells() + 1);
    let mut states = Vec::new();
    let mut current = vec![0u32; layout.len()];

    // Depth-first in position order with increasing values yields
    // lexicographic order directly.
    struct Walk<'a> {
        layout: &'a StateLayout,
        caps: &'a Capacities,
        lte_slots: usize,
        cap_limit: usize,
        out: &'a mut Vec<OccupancyState>,
    }

    impl Walk<'_> {
        fn go(&mut self, pos: usize, cur: &mut Vec<u32>, lte_left: u32, wifi_left: u32) -> Result<(), ModelError> {
            if pos == cur.len() {
                if self.out.len() >= self.cap_limit {
                    return Err(ModelError::StateSpaceTooLarge { cap: self.cap_limit });
                }
                self.out.push(OccupancyState(cur.clone()));
                return Ok(());
            }
            let s = self.layout.services();
            if pos < self.lte_slots {
                let step = self.layout.prb(pos % s);
                let mut v = 0;
                while v <= lte_left {
                    cur[pos] = v;
                    let next_wifi = if pos + 1 == self.lte_slots {
                        self.caps.wifi_units.first().copied().unwrap_or(0)
                    } else {
                        wifi_left
                    };
                    self.go(pos + 1, cur, lte_left - v, next_wifi)?;
                    v += step;
                }
            } else {
                let offset = pos - self.lte_slots;
                let (cell, k) = (offset / s, offset % s);
                for v in 0..=wifi_left {
                    cur[pos] = v;
                    let next_wifi = if k + 1 == s {
                        self.caps.wifi_units.get(cell + 1).copied().unwrap_or(0)
                    } else {
                        wifi_left - v
                    };
                    self.go(pos + 1, cur, lte_left, next_wifi)?;
                }
            }
            cur[pos] = 0;
            Ok(())
        }
    }

    let first_wifi = if lte_slots == 0 {
        caps.wifi_units.first().copied().unwrap_or(0)
    } else {
        0
    };
    Walk {
        layout,
        caps,
        lte_slots,
        cap_limit,
        out: &mut states,
    }
    .go(0, &mut current, caps.lte_units, first_wifi)?;

    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(StateSpace {
        layout: layout.clone(),
        caps: caps.clone(),
        states,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force: every vector in the bounding box, filtered by the
    /// constraints.
    fn brute_force(layout: &StateLayout, caps: &Capacities) -> Vec<Vec<u32>> {
        let n = layout.len();
        let bound = caps.lte_units.max(caps.wifi_units.iter().copied().max().unwrap_or(0));
        let mut out = Vec::new();
        let mut v = vec![0u32; n];
        loop {
            let s = OccupancyState(v.clone());
            if layout.admissible(&s, caps) {
                out.push(v.clone());
            }
            let mut p = n;
            loop {
                if p == 0 {
                    return out;
                }
                p -= 1;
                if v[p] < bound {
                    v[p] += 1;
                    break;
                }
                v[p] = 0;
            }
        }
    }

    #[test]
    fn twelve_state_reference() {
        let layout = StateLayout::new(vec![1], 1);
        let caps = Capacities {
            lte_units: 2,
            wifi_units: vec![1],
        };
        let sp = enumerate_states(&layout, &caps, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(sp.len(), 12);
        let expected = brute_force(&layout, &caps);
        let got: Vec<Vec<u32>> = sp.states().iter().map(|s| s.0.clone()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn granular_prb_reference() {
        let layout = StateLayout::new(vec![2], 1);
        let caps = Capacities {
            lte_units: 2,
            wifi_units: vec![1],
        };
        let sp = enumerate_states(&layout, &caps, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(sp.len(), 6);
    }

    #[test]
    fn all_zero_capacity() {
        let layout = StateLayout::new(vec![1], 1);
        let caps = Capacities {
            lte_units: 0,
            wifi_units: vec![0],
        };
        let sp = enumerate_states(&layout, &caps, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(sp.states(), &[OccupancyState(vec![0, 0, 0])]);
    }

    #[test]
    fn cap_is_enforced() {
        let layout = StateLayout::new(vec![1, 1], 1);
        let caps = Capacities {
            lte_units: 10,
            wifi_units: vec![4],
        };
        let r = enumerate_states(&layout, &caps, 100);
        assert!(matches!(r, Err(ModelError::StateSpaceTooLarge { cap: 100 })));
    }

    #[test]
    fn table5_sized_space() {
        // 60 LTE units with PRB demands 10 and 20; 5 Wi-Fi units.
        let layout = StateLayout::new(vec![10, 20], 1);
        let caps = Capacities {
            lte_units: 60,
            wifi_units: vec![5],
        };
        let sp = enumerate_states(&layout, &caps, DEFAULT_STATE_CAP).unwrap();
        // LTE: Σ over (n1, n2) with 10 n1 + 20 n2 <= 60 of (n1+1)(n2+1) = 80;
        // Wi-Fi: pairs with sum <= 5 = 21.
        assert_eq!(sp.len(), 80 * 21);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn matches_brute_force(
            prb in proptest::collection::vec(1u32..3, 1..3),
            subcells in 0usize..3,
            lte in 0u32..4,
            wifi in proptest::collection::vec(0u32..3, 2),
        ) {
            let layout = StateLayout::new(prb, subcells);
            if layout.len() > 7 {
                return Ok(());
            }
            let caps = Capacities { lte_units: lte, wifi_units: wifi[..subcells].to_vec() };
            let sp = enumerate_states(&layout, &caps, DEFAULT_STATE_CAP).unwrap();
            let got: Vec<Vec<u32>> = sp.states().iter().map(|s| s.0.clone()).collect();
            prop_assert_eq!(got, brute_force(&layout, &caps));
            for (i, s) in sp.states().iter().enumerate() {
                prop_assert_eq!(sp.index_of(s), Some(i));
            }
        }
    }
}
