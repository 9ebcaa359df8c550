//! User-level discrete-event simulation: random-waypoint users, Poisson
//! session arrivals, bit-rate based network selection and handovers on
//! zone crossings.

use super::queue::EventQueue;
use super::trajectory::{leg_speed, segment_circle_crossings, uniform_in_disk};
use super::SimError;
use crate::demand::ServiceProfile;
use crate::geometry::{ClusterGeometry, Point, ZoneId};
use crate::markov::{Capacities, OccupancyState, SelectionRule, StateLayout, StateSpace};
use crate::mobility::RwpParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Network {
    Lte,
    /// Wi-Fi access point of a sub-cell (0-based).
    Wifi(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    Connect(Network),
    Blocked,
}

/// Network choice for a new (or handed-over) session of `service` in
/// `zone`, given the current occupancy. `C_0` only offers LTE. In a
/// sub-cell the LTE rate scaled by the cell's occupancy is compared with
/// the nominal Wi-Fi rate among networks with room; ties go to LTE and no
/// rule means LTE whenever it has room.
pub fn select_network(
    zone: ZoneId,
    state: &OccupancyState,
    layout: &StateLayout,
    caps: &Capacities,
    service: usize,
    selection: Option<&SelectionRule>,
) -> Decision {
    let lte_room = layout.lte_total(state) + layout.prb(service) <= caps.lte_units;
    let Some(cell) = zone.subcell_index() else {
        return if lte_room {
            Decision::Connect(Network::Lte)
        } else {
            Decision::Blocked
        };
    };
    let wifi_room = layout.wifi_total(state, cell) < caps.wifi_units[cell];
    let prefers_lte = selection.is_none_or(|rule| rule.prefers_lte(layout.occupancy_fraction(state, caps, cell)));
    match (lte_room, wifi_room) {
        (true, false) => Decision::Connect(Network::Lte),
        (true, true) if prefers_lte => Decision::Connect(Network::Lte),
        (_, true) => Decision::Connect(Network::Wifi(cell)),
        (false, false) => Decision::Blocked,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserAgent {
    pub position: Point,
    pub waypoint: Point,
    pub speed: f64,
    pub pause_remaining: f64,
    /// Zone of `position`.
    pub zone: ZoneId,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZoneCrossing {
    /// Time into the step at which the boundary is crossed.
    pub offset: f64,
    pub from: ZoneId,
    pub to: ZoneId,
}

/// Uniform waypoint, uniform speed, exponential pause.
fn next_leg<R: Rng + ?Sized>(agent: &mut UserAgent, geom: &ClusterGeometry, params: &RwpParams, rng: &mut R) {
    agent.pause_remaining = if params.pause_mean_s > 0.0 {
        Exp::new(1.0 / params.pause_mean_s).expect("positive rate").sample(rng)
    } else {
        0.0
    };
    agent.waypoint = uniform_in_disk(rng, geom.service_radius_m);
    agent.speed = leg_speed(rng, params);
}

pub fn spawn_agent<R: Rng + ?Sized>(geom: &ClusterGeometry, params: &RwpParams, rng: &mut R) -> UserAgent {
    let position = uniform_in_disk(rng, geom.service_radius_m);
    let mut agent = UserAgent {
        position,
        waypoint: position,
        speed: params.v_max_mps,
        pause_remaining: 0.0,
        zone: geom.zone_of(&position).unwrap_or(ZoneId::Residual),
    };
    next_leg(&mut agent, geom, params, rng);
    agent
}

/// Moves the agent for `dt` seconds, starting new legs at waypoints, and
/// returns every sub-cell boundary crossing in time order.
pub fn step_mobility<R: Rng + ?Sized>(
    agent: &mut UserAgent,
    dt: f64,
    geom: &ClusterGeometry,
    params: &RwpParams,
    rng: &mut R,
) -> Vec<ZoneCrossing> {
    let mut events = Vec::new();
    let mut elapsed = 0.0;
    while elapsed < dt {
        let remaining = dt - elapsed;
        if agent.pause_remaining > 0.0 {
            let p = agent.pause_remaining.min(remaining);
            agent.pause_remaining -= p;
            elapsed += p;
            continue;
        }
        let dist = agent.position.distance(&agent.waypoint);
        let travel = dist / agent.speed;
        let (end, duration, arrived) = if travel <= remaining {
            (agent.waypoint, travel, true)
        } else {
            let f = remaining * agent.speed / dist;
            let p = agent.position;
            let w = agent.waypoint;
            (
                Point::new(p.x + f * (w.x - p.x), p.y + f * (w.y - p.y)),
                remaining,
                false,
            )
        };
        let mut hits: Vec<(f64, usize, bool)> = Vec::new();
        for (i, c) in geom.subcells.iter().enumerate() {
            for x in segment_circle_crossings(agent.position, end, c.center(), c.radius_m) {
                hits.push((x.t, i, x.entering));
            }
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, i, entering) in hits {
            let to = if entering {
                ZoneId::from_subcell_index(i)
            } else {
                ZoneId::Residual
            };
            if to != agent.zone {
                events.push(ZoneCrossing {
                    offset: elapsed + t * duration,
                    from: agent.zone,
                    to,
                });
                agent.zone = to;
            }
        }
        agent.position = end;
        elapsed += duration;
        if arrived {
            next_leg(agent, geom, params, rng);
        }
    }
    events
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub geometry: ClusterGeometry,
    pub mobility: RwpParams,
    pub services: Vec<ServiceProfile>,
    pub capacities: Capacities,
    pub users: usize,
    pub horizon_s: f64,
    pub seed: u64,
    /// ChaCha stream, one per replication.
    pub stream: u64,
    pub warmup_fraction: f64,
    pub selection: Option<SelectionRule>,
    /// Users keep their initial position for the whole run.
    pub static_users: bool,
}

impl SimConfig {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.horizon_s > 0.0) {
            out.push("horizon_s must be > 0".to_string());
        }
        if self.users == 0 {
            out.push("users must be >= 1".to_string());
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            out.push("warmup_fraction must be in [0, 1)".to_string());
        }
        if self.services.is_empty() {
            out.push("at least one service is required".to_string());
        }
        if self.capacities.wifi_units.len() != self.geometry.subcells.len() {
            out.push(format!(
                "{} Wi-Fi capacities for {} sub-cells",
                self.capacities.wifi_units.len(),
                self.geometry.subcells.len()
            ));
        }
        out.extend(self.geometry.validate().iter().map(|v| v.to_string()));
        out.extend(self.mobility.problems());
        for s in &self.services {
            out.extend(s.problems());
        }
        out
    }

    fn layout(&self) -> StateLayout {
        StateLayout::new(
            self.services.iter().map(|s| s.prb_demand).collect(),
            self.geometry.subcells.len(),
        )
    }

    /// Mobility step: a user at full speed covers a tenth of the smallest
    /// sub-cell radius.
    pub fn mobility_step(&self) -> f64 {
        let r = self
            .geometry
            .subcells
            .iter()
            .map(|c| c.radius_m)
            .fold(self.geometry.service_radius_m, f64::min);
        r / 10.0 / self.mobility.v_max_mps
    }
}

fn serialize_histogram<S: Serializer>(h: &BTreeMap<Vec<u32>, f64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(h.iter())
}

/// Aggregates over the observation window. All fields are additive, so
/// replications merge by summation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub replications: u32,
    /// Sum over replications of the post-warm-up window.
    pub observed_time: f64,
    pub events: u64,
    /// Time spent in each occupancy state, keyed by the flat state vector.
    #[serde(serialize_with = "serialize_histogram")]
    pub state_time: BTreeMap<Vec<u32>, f64>,
    /// Connection attempts per zone (`C_0` first) and service.
    pub attempts: Vec<Vec<u64>>,
    pub blocked: Vec<Vec<u64>>,
    pub horizontal_handovers: u64,
    pub vertical_handovers: u64,
    pub connection_losses: u64,
    /// User-seconds spent in each zone, `C_0` first.
    pub zone_user_time: Vec<f64>,
    pub cell_entries: Vec<u64>,
    /// LTE units taken and returned over the whole run, then Wi-Fi per cell.
    pub units_acquired: Vec<u64>,
    pub units_released: Vec<u64>,
    pub units_held: Vec<u64>,
}

impl SimReport {
    fn empty(zones: usize, services: usize) -> Self {
        Self {
            replications: 1,
            observed_time: 0.0,
            events: 0,
            state_time: BTreeMap::new(),
            attempts: vec![vec![0; services]; zones],
            blocked: vec![vec![0; services]; zones],
            horizontal_handovers: 0,
            vertical_handovers: 0,
            connection_losses: 0,
            zone_user_time: vec![0.0; zones],
            cell_entries: vec![0; zones - 1],
            units_acquired: vec![0; zones],
            units_released: vec![0; zones],
            units_held: vec![0; zones],
        }
    }

    pub fn frequencies(&self) -> BTreeMap<Vec<u32>, f64> {
        let total: f64 = self.state_time.values().sum();
        self.state_time.iter().map(|(k, v)| (k.clone(), v / total)).collect()
    }

    /// Total-variation distance to a distribution over `space`.
    pub fn tv_distance(&self, space: &StateSpace, pi: &[f64]) -> f64 {
        let freq = self.frequencies();
        let mut acc = 0.0;
        for (s, &p) in space.states().iter().zip(pi) {
            acc += (freq.get(&s.0).copied().unwrap_or(0.0) - p).abs();
        }
        for (k, &f) in &freq {
            if space.index_of(&OccupancyState(k.clone())).is_none() {
                acc += f;
            }
        }
        0.5 * acc
    }

    /// `None` when nothing was attempted.
    pub fn blocking_ratio(&self, zone: usize, service: usize) -> Option<f64> {
        let n = self.attempts[zone][service];
        (n > 0).then(|| self.blocked[zone][service] as f64 / n as f64)
    }

    pub fn total_user_time(&self) -> f64 {
        self.zone_user_time.iter().sum()
    }

    pub fn zone_occupancy(&self, zone: usize) -> f64 {
        self.zone_user_time[zone] / self.total_user_time()
    }

    /// Entries into sub-cell `cell` per user-second.
    pub fn crossing_rate(&self, cell: usize) -> f64 {
        self.cell_entries[cell] as f64 / self.total_user_time()
    }

    pub fn sojourn_time(&self, cell: usize) -> Option<f64> {
        let n = self.cell_entries[cell];
        (n > 0).then(|| self.zone_user_time[cell + 1] / n as f64)
    }

    pub fn merge(&mut self, other: &SimReport) {
        fn add<T: Copy + std::ops::AddAssign>(a: &mut [T], b: &[T]) {
            a.iter_mut().zip(b).for_each(|(x, &y)| *x += y);
        }
        self.replications += other.replications;
        self.observed_time += other.observed_time;
        self.events += other.events;
        for (k, v) in &other.state_time {
            *self.state_time.entry(k.clone()).or_insert(0.0) += v;
        }
        for (a, b) in self.attempts.iter_mut().zip(&other.attempts) {
            add(a, b);
        }
        for (a, b) in self.blocked.iter_mut().zip(&other.blocked) {
            add(a, b);
        }
        self.horizontal_handovers += other.horizontal_handovers;
        self.vertical_handovers += other.vertical_handovers;
        self.connection_losses += other.connection_losses;
        add(&mut self.zone_user_time, &other.zone_user_time);
        add(&mut self.cell_entries, &other.cell_entries);
        add(&mut self.units_acquired, &other.units_acquired);
        add(&mut self.units_released, &other.units_released);
        add(&mut self.units_held, &other.units_held);
    }
}

enum Event {
    Arrival(usize),
    Departure(usize),
    Tick,
    Crossing { user: usize, to: ZoneId },
    End,
}

struct Session {
    user: usize,
    service: usize,
    network: Network,
    zone: ZoneId,
    alive: bool,
}

fn zone_slot(zone: ZoneId) -> usize {
    zone.subcell_index().map_or(0, |i| i + 1)
}

fn network_slot(network: Network) -> usize {
    match network {
        Network::Lte => 0,
        Network::Wifi(i) => i + 1,
    }
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    layout: StateLayout,
    state: OccupancyState,
    sessions: Vec<Session>,
    user_sessions: Vec<Vec<usize>>,
    user_zone: Vec<ZoneId>,
    zone_population: Vec<usize>,
    report: SimReport,
    clock: f64,
    warmup: f64,
}

impl Engine<'_> {
    fn units(&self, service: usize, network: Network) -> u32 {
        match network {
            Network::Lte => self.layout.prb(service),
            Network::Wifi(_) => 1,
        }
    }

    fn slot(&self, service: usize, network: Network, zone: ZoneId) -> usize {
        match (network, zone.subcell_index()) {
            (Network::Wifi(i), _) => self.layout.cell_wifi(i, service),
            (Network::Lte, None) => self.layout.residual_lte(service),
            (Network::Lte, Some(i)) => self.layout.cell_lte(i, service),
        }
    }

    fn acquire(&mut self, service: usize, network: Network, zone: ZoneId) {
        let u = self.units(service, network);
        let slot = self.slot(service, network, zone);
        self.state.0[slot] += u;
        self.report.units_acquired[network_slot(network)] += u as u64;
    }

    fn release(&mut self, service: usize, network: Network, zone: ZoneId) {
        let u = self.units(service, network);
        let slot = self.slot(service, network, zone);
        self.state.0[slot] -= u;
        self.report.units_released[network_slot(network)] += u as u64;
    }

    /// Accrues time-weighted statistics up to `t`.
    fn advance(&mut self, t: f64) {
        let from = self.clock.max(self.warmup);
        if t > from {
            let dt = t - from;
            *self.report.state_time.entry(self.state.0.clone()).or_insert(0.0) += dt;
            for (z, &n) in self.zone_population.iter().enumerate() {
                self.report.zone_user_time[z] += n as f64 * dt;
            }
            self.report.observed_time += dt;
        }
        self.clock = t;
    }

    fn observing(&self) -> bool {
        self.clock >= self.warmup
    }

    fn decide(&self, zone: ZoneId, service: usize) -> Decision {
        select_network(
            zone,
            &self.state,
            &self.layout,
            &self.cfg.capacities,
            service,
            self.cfg.selection.as_ref(),
        )
    }

    fn check(&self) -> Result<(), SimError> {
        let caps = &self.cfg.capacities;
        let lte = self.layout.lte_total(&self.state);
        let mut ok = lte <= caps.lte_units;
        for i in 0..self.layout.subcells() {
            ok &= self.layout.wifi_total(&self.state, i) <= caps.wifi_units[i];
        }
        if !ok {
            return Err(SimError::CapacityViolated { time: self.clock });
        }
        let mut held = vec![lte as u64];
        held.extend((0..self.layout.subcells()).map(|i| self.layout.wifi_total(&self.state, i) as u64));
        for (n, &h) in held.iter().enumerate() {
            if self.report.units_acquired[n] - self.report.units_released[n] != h {
                return Err(SimError::UnitsNotConserved { time: self.clock });
            }
        }
        Ok(())
    }

    fn handover(&mut self, user: usize, to: ZoneId) {
        let from = self.user_zone[user];
        self.zone_population[zone_slot(from)] -= 1;
        self.zone_population[zone_slot(to)] += 1;
        self.user_zone[user] = to;
        let observing = self.observing();
        if let (true, Some(i)) = (observing, to.subcell_index()) {
            self.report.cell_entries[i] += 1;
        }
        let ids = std::mem::take(&mut self.user_sessions[user]);
        let mut kept = Vec::with_capacity(ids.len());
        for id in ids {
            let (service, old, zone) = {
                let s = &self.sessions[id];
                (s.service, s.network, s.zone)
            };
            self.release(service, old, zone);
            match self.decide(to, service) {
                Decision::Connect(net) => {
                    self.acquire(service, net, to);
                    let s = &mut self.sessions[id];
                    s.network = net;
                    s.zone = to;
                    kept.push(id);
                    if observing {
                        if net == old {
                            self.report.horizontal_handovers += 1;
                        } else {
                            self.report.vertical_handovers += 1;
                        }
                    }
                }
                Decision::Blocked => {
                    self.sessions[id].alive = false;
                    if observing {
                        self.report.connection_losses += 1;
                    }
                }
            }
        }
        self.user_sessions[user] = kept;
    }
}

/// Runs one replication. The same configuration always yields the same
/// report.
pub fn run(cfg: &SimConfig) -> Result<SimReport, SimError> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(SimError::ConfigInvalid(problems));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(cfg.stream);
    let layout = cfg.layout();
    let zones = layout.subcells() + 1;
    let mut agents: Vec<UserAgent> = (0..cfg.users)
        .map(|_| spawn_agent(&cfg.geometry, &cfg.mobility, &mut rng))
        .collect();
    let user_zone: Vec<ZoneId> = agents.iter().map(|a| a.zone).collect();
    let mut zone_population = vec![0; zones];
    for z in &user_zone {
        zone_population[zone_slot(*z)] += 1;
    }
    let mut engine = Engine {
        cfg,
        state: OccupancyState::zeros(&layout),
        layout,
        sessions: Vec::new(),
        user_sessions: vec![Vec::new(); cfg.users],
        user_zone,
        zone_population,
        report: SimReport::empty(zones, cfg.services.len()),
        clock: 0.0,
        warmup: cfg.warmup_fraction * cfg.horizon_s,
    };
    let arrivals: Vec<Option<Exp<f64>>> = cfg
        .services
        .iter()
        .map(|s| (s.cluster_arrival_rate > 0.0).then(|| Exp::new(s.cluster_arrival_rate).expect("positive rate")))
        .collect();
    let holding: Vec<Exp<f64>> = cfg
        .services
        .iter()
        .map(|s| Exp::new(1.0 / s.mean_holding_time_s).expect("positive rate"))
        .collect();
    let mut queue = EventQueue::new();
    for (k, a) in arrivals.iter().enumerate() {
        if let Some(a) = a {
            queue.push(a.sample(&mut rng), Event::Arrival(k));
        }
    }
    let dt = cfg.mobility_step();
    if !cfg.static_users {
        queue.push(0.0, Event::Tick);
    }
    queue.push(cfg.horizon_s, Event::End);

    while let Some((t, event)) = queue.pop() {
        engine.advance(t);
        match event {
            Event::End => break,
            Event::Tick => {
                for (u, agent) in agents.iter_mut().enumerate() {
                    for c in step_mobility(agent, dt, &cfg.geometry, &cfg.mobility, &mut rng) {
                        queue.push(t + c.offset, Event::Crossing { user: u, to: c.to });
                    }
                }
                queue.push(t + dt, Event::Tick);
                continue;
            }
            Event::Crossing { user, to } => engine.handover(user, to),
            Event::Arrival(k) => {
                let rate = arrivals[k].as_ref().expect("scheduled only with a rate");
                queue.push(t + rate.sample(&mut rng), Event::Arrival(k));
                let user = rng.random_range(0..cfg.users);
                let zone = engine.user_zone[user];
                if engine.observing() {
                    engine.report.attempts[zone_slot(zone)][k] += 1;
                }
                match engine.decide(zone, k) {
                    Decision::Connect(net) => {
                        engine.acquire(k, net, zone);
                        let id = engine.sessions.len();
                        engine.sessions.push(Session {
                            user,
                            service: k,
                            network: net,
                            zone,
                            alive: true,
                        });
                        engine.user_sessions[user].push(id);
                        queue.push(t + holding[k].sample(&mut rng), Event::Departure(id));
                    }
                    Decision::Blocked => {
                        if engine.observing() {
                            engine.report.blocked[zone_slot(zone)][k] += 1;
                        }
                    }
                }
            }
            Event::Departure(id) => {
                if !engine.sessions[id].alive {
                    continue;
                }
                let (user, service, net, zone) = {
                    let s = &mut engine.sessions[id];
                    s.alive = false;
                    (s.user, s.service, s.network, s.zone)
                };
                engine.release(service, net, zone);
                engine.user_sessions[user].retain(|&x| x != id);
            }
        }
        engine.check()?;
        if engine.observing() {
            engine.report.events += 1;
        }
    }
    let mut report = engine.report;
    report.units_held = report
        .units_acquired
        .iter()
        .zip(&report.units_released)
        .map(|(a, r)| a - r)
        .collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SubCell;
    use crate::markov::{enumerate_states, DEFAULT_STATE_CAP};

    fn one_cell() -> ClusterGeometry {
        ClusterGeometry::new(600.0, vec![SubCell::new(200.0, 300.0, 0.0)])
    }

    fn layout() -> StateLayout {
        StateLayout::new(vec![1], 1)
    }

    fn caps() -> Capacities {
        Capacities {
            lte_units: 2,
            wifi_units: vec![1],
        }
    }

    fn rule() -> SelectionRule {
        SelectionRule {
            lte_bitrate: 100.0,
            sensitivity: 1.0,
            wifi_bitrate: 50.0,
        }
    }

    #[test]
    fn empty_cell_prefers_faster_lte() {
        let s = OccupancyState(vec![0, 0, 0]);
        let d = select_network(ZoneId::Subcell(2), &s, &layout(), &caps(), 0, Some(&rule()));
        assert_eq!(d, Decision::Connect(Network::Lte));
    }

    #[test]
    fn saturated_lte_falls_back_to_wifi() {
        let s = OccupancyState(vec![1, 1, 0]);
        let d = select_network(ZoneId::Subcell(2), &s, &layout(), &caps(), 0, Some(&rule()));
        assert_eq!(d, Decision::Connect(Network::Wifi(0)));
    }

    #[test]
    fn both_saturated_blocks() {
        let s = OccupancyState(vec![2, 0, 1]);
        assert_eq!(
            select_network(ZoneId::Subcell(2), &s, &layout(), &caps(), 0, None),
            Decision::Blocked
        );
        assert_eq!(
            select_network(ZoneId::Residual, &s, &layout(), &caps(), 0, None),
            Decision::Blocked
        );
    }

    #[test]
    fn congested_lte_loses_to_wifi() {
        // occupancy 1/3: 100·(1 − √⅓) ≈ 42 < 50
        let s = OccupancyState(vec![1, 0, 0]);
        let d = select_network(ZoneId::Subcell(2), &s, &layout(), &caps(), 0, Some(&rule()));
        assert_eq!(d, Decision::Connect(Network::Wifi(0)));
        let tie = SelectionRule {
            wifi_bitrate: 100.0,
            sensitivity: 0.0,
            ..rule()
        };
        let d = select_network(ZoneId::Subcell(2), &s, &layout(), &caps(), 0, Some(&tie));
        assert_eq!(d, Decision::Connect(Network::Lte));
    }

    fn agent_at(p: Point, w: Point, geom: &ClusterGeometry) -> UserAgent {
        UserAgent {
            position: p,
            waypoint: w,
            speed: 10.0,
            pause_remaining: 0.0,
            zone: geom.zone_of(&p).unwrap(),
        }
    }

    #[test]
    fn leg_inside_residual_zone_has_no_events() {
        let geom = one_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = agent_at(Point::new(-500.0, 0.0), Point::new(-300.0, 0.0), &geom);
        let ev = step_mobility(&mut a, 10.0, &geom, &RwpParams::default(), &mut rng);
        assert!(ev.is_empty());
        assert_eq!(a.position, Point::new(-400.0, 0.0));
    }

    #[test]
    fn straight_leg_through_subcell() {
        let geom = one_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = agent_at(Point::new(0.0, 0.0), Point::new(590.0, 0.0), &geom);
        let ev = step_mobility(&mut a, 59.0, &geom, &RwpParams::default(), &mut rng);
        // boundary at x = 100 and x = 500
        assert_eq!(ev.len(), 2);
        assert!((ev[0].offset - 10.0).abs() < 1e-9);
        assert_eq!((ev[0].from, ev[0].to), (ZoneId::Residual, ZoneId::Subcell(2)));
        assert!((ev[1].offset - 50.0).abs() < 1e-9);
        assert_eq!((ev[1].from, ev[1].to), (ZoneId::Subcell(2), ZoneId::Residual));
    }

    #[test]
    fn zero_pause_at_waypoint_starts_new_leg() {
        let geom = one_cell();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = Point::new(-500.0, 0.0);
        let mut a = agent_at(p, p, &geom);
        step_mobility(&mut a, 1.0, &geom, &RwpParams::default(), &mut rng);
        assert_ne!(a.position, p);
        assert!(a.speed > 0.0 && a.speed <= 10.0);
    }

    fn static_config(rate: f64, holding: f64, cap: u32) -> SimConfig {
        SimConfig {
            geometry: ClusterGeometry::new(600.0, vec![]),
            mobility: RwpParams::default(),
            services: vec![ServiceProfile::new(1, rate, holding, 1)],
            capacities: Capacities {
                lte_units: cap,
                wifi_units: vec![],
            },
            users: 10,
            horizon_s: 0.0,
            seed: 11,
            stream: 0,
            warmup_fraction: 0.1,
            selection: None,
            static_users: true,
        }
    }

    #[test]
    fn static_users_follow_truncated_erlang() {
        let cfg = SimConfig {
            horizon_s: 6.0e5,
            ..static_config(1.0, 1.5, 4)
        };
        let r = run(&cfg).unwrap();
        assert!(r.events >= 900_000);
        let rho: f64 = 1.5;
        let w: Vec<f64> = (0..=4)
            .map(|b| rho.powi(b) / (1..=b).map(f64::from).product::<f64>())
            .collect();
        let z: f64 = w.iter().sum();
        let sp = enumerate_states(&StateLayout::new(vec![1], 0), &cfg.capacities, DEFAULT_STATE_CAP).unwrap();
        let pi: Vec<f64> = w.iter().map(|v| v / z).collect();
        let tv = r.tv_distance(&sp, &pi);
        assert!(tv < 0.05, "tv {tv}");
        // Erlang-B with 4 servers
        let b = r.blocking_ratio(0, 0).unwrap();
        assert!((b - pi[4]).abs() < 0.01, "blocking {b} vs {}", pi[4]);
    }

    #[test]
    fn zero_arrivals_never_leave_empty_state() {
        let cfg = SimConfig {
            horizon_s: 100.0,
            ..static_config(0.0, 1.0, 3)
        };
        let r = run(&cfg).unwrap();
        assert_eq!(r.state_time.len(), 1);
        assert_eq!(r.frequencies()[&vec![0]], 1.0);
        assert_eq!(r.blocking_ratio(0, 0), None);
    }

    fn mobile_config(seed: u64) -> SimConfig {
        SimConfig {
            geometry: one_cell(),
            mobility: RwpParams::default(),
            services: vec![
                ServiceProfile::new(1, 0.7, 5.0, 10),
                ServiceProfile::new(2, 0.7, 5.0, 20),
            ],
            capacities: Capacities {
                lte_units: 60,
                wifi_units: vec![5],
            },
            users: 20,
            horizon_s: 2000.0,
            seed,
            stream: 0,
            warmup_fraction: 0.1,
            selection: None,
            static_users: false,
        }
    }

    #[test]
    fn mobile_run_is_deterministic_and_conserves_units() {
        let a = run(&mobile_config(5)).unwrap();
        let b = run(&mobile_config(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.horizontal_handovers + a.vertical_handovers > 0);
        for n in 0..a.units_held.len() {
            assert_eq!(a.units_acquired[n] - a.units_released[n], a.units_held[n]);
        }
        let f: f64 = a.frequencies().values().sum();
        assert!((f - 1.0).abs() < 1e-12);
        for z in 0..2 {
            for k in 0..2 {
                if let Some(r) = a.blocking_ratio(z, k) {
                    assert!((0.0..=1.0).contains(&r));
                }
            }
        }
        assert_ne!(a, run(&mobile_config(6)).unwrap());
    }

    #[test]
    fn merge_adds_counters() {
        let a = run(&mobile_config(1)).unwrap();
        let b = run(&mobile_config(2)).unwrap();
        let mut m = a.clone();
        m.merge(&b);
        assert_eq!(m.replications, 2);
        assert_eq!(m.events, a.events + b.events);
        assert_eq!(m.cell_entries[0], a.cell_entries[0] + b.cell_entries[0]);
    }

    #[test]
    fn invalid_config_is_reported() {
        let cfg = SimConfig {
            users: 0,
            ..static_config(1.0, 1.0, 1)
        };
        match run(&cfg) {
            Err(SimError::ConfigInvalid(p)) => assert!(p.iter().any(|m| m.contains("users"))),
            other => panic!("unexpected {other:?}"),
        }
    }
}
