//! Experiment configuration, read from TOML. Unknown keys are rejected.

use crate::demand::ServiceProfile;
use crate::geometry::{ClusterGeometry, SubCell};
use crate::markov::DEFAULT_STATE_CAP;
use crate::metrics::LinkProfile;
use crate::mobility::RwpParams;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Analytic,
    Simulate,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// `B_1`, LTE bandwidth units for the whole cluster.
    pub lte_units: u32,
    /// Wi-Fi units per sub-cell.
    pub wifi_units: Vec<u32>,
    #[serde(default = "default_switch_probability")]
    pub switch_probability: f64,
    pub wifi_bitrate_bps: f64,
    #[serde(default = "default_state_cap")]
    pub state_cap: usize,
}

fn default_switch_probability() -> f64 {
    0.5
}

fn default_state_cap() -> usize {
    DEFAULT_STATE_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityConfig {
    /// `Λ` values for the bit-rate curves.
    pub lambda: Vec<f64>,
    /// `Θ` values for the blocking curves.
    pub theta: Vec<f64>,
    /// `Λ` used by the network-selection rule inside the chain. Without it
    /// LTE is preferred whenever it has room.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_lambda: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Bler,
    Occupancy,
    OfferedLoad,
    LambdaFactor,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Bler => "bler",
            SweepVariable::Occupancy => "occupancy",
            SweepVariable::OfferedLoad => "offered_load",
            SweepVariable::LambdaFactor => "lambda_factor",
        }
    }

    fn domain(self) -> (f64, f64) {
        match self {
            SweepVariable::OfferedLoad => (0.0, f64::INFINITY),
            _ => (0.0, 1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    /// Occupancy fraction applied to every state during a BLER sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_occupancy: Option<f64>,
    /// Sub-cell (0-based) the metrics describe.
    #[serde(default)]
    pub subcell: usize,
}

impl SweepSpec {
    /// Evenly spaced points from `start` to `end` inclusive.
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps.max(2);
        (0..n)
            .map(|j| {
                if j == n - 1 {
                    self.end
                } else {
                    self.start + (self.end - self.start) * j as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Chain jumps per replication, warm-up included.
    #[serde(default = "default_events")]
    pub events: u64,
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: u32,
}

fn default_events() -> u64 {
    1_000_000
}

fn default_warmup() -> f64 {
    0.1
}

fn default_seed() -> u64 {
    1
}

fn default_replications() -> u32 {
    1
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            events: default_events(),
            warmup_fraction: default_warmup(),
            seed: default_seed(),
            replications: default_replications(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    pub geometry: ClusterGeometry,
    pub mobility: RwpParams,
    pub services: Vec<ServiceProfile>,
    pub networks: NetworkConfig,
    pub link: LinkProfile,
    pub sensitivity: SensitivityConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

impl ExperimentConfig {
    /// Two services sharing 60 LTE units in a 600 m cluster with one 200 m
    /// Wi-Fi sub-cell 300 m from the centre.
    pub fn table5() -> Self {
        Self {
            mode: Mode::Analytic,
            geometry: ClusterGeometry::new(600.0, vec![SubCell::new(200.0, 300.0, 0.0)]),
            mobility: RwpParams::default(),
            services: vec![
                ServiceProfile::new(1, 0.7, 5.0, 10),
                ServiceProfile::new(2, 0.7, 5.0, 20),
            ],
            networks: NetworkConfig {
                lte_units: 60,
                wifi_units: vec![5],
                switch_probability: 0.5,
                wifi_bitrate_bps: 54e6,
                state_cap: DEFAULT_STATE_CAP,
            },
            link: LinkProfile::reference(),
            sensitivity: SensitivityConfig {
                lambda: vec![1.0, 0.99],
                theta: vec![1.0, 0.8, 0.5],
                selection_lambda: Some(1.0),
            },
            sweep: None,
            simulation: SimulationConfig::default(),
        }
    }

    /// One service, one sub-cell, two LTE units and one Wi-Fi unit: a
    /// 12-state chain.
    pub fn small_reference() -> Self {
        Self {
            services: vec![ServiceProfile::new(1, 0.7, 5.0, 1)],
            networks: NetworkConfig {
                lte_units: 2,
                wifi_units: vec![1],
                ..Self::table5().networks
            },
            ..Self::table5()
        }
    }

    pub fn with_sweep(self, sweep: SweepSpec) -> Self {
        Self {
            sweep: Some(sweep),
            ..self
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        let problems = cfg.problems();
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    /// Every field-level problem, empty when the configuration is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .geometry
            .validate()
            .iter()
            .map(|v| format!("geometry: {v}"))
            .collect();
        let cells = self.geometry.subcells.len();
        if cells == 0 {
            out.push("geometry.subcells: at least one sub-cell is required".into());
        }
        out.extend(self.mobility.problems());
        if self.services.is_empty() {
            out.push("services: at least one service is required".into());
        }
        let mut ids = BTreeSet::new();
        for s in &self.services {
            if !ids.insert(s.id) {
                out.push(format!("services: duplicate id {}", s.id));
            }
            out.extend(s.problems());
        }
        let n = &self.networks;
        if n.wifi_units.len() != cells {
            out.push(format!(
                "networks.wifi_units has {} entries for {cells} sub-cells",
                n.wifi_units.len()
            ));
        }
        if !(0.0..=1.0).contains(&n.switch_probability) {
            out.push("networks.switch_probability must be in [0, 1]".into());
        }
        if !(n.wifi_bitrate_bps >= 0.0) || !n.wifi_bitrate_bps.is_finite() {
            out.push("networks.wifi_bitrate_bps must be finite and >= 0".into());
        }
        if n.state_cap == 0 {
            out.push("networks.state_cap must be >= 1".into());
        }
        out.extend(self.link.problems());
        let s = &self.sensitivity;
        for (name, list) in [("lambda", &s.lambda), ("theta", &s.theta)] {
            if list.is_empty() {
                out.push(format!("sensitivity.{name} must list at least one value"));
            }
            if list.iter().any(|v| !(0.0..=1.0).contains(v)) {
                out.push(format!("sensitivity.{name} values must be in [0, 1]"));
            }
        }
        if let Some(v) = s.selection_lambda {
            if !(0.0..=1.0).contains(&v) {
                out.push("sensitivity.selection_lambda must be in [0, 1]".into());
            }
        }
        if let Some(sw) = &self.sweep {
            let (lo, hi) = sw.variable.domain();
            for (name, v) in [("start", sw.start), ("end", sw.end)] {
                if !(v >= lo && v <= hi) {
                    out.push(format!(
                        "sweep.{name} = {v} outside the domain of {} [{lo}, {hi}]",
                        sw.variable.name()
                    ));
                }
            }
            if !(sw.start < sw.end) {
                out.push("sweep.start must be below sweep.end".into());
            }
            if sw.steps < 2 {
                out.push("sweep.steps must be >= 2".into());
            }
            if let Some(o) = sw.fixed_occupancy {
                if !(0.0..=1.0).contains(&o) {
                    out.push("sweep.fixed_occupancy must be in [0, 1]".into());
                }
            }
            if cells > 0 && sw.subcell >= cells {
                out.push(format!("sweep.subcell = {} but only {cells} sub-cells", sw.subcell));
            }
        }
        let sim = &self.simulation;
        if sim.events == 0 {
            out.push("simulation.events must be >= 1".into());
        }
        if !(0.0..1.0).contains(&sim.warmup_fraction) {
            out.push("simulation.warmup_fraction must be in [0, 1)".into());
        }
        if sim.replications == 0 {
            out.push("simulation.replications must be >= 1".into());
        }
        out
    }

    /// Sub-cell the metrics refer to.
    pub fn metric_subcell(&self) -> usize {
        self.sweep.as_ref().map_or(0, |s| s.subcell)
    }
}
