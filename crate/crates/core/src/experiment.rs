//! Builds the analytic model from a configuration and evaluates sweeps.
//!
//! The chain is solved once. Sweeps only change the metric layer: a BLER
//! sweep changes the link rate, an occupancy sweep conditions every state
//! on a fixed occupancy fraction, an offered-load sweep feeds the swept
//! load into Erlang-B, and a `lambda_factor` sweep replaces the `Λ` list.

use crate::config::{ExperimentConfig, SweepVariable};
use crate::demand::DemandRates;
use crate::markov::{
    build_generator, enumerate_states, stationary, Capacities, SelectionRule, StageModel, StateLayout, StateSpace,
    StationaryDistribution, TransitionModel,
};
use crate::metrics::{
    erlang_block, instantaneous_bitrate, mean_bitrate, mean_block, offered_load, service_weights, MetricContext,
};
use crate::mobility::{MobilityStats, SpatialDensity};
use crate::sim::{simulate_chain, ChainReport, ChainSimConfig};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Every intermediate of the analytic pipeline for one configuration.
#[derive(Clone, Debug)]
pub struct AnalyticModel {
    pub config: ExperimentConfig,
    pub mobility: MobilityStats,
    pub demand: DemandRates,
    pub space: StateSpace,
    pub rates: StageModel,
    pub generator: TransitionModel,
    pub stationary: StationaryDistribution,
}

impl AnalyticModel {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let problems = config.problems();
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        let density = SpatialDensity::shared().map_err(crate::mobility::MobilityError::from)?;
        let mobility = MobilityStats::compute(&config.geometry, density, &config.mobility)?;
        let demand = DemandRates::derive(&mobility, &config.services)?;
        let layout = StateLayout::new(
            config.services.iter().map(|s| s.prb_demand).collect(),
            config.geometry.subcells.len(),
        );
        let caps = Capacities {
            lte_units: config.networks.lte_units,
            wifi_units: config.networks.wifi_units.clone(),
        };
        let space = enumerate_states(&layout, &caps, config.networks.state_cap)?;
        let selection = config.sensitivity.selection_lambda.map(|l| SelectionRule {
            lte_bitrate: instantaneous_bitrate(&config.link),
            sensitivity: l,
            wifi_bitrate: config.networks.wifi_bitrate_bps,
        });
        let rates = StageModel::from_demand(
            layout,
            caps,
            &mobility,
            &demand,
            config.networks.switch_probability,
            selection,
        );
        let generator = build_generator(&space, &rates)?;
        let stationary = stationary(&generator)?;
        Ok(Self {
            config: config.clone(),
            mobility,
            demand,
            space,
            rates,
            generator,
            stationary,
        })
    }

    pub fn subcell(&self) -> usize {
        self.config.metric_subcell()
    }

    /// Offered load of the metric sub-cell, in erlangs.
    pub fn offered_load(&self) -> f64 {
        offered_load(&self.demand, &self.config.services, self.subcell())
    }

    /// Erlang-B blocking at `rho` with one server per service class.
    pub fn base_block(&self, rho: f64) -> f64 {
        erlang_block(rho, self.config.services.len() as u32)
    }

    pub fn metric_context(&self, occupancy: Option<f64>) -> MetricContext<'_> {
        MetricContext {
            space: &self.space,
            cell: self.subcell(),
            weights: service_weights(&self.demand, &self.config.services, self.subcell()),
            occupancy,
            normalizer: None,
        }
    }

    /// Jump simulation of the chain: `replications` independent streams of
    /// the same seed, merged in order.
    pub fn simulate(&self, seed: u64, replications: u32) -> Result<ChainReport> {
        let sim = &self.config.simulation;
        let reports = (0..replications.max(1) as u64)
            .into_par_iter()
            .map(|stream| {
                simulate_chain(
                    &self.space,
                    &self.rates,
                    &ChainSimConfig {
                        events: sim.events,
                        warmup_fraction: sim.warmup_fraction,
                        seed,
                        stream,
                        start: 0,
                    },
                )
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut merged = reports[0].clone();
        for r in &reports[1..] {
            merged.merge(r);
        }
        Ok(merged)
    }
}

/// One output line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub lambda_factor: f64,
    pub theta_factor: f64,
    pub mean_bitrate_bps: f64,
    pub mean_block_prob: f64,
    pub sim_bitrate_bps: Option<f64>,
    pub sim_block_prob: Option<f64>,
    pub sim_tv_distance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationRequest {
    pub seed: u64,
    pub replications: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// Evaluate the configured sweep instead of the base point.
    pub sweep: bool,
    pub simulation: Option<SimulationRequest>,
}

/// The swept quantity at one point, with `None` for the base evaluation.
#[derive(Clone, Copy, Debug)]
struct Point {
    variable: Option<SweepVariable>,
    value: f64,
}

fn evaluate_point(
    model: &AnalyticModel,
    point: Point,
    empirical: Option<(&StationaryDistribution, f64)>,
) -> Vec<ResultRow> {
    let cfg = &model.config;
    let mut link = cfg.link;
    let mut occupancy = None;
    let mut rho = model.offered_load();
    let mut lambdas = cfg.sensitivity.lambda.clone();
    match point.variable {
        Some(SweepVariable::Bler) => {
            link.bler = point.value;
            occupancy = cfg.sweep.as_ref().and_then(|s| s.fixed_occupancy);
        }
        Some(SweepVariable::Occupancy) => occupancy = Some(point.value),
        Some(SweepVariable::OfferedLoad) => rho = point.value,
        Some(SweepVariable::LambdaFactor) => lambdas = vec![point.value],
        None => {}
    }
    let bitrate = instantaneous_bitrate(&link);
    let block = model.base_block(rho);
    let ctx = model.metric_context(occupancy);
    let mut rows = Vec::with_capacity(lambdas.len() * cfg.sensitivity.theta.len());
    for &l in &lambdas {
        let d = mean_bitrate(&model.stationary, &ctx, bitrate, l).mean;
        let sim_d = empirical.map(|(pi, _)| mean_bitrate(pi, &ctx, bitrate, l).mean);
        for &t in &cfg.sensitivity.theta {
            rows.push(ResultRow {
                sweep_var: point.variable.map_or("base", SweepVariable::name).to_string(),
                sweep_value: point.value,
                lambda_factor: l,
                theta_factor: t,
                mean_bitrate_bps: d,
                mean_block_prob: mean_block(&model.stationary, &ctx, block, t),
                sim_bitrate_bps: sim_d,
                sim_block_prob: empirical.map(|(pi, _)| mean_block(pi, &ctx, block, t)),
                sim_tv_distance: empirical.map(|(_, tv)| tv),
            });
        }
    }
    rows
}

/// Rows for an already built model.
pub fn evaluate(model: &AnalyticModel, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let points: Vec<Point> = if opts.sweep {
        let sweep = model
            .config
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config(vec!["sweep: section is required for a sweep".into()]))?;
        sweep
            .points()
            .into_iter()
            .map(|value| Point {
                variable: Some(sweep.variable),
                value,
            })
            .collect()
    } else {
        vec![Point {
            variable: None,
            value: model.offered_load(),
        }]
    };
    let empirical = match opts.simulation {
        Some(req) => {
            let report = model.simulate(req.seed, req.replications)?;
            let tv = report.tv_distance(&model.stationary.probabilities);
            Some((
                StationaryDistribution {
                    probabilities: report.frequencies(),
                    residual: f64::NAN,
                },
                tv,
            ))
        }
        None => None,
    };
    let empirical = empirical.as_ref().map(|(pi, tv)| (pi, *tv));
    let rows: Vec<Vec<ResultRow>> = points
        .par_iter()
        .map(|&p| evaluate_point(model, p, empirical))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let model = AnalyticModel::build(config)?;
    evaluate(&model, opts)
}
