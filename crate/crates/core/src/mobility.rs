//! Random-waypoint spatial statistics on the service disk.
//!
//! All spatial quantities are computed on the unit disk: lengths are scaled
//! by `1/R`. The radial profile of the stationary user density is
//!
//! ```text
//! h(x) = (1 - x²) ∫₀^π √(1 - x² cos²φ) dφ ,     0 ≤ x ≤ 1
//! ```
//!
//! normalised so that its integral over the unit disk is one. Sub-cell
//! boundaries are parameterised by the angle `α` around the sub-cell centre,
//! which puts a boundary point at distance
//! `x = √(d² + 2 d r cos α + r²)` from the cluster centre.

use crate::geometry::{ClusterGeometry, ZoneId};
use crate::interp::MonotoneCubic;
use crate::quadrature::{integrate, integrate_2d, QuadratureFailure, Tolerance};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;
use thiserror::Error;

/// Calibrated normaliser for the crossing-rate integral, fitted against the
/// trajectory oracle on the 600 m / 200 m / 300 m reference cell with
/// speeds uniform on [0.1, 10] m/s and no pause.
pub const DEFAULT_C_V: f64 = 29.1;

pub const TABLE_SAMPLES: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MobilityError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureFailure),
    #[error("zero arrival rate for {0}: residence time is undefined")]
    DivisionByZero(ZoneId),
    #[error("no such zone {0}")]
    UnknownZone(ZoneId),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RwpParams {
    pub v_max_mps: f64,
    /// Lower end of the uniform speed law. Only the simulator uses it.
    #[serde(default = "default_v_min")]
    pub v_min_mps: f64,
    #[serde(default)]
    pub pause_mean_s: f64,
    #[serde(default = "default_c_v")]
    pub c_v: f64,
}

fn default_v_min() -> f64 {
    0.1
}

fn default_c_v() -> f64 {
    DEFAULT_C_V
}

impl Default for RwpParams {
    fn default() -> Self {
        Self {
            v_max_mps: 10.0,
            v_min_mps: default_v_min(),
            pause_mean_s: 0.0,
            c_v: DEFAULT_C_V,
        }
    }
}

impl RwpParams {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.v_max_mps > 0.0) {
            out.push("mobility.v_max_mps must be > 0".to_string());
        }
        if !(self.v_min_mps > 0.0 && self.v_min_mps <= self.v_max_mps) {
            out.push("mobility.v_min_mps must be in (0, v_max_mps]".to_string());
        }
        if !(self.pause_mean_s >= 0.0) {
            out.push("mobility.pause_mean_s must be >= 0".to_string());
        }
        if !(self.c_v > 0.0) {
            out.push("mobility.c_v must be > 0".to_string());
        }
        out
    }
}

fn tol() -> Tolerance {
    Tolerance::default()
}

/// Unnormalised radial profile `h(x)`.
pub fn unnormalized_density(x: f64) -> Result<f64, QuadratureFailure> {
    if x >= 1.0 {
        return Ok(0.0);
    }
    let x2 = x * x;
    let inner = integrate(
        |phi| {
            let c = phi.cos();
            (1.0 - x2 * c * c).max(0.0).sqrt()
        },
        0.0,
        PI,
        tol(),
    )?;
    Ok((1.0 - x2) * inner)
}

/// `∫_disk h = 2π ∫₀¹ x h(x) dx`
fn normalizer() -> Result<f64, QuadratureFailure> {
    static Z: OnceLock<Result<f64, QuadratureFailure>> = OnceLock::new();
    Z.get_or_init(|| {
        let mut failure = None;
        let v = integrate(
            |x| match unnormalized_density(x) {
                Ok(h) => 2.0 * PI * x * h,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            1.0,
            Tolerance {
                abs: 1e-12,
                rel: 1e-10,
                ..tol()
            },
        );
        match failure {
            Some(e) => Err(e),
            None => v,
        }
    })
    .clone()
}

/// Normalised stationary density at radius fraction `x ∈ [0, 1]`, per unit
/// area of the unit disk, evaluated by direct quadrature.
pub fn rwp_density(x: f64) -> Result<f64, QuadratureFailure> {
    Ok(unnormalized_density(x.abs())? / normalizer()?)
}

/// Tabulated normalised density with monotone cubic interpolation.
#[derive(Clone, Debug)]
pub struct SpatialDensity {
    profile: MonotoneCubic,
    normalizer: f64,
}

impl SpatialDensity {
    pub fn new() -> Result<Self, QuadratureFailure> {
        Self::with_samples(TABLE_SAMPLES)
    }

    pub fn with_samples(n: usize) -> Result<Self, QuadratureFailure> {
        let z = normalizer()?;
        let step = 1.0 / (n - 1) as f64;
        let samples = (0..n)
            .map(|j| unnormalized_density(j as f64 * step).map(|h| h / z))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            profile: MonotoneCubic::new(0.0, step, samples),
            normalizer: z,
        })
    }

    /// Shared instance; the table is identical for every geometry.
    pub fn shared() -> Result<&'static SpatialDensity, QuadratureFailure> {
        static SHARED: OnceLock<Result<SpatialDensity, QuadratureFailure>> = OnceLock::new();
        SHARED.get_or_init(SpatialDensity::new).as_ref().map_err(Clone::clone)
    }

    /// Density at radius fraction `x`; zero outside the unit disk.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        if x >= 1.0 {
            0.0
        } else {
            self.profile.eval(x).max(0.0)
        }
    }

    /// `Z = ∫_disk h`, the constant the raw profile is divided by.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Integral of the tabulated density over the unit disk.
    pub fn disk_integral(&self) -> Result<f64, QuadratureFailure> {
        integrate(|x| 2.0 * PI * x * self.eval(x), 0.0, 1.0, tol())
    }

    /// Probability mass inside the annulus `a ≤ x < b`.
    pub fn annulus_mass(&self, a: f64, b: f64) -> Result<f64, QuadratureFailure> {
        integrate(|x| 2.0 * PI * x * self.eval(x), a, b, tol())
    }
}

/// Distance from the cluster centre of the point at offset `(ρ, α)` from a
/// sub-cell centre sitting at distance `d`.
fn radial(d: f64, rho: f64, alpha: f64) -> f64 {
    (d * d + 2.0 * d * rho * alpha.cos() + rho * rho).max(0.0).sqrt()
}

/// Scaled `(d/R, r/R)` for a sub-cell.
fn scaled(geom: &ClusterGeometry, zone: ZoneId) -> Result<(f64, f64), MobilityError> {
    let c = geom.subcell(zone).ok_or(MobilityError::UnknownZone(zone))?;
    Ok((
        c.center_distance_m / geom.service_radius_m,
        c.radius_m / geom.service_radius_m,
    ))
}

/// Probability of finding a user inside a sub-cell: the density integrated
/// over the sub-cell's area in polar coordinates around its centre.
pub fn cell_probability(geom: &ClusterGeometry, zone: ZoneId, density: &SpatialDensity) -> Result<f64, MobilityError> {
    let (d, r) = scaled(geom, zone)?;
    cell_probability_scaled(d, r, density)
}

pub(crate) fn cell_probability_scaled(d: f64, r: f64, density: &SpatialDensity) -> Result<f64, MobilityError> {
    if r <= 0.0 {
        return Ok(0.0);
    }
    // symmetric in α, so integrate the upper half and double
    let half = integrate_2d(
        |rho, alpha| rho * density.eval(radial(d, rho, alpha)),
        (0.0, r),
        (0.0, PI),
        tol(),
    )?;
    Ok((2.0 * half).clamp(0.0, 1.0))
}

/// `P(C_0) = 1 − Σ P(C_i)`.
pub fn residual_probability(geom: &ClusterGeometry, density: &SpatialDensity) -> Result<f64, MobilityError> {
    let mut total = 0.0;
    for idx in 0..geom.subcells.len() {
        total += cell_probability(geom, ZoneId::from_subcell_index(idx), density)?;
    }
    Ok((1.0 - total).max(0.0))
}

/// Mean rate (per user, per second) at which a user enters the sub-cell:
///
/// ```text
/// τ = (2 / C_v) · (v_max / R) · ∫₀^π ∫₀^π r h(x(α)) sin φ dφ dα
/// ```
///
/// with `r` and `x` in unit-disk coordinates. The `v_max / R` factor
/// converts unit-disk crossings into crossings per second.
pub fn arrival_rate(
    geom: &ClusterGeometry,
    zone: ZoneId,
    density: &SpatialDensity,
    params: &RwpParams,
) -> Result<f64, MobilityError> {
    let (d, r) = scaled(geom, zone)?;
    if r <= 0.0 {
        return Ok(0.0);
    }
    let integral = integrate_2d(
        |alpha, phi| r * density.eval(radial(d, r, alpha)) * phi.sin(),
        (0.0, PI),
        (0.0, PI),
        tol(),
    )?;
    Ok(2.0 / params.c_v * params.v_max_mps / geom.service_radius_m * integral)
}

/// Little's-law residence time `Δ = P / τ`.
pub fn residence_time(zone: ZoneId, probability: f64, rate: f64) -> Result<f64, MobilityError> {
    if !(rate > 0.0) {
        return Err(MobilityError::DivisionByZero(zone));
    }
    Ok(probability / rate)
}

pub fn mean_residence_time(
    geom: &ClusterGeometry,
    zone: ZoneId,
    density: &SpatialDensity,
    params: &RwpParams,
) -> Result<f64, MobilityError> {
    let p = cell_probability(geom, zone, density)?;
    let rate = arrival_rate(geom, zone, density, params)?;
    residence_time(zone, p, rate)
}

/// Per-zone mobility figures for a whole cluster.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MobilityStats {
    /// `P(C_i)` for each sub-cell, in configuration order.
    pub cell_probability: Vec<f64>,
    pub residual_probability: f64,
    /// Entry rate into each sub-cell.
    pub arrival_rate: Vec<f64>,
    /// `Δ_i` for each sub-cell.
    pub residence_time: Vec<f64>,
    /// Residence time in `C_0`: every exit from `C_0` is an entry into some
    /// sub-cell, so `Δ_0 = P(C_0) / Σ τ_i`.
    pub residual_residence_time: f64,
}

impl MobilityStats {
    pub fn compute(
        geom: &ClusterGeometry,
        density: &SpatialDensity,
        params: &RwpParams,
    ) -> Result<Self, MobilityError> {
        let n = geom.subcells.len();
        let mut probs = Vec::with_capacity(n);
        let mut rates = Vec::with_capacity(n);
        let mut times = Vec::with_capacity(n);
        for idx in 0..n {
            let zone = ZoneId::from_subcell_index(idx);
            let p = cell_probability(geom, zone, density)?;
            let rate = arrival_rate(geom, zone, density, params)?;
            times.push(residence_time(zone, p, rate)?);
            probs.push(p);
            rates.push(rate);
        }
        let p0 = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        let total_rate: f64 = rates.iter().sum();
        let residual_residence_time = if n == 0 {
            f64::INFINITY
        } else {
            residence_time(ZoneId::Residual, p0, total_rate)?
        };
        Ok(Self {
            cell_probability: probs,
            residual_probability: p0,
            arrival_rate: rates,
            residence_time: times,
            residual_residence_time,
        })
    }
}
