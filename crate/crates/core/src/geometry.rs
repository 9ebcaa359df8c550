//! Cluster geometry: the LTE service disk, its circular Wi-Fi sub-cells and
//! the LTE-only residual zone.
//!
//! Sub-cells are numbered from 2 upwards, in the order they appear in the
//! configuration, so the first sub-cell is `C_2`. The residual zone is `C_0`.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point ({x}, {y}) lies outside the service disk of radius {radius}")]
    OutsideCluster { x: f64, y: f64, radius: f64 },
}

/// Cluster-centred coordinates in metres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A circular Wi-Fi sub-cell placed at `center_distance` from the cluster
/// centre, at polar angle `center_angle`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubCell {
    pub radius_m: f64,
    pub center_distance_m: f64,
    #[serde(default)]
    pub center_angle_rad: f64,
}

impl SubCell {
    pub fn new(radius_m: f64, center_distance_m: f64, center_angle_rad: f64) -> Self {
        Self {
            radius_m,
            center_distance_m,
            center_angle_rad,
        }
    }

    pub fn center(&self) -> Point {
        Point {
            x: self.center_distance_m * self.center_angle_rad.cos(),
            y: self.center_distance_m * self.center_angle_rad.sin(),
        }
    }

    /// Open-disk membership: boundary points are outside.
    pub fn contains(&self, p: &Point) -> bool {
        p.distance(&self.center()) < self.radius_m
    }
}

/// Zone identifier. `Subcell(i)` uses the 2-based numbering (`C_2`, `C_3`, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ZoneId {
    Residual,
    Subcell(usize),
}

impl ZoneId {
    /// Position of the sub-cell in [`ClusterGeometry::subcells`], if any.
    pub fn subcell_index(self) -> Option<usize> {
        match self {
            ZoneId::Residual => None,
            ZoneId::Subcell(i) => Some(i - 2),
        }
    }

    pub fn from_subcell_index(idx: usize) -> Self {
        ZoneId::Subcell(idx + 2)
    }
}

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZoneId::Residual => write!(f, "C0"),
            ZoneId::Subcell(i) => write!(f, "C{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonPositiveRadius,
    InvalidSubcell {
        zone: ZoneId,
    },
    /// `d_i + r_i > R`
    NotContained {
        zone: ZoneId,
        reach: f64,
        radius: f64,
    },
    Overlap {
        first: ZoneId,
        second: ZoneId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveRadius => write!(f, "service radius must be positive"),
            Violation::InvalidSubcell { zone } => {
                write!(f, "{zone}: radius must be positive and distance non-negative")
            }
            Violation::NotContained { zone, reach, radius } => {
                write!(f, "{zone}: d+r = {reach} exceeds service radius {radius}")
            }
            Violation::Overlap { first, second } => write!(f, "{first} and {second} overlap"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterGeometry {
    pub service_radius_m: f64,
    #[serde(default)]
    pub subcells: Vec<SubCell>,
}

impl ClusterGeometry {
    pub fn new(service_radius_m: f64, subcells: Vec<SubCell>) -> Self {
        Self {
            service_radius_m,
            subcells,
        }
    }

    /// One 200 m sub-cell at 300 m inside a 600 m cluster.
    pub fn reference() -> Self {
        Self::new(600.0, vec![SubCell::new(200.0, 300.0, 0.0)])
    }

    /// Number of zones `m` in the paper's sense: the cluster plus its sub-cells.
    pub fn zone_count(&self) -> usize {
        self.subcells.len() + 1
    }

    pub fn subcell(&self, zone: ZoneId) -> Option<&SubCell> {
        zone.subcell_index().and_then(|i| self.subcells.get(i))
    }

    pub fn zone_of(&self, p: &Point) -> Result<ZoneId, GeometryError> {
        if p.norm() > self.service_radius_m {
            return Err(GeometryError::OutsideCluster {
                x: p.x,
                y: p.y,
                radius: self.service_radius_m,
            });
        }
        Ok(self
            .subcells
            .iter()
            .position(|c| c.contains(p))
            .map(ZoneId::from_subcell_index)
            .unwrap_or(ZoneId::Residual))
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.service_radius_m > 0.0) {
            out.push(Violation::NonPositiveRadius);
        }
        for (idx, c) in self.subcells.iter().enumerate() {
            let zone = ZoneId::from_subcell_index(idx);
            if !(c.radius_m > 0.0) || !(c.center_distance_m >= 0.0) {
                out.push(Violation::InvalidSubcell { zone });
            }
            let reach = c.center_distance_m + c.radius_m;
            if reach > self.service_radius_m {
                out.push(Violation::NotContained {
                    zone,
                    reach,
                    radius: self.service_radius_m,
                });
            }
        }
        for (a, ca) in self.subcells.iter().enumerate() {
            for (b, cb) in self.subcells.iter().enumerate().skip(a + 1) {
                if ca.center().distance(&cb.center()) <= ca.radius_m + cb.radius_m {
                    out.push(Violation::Overlap {
                        first: ZoneId::from_subcell_index(a),
                        second: ZoneId::from_subcell_index(b),
                    });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}
