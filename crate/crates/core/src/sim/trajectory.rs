//! Leg-by-leg random-waypoint oracle. Each leg is a straight segment between
//! two uniform points in the cluster disk, so time spent in any disk is
//! obtained exactly from segment–circle intersections.

use super::SimError;
use crate::geometry::{ClusterGeometry, Point};
use crate::mobility::RwpParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;
use std::f64::consts::PI;

/// Parameter interval `(t0, t1) ⊂ [0, 1]` over which the segment `a → b`
/// lies inside the open disk, if any.
pub fn disk_interval(a: Point, b: Point, center: Point, radius: f64) -> Option<(f64, f64)> {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let (fx, fy) = (a.x - center.x, a.y - center.y);
    let qa = dx * dx + dy * dy;
    let qb = fx * dx + fy * dy;
    let qc = fx * fx + fy * fy - radius * radius;
    if qa == 0.0 {
        return (qc < 0.0).then_some((0.0, 1.0));
    }
    let disc = qb * qb - qa * qc;
    if disc <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let t0 = ((-qb - root) / qa).max(0.0);
    let t1 = ((-qb + root) / qa).min(1.0);
    (t0 < t1).then_some((t0, t1))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryCrossing {
    /// Position along the segment, in `[0, 1]`.
    pub t: f64,
    pub entering: bool,
}

/// Boundary crossings of the segment `a → b` with a circle, in order. A
/// segment starting on the circle and heading inwards counts as entering.
pub fn segment_circle_crossings(a: Point, b: Point, center: Point, radius: f64) -> Vec<BoundaryCrossing> {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let (fx, fy) = (a.x - center.x, a.y - center.y);
    let qa = dx * dx + dy * dy;
    let qb = fx * dx + fy * dy;
    let qc = fx * fx + fy * fy - radius * radius;
    let disc = qb * qb - qa * qc;
    if qa == 0.0 || disc <= 0.0 {
        return Vec::new();
    }
    let root = disc.sqrt();
    let t0 = (-qb - root) / qa;
    let t1 = (-qb + root) / qa;
    let mut out = Vec::with_capacity(2);
    if (0.0..1.0).contains(&t0) {
        out.push(BoundaryCrossing { t: t0, entering: true });
    }
    if t1 > 0.0 && t1 <= 1.0 {
        out.push(BoundaryCrossing { t: t1, entering: false });
    }
    out
}

/// Uniform point in the disk of radius `r` centred at the origin.
pub fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, r: f64) -> Point {
    let rho = r * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Point::new(rho * theta.cos(), rho * theta.sin())
}

/// Leg speed, uniform on `[v_min, v_max]`.
pub fn leg_speed<R: Rng + ?Sized>(rng: &mut R, params: &RwpParams) -> f64 {
    if params.v_min_mps >= params.v_max_mps {
        params.v_max_mps
    } else {
        rng.random_range(params.v_min_mps..=params.v_max_mps)
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryConfig {
    pub geometry: ClusterGeometry,
    pub mobility: RwpParams,
    pub legs: u64,
    /// Radial histogram bins over `[0, 1]` in units of the cluster radius.
    pub bins: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub legs: u64,
    pub total_time: f64,
    /// Time spent in each equal-width radial annulus.
    pub bin_time: Vec<f64>,
    /// Time spent inside each sub-cell.
    pub cell_time: Vec<f64>,
    pub cell_entries: Vec<u64>,
}

impl TrajectoryReport {
    /// Mean density over each annulus, per unit area of the unit disk.
    pub fn density_histogram(&self) -> Vec<f64> {
        let n = self.bin_time.len() as f64;
        self.bin_time
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let (a, b) = (j as f64 / n, (j + 1) as f64 / n);
                t / self.total_time / (PI * (b * b - a * a))
            })
            .collect()
    }

    pub fn occupancy_fraction(&self, cell: usize) -> f64 {
        self.cell_time[cell] / self.total_time
    }

    /// Entries per user-second.
    pub fn crossing_rate(&self, cell: usize) -> f64 {
        self.cell_entries[cell] as f64 / self.total_time
    }

    /// Mean time between entering and leaving.
    pub fn sojourn_time(&self, cell: usize) -> f64 {
        self.cell_time[cell] / self.cell_entries[cell] as f64
    }
}

pub fn run_trajectories(cfg: &TrajectoryConfig) -> Result<TrajectoryReport, SimError> {
    let mut problems = cfg.mobility.problems();
    if cfg.legs == 0 {
        problems.push("legs must be >= 1".into());
    }
    if cfg.bins == 0 {
        problems.push("bins must be >= 1".into());
    }
    if !cfg.geometry.is_valid() {
        problems.push("geometry is invalid".into());
    }
    if !problems.is_empty() {
        return Err(SimError::ConfigInvalid(problems));
    }
    let radius = cfg.geometry.service_radius_m;
    let centers: Vec<(Point, f64)> = cfg.geometry.subcells.iter().map(|c| (c.center(), c.radius_m)).collect();
    let pause =
        (cfg.mobility.pause_mean_s > 0.0).then(|| Exp::new(1.0 / cfg.mobility.pause_mean_s).expect("positive rate"));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = TrajectoryReport {
        legs: cfg.legs,
        total_time: 0.0,
        bin_time: vec![0.0; cfg.bins],
        cell_time: vec![0.0; centers.len()],
        cell_entries: vec![0; centers.len()],
    };
    let mut inside = vec![0.0; cfg.bins + 1];
    let mut pos = uniform_in_disk(&mut rng, radius);
    for _ in 0..cfg.legs {
        if let Some(exp) = &pause {
            let t = exp.sample(&mut rng);
            let bin = ((pos.norm() / radius * cfg.bins as f64) as usize).min(cfg.bins - 1);
            report.bin_time[bin] += t;
            for (k, &(c, r)) in centers.iter().enumerate() {
                if pos.distance(&c) < r {
                    report.cell_time[k] += t;
                }
            }
            report.total_time += t;
        }
        let next = uniform_in_disk(&mut rng, radius);
        let duration = pos.distance(&next) / leg_speed(&mut rng, &cfg.mobility);
        // inside[j]: fraction of the leg within radius j/bins
        inside[cfg.bins] = 1.0;
        for (j, slot) in inside.iter_mut().enumerate().take(cfg.bins).skip(1) {
            let rj = radius * j as f64 / cfg.bins as f64;
            *slot = disk_interval(pos, next, Point::ORIGIN, rj).map_or(0.0, |(a, b)| b - a);
        }
        for j in 0..cfg.bins {
            report.bin_time[j] += duration * (inside[j + 1] - inside[j]).max(0.0);
        }
        for (k, &(c, r)) in centers.iter().enumerate() {
            if let Some((a, b)) = disk_interval(pos, next, c, r) {
                report.cell_time[k] += duration * (b - a);
            }
            report.cell_entries[k] += segment_circle_crossings(pos, next, c, r)
                .iter()
                .filter(|x| x.entering)
                .count() as u64;
        }
        report.total_time += duration;
        pos = next;
    }
    Ok(report)
}

/// Least-squares `C_v` such that `analytic · c_v / C_v` best matches the
/// simulated rates; analytic rates scale as `1 / C_v`.
pub fn calibrate_cv(current_c_v: f64, analytic: &[f64], simulated: &[f64]) -> f64 {
    let num: f64 = analytic.iter().map(|a| a * a).sum();
    let den: f64 = analytic.iter().zip(simulated).map(|(a, s)| a * s).sum();
    current_c_v * num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SubCell;

    #[test]
    fn chord_through_circle() {
        let c = Point::new(0.0, 0.0);
        let x = segment_circle_crossings(Point::new(-2.0, 0.0), Point::new(2.0, 0.0), c, 1.0);
        assert_eq!(
            x,
            vec![
                BoundaryCrossing {
                    t: 0.25,
                    entering: true
                },
                BoundaryCrossing {
                    t: 0.75,
                    entering: false
                },
            ]
        );
        assert_eq!(
            disk_interval(Point::new(-2.0, 0.0), Point::new(2.0, 0.0), c, 1.0),
            Some((0.25, 0.75))
        );
    }

    #[test]
    fn misses_and_partial_segments() {
        let c = Point::new(0.0, 0.0);
        assert!(segment_circle_crossings(Point::new(-2.0, 2.0), Point::new(2.0, 2.0), c, 1.0).is_empty());
        assert!(segment_circle_crossings(Point::new(-0.5, 0.0), Point::new(0.5, 0.0), c, 1.0).is_empty());
        assert_eq!(
            disk_interval(Point::new(-0.5, 0.0), Point::new(0.5, 0.0), c, 1.0),
            Some((0.0, 1.0))
        );
        let x = segment_circle_crossings(Point::new(0.0, 0.0), Point::new(4.0, 0.0), c, 1.0);
        assert_eq!(
            x,
            vec![BoundaryCrossing {
                t: 0.25,
                entering: false
            }]
        );
    }

    #[test]
    fn chord_length_matches_geometry() {
        // chord at offset h has length 2√(r² − h²)
        let (r, h) = (3.0, 1.2);
        let (a, b) = disk_interval(Point::new(-10.0, h), Point::new(10.0, h), Point::ORIGIN, r).unwrap();
        assert!(((b - a) * 20.0 - 2.0 * (r * r - h * h).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn small_run_is_consistent() {
        let cfg = TrajectoryConfig {
            geometry: ClusterGeometry::new(600.0, vec![SubCell::new(200.0, 300.0, 0.0)]),
            mobility: RwpParams::default(),
            legs: 20_000,
            bins: 10,
            seed: 1,
        };
        let r = run_trajectories(&cfg).unwrap();
        let binned: f64 = r.bin_time.iter().sum();
        assert!((binned - r.total_time).abs() < 1e-9 * r.total_time);
        let mass: f64 = r
            .density_histogram()
            .iter()
            .enumerate()
            .map(|(j, d)| d * PI * (((j + 1) * (j + 1) - j * j) as f64) / 100.0)
            .sum();
        assert!((mass - 1.0).abs() < 1e-9);
        assert!(r.cell_entries[0] > 0);
        assert!(r.occupancy_fraction(0) > 0.0 && r.occupancy_fraction(0) < 1.0);
        assert_eq!(run_trajectories(&cfg).unwrap(), r);
    }

    #[test]
    fn calibration_recovers_scale() {
        assert!((calibrate_cv(30.0, &[2.0, 4.0], &[1.0, 2.0]) - 60.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = TrajectoryConfig {
            geometry: ClusterGeometry::reference(),
            mobility: RwpParams::default(),
            legs: 0,
            bins: 20,
            seed: 0,
        };
        assert!(matches!(run_trajectories(&cfg), Err(SimError::ConfigInvalid(_))));
    }
}
