use super::generator::TransitionModel;
use super::ModelError;
use serde::Serialize;

/// Largest chain solved by dense elimination.
pub const DENSE_LIMIT: usize = 5_000;
pub const RESIDUAL_TARGET: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub probabilities: Vec<f64>,
    /// `‖πQ‖_∞` of the returned vector.
    pub residual: f64,
}

impl StationaryDistribution {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Point mass on one state; handy for metric checks.
    pub fn point_mass(dim: usize, at: usize) -> Self {
        let mut probabilities = vec![0.0; dim];
        probabilities[at] = 1.0;
        Self {
            probabilities,
            residual: f64::NAN,
        }
    }
}

/// Total-variation distance `½ Σ |p − q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn stationary(model: &TransitionModel) -> Result<StationaryDistribution, ModelError> {
    let n = model.dim();
    if n == 0 {
        return Err(ModelError::EmptyStateSpace);
    }
    let pi = if n <= DENSE_LIMIT {
        gth(model)?
    } else {
        gauss_seidel(model, 20_000)?
    };
    let residual = model.residual(&pi);
    if !(residual <= RESIDUAL_TARGET) {
        return Err(ModelError::SolverFailure {
            residual,
            iterations: 0,
        });
    }
    Ok(StationaryDistribution {
        probabilities: pi,
        residual,
    })
}

/// Grassmann–Taksar–Heyman elimination. Subtraction-free, so every entry
/// of the result is computed to high relative accuracy. Zero entries are
/// skipped, which keeps banded generators cheap.
pub fn gth(model: &TransitionModel) -> Result<Vec<f64>, ModelError> {
    let n = model.dim();
    let mut a = vec![0.0f64; n * n];
    for i in 0..n {
        for &(j, q) in model.row(i) {
            a[i * n + j] = q;
        }
    }
    let mut row_nz = Vec::with_capacity(n);
    let mut col_nz = Vec::with_capacity(n);
    for k in (1..n).rev() {
        row_nz.clear();
        col_nz.clear();
        let mut s = 0.0;
        for j in 0..k {
            let v = a[k * n + j];
            if v != 0.0 {
                s += v;
                row_nz.push(j);
            }
        }
        if !(s > 0.0) {
            return Err(ModelError::SolverFailure {
                residual: f64::NAN,
                iterations: n - k,
            });
        }
        for i in 0..k {
            let v = a[i * n + k];
            if v != 0.0 {
                a[i * n + k] = v / s;
                col_nz.push(i);
            }
        }
        for &i in &col_nz {
            let f = a[i * n + k];
            for &j in &row_nz {
                if j != i {
                    a[i * n + j] += f * a[k * n + j];
                }
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        let mut v = 0.0;
        for i in 0..k {
            v += pi[i] * a[i * n + k];
        }
        pi[k] = v;
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    Ok(pi)
}

/// Gauss–Seidel on the balance equations `π_j (−q_jj) = Σ_{i≠j} π_i q_ij`.
pub fn gauss_seidel(model: &TransitionModel, max_sweeps: usize) -> Result<Vec<f64>, ModelError> {
    let n = model.dim();
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for &(j, q) in model.row(i) {
            incoming[j].push((i, q));
        }
    }
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        for j in 0..n {
            let d = -model.diagonal(j);
            if d > 0.0 {
                pi[j] = incoming[j].iter().map(|&(i, q)| pi[i] * q).sum::<f64>() / d;
            }
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        if sweep % 10 == 0 {
            residual = model.residual(&pi);
            if residual <= RESIDUAL_TARGET * 0.1 {
                return Ok(pi);
            }
        }
    }
    Err(ModelError::SolverFailure {
        residual,
        iterations: max_sweeps,
    })
}
