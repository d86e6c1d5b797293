use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::GridSpec;

/// Normalized residual of a transport equation sampled on a grid.
///
/// `max_norm` and `l2_norm` are divided by `scale`, the largest sum of
/// term magnitudes seen on the grid, so the numbers are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_norm: f64,
    pub l2_norm: f64,
    pub scale: f64,
    pub points: usize,
    pub dt: f64,
    /// `coarse / fine` max-norm under `dt` halving, when measured.
    pub convergence_ratio: Option<f64>,
}

impl ResidualReport {
    pub fn from_samples(samples: &[(f64, f64)], dt: f64) -> Self {
        let scale = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let max = samples.iter().map(|s| s.0.abs()).fold(0.0, f64::max);
        let ss: f64 = samples.iter().map(|s| s.0 * s.0).sum();
        let l2 = if samples.is_empty() { 0.0 } else { (ss / samples.len() as f64).sqrt() };
        Self { max_norm: max / scale, l2_norm: l2 / scale, scale, points: samples.len(), dt, convergence_ratio: None }
    }

    /// True when the ratio lies within `tol` of 4, the second-order signature.
    pub fn is_second_order(&self, tol: f64) -> bool {
        self.convergence_ratio.is_some_and(|r| (r - 4.0).abs() <= tol)
    }
}

/// Evaluates `residual` at every grid point in parallel. A `None` sample is
/// excluded (guard bands); otherwise it is `(residual, term_magnitude)`.
pub(crate) fn sample_grid<F>(grid: &GridSpec, dt: f64, residual: F) -> Result<ResidualReport>
where
    F: Fn(&[f64]) -> Result<Option<(f64, f64)>> + Sync,
{
    let samples: Vec<Option<(f64, f64)>> =
        (0..grid.len()).into_par_iter().map(|k| residual(&grid.point(k))).collect::<Result<_>>()?;
    let kept: Vec<(f64, f64)> = samples.into_iter().flatten().collect();
    Ok(ResidualReport::from_samples(&kept, dt))
}

/// Runs `study` at `dt` and `dt / 2` and returns the coarse report with the
/// convergence ratio filled in.
pub fn convergence_study<F>(study: F, dt: f64) -> Result<ResidualReport>
where
    F: Fn(f64) -> Result<ResidualReport>,
{
    let coarse = study(dt)?;
    let fine = study(0.5 * dt)?;
    let ratio = if fine.max_norm > 0.0 { coarse.max_norm / fine.max_norm } else { f64::INFINITY };
    Ok(ResidualReport { convergence_ratio: Some(ratio), ..coarse })
}
