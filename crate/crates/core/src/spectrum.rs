//! Instantaneous energy spectra: phase-space averages of the classical
//! energy `ℰ = p²/2m + mΩ²x²/2` over `W_n`, and the same energy evaluated
//! along a single Hill characteristic.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_hill_from, omega_squared, PhysicalParams, SigmaHistory, SigmaState};
use crate::error::{Error, Result};
use crate::polynomials::PolyOrder;
use crate::quadrature::{integrate, Axis, GridSpec};
use crate::vlasov::{density, density_zeros, ZERO_GUARD};
use crate::wavefunction::potential_u1;
use crate::wigner::{wigner, PhasePoint};

/// Period of the Mathieu coefficient `a − 2g cos 2t`.
pub const TAU_OMEGA: f64 = PI;

/// Relative Richardson tolerance for accepting a quadrature energy.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;

/// Points per axis of the default phase-space grid.
pub const DEFAULT_POINTS: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Quadrature,
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub t: f64,
    pub n: PolyOrder,
    pub energy: f64,
    pub method: Method,
}

/// `ℰ(x, p, t)`; negative when `Ω² < 0`.
pub fn energy_function(state: &SigmaState, params: &PhysicalParams, pt: PhasePoint) -> f64 {
    let m = params.m();
    pt.p * pt.p / (2.0 * m) + 0.5 * m * omega_squared(state, params) * pt.x * pt.x
}

/// `E_n = (2n+1)[ħ²/(4mσ²) + (m/2)(σ̇² − σσ̈)]`, the exact phase-space mean of `ℰ`.
pub fn second_moment_energy(n: PolyOrder, state: &SigmaState, params: &PhysicalParams) -> f64 {
    let m = params.m();
    let hbar = params.hbar();
    let s = state.sigma;
    (2.0 * n.as_f64() + 1.0)
        * (hbar * hbar / (4.0 * m * s * s) + 0.5 * m * (state.sigma_dot * state.sigma_dot - s * state.sigma_ddot))
}

/// Box in `(x, q)` with `q = p − mσ̇x/σ`, covering `ε ≤ R²` for
/// `R = 8 + √(2n+1)`.
pub fn quadrature_grid(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, points: usize) -> Result<GridSpec> {
    let radius = 8.0 + (2.0 * n.as_f64() + 1.0).sqrt();
    Ok(GridSpec::plane(
        Axis::symmetric(SQRT_2 * state.sigma * radius, points)?,
        Axis::symmetric(params.hbar() * radius / (SQRT_2 * state.sigma), points)?,
    ))
}

/// `∬ W_n ℰ dx dp`, rejected when the Richardson estimate exceeds
/// [`QUADRATURE_TOLERANCE`] relative to the kinetic scale.
///
/// The grid axes are `x` and `q = p − mσ̇x/σ` (see [`quadrature_grid`]); the
/// shear has unit Jacobian and aligns the grid with the Wigner ellipse.
pub fn spectrum_by_quadrature(
    n: PolyOrder,
    state: &SigmaState,
    params: &PhysicalParams,
    grid: &GridSpec,
) -> Result<SpectrumSample> {
    let shear = params.m() * state.sigma_dot / state.sigma;
    let r = integrate(
        |c| {
            let pt = PhasePoint::new(c[0], c[1] + shear * c[0]);
            wigner(n, state, params, pt) * energy_function(state, params, pt)
        },
        grid,
    )?;
    let hbar = params.hbar();
    let scale = r.value.abs().max((2.0 * n.as_f64() + 1.0) * hbar * hbar / (4.0 * params.m() * state.sigma.powi(2)));
    let tolerance = QUADRATURE_TOLERANCE * scale;
    if !(r.error_estimate <= tolerance) {
        return Err(Error::Accuracy { estimate: r.error_estimate, tolerance });
    }
    Ok(SpectrumSample { t: state.t, n, energy: r.value, method: Method::Quadrature })
}

/// [`spectrum_by_quadrature`] on the default grid for the state.
pub fn quadrature_energy(n: PolyOrder, state: &SigmaState, params: &PhysicalParams) -> Result<SpectrumSample> {
    spectrum_by_quadrature(n, state, params, &quadrature_grid(n, state, params, DEFAULT_POINTS)?)
}

/// Energy along the Hill characteristic launched from `(0, √(2mE_n(0)))`
/// at `t = 0`, with `E_n(0)` taken from the quadrature.
pub fn spectrum_by_trajectory(
    n: PolyOrder,
    history: &SigmaHistory,
    t_grid: &[f64],
    h: f64,
) -> Result<Vec<SpectrumSample>> {
    let params = *history.params();
    let e0 = quadrature_energy(n, &history.state(0.0)?, &params)?.energy;
    if !(e0 >= 0.0) {
        return Err(Error::Domain(format!("initial energy {e0} is negative; no real launch momentum")));
    }
    let launch = PhasePoint::new(0.0, (2.0 * params.m() * e0).sqrt());
    spectrum_by_trajectory_from(n, history, launch, t_grid, h)
}

/// Trajectory spectrum from an explicit launch point at `t = 0`.
pub fn spectrum_by_trajectory_from(
    n: PolyOrder,
    history: &SigmaHistory,
    launch: PhasePoint,
    t_grid: &[f64],
    h: f64,
) -> Result<Vec<SpectrumSample>> {
    let params = *history.params();
    if t_grid.windows(2).any(|w| !(w[1] >= w[0])) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidArgument("time grid must be nondecreasing and start at t >= 0".into()));
    }
    let omega2 = |t: f64| history.omega_squared(t);
    let (mut t, mut pt) = (0.0, launch);
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        if target > t {
            let seg = integrate_hill_from(omega2, t, pt.x, pt.p, &params, target, h)?;
            let end = seg.last().expect("segment has samples");
            pt = PhasePoint::new(end.x, end.p);
            t = target;
        }
        let energy = energy_function(&history.state(t)?, &params, pt);
        out.push(SpectrumSample { t, n, energy, method: Method::Trajectory });
    }
    Ok(out)
}

/// Conditional energy `(1/f) ∫ W_n (p²/2m + U¹) dp` at fixed `x` over a 1-D
/// momentum grid. Diverges at density zeros, which are reported as poles.
pub fn mean_energy_field(
    n: PolyOrder,
    state: &SigmaState,
    params: &PhysicalParams,
    x: f64,
    grid: &GridSpec,
) -> Result<f64> {
    if let Some(&root) = density_zeros(n, state).iter().find(|z| (*z - x).abs() < ZERO_GUARD) {
        return Err(Error::Pole { root });
    }
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("expected a 1-D momentum grid".into()));
    }
    let m = params.m();
    let u = potential_u1(state, params, x);
    let r = integrate(|c| wigner(n, state, params, PhasePoint::new(x, c[0])) * (c[0] * c[0] / (2.0 * m) + u), grid)?;
    Ok(r.value / density(n, state, x))
}
