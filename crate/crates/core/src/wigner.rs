//! Rank-2 Wigner function `W_n(x, p, t) = ((−1)ⁿ/πħ) e^{−ε} L_n(2ε)`, its
//! level-set geometry, phase-space moments and transport checks.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::dynamics::{omega_squared, PhysicalParams, SigmaHistory, SigmaState};
use crate::error::{Error, Result};
use crate::polynomials::{laguerre, laguerre_derivative, PolyOrder};
use crate::quadrature::{integrate, Axis, GridSpec};
use crate::report::{sample_grid, ResidualReport};
use crate::vlasov::{density_zeros, ZERO_GUARD};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }
}

/// `κ = 1/(σ√2)`.
pub fn kappa(state: &SigmaState) -> f64 {
    1.0 / (SQRT_2 * state.sigma)
}

/// `ε = x²/2σ² + (2σ²/ħ²)(p − mσ̇x/σ)²`, the conserved characteristic.
pub fn epsilon(state: &SigmaState, params: &PhysicalParams, pt: PhasePoint) -> f64 {
    let s = state.sigma;
    let q = pt.p - params.m() * state.sigma_dot / s * pt.x;
    let hbar = params.hbar();
    pt.x * pt.x / (2.0 * s * s) + 2.0 * s * s / (hbar * hbar) * q * q
}

/// `(∂ε/∂x, ∂ε/∂p)`.
pub fn epsilon_gradient(state: &SigmaState, params: &PhysicalParams, pt: PhasePoint) -> (f64, f64) {
    let s = state.sigma;
    let m = params.m();
    let hbar2 = params.hbar() * params.hbar();
    let q = pt.p - m * state.sigma_dot / s * pt.x;
    (pt.x / (s * s) - 4.0 * m * s * state.sigma_dot * q / hbar2, 4.0 * s * s * q / hbar2)
}

fn sign(n: PolyOrder) -> f64 {
    if n.get().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn wigner(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, pt: PhasePoint) -> f64 {
    let e = epsilon(state, params, pt);
    sign(n) / (PI * params.hbar()) * (-e).exp() * laguerre(n, 2.0 * e)
}

// dW/dε.
fn wigner_slope(n: PolyOrder, params: &PhysicalParams, e: f64) -> f64 {
    sign(n) / (PI * params.hbar()) * (-e).exp() * (2.0 * laguerre_derivative(n, 2.0 * e) - laguerre(n, 2.0 * e))
}

/// `(W, ∂W/∂x, ∂W/∂p)` by the chain rule through `ε`.
pub fn wigner_jet(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, pt: PhasePoint) -> (f64, f64, f64) {
    let e = epsilon(state, params, pt);
    let dw_de = wigner_slope(n, params, e);
    let (ex, ep) = epsilon_gradient(state, params, pt);
    (wigner(n, state, params, pt), dw_de * ex, dw_de * ep)
}

/// Quadratic form of `ε` in `x̃ = κx`, `p̃ = p/(ħκ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseGeometry {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    /// Principal-axis angle in `(−π/4, π/4]`.
    pub theta: f64,
    pub det: f64,
    pub area_at_unit_level: f64,
}

pub fn ellipse_geometry(state: &SigmaState, params: &PhysicalParams) -> EllipseGeometry {
    let s = state.sigma * state.sigma_dot / params.alpha();
    let (a11, a12, a22) = (1.0 + s * s, s, 1.0);
    let det = a11 * a22 - a12 * a12;
    let theta = if state.sigma_dot == 0.0 {
        0.0
    } else {
        let t = 0.5 * (2.0 * a12).atan2(a11 - a22);
        if t <= -FRAC_PI_4 {
            t + 0.5 * PI
        } else if t > FRAC_PI_4 {
            t - 0.5 * PI
        } else {
            t
        }
    };
    EllipseGeometry { a11, a12, a22, theta, det, area_at_unit_level: PI / det.sqrt() }
}

/// Rectangle `|ε| ≤ R²` with `R = 8 + √(2n+1)`, sheared along `p = mσ̇x/σ`.
pub fn phase_space_grid(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, points: usize) -> Result<GridSpec> {
    let radius = 8.0 + (2.0 * n.as_f64() + 1.0).sqrt();
    let x_hw = SQRT_2 * state.sigma * radius;
    let p_hw =
        (params.m() * state.sigma_dot / state.sigma).abs() * x_hw + params.hbar() * radius / (SQRT_2 * state.sigma);
    Ok(GridSpec::plane(Axis::symmetric(x_hw, points)?, Axis::symmetric(p_hw, points)?))
}

/// Momentum axis at fixed `x`, centered on the mean `mσ̇x/σ`.
pub fn momentum_axis(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, x: f64, points: usize) -> Result<Axis> {
    let radius = 8.0 + (2.0 * n.as_f64() + 1.0).sqrt();
    Axis::new(params.m() * state.sigma_dot / state.sigma * x, params.hbar() * radius / (SQRT_2 * state.sigma), points)
}

/// `∬ W_n dx dp` over `grid`.
pub fn normalization(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, grid: &GridSpec) -> Result<f64> {
    Ok(integrate(|c| wigner(n, state, params, PhasePoint::new(c[0], c[1])), grid)?.value)
}

fn guard(n: PolyOrder, state: &SigmaState, x: f64) -> Result<()> {
    if let Some(z) = density_zeros(n, state).into_iter().find(|z| (z - x).abs() < ZERO_GUARD) {
        return Err(Error::Conditioning { x, reason: format!("density vanishes at {z}") });
    }
    Ok(())
}

fn p_line(grid: &GridSpec) -> Result<Axis> {
    match grid.axes.as_slice() {
        [axis] => Ok(*axis),
        _ => Err(Error::InvalidArgument("expected a 1-D momentum grid".into())),
    }
}

// Zeroth, first and second p-moments of W_n at fixed x.
fn p_moments(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, x: f64, axis: Axis) -> Result<[f64; 3]> {
    let grid = GridSpec::line(axis);
    let w = |p: f64| wigner(n, state, params, PhasePoint::new(x, p));
    Ok([
        integrate(|c| w(c[0]), &grid)?.value,
        integrate(|c| w(c[0]) * c[0], &grid)?.value,
        integrate(|c| w(c[0]) * c[0] * c[0], &grid)?.value,
    ])
}

/// `⟨v⟩ = (1/(m f)) ∫ W_n(x, p) p dp` by quadrature over the 1-D `grid`.
pub fn mean_velocity_from_wigner(
    n: PolyOrder,
    state: &SigmaState,
    params: &PhysicalParams,
    x: f64,
    grid: &GridSpec,
) -> Result<f64> {
    guard(n, state, x)?;
    let [f, p1, _] = p_moments(n, state, params, x, p_line(grid)?)?;
    Ok(p1 / (params.m() * f))
}

/// `P₁₁(x) = m ∫ W_n(x, mv)(v − ⟨v⟩)² dv`.
pub fn pressure(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, x: f64, grid: &GridSpec) -> Result<f64> {
    let [f, p1, p2] = p_moments(n, state, params, x, p_line(grid)?)?;
    let m = params.m();
    Ok((p2 - p1 * p1 / f) / (m * m))
}

/// `−(1/f) ∂P₁₁/∂x` with a centered difference of step `dx`; the momentum
/// grid is re-centered on each stencil point.
pub fn pressure_force_from_wigner(
    n: PolyOrder,
    state: &SigmaState,
    params: &PhysicalParams,
    x: f64,
    grid: &GridSpec,
    dx: f64,
) -> Result<f64> {
    guard(n, state, x)?;
    let axis = p_line(grid)?;
    let shift = params.m() * state.sigma_dot / state.sigma * dx;
    let at = |x: f64, center: f64| pressure(n, state, params, x, &GridSpec::line(Axis { center, ..axis }));
    let plus = at(x + dx, axis.center + shift)?;
    let minus = at(x - dx, axis.center - shift)?;
    let [f, _, _] = p_moments(n, state, params, x, axis)?;
    Ok(-(plus - minus) / (2.0 * dx) / f)
}

/// Residual of `∂W/∂t + (p/m)∂W/∂x − mΩ²x ∂W/∂p = 0` on a 2-D grid.
///
/// `∂W/∂t` is `W'(ε)` times a centered difference of `ε`, which is smooth in
/// `t` where `W` itself oscillates.
pub fn moyal_residual(
    n: PolyOrder,
    history: &SigmaHistory,
    grid: &GridSpec,
    t: f64,
    dt: f64,
) -> Result<ResidualReport> {
    let omega2 = history.omega_squared(t)?;
    moyal_residual_with_omega2(n, history, grid, t, dt, omega2)
}

/// As [`moyal_residual`] but with the force coefficient `Ω²` supplied by
/// the caller, which lets a deliberately wrong potential be tested.
pub fn moyal_residual_with_omega2(
    n: PolyOrder,
    history: &SigmaHistory,
    grid: &GridSpec,
    t: f64,
    dt: f64,
    omega2: f64,
) -> Result<ResidualReport> {
    let params = *history.params();
    let m = params.m();
    let now = history.state(t)?;
    let before = history.state(t - dt)?;
    let after = history.state(t + dt)?;
    sample_grid(grid, dt, |c| {
        let pt = PhasePoint::new(c[0], c[1]);
        let e_t = (epsilon(&after, &params, pt) - epsilon(&before, &params, pt)) / (2.0 * dt);
        let (_, w_x, w_p) = wigner_jet(n, &now, &params, pt);
        let w_t = wigner_slope(n, &params, epsilon(&now, &params, pt)) * e_t;
        let drift = pt.p / m * w_x;
        let force = -m * omega2 * pt.x * w_p;
        Ok(Some((w_t + drift + force, w_t.abs() + drift.abs() + force.abs())))
    })
}

/// Material derivative `∂ε/∂t + (p/m)∂ε/∂x − mΩ²x ∂ε/∂p`, zero along the
/// Hill flow up to the `O(dt²)` error of the centered time difference.
pub fn epsilon_material_derivative(history: &SigmaHistory, pt: PhasePoint, t: f64, dt: f64) -> Result<f64> {
    let params = *history.params();
    let now = history.state(t)?;
    let e_t =
        (epsilon(&history.state(t + dt)?, &params, pt) - epsilon(&history.state(t - dt)?, &params, pt)) / (2.0 * dt);
    let (ex, ep) = epsilon_gradient(&now, &params, pt);
    Ok(e_t + pt.p / params.m() * ex - params.m() * omega_squared(&now, &params) * pt.x * ep)
}

/// Smallest sampled value of `W_n` on `grid`.
pub fn grid_minimum(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, grid: &GridSpec) -> f64 {
    grid.points().map(|c| wigner(n, state, params, PhasePoint::new(c[0], c[1]))).fold(f64::INFINITY, f64::min)
}
