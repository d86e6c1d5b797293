//! Wave function of the `n`-th state for a given width history, its
//! potentials, and the Schrödinger and Hamilton–Jacobi checks.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::dynamics::{PhysicalParams, SigmaHistory, SigmaState};
use crate::error::{Error, Result};
use crate::polynomials::{hermite_normalized_jet, PolyOrder};
use crate::quadrature::{GridSpec, SampledAntiderivative};
use crate::report::{sample_grid, ResidualReport};
use crate::vlasov::{density_zeros, ZERO_GUARD};

/// Default sampling step of the phase-energy accumulator.
pub const ACCUMULATOR_STEP: f64 = 1e-3;

/// `Ė_n = (ħ²/2m)(n + ½)/σ²`.
pub fn phase_energy_rate(n: PolyOrder, state: &SigmaState, params: &PhysicalParams) -> f64 {
    let hbar = params.hbar();
    hbar * hbar / (2.0 * params.m()) * (n.as_f64() + 0.5) / (state.sigma * state.sigma)
}

/// `E_n(t) = ∫₀ᵗ Ė_n`, with the gauge `E_n(0) = 0`.
#[derive(Debug, Clone)]
pub struct PhaseAccumulator {
    n: PolyOrder,
    energy: SampledAntiderivative,
}

impl PhaseAccumulator {
    pub fn new(n: PolyOrder, history: &SigmaHistory, t_end: f64) -> Result<Self> {
        Self::with_step(n, history, t_end, ACCUMULATOR_STEP)
    }

    pub fn with_step(n: PolyOrder, history: &SigmaHistory, t_end: f64, step: f64) -> Result<Self> {
        let params = *history.params();
        let energy = history.antiderivative(|s| phase_energy_rate(n, s, &params), t_end, step)?;
        Ok(Self { n, energy })
    }

    pub fn order(&self) -> PolyOrder {
        self.n
    }

    pub fn energy(&self, t: f64) -> Result<f64> {
        self.energy.value(t)
    }
}

// Value and x-derivatives of e^{-x̃²/2} h̃_n(x̃) with respect to x̃.
fn envelope(n: PolyOrder, xt: f64) -> (f64, f64, f64) {
    let (h, dh, ddh) = hermite_normalized_jet(n, xt);
    let g = (-0.5 * xt * xt).exp();
    (g * h, g * (dh - xt * h), g * (ddh - 2.0 * xt * dh + (xt * xt - 1.0) * h))
}

fn chirp(state: &SigmaState, params: &PhysicalParams) -> f64 {
    -state.sigma_dot / (4.0 * params.alpha() * state.sigma)
}

/// `Ψ_n(x, t)` given the accumulated phase energy `E_n`.
pub fn wavefunction(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, e_n: f64, x: f64) -> Complex64 {
    let xt = x / (SQRT_2 * state.sigma);
    let (g, _, _) = envelope(n, xt);
    let amplitude = g / ((2.0 * PI).sqrt() * state.sigma).sqrt();
    let phase = chirp(state, params) * x * x - params.beta() * e_n;
    Complex64::from_polar(amplitude, phase)
}

/// `U¹ = (σ̈ − α²/σ³)x²/(4αβσ)`, equal to `mΩ²x²/2`.
pub fn potential_u1(state: &SigmaState, params: &PhysicalParams, x: f64) -> f64 {
    let alpha = params.alpha();
    (state.sigma_ddot - alpha * alpha / state.sigma.powi(3)) * x * x / (4.0 * alpha * params.beta() * state.sigma)
}

/// `Q_n = −(ħ²/8mσ⁴)(x² − 2σ²(1 + 2n))`.
pub fn quantum_potential(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, x: f64) -> f64 {
    let s2 = state.sigma * state.sigma;
    let hbar = params.hbar();
    -hbar * hbar / (8.0 * params.m() * s2 * s2) * (x * x - 2.0 * s2 * (1.0 + 2.0 * n.as_f64()))
}

/// `(1/√f) ∂²√f/∂x²` from the Hermite jet; undefined at density zeros.
pub fn amplitude_curvature(n: PolyOrder, state: &SigmaState, x: f64) -> f64 {
    let xt = x / (SQRT_2 * state.sigma);
    let (g, _, g2) = envelope(n, xt);
    g2 / (g * 2.0 * state.sigma * state.sigma)
}

// Real amplitude of Ψ.
fn amplitude(n: PolyOrder, state: &SigmaState, x: f64) -> f64 {
    let s = state.sigma;
    envelope(n, x / (SQRT_2 * s)).0 / ((2.0 * PI).sqrt() * s).sqrt()
}

// Ψ without the global factor e^{-iβE}, and its second x-derivative.
fn reduced_psi(n: PolyOrder, state: &SigmaState, params: &PhysicalParams, x: f64) -> (Complex64, Complex64) {
    let s = state.sigma;
    let xt = x / (SQRT_2 * s);
    let norm = 1.0 / ((2.0 * PI).sqrt() * s).sqrt();
    let (g, g1, g2) = envelope(n, xt);
    let a = norm * g;
    let a1 = norm * g1 / (SQRT_2 * s);
    let a2 = norm * g2 / (2.0 * s * s);
    let k = chirp(state, params);
    let p = Complex64::from_polar(1.0, k * x * x);
    let i = Complex64::i();
    let dphase = 2.0 * k * x;
    let second = (a2 + 2.0 * a1 * dphase * i + a * (2.0 * k * i - dphase * dphase)) * p;
    (a * p, second)
}

/// Residual of `iħ∂Ψ/∂t = −(ħ²/2m)∂²Ψ/∂x² + U¹Ψ` on a 1-D grid.
///
/// The global factor `e^{−iβE_n}` is divided out and its derivative taken
/// from the exact rate. The rest is `A(x, t)e^{ik(t)x²}`; the real amplitude
/// `A` and the chirp `k` are differenced separately.
pub fn schrodinger_residual(
    n: PolyOrder,
    history: &SigmaHistory,
    grid: &GridSpec,
    t: f64,
    dt: f64,
) -> Result<ResidualReport> {
    let params = *history.params();
    let now = history.state(t)?;
    let before = history.state(t - dt)?;
    let after = history.state(t + dt)?;
    let rate = phase_energy_rate(n, &now, &params);
    let hbar = params.hbar();
    let kinetic = hbar * hbar / (2.0 * params.m());
    let chirp_t = (chirp(&after, &params) - chirp(&before, &params)) / (2.0 * dt);
    sample_grid(grid, dt, |c| {
        let x = c[0];
        let (psi, psi_xx) = reduced_psi(n, &now, &params, x);
        let amp_t = (amplitude(n, &after, x) - amplitude(n, &before, x)) / (2.0 * dt);
        let d_t =
            psi * Complex64::new(0.0, x * x * chirp_t) + Complex64::from_polar(amp_t, chirp(&now, &params) * x * x);
        let lhs_t = Complex64::i() * hbar * d_t;
        let lhs_e = psi * rate;
        let kin = -psi_xx * kinetic;
        let pot = psi * potential_u1(&now, &params, x);
        let r = lhs_t + lhs_e - kin - pot;
        Ok(Some((r.norm(), lhs_t.norm() + lhs_e.norm() + kin.norm() + pot.norm())))
    })
}

/// Phase `φ_n = −σ̇x²/(4ασ) − βE_n`.
pub fn phase(state: &SigmaState, params: &PhysicalParams, e_n: f64, x: f64) -> f64 {
    chirp(state, params) * x * x - params.beta() * e_n
}

/// Residual of `∂φ/∂t + α(1/√f)∂²√f − α(∂φ/∂x)² + βU¹ = 0`.
///
/// `∂φ/∂t` is a centered difference of the continuous phase read from the
/// accumulator; everything else is analytic. Points within
/// [`ZERO_GUARD`] of a density zero are skipped.
pub fn hamilton_jacobi_residual(
    accumulator: &PhaseAccumulator,
    history: &SigmaHistory,
    grid: &GridSpec,
    t: f64,
    dt: f64,
) -> Result<ResidualReport> {
    let n = accumulator.order();
    let params = *history.params();
    let alpha = params.alpha();
    let now = history.state(t)?;
    let before = history.state(t - dt)?;
    let after = history.state(t + dt)?;
    let (e_before, e_after) = (accumulator.energy(t - dt)?, accumulator.energy(t + dt)?);
    let zeros = density_zeros(n, &now);
    sample_grid(grid, dt, |c| {
        let x = c[0];
        if zeros.iter().any(|z| (z - x).abs() < ZERO_GUARD) {
            return Ok(None);
        }
        let phi_t = (phase(&after, &params, e_after, x) - phase(&before, &params, e_before, x)) / (2.0 * dt);
        let quantum = alpha * amplitude_curvature(n, &now, x);
        let phi_x = 2.0 * chirp(&now, &params) * x;
        let flow = -alpha * phi_x * phi_x;
        let force = params.beta() * potential_u1(&now, &params, x);
        let r = phi_t + quantum + flow + force;
        if !r.is_finite() {
            return Err(Error::Conditioning { x, reason: "non-finite Hamilton-Jacobi term".into() });
        }
        Ok(Some((r, phi_t.abs() + quantum.abs() + flow.abs() + force.abs())))
    })
}

/// Stationary width state of the oscillator with frequency `ω₀`.
pub fn stationary_state(params: &PhysicalParams, omega0: f64) -> Result<SigmaState> {
    SigmaState::stationary((params.hbar() / (2.0 * params.m() * omega0)).sqrt())
}
