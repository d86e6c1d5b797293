//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the special-function or Wigner code of the crate.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;
use wvl_core::{PhysicalParams, SigmaState};

/// Physicists' Hermite polynomials written out for `n ≤ 3`.
pub fn hermite_explicit(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * x,
        2 => 4.0 * x * x - 2.0,
        3 => 8.0 * x.powi(3) - 12.0 * x,
        _ => panic!("explicit Hermite only up to n = 3"),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Width-`σ` Hermite–Gauss state with the chirp `−σ̇x²/(4ασ)`, no global phase.
pub fn psi_oracle(n: usize, state: &SigmaState, params: &PhysicalParams, x: f64) -> Complex64 {
    let s = state.sigma;
    let xt = x / (2f64.sqrt() * s);
    let amp = (-xt * xt / 2.0).exp() * hermite_explicit(n, xt)
        / (2f64.powi(n as i32) * factorial(n)).sqrt()
        / ((2.0 * PI).sqrt() * s).sqrt();
    let alpha = -params.hbar() / (2.0 * params.m());
    let chirp = -state.sigma_dot * x * x / (4.0 * alpha * s);
    Complex64::from_polar(amp, chirp)
}

/// `(1/πħ) ∫ Ψ*(x+y) Ψ(x−y) e^{2ipy/ħ} dy` by a wide trapezoid sum.
pub fn wigner_bruteforce(n: usize, state: &SigmaState, params: &PhysicalParams, x: f64, p: f64) -> f64 {
    let hbar = params.hbar();
    let half = 14.0 * state.sigma;
    let steps = 4000;
    let dy = 2.0 * half / steps as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=steps {
        let y = -half + k as f64 * dy;
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        acc += psi_oracle(n, state, params, x + y).conj()
            * psi_oracle(n, state, params, x - y)
            * Complex64::from_polar(1.0, 2.0 * p * y / hbar)
            * w;
    }
    (acc * dy).re / (PI * hbar)
}

/// Rank-2 Gaussian without the energy phase, coded from its definition.
pub fn psi12_oracle(state: &SigmaState, params: &PhysicalParams, x: f64, v: f64) -> Complex64 {
    let (m, hbar, hbar2) = (params.m(), params.hbar(), params.hbar2());
    let (s, sd, sdd) = (state.sigma, state.sigma_dot, state.sigma_ddot);
    let c = hbar * hbar / (2.0 * m * s.powi(4)) - 2.0 * m * sdd / s;
    let re = -x * x / (4.0 * s * s) - (m / hbar).powi(2) * (sd * x - s * v).powi(2);
    let im = -c * x * v / (2.0 * hbar2);
    Complex64::from_polar(re.exp(), im) / (PI * hbar).sqrt()
}

/// Rank-4 Wigner transform of the rank-2 Gaussian with `v = p/m`,
/// `(2πħ₂)⁻² ∬ Ψ̄(x − s₁/2, v − s₂/2) Ψ(x + s₁/2, v + s₂/2) e^{i(s₁p̈ − s₂ṗ)/ħ₂} ds₁ ds₂`.
pub fn rank4_bruteforce(state: &SigmaState, params: &PhysicalParams, pt: [f64; 4]) -> f64 {
    let [x, p, p_dot, p_ddot] = pt;
    let (m, hbar, hbar2) = (params.m(), params.hbar(), params.hbar2());
    let v = p / m;
    let h1 = 16.0 * state.sigma;
    let h2 = 16.0 * hbar / (m * state.sigma);
    let steps = 400;
    let (d1, d2) = (2.0 * h1 / steps as f64, 2.0 * h2 / steps as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=steps {
        let s1 = -h1 + i as f64 * d1;
        let w1 = if i == 0 || i == steps { 0.5 } else { 1.0 };
        for j in 0..=steps {
            let s2 = -h2 + j as f64 * d2;
            let w2 = if j == 0 || j == steps { 0.5 } else { 1.0 };
            acc += psi12_oracle(state, params, x - s1 / 2.0, v - s2 / 2.0).conj()
                * psi12_oracle(state, params, x + s1 / 2.0, v + s2 / 2.0)
                * Complex64::from_polar(1.0, (s1 * p_ddot - s2 * p_dot) / hbar2)
                * (w1 * w2);
        }
    }
    (acc * d1 * d2).re / (2.0 * PI * hbar2).powi(2)
}

/// Stationary rank-4 oscillator distribution.
pub fn oscillator_rank4(params: &PhysicalParams, omega0: f64, pt: [f64; 4]) -> f64 {
    let [x, p, p_dot, p_ddot] = pt;
    let m = params.m();
    let w2 = omega0 * omega0;
    let bracket = p * p / (2.0 * m)
        + m * w2 * x * x / 2.0
        + (p_dot + m * w2 * x).powi(2) / (2.0 * m * w2)
        + (p_ddot - w2 * p).powi(2) / (2.0 * m * w2 * w2);
    (-2.0 / (params.hbar() * omega0) * bracket).exp() / (PI * params.hbar2()).powi(2)
}
