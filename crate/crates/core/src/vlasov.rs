//! Probability density, velocity field and probability current of the
//! `n`-th state, the pole structure of the general velocity solution and the
//! continuity-equation check.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::dynamics::{SigmaHistory, SigmaState};
use crate::error::{Error, Result};
use crate::polynomials::{hermite, hermite_normalized, hermite_normalized_jet, hermite_zeros, PolyOrder};
use crate::quadrature::{adaptive_gauss_kronrod, Axis, GridSpec};
use crate::report::{sample_grid, ResidualReport};

/// Half-width of the band around density zeros excluded from residuals.
pub const ZERO_GUARD: f64 = 1e-6;

const POLE_COINCIDENCE: f64 = 1e-12;
const POLE_PROXIMITY: f64 = 1e-9;

/// Free constants of the general velocity solution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlowParams {
    pub c: f64,
    pub x0: f64,
}

/// Open interval, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

fn scaled(state: &SigmaState, x: f64) -> f64 {
    x / (SQRT_2 * state.sigma)
}

/// `f_n(x, t)`.
pub fn density(n: PolyOrder, state: &SigmaState, x: f64) -> f64 {
    let xt = scaled(state, x);
    let h = hermite_normalized(n, xt);
    (-xt * xt).exp() * h * h / ((2.0 * PI).sqrt() * state.sigma)
}

/// `(f, ∂f/∂x)` at one point.
pub fn density_jet(n: PolyOrder, state: &SigmaState, x: f64) -> (f64, f64) {
    let xt = scaled(state, x);
    let (h, dh, _) = hermite_normalized_jet(n, xt);
    let norm = (-xt * xt).exp() / ((2.0 * PI).sqrt() * state.sigma);
    let f = norm * h * h;
    let df = norm * (2.0 * h * dh - 2.0 * xt * h * h) / (SQRT_2 * state.sigma);
    (f, df)
}

/// Physical positions of the density zeros, `√2 σ` times the zeros of `H_n`.
pub fn density_zeros(n: PolyOrder, state: &SigmaState) -> Vec<f64> {
    hermite_zeros(n).into_iter().map(|z| SQRT_2 * state.sigma * z).collect()
}

fn nearest(zeros: &[f64], x: f64) -> Option<(f64, f64)> {
    zeros.iter().map(|&z| (z, (x - z).abs())).min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Mean velocity `C e^{x̃²}/H_n²(x̃) + (σ̇/σ)x`.
///
/// With `C = 0` this reduces to the linear field and does not depend on `n`.
pub fn velocity_field(n: PolyOrder, state: &SigmaState, flow: &FlowParams, x: f64) -> Result<f64> {
    let linear = state.sigma_dot / state.sigma * x;
    if flow.c == 0.0 {
        return Ok(linear);
    }
    if let Some((root, d)) = nearest(&density_zeros(n, state), x) {
        if d <= POLE_COINCIDENCE {
            return Err(Error::Pole { root });
        }
    }
    let xt = scaled(state, x);
    let h = hermite(n, xt);
    Ok(flow.c * (xt * xt).exp() / (h * h) + linear)
}

/// The `n + 1` open intervals between consecutive density zeros.
pub fn pole_intervals(n: PolyOrder, state: &SigmaState) -> Vec<Interval> {
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(density_zeros(n, state));
    edges.push(f64::INFINITY);
    edges.windows(2).map(|w| Interval { lo: w[0], hi: w[1] }).collect()
}

/// `J = f·⟨v⟩` in the cancelled form, finite at the poles.
pub fn probability_current(n: PolyOrder, state: &SigmaState, flow: &FlowParams, x: f64) -> f64 {
    let plateau = flow.c / (n.hermite_norm() * (2.0 * PI).sqrt() * state.sigma);
    plateau + density(n, state, x) * state.sigma_dot / state.sigma * x
}

/// `Θ_n(x, x₀) = σ√2 ∫ e^{u²} H_n(u)^{-2} du` between the scaled limits.
pub fn theta_integral(n: PolyOrder, state: &SigmaState, x0: f64, x: f64) -> Result<f64> {
    let zeros = density_zeros(n, state);
    for &limit in &[x0, x] {
        if let Some((root, distance)) = nearest(&zeros, limit) {
            if distance <= POLE_PROXIMITY {
                return Err(Error::PoleProximity { x: limit, root, distance });
            }
        }
    }
    let (lo, hi) = if x0 <= x { (x0, x) } else { (x, x0) };
    if let Some(&root) = zeros.iter().find(|&&z| z > lo && z < hi) {
        return Err(Error::Domain(format!("limits {x0} and {x} lie on opposite sides of the pole at {root}")));
    }
    if x0 == x {
        return Ok(0.0);
    }
    let integrand = |u: f64| {
        let h = hermite(n, u);
        (u * u).exp() / (h * h)
    };
    let (v, _) = adaptive_gauss_kronrod(integrand, scaled(state, x0), scaled(state, x), 1e-300, 1e-12)?;
    Ok(SQRT_2 * state.sigma * v)
}

/// Axis covering `|x| ≤ 8σ√(2n+1)`, where the density tail is negligible.
pub fn density_axis(n: PolyOrder, state: &SigmaState, points: usize) -> Result<Axis> {
    Axis::symmetric(8.0 * state.sigma * (2.0 * n.as_f64() + 1.0).sqrt(), points)
}

/// Residual of `∂f/∂t + ∂(f⟨v⟩)/∂x = 0` for the `C = 0` flow on a 1-D grid.
///
/// Spatial derivatives are analytic; `∂f/∂t` is a centered difference with
/// step `dt`. Points within [`ZERO_GUARD`] of a density zero are skipped.
pub fn continuity_residual(
    n: PolyOrder,
    history: &SigmaHistory,
    grid: &GridSpec,
    t: f64,
    dt: f64,
) -> Result<ResidualReport> {
    let now = history.state(t)?;
    let before = history.state(t - dt)?;
    let after = history.state(t + dt)?;
    let zeros = density_zeros(n, &now);
    let rate = now.sigma_dot / now.sigma;
    sample_grid(grid, dt, |c| {
        let x = c[0];
        if nearest(&zeros, x).is_some_and(|(_, d)| d < ZERO_GUARD) {
            return Ok(None);
        }
        let df_dt = (density(n, &after, x) - density(n, &before, x)) / (2.0 * dt);
        let (f, df_dx) = density_jet(n, &now, x);
        let advect = rate * x * df_dx;
        let compress = f * rate;
        Ok(Some((df_dt + advect + compress, df_dt.abs() + advect.abs() + compress.abs())))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{PhysicalParams, SigmaDriver};
    use crate::quadrature::integrate_line;
    use crate::report::convergence_study;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn n(k: i64) -> PolyOrder {
        PolyOrder::new(k).unwrap()
    }

    fn st(s: f64, sd: f64) -> SigmaState {
        SigmaState::new(0.0, s, sd, 0.0).unwrap()
    }

    #[test]
    fn density_examples() {
        let s = st(FRAC_1_SQRT_2, 0.0);
        assert_abs_diff_eq!(density(n(0), &s, 0.0), 1.0 / PI.sqrt(), epsilon = 1e-15);
        assert_eq!(density(n(1), &st(1.3, 0.2), 0.0), 0.0);
        assert_abs_diff_eq!(density(n(2), &s, 0.0), 0.5 / PI.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn density_normalized_and_vanishes_at_breakpoints() {
        let history =
            SigmaHistory::new(SigmaDriver::SinSquared { sigma0: 0.8, varpi: 1.3 }, PhysicalParams::default(), 0.0)
                .unwrap();
        for k in 0..=6 {
            for &t in &[0.0, 0.4, 1.9] {
                let s = history.state(t).unwrap();
                let axis = density_axis(n(k), &s, 801).unwrap();
                let mass = integrate_line(|x| density(n(k), &s, x), axis).unwrap().value;
                assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-10);
                for iv in pole_intervals(n(k), &s).iter().skip(1) {
                    assert!(density(n(k), &s, iv.lo) < 1e-25);
                }
            }
        }
    }

    #[test]
    fn density_gradient_matches_difference() {
        let s = st(0.9, 0.0);
        for k in 0..5 {
            for &x in &[-1.7, -0.3, 0.4, 2.2] {
                let (_, d) = density_jet(n(k), &s, x);
                let h = 1e-6;
                let fd = (density(n(k), &s, x + h) - density(n(k), &s, x - h)) / (2.0 * h);
                assert_abs_diff_eq!(d, fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn velocity_examples() {
        let flow0 = FlowParams::default();
        assert_abs_diff_eq!(velocity_field(n(0), &st(1.5, 1.0), &flow0, 2.0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert_eq!(velocity_field(n(3), &st(1.5, 1.0), &flow0, 0.0).unwrap(), 0.0);
        let flow1 = FlowParams { c: 1.0, x0: 0.0 };
        let v = velocity_field(n(0), &st(FRAC_1_SQRT_2, 0.0), &flow1, 1.0).unwrap();
        assert_abs_diff_eq!(v, 1f64.exp(), epsilon = 1e-14);
        let s = st(FRAC_1_SQRT_2, 0.0);
        let err = velocity_field(n(2), &s, &flow1, FRAC_1_SQRT_2).unwrap_err();
        assert!(matches!(err, Error::Pole { root } if (root - FRAC_1_SQRT_2).abs() < 1e-14));
    }

    #[test]
    fn zero_constant_field_is_independent_of_order() {
        let s = st(1.1, -0.4);
        let flow = FlowParams::default();
        for k in 0..8 {
            let v = velocity_field(n(k), &s, &flow, 0.77).unwrap();
            assert_eq!(v.to_bits(), velocity_field(n(0), &s, &flow, 0.77).unwrap().to_bits());
        }
    }

    #[test]
    fn interval_examples() {
        let s = st(FRAC_1_SQRT_2, 0.0);
        assert_eq!(pole_intervals(n(0), &s), vec![Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }]);
        assert_eq!(
            pole_intervals(n(1), &s),
            vec![Interval { lo: f64::NEG_INFINITY, hi: 0.0 }, Interval { lo: 0.0, hi: f64::INFINITY }]
        );
        let two = pole_intervals(n(2), &s);
        assert_eq!(two.len(), 3);
        assert_abs_diff_eq!(two[1].lo, -FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(two[1].hi, FRAC_1_SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn current_examples() {
        let none = FlowParams::default();
        assert_eq!(probability_current(n(2), &st(1.0, 0.0), &none, 0.3), 0.0);
        let one = FlowParams { c: 1.0, x0: 0.0 };
        let s = st(FRAC_1_SQRT_2, 0.0);
        assert_abs_diff_eq!(probability_current(n(0), &s, &one, 10.0), 1.0 / PI.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(probability_current(n(0), &s, &one, -10.0), 1.0 / PI.sqrt(), epsilon = 1e-15);
        let moving = st(1.5, 1.0);
        let f = density(n(0), &moving, 2.0);
        assert_abs_diff_eq!(probability_current(n(0), &moving, &none, 2.0), f * 4.0 / 3.0, epsilon = 1e-16);
        // away from the poles the cancelled form equals f·v
        let s3 = st(0.9, 0.3);
        for &x in &[-2.0, -0.5, 0.35, 1.4] {
            let j = density(n(3), &s3, x) * velocity_field(n(3), &s3, &one, x).unwrap();
            assert_abs_diff_eq!(probability_current(n(3), &s3, &one, x), j, epsilon = 1e-12 * j.abs().max(1.0));
        }
    }

    #[test]
    fn theta_examples() {
        let s = st(FRAC_1_SQRT_2, 0.0);
        assert_eq!(theta_integral(n(3), &s, 0.4, 0.4).unwrap(), 0.0);
        let v = theta_integral(n(0), &s, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(v, 1.462_651_745_907_181_6, epsilon = 1e-10);
        assert_abs_diff_eq!(theta_integral(n(0), &s, 1.0, 0.0).unwrap(), -v, epsilon = 1e-15);
        assert!(matches!(theta_integral(n(1), &s, -0.5, 0.5), Err(Error::Domain(_))));
        assert!(matches!(theta_integral(n(1), &s, 1e-10, 0.5), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn theta_is_additive() {
        let s = st(0.8, 0.1);
        let (a, b, c) = (0.2, 0.5, 0.75);
        let lhs = theta_integral(n(2), &s, a, b).unwrap() + theta_integral(n(2), &s, b, c).unwrap();
        assert_abs_diff_eq!(lhs, theta_integral(n(2), &s, a, c).unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn continuity_static_is_exact() {
        let p = PhysicalParams::default();
        let h = SigmaHistory::new(SigmaDriver::constant_from_frequency(&p, 1.0).unwrap(), p, 0.0).unwrap();
        let g = GridSpec::line(Axis::symmetric(4.0, 201).unwrap());
        let r = continuity_residual(n(3), &h, &g, 1.0, 1e-3).unwrap();
        assert!(r.max_norm <= 1e-12);
    }

    #[test]
    fn continuity_converges_at_second_order() {
        let p = PhysicalParams::default();
        let h = SigmaHistory::new(SigmaDriver::SinSquared { sigma0: 1.0, varpi: 1.0 }, p, 0.0).unwrap();
        for k in [0, 4] {
            let s = h.state(0.3).unwrap();
            let g = GridSpec::line(density_axis(n(k), &s, 401).unwrap());
            let r = convergence_study(|dt| continuity_residual(n(k), &h, &g, 0.3, dt), 1e-3).unwrap();
            assert!(r.max_norm <= 1e-5, "{r:?}");
            assert!(r.is_second_order(0.5), "{r:?}");
        }
    }

    proptest! {
        #[test]
        fn velocity_direction_follows_sigma_dot(sd in -3.0f64..3.0, x in -5.0f64..5.0, s in 0.1f64..3.0) {
            let v = velocity_field(n(2), &st(s, sd), &FlowParams::default(), x).unwrap();
            prop_assert_eq!(v.signum() == (sd * x).signum() || v == 0.0, true);
        }

        #[test]
        fn density_is_nonnegative(k in 0i64..12, x in -20.0f64..20.0, s in 0.05f64..4.0) {
            prop_assert!(density(n(k), &st(s, 0.0), x) >= 0.0);
        }
    }
}
