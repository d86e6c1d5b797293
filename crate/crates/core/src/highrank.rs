//! Extended phase space: the rank-2 wave function `Ψ(x, v, t)`, its
//! potential `U(x, v, t)`, the rank-4 Wigner function on `(x, p, ṗ, p̈)` and
//! residual checks of the rank-2 Schrödinger and rank-4 transport equations.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{PhysicalParams, SigmaHistory, SigmaState};
use crate::error::Result;
use crate::quadrature::{Axis, GridSpec, SampledAntiderivative};
use crate::report::{sample_grid, ResidualReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedPhasePoint {
    pub x: f64,
    pub p: f64,
    pub p_dot: f64,
    pub p_ddot: f64,
}

impl ExtendedPhasePoint {
    pub fn new(x: f64, p: f64, p_dot: f64, p_ddot: f64) -> Self {
        Self { x, p, p_dot, p_ddot }
    }
}

/// `Ė¹² = mħ₂²σ²/ħ²`.
pub fn rank2_energy_rate(state: &SigmaState, params: &PhysicalParams) -> f64 {
    params.m() * (params.hbar2() * state.sigma / params.hbar()).powi(2)
}

/// Parameters of one rank-2 evaluation: the physical scales and the
/// accumulated energy `E¹²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rank2Params {
    pub params: PhysicalParams,
    pub e12: f64,
}

impl Rank2Params {
    /// The free phase function, fixed to `h = −2E¹²/ħ₂`.
    pub fn h_gauge(&self) -> f64 {
        -2.0 * self.e12 / self.params.hbar2()
    }
}

/// `E¹²(t) = ∫₀ᵗ Ė¹²`.
#[derive(Debug, Clone)]
pub struct E12Accumulator {
    params: PhysicalParams,
    energy: SampledAntiderivative,
}

impl E12Accumulator {
    pub fn new(history: &SigmaHistory, t_end: f64, step: f64) -> Result<Self> {
        let params = *history.params();
        let energy = history.antiderivative(|s| rank2_energy_rate(s, &params), t_end, step)?;
        Ok(Self { params, energy })
    }

    pub fn at(&self, t: f64) -> Result<Rank2Params> {
        Ok(Rank2Params { params: self.params, e12: self.energy.value(t)? })
    }
}

// Coefficient of the xv cross phase, ħ²/(2mσ⁴) − 2mσ̈/σ.
fn cross_phase(state: &SigmaState, params: &PhysicalParams) -> f64 {
    let m = params.m();
    let hbar = params.hbar();
    hbar * hbar / (2.0 * m * state.sigma.powi(4)) - 2.0 * m * state.sigma_ddot / state.sigma
}

// Exponent of Ψ without the E¹² term, and its x, v and vv derivatives.
fn rank2_exponent(state: &SigmaState, params: &PhysicalParams, x: f64, v: f64) -> [Complex64; 4] {
    let (s, sd) = (state.sigma, state.sigma_dot);
    let m2 = (params.m() / params.hbar()).powi(2);
    let c = cross_phase(state, params) / (2.0 * params.hbar2());
    let u = sd * x - s * v;
    let i = Complex64::i();
    [
        Complex64::new(-x * x / (4.0 * s * s) - m2 * u * u, 0.0) - i * c * x * v,
        Complex64::new(-x / (2.0 * s * s) - 2.0 * m2 * sd * u, 0.0) - i * c * v,
        Complex64::new(2.0 * m2 * s * u, 0.0) - i * c * x,
        Complex64::new(-2.0 * m2 * s * s, 0.0),
    ]
}

/// `Ψ¹²(x, v, t)`; its squared modulus is `W_0(x, mv, t)`.
pub fn psi_rank2(state: &SigmaState, r2: &Rank2Params, x: f64, v: f64) -> Complex64 {
    let p = &r2.params;
    let [e, ..] = rank2_exponent(state, p, x, v);
    (e - Complex64::i() * r2.e12 / p.hbar2()).exp() / (PI * p.hbar()).sqrt()
}

/// Which closed form of the rank-2 potential to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum U12Form {
    /// The form for which `Ψ¹²` solves the rank-2 Schrödinger equation; its
    /// cross term needs `σ⃛`.
    #[default]
    Consistent,
    /// Variant whose cross term uses `σ̈σ − σ̇²` in place of the `σ⃛` term and
    /// whose `x²` term differs; it does not solve the rank-2 equation.
    Alternate,
}

/// `U = vv·v² + xv·xv + xx·x²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct U12Coefficients {
    pub vv: f64,
    pub xv: f64,
    pub xx: f64,
}

pub fn u12_coefficients(state: &SigmaState, params: &PhysicalParams, form: U12Form) -> U12Coefficients {
    let m = params.m();
    let (hbar, hbar2) = (params.hbar(), params.hbar2());
    let (s, sd, sdd, sddd) = (state.sigma, state.sigma_dot, state.sigma_ddot, state.sigma_dddot);
    let spread = hbar2 * hbar2 * m.powi(3) / hbar.powi(4);
    let c = cross_phase(state, params);
    let vv = 0.5 * c + 2.0 * spread * s.powi(4);
    match form {
        U12Form::Consistent => U12Coefficients {
            vv,
            xv: -(hbar * hbar * sd / (m * s.powi(5))
                + m * (s * sddd - sd * sdd) / (s * s)
                + 4.0 * spread * s.powi(3) * sd),
            xx: 2.0 * spread * s * s * sd * sd - c * c / (8.0 * m),
        },
        U12Form::Alternate => U12Coefficients {
            vv,
            xv: -(hbar * hbar * sd / (m * s.powi(5))
                + m * (sdd * s - sd * sd) / (s * s)
                + 4.0 * spread * s.powi(3) * sd),
            xx: 2.0 * spread * s * s * sd * sd
                - (hbar * hbar / (4.0 * m * 2f64.sqrt() * m * s.powi(4)) - sd / s * (m / 2.0).sqrt()).powi(2),
        },
    }
}

impl U12Coefficients {
    pub fn value(&self, x: f64, v: f64) -> f64 {
        self.vv * v * v + self.xv * x * v + self.xx * x * x
    }

    pub fn d_x(&self, x: f64, v: f64) -> f64 {
        self.xv * v + 2.0 * self.xx * x
    }

    pub fn d_v(&self, x: f64, v: f64) -> f64 {
        2.0 * self.vv * v + self.xv * x
    }
}

/// `U¹²(x, v, t)` in its consistent form.
pub fn potential_u12(state: &SigmaState, params: &PhysicalParams, x: f64, v: f64) -> f64 {
    u12_coefficients(state, params, U12Form::Consistent).value(x, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaXi {
    pub eta: f64,
    /// `None` when `σ̇ = 0`.
    pub xi: Option<f64>,
}

pub fn eta_xi(state: &SigmaState, params: &PhysicalParams) -> EtaXi {
    let m = params.m();
    let hbar2 = params.hbar() * params.hbar();
    let (s, sd) = (state.sigma, state.sigma_dot);
    let eta = (hbar2 - 4.0 * m * m * s.powi(3) * state.sigma_ddot) / (4.0 * m * s.powi(4));
    let xi = (sd != 0.0).then(|| (hbar2 + 4.0 * m * m * s * s * sd * sd) / (4.0 * m * m * s * s * sd * sd));
    EtaXi { eta, xi }
}

/// Sign of the `(ħ²/4σ²)(ṗ + ηx)²` term in the rank-4 exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank4Sign {
    /// Negative weight; not a Gaussian in `ṗ`.
    Negative,
    /// Positive weight; reduces to the stationary oscillator result.
    #[default]
    Reduced,
}

impl std::str::FromStr for Rank4Sign {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "negative" => Ok(Self::Negative),
            "reduced" => Ok(Self::Reduced),
            other => Err(format!("unknown rank-4 sign variant '{other}' (expected negative or reduced)")),
        }
    }
}

// Exponent of W⁴ and its gradient in (x, p, ṗ, p̈).
fn rank4_exponent(
    state: &SigmaState,
    params: &PhysicalParams,
    pt: ExtendedPhasePoint,
    sign: Rank4Sign,
) -> (f64, [f64; 4]) {
    let m = params.m();
    let (hbar, hbar2) = (params.hbar(), params.hbar2());
    let (s, sd) = (state.sigma, state.sigma_dot);
    let eta = eta_xi(state, params).eta;
    let w = match sign {
        Rank4Sign::Reduced => 1.0,
        Rank4Sign::Negative => -1.0,
    } * hbar
        * hbar
        / (4.0 * s * s);
    let a = sd * m * pt.x - s * pt.p;
    let b2 = pt.p_dot + eta * pt.x;
    let b1 = s * (m * pt.p_ddot - eta * pt.p) - m * sd * b2;
    let k = 2.0 / (m * m * hbar2 * hbar2);
    let value = -(pt.x * pt.x / (2.0 * s * s) + 2.0 / (hbar * hbar) * a * a + k * (b1 * b1 + w * b2 * b2));
    let ka = 4.0 / (hbar * hbar) * a;
    let grad = [
        -(pt.x / (s * s) + ka * sd * m + 2.0 * k * (b1 * (-m * sd * eta) + w * b2 * eta)),
        -(ka * (-s) + 2.0 * k * b1 * (-s * eta)),
        -(2.0 * k * (b1 * (-m * sd) + w * b2)),
        -(2.0 * k * b1 * s * m),
    ];
    (value, grad)
}

/// `W¹²³⁴(x, p, ṗ, p̈, t)`.
pub fn wigner_rank4(state: &SigmaState, params: &PhysicalParams, pt: ExtendedPhasePoint, sign: Rank4Sign) -> f64 {
    let (e, _) = rank4_exponent(state, params, pt, sign);
    e.exp() / (PI * params.hbar2()).powi(2)
}

/// Residual of `iħ₂(∂/∂t + v∂/∂x)Ψ = −(ħ₂²/2m)∂²Ψ/∂v² + UΨ` on an `(x, v)` grid.
///
/// `e^{−iE¹²/ħ₂}` is factored out with its exact rate; `∂Ψ/∂t` is `Ψ` times a
/// centered difference of the remaining exponent.
pub fn schrodinger2_residual(
    history: &SigmaHistory,
    grid: &GridSpec,
    t: f64,
    dt: f64,
    form: U12Form,
) -> Result<ResidualReport> {
    let params = *history.params();
    let now = history.state(t)?;
    let before = history.state(t - dt)?;
    let after = history.state(t + dt)?;
    let rate = rank2_energy_rate(&now, &params);
    let u = u12_coefficients(&now, &params, form);
    let hb2 = params.hbar2();
    let norm = 1.0 / (PI * params.hbar()).sqrt();
    let i = Complex64::i();
    sample_grid(grid, dt, |c| {
        let (x, v) = (c[0], c[1]);
        let [e, ex, ev, evv] = rank2_exponent(&now, &params, x, v);
        let psi = e.exp() * norm;
        let psi_t =
            psi * (rank2_exponent(&after, &params, x, v)[0] - rank2_exponent(&before, &params, x, v)[0]) / (2.0 * dt);
        let lhs_t = i * hb2 * psi_t;
        let lhs_x = i * hb2 * v * ex * psi;
        let lhs_e = psi * rate;
        let kin = -(evv + ev * ev) * psi * (hb2 * hb2 / (2.0 * params.m()));
        let pot = psi * u.value(x, v);
        let r = lhs_t + lhs_x + lhs_e - kin - pot;
        Ok(Some((r.norm(), lhs_t.norm() + lhs_x.norm() + lhs_e.norm() + kin.norm() + pot.norm())))
    })
}

/// Residual of
/// `[∂t + (p/m)∂x + ṗ∂p + (p̈ − ∂U/∂v)∂ṗ + (∂U/∂x)∂p̈] W⁴ = 0`
/// on a 4-D probe grid, with `∂W/∂t` taken as `W` times a centered
/// difference of the exponent.
pub fn moyal4_residual(
    history: &SigmaHistory,
    grid: &GridSpec,
    t: f64,
    dt: f64,
    sign: Rank4Sign,
    form: U12Form,
) -> Result<ResidualReport> {
    let params = *history.params();
    let m = params.m();
    let now = history.state(t)?;
    let before = history.state(t - dt)?;
    let after = history.state(t + dt)?;
    let u = u12_coefficients(&now, &params, form);
    sample_grid(grid, dt, |c| {
        let pt = ExtendedPhasePoint::new(c[0], c[1], c[2], c[3]);
        let (e, g) = rank4_exponent(&now, &params, pt, sign);
        let w = e.exp() / (PI * params.hbar2()).powi(2);
        let w_t = w * (rank4_exponent(&after, &params, pt, sign).0 - rank4_exponent(&before, &params, pt, sign).0)
            / (2.0 * dt);
        let v = pt.p / m;
        let terms = [
            w_t,
            v * g[0] * w,
            pt.p_dot * g[1] * w,
            (pt.p_ddot - u.d_v(pt.x, v)) * g[2] * w,
            u.d_x(pt.x, v) * g[3] * w,
        ];
        Ok(Some((terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())))
    })
}

/// Outcome of running the rank-4 transport check with both sign variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignComparison {
    pub negative: ResidualReport,
    pub reduced: ResidualReport,
    pub preferred: Rank4Sign,
}

pub fn compare_rank4_signs(history: &SigmaHistory, t: f64, dt: f64, points: usize) -> Result<SignComparison> {
    let grid = rank4_probe_grid(&history.state(t)?, history.params(), points)?;
    let negative = moyal4_residual(history, &grid, t, dt, Rank4Sign::Negative, U12Form::Consistent)?;
    let reduced = moyal4_residual(history, &grid, t, dt, Rank4Sign::Reduced, U12Form::Consistent)?;
    let preferred = if reduced.max_norm <= negative.max_norm { Rank4Sign::Reduced } else { Rank4Sign::Negative };
    Ok(SignComparison { negative, reduced, preferred })
}

/// Coarse `(x, p, ṗ, p̈)` box covering about two widths of the reduced
/// Gaussian along each axis.
pub fn rank4_probe_grid(state: &SigmaState, params: &PhysicalParams, points: usize) -> Result<GridSpec> {
    let m = params.m();
    let (hbar, hbar2) = (params.hbar(), params.hbar2());
    let (s, sd) = (state.sigma, state.sigma_dot);
    let eta = eta_xi(state, params).eta;
    let x_hw = 2.0 * s;
    let p_hw = (m * sd / s).abs() * x_hw + hbar / s;
    let pd_hw = eta.abs() * x_hw + 2.0 * m * hbar2 * s / hbar;
    let pdd_hw = (eta.abs() * p_hw + (sd / s).abs() * 2.0 * m * hbar2 * s / hbar) / m + hbar2 / s;
    GridSpec::new(vec![
        Axis::symmetric(x_hw, points)?,
        Axis::symmetric(p_hw, points)?,
        Axis::symmetric(pd_hw, points)?,
        Axis::symmetric(pdd_hw, points)?,
    ])
}

/// `(x, v)` grid matching the rank-2 Gaussian.
pub fn rank2_grid(state: &SigmaState, params: &PhysicalParams, points: usize) -> Result<GridSpec> {
    let radius = 6.0;
    let x_hw = std::f64::consts::SQRT_2 * state.sigma * radius;
    let v_hw = (state.sigma_dot / state.sigma).abs() * x_hw
        + params.hbar() * radius / (std::f64::consts::SQRT_2 * state.sigma * params.m());
    Ok(GridSpec::plane(Axis::symmetric(x_hw, points)?, Axis::symmetric(v_hw, points)?))
}
