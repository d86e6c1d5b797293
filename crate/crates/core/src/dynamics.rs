//! Width-function histories `σ(t)`, the Hill characteristic `ẍ + Ω²x = 0`
//! and Floquet classification of the Mathieu coefficient.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{rk4_step, SampledAntiderivative};

/// Default fixed step, 2000 steps per coefficient period `π`.
pub const DEFAULT_STEP: f64 = PI / 2000.0;

/// `σ` below this value aborts ODE integration.
pub const SIGMA_FLOOR: f64 = 1e-9;

// Largest substep of the width equation in units of its local time scale.
const SUBSTEP_FRACTION: f64 = 0.05;

/// Half-width of the band around `|trace| = 2` reported as marginal.
pub const MARGINAL_MARGIN: f64 = 1e-6;

/// Mass and the two action scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct PhysicalParams {
    m: f64,
    hbar: f64,
    hbar2: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    m: f64,
    hbar: f64,
    hbar2: f64,
}

impl TryFrom<RawParams> for PhysicalParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Self::new(r.m, r.hbar, r.hbar2)
    }
}

impl From<PhysicalParams> for RawParams {
    fn from(p: PhysicalParams) -> Self {
        Self { m: p.m, hbar: p.hbar, hbar2: p.hbar2 }
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { m: 1.0, hbar: 1.0, hbar2: 1.0 }
    }
}

impl PhysicalParams {
    pub fn new(m: f64, hbar: f64, hbar2: f64) -> Result<Self> {
        for (name, v) in [("m", m), ("hbar", hbar), ("hbar2", hbar2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { m, hbar, hbar2 })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn hbar2(&self) -> f64 {
        self.hbar2
    }

    /// `α = −ħ/2m`.
    pub fn alpha(&self) -> f64 {
        -self.hbar / (2.0 * self.m)
    }

    /// `β = 1/ħ`.
    pub fn beta(&self) -> f64 {
        1.0 / self.hbar
    }

    /// `α₂ = −ħ₂/2m`.
    pub fn alpha2(&self) -> f64 {
        -self.hbar2 / (2.0 * self.m)
    }
}

/// `σ` and its time derivatives at one instant.
///
/// `sigma_dddot` is only consumed by the rank-2 potential; states built with
/// [`SigmaState::new`] set it to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaState {
    pub t: f64,
    pub sigma: f64,
    pub sigma_dot: f64,
    pub sigma_ddot: f64,
    #[serde(default)]
    pub sigma_dddot: f64,
}

impl SigmaState {
    pub fn new(t: f64, sigma: f64, sigma_dot: f64, sigma_ddot: f64) -> Result<Self> {
        Self::with_jerk(t, sigma, sigma_dot, sigma_ddot, 0.0)
    }

    pub fn with_jerk(t: f64, sigma: f64, sigma_dot: f64, sigma_ddot: f64, sigma_dddot: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma} at t = {t}")));
        }
        if ![t, sigma_dot, sigma_ddot, sigma_dddot].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sigma derivatives at t = {t}")));
        }
        Ok(Self { t, sigma, sigma_dot, sigma_ddot, sigma_dddot })
    }

    /// Time-independent width.
    pub fn stationary(sigma: f64) -> Result<Self> {
        Self::new(0.0, sigma, 0.0, 0.0)
    }
}

/// Sign in `σ² = c₁²(t ± c₂)² + α²/c₁²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

/// Source of the width function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaDriver {
    /// Stationary oscillator.
    Constant { sigma0: f64 },
    /// `σ₀(1 + sin²(ϖt))`.
    SinSquared { sigma0: f64, varpi: f64 },
    /// Free-particle family with `Ω² ≡ 0`.
    Separatrix { c1: f64, c2: f64, branch: Branch },
    /// `σ³σ̈ + σ⁴(a − 2g cos 2t) − α² = 0`, integrated numerically.
    Mathieu { a: f64, g: f64, sigma0: f64, sigma_dot0: f64 },
}

impl SigmaDriver {
    /// Stationary width `σ₀ = √(ħ/2mω₀)` of the oscillator with frequency `ω₀`.
    pub fn constant_from_frequency(params: &PhysicalParams, omega0: f64) -> Result<Self> {
        if !(omega0 > 0.0) {
            return Err(Error::InvalidArgument(format!("omega0 must be positive, got {omega0}")));
        }
        Ok(Self::Constant { sigma0: (params.hbar() / (2.0 * params.m() * omega0)).sqrt() })
    }

    /// Mathieu driver launched from the `g = 0` equilibrium `σ = (α²/a)^{1/4}` at rest.
    pub fn mathieu_from_rest(params: &PhysicalParams, a: f64, g: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "the equilibrium start needs a > 0, got {a}; pass sigma0 explicitly"
            )));
        }
        let alpha = params.alpha();
        Ok(Self::Mathieu { a, g, sigma0: (alpha * alpha / a).powf(0.25), sigma_dot0: 0.0 })
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Self::Mathieu { .. })
    }
}

/// Closed-form `σ, σ̇, σ̈, σ⃛` of a non-ODE driver.
pub fn sigma_eval(driver: &SigmaDriver, params: &PhysicalParams, t: f64) -> Result<SigmaState> {
    match *driver {
        SigmaDriver::Constant { sigma0 } => SigmaState::new(t, sigma0, 0.0, 0.0),
        SigmaDriver::SinSquared { sigma0, varpi } => {
            let s = (varpi * t).sin();
            let (s2, c2) = (2.0 * varpi * t).sin_cos();
            SigmaState::with_jerk(
                t,
                sigma0 * (1.0 + s * s),
                sigma0 * varpi * s2,
                2.0 * sigma0 * varpi * varpi * c2,
                -4.0 * sigma0 * varpi.powi(3) * s2,
            )
        }
        SigmaDriver::Separatrix { c1, c2, branch } => {
            if c1 == 0.0 || !c1.is_finite() {
                return Err(Error::InvalidArgument("separatrix needs c1 != 0".into()));
            }
            let alpha = params.alpha();
            let tau = match branch {
                Branch::Plus => t + c2,
                Branch::Minus => t - c2,
            };
            let sigma = (c1 * c1 * tau * tau + alpha * alpha / (c1 * c1)).sqrt();
            let sd = c1 * c1 * tau / sigma;
            let sdd = (c1 * c1 - sd * sd) / sigma;
            let sddd = -3.0 * alpha * alpha * sd / sigma.powi(4);
            SigmaState::with_jerk(t, sigma, sd, sdd, sddd)
        }
        SigmaDriver::Mathieu { .. } => {
            Err(Error::Unsupported("the Mathieu driver has no closed form; use solve_sigma_ode".into()))
        }
    }
}

/// `Ω² = (α²/σ³ − σ̈)/σ`; negative values are legitimate.
pub fn omega_squared(state: &SigmaState, params: &PhysicalParams) -> f64 {
    let alpha = params.alpha();
    (alpha * alpha / state.sigma.powi(3) - state.sigma_ddot) / state.sigma
}

fn mathieu_coefficient(a: f64, g: f64, t: f64) -> f64 {
    a - 2.0 * g * (2.0 * t).cos()
}

/// Uniformly sampled solution of the Mathieu width equation.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTrajectory {
    pub params: PhysicalParams,
    pub a: f64,
    pub g: f64,
    pub samples: Vec<SigmaState>,
    pub step: f64,
}

/// Integrates `σ̈ = α²/σ³ − σ(a − 2g cos 2t)` on `[0, t_end]` with RK4.
///
/// The step is shrunk so that it divides `t_end` exactly. Samples sit on that
/// uniform grid; steps are subdivided internally only where `σ` turns faster
/// than the grid resolves.
pub fn solve_sigma_ode(
    a: f64,
    g: f64,
    params: &PhysicalParams,
    sigma0: f64,
    sigma_dot0: f64,
    t_end: f64,
    h: f64,
) -> Result<SigmaTrajectory> {
    if !(sigma0 > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma0 must be positive, got {sigma0}")));
    }
    if !(h > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("need h > 0 and t_end > 0, got h={h}, t_end={t_end}")));
    }
    let alpha2 = params.alpha().powi(2);
    let steps = (t_end / h).ceil() as usize;
    let step = t_end / steps as f64;
    let state = |t: f64, y: &[f64]| -> Result<SigmaState> {
        let (s, sd) = (y[0], y[1]);
        let k = mathieu_coefficient(a, g, t);
        let sdd = alpha2 / s.powi(3) - s * k;
        let sddd = -3.0 * alpha2 * sd / s.powi(4) - sd * k - s * 4.0 * g * (2.0 * t).sin();
        SigmaState::with_jerk(t, s, sd, sdd, sddd)
    };
    let rhs = |t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        if !(y[0] > SIGMA_FLOOR) {
            return Err(Error::Singularity { t, sigma: y[0] });
        }
        out[0] = y[1];
        out[1] = alpha2 / y[0].powi(3) - y[0] * mathieu_coefficient(a, g, t);
        Ok(())
    };

    let alpha_abs = params.alpha().abs();
    let mut samples = Vec::with_capacity(steps + 1);
    let mut y = vec![sigma0, sigma_dot0];
    samples.push(state(0.0, &y)?);
    for i in 0..steps {
        let t0 = i as f64 * step;
        let t1 = if i + 1 == steps { t_end } else { (i + 1) as f64 * step };
        // Close approaches to σ = 0 turn on a time scale σ²/|α| that can be
        // far shorter than the output step, so substep there.
        let mut t = t0;
        while t < t1 {
            let scale = (y[0] * y[0] / alpha_abs).min(y[0] / y[1].abs());
            let remaining = t1 - t;
            let sub = if SUBSTEP_FRACTION * scale >= remaining {
                remaining
            } else {
                (SUBSTEP_FRACTION * scale).min(0.5 * remaining)
            };
            y = rk4_step(&y, rhs, t, sub)?;
            t = if sub == remaining { t1 } else { t + sub };
            if !(y[0] > SIGMA_FLOOR) {
                return Err(Error::Singularity { t, sigma: y[0] });
            }
        }
        samples.push(state(t1, &y)?);
    }
    Ok(SigmaTrajectory { params: *params, a, g, samples, step })
}

impl SigmaTrajectory {
    pub fn t_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Dense state: quintic Hermite through the stored `(σ, σ̇, σ̈)` for `σ`
    /// and its derivative for `σ̇`; `σ̈`, `σ⃛` then come from the ODE.
    pub fn state_at(&self, t: f64) -> Result<SigmaState> {
        let hi = self.t_end();
        if !(t >= 0.0 && t <= hi) {
            return Err(Error::OutOfRange { t, lo: 0.0, hi });
        }
        let last = self.samples.len() - 2;
        let i = ((t / self.step).floor() as usize).min(last);
        let (s0, s1) = (&self.samples[i], &self.samples[i + 1]);
        let h = s1.t - s0.t;
        let u = (t - s0.t) / h;
        let (sigma, sigma_dot) =
            quintic_hermite([s0.sigma, s0.sigma_dot, s0.sigma_ddot], [s1.sigma, s1.sigma_dot, s1.sigma_ddot], h, u);
        let alpha2 = self.params.alpha().powi(2);
        let k = mathieu_coefficient(self.a, self.g, t);
        let sdd = alpha2 / sigma.powi(3) - sigma * k;
        let sddd = -3.0 * alpha2 * sigma_dot / sigma.powi(4) - sigma_dot * k - sigma * 4.0 * self.g * (2.0 * t).sin();
        SigmaState::with_jerk(t, sigma, sigma_dot, sdd, sddd)
    }
}

// Value and first derivative of the quintic Hermite interpolant on one cell.
fn quintic_hermite(y0: [f64; 3], y1: [f64; 3], h: f64, s: f64) -> (f64, f64) {
    let (s2, s3, s4, s5) = (s * s, s * s * s, s.powi(4), s.powi(5));
    let b = [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
    ];
    let db = [
        -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
        1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
        s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4,
        30.0 * s2 - 60.0 * s3 + 30.0 * s4,
        -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
        1.5 * s2 - 4.0 * s3 + 2.5 * s4,
    ];
    let c = [y0[0], h * y0[1], h * h * y0[2], y1[0], h * y1[1], h * h * y1[2]];
    let v: f64 = b.iter().zip(&c).map(|(b, c)| b * c).sum();
    let d: f64 = db.iter().zip(&c).map(|(b, c)| b * c).sum();
    (v, d / h)
}

/// A driver made evaluable at any time in its range.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaHistory {
    ClosedForm { driver: SigmaDriver, params: PhysicalParams },
    Ode(SigmaTrajectory),
}

impl SigmaHistory {
    /// Closed-form drivers ignore `t_end`; the Mathieu driver is integrated
    /// on `[0, t_end]` at [`DEFAULT_STEP`].
    pub fn new(driver: SigmaDriver, params: PhysicalParams, t_end: f64) -> Result<Self> {
        Self::with_step(driver, params, t_end, DEFAULT_STEP)
    }

    pub fn with_step(driver: SigmaDriver, params: PhysicalParams, t_end: f64, h: f64) -> Result<Self> {
        match driver {
            SigmaDriver::Mathieu { a, g, sigma0, sigma_dot0 } => {
                Ok(Self::Ode(solve_sigma_ode(a, g, &params, sigma0, sigma_dot0, t_end, h)?))
            }
            _ => {
                sigma_eval(&driver, &params, 0.0)?;
                Ok(Self::ClosedForm { driver, params })
            }
        }
    }

    pub fn params(&self) -> &PhysicalParams {
        match self {
            Self::ClosedForm { params, .. } => params,
            Self::Ode(tr) => &tr.params,
        }
    }

    pub fn state(&self, t: f64) -> Result<SigmaState> {
        match self {
            Self::ClosedForm { driver, params } => sigma_eval(driver, params, t),
            Self::Ode(tr) => tr.state_at(t),
        }
    }

    pub fn omega_squared(&self, t: f64) -> Result<f64> {
        Ok(omega_squared(&self.state(t)?, self.params()))
    }

    /// `∫₀ᵗ rate(σ(s)) ds` sampled on `[0, t_end]`.
    pub fn antiderivative<F>(&self, rate: F, t_end: f64, max_step: f64) -> Result<SampledAntiderivative>
    where
        F: Fn(&SigmaState) -> f64,
    {
        SampledAntiderivative::build(|t| Ok(rate(&self.state(t)?)), 0.0, t_end, max_step)
    }
}

/// One sample of a Hill trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    pub t: f64,
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseTrajectory {
    pub samples: Vec<PhaseSample>,
}

impl PhaseTrajectory {
    pub fn last(&self) -> Option<&PhaseSample> {
        self.samples.last()
    }

    /// `max |x|` inside each window `[kT, (k+1)T)`, `k = 0, 1, …`.
    pub fn window_maxima(&self, period: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for s in &self.samples {
            let k = ((s.t / period) * (1.0 + 1e-12)).floor() as usize;
            if out.len() <= k {
                out.resize(k + 1, 0.0);
            }
            out[k] = out[k].max(s.x.abs());
        }
        out
    }
}

/// RK4 for `ẋ = p/m`, `ṗ = −mΩ²(t)x` from `(x0, p0)` at `t0` to `t1`.
pub fn integrate_hill_from<F>(
    omega2: F,
    t0: f64,
    x0: f64,
    p0: f64,
    params: &PhysicalParams,
    t1: f64,
    h: f64,
) -> Result<PhaseTrajectory>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(h > 0.0) || !(t1 >= t0) {
        return Err(Error::InvalidArgument(format!("need h > 0 and t1 >= t0, got h={h}, [{t0}, {t1}]")));
    }
    let m = params.m();
    let steps = ((t1 - t0) / h).ceil().max(1.0) as usize;
    let step = (t1 - t0) / steps as f64;
    let rhs = |t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        out[0] = y[1] / m;
        out[1] = -m * omega2(t)? * y[0];
        Ok(())
    };
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(PhaseSample { t: t0, x: x0, p: p0 });
    let mut y = vec![x0, p0];
    for i in 0..steps {
        let t = t0 + i as f64 * step;
        y = rk4_step(&y, rhs, t, step)?;
        let tn = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * step };
        samples.push(PhaseSample { t: tn, x: y[0], p: y[1] });
    }
    Ok(PhaseTrajectory { samples })
}

/// Hill characteristic launched at `t = 0`.
pub fn integrate_hill<F>(
    omega2: F,
    x0: f64,
    p0: f64,
    params: &PhysicalParams,
    t_end: f64,
    h: f64,
) -> Result<PhaseTrajectory>
where
    F: Fn(f64) -> Result<f64>,
{
    integrate_hill_from(omega2, 0.0, x0, p0, params, t_end, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub a: f64,
    pub g: f64,
    pub trace: f64,
    pub classification: Stability,
    /// `|W(π) − 1|` for the two fundamental solutions.
    pub wronskian_drift: f64,
}

pub fn classify_trace(trace: f64) -> Stability {
    if trace.abs() > 2.0 + MARGINAL_MARGIN {
        Stability::Unstable
    } else if trace.abs() < 2.0 - MARGINAL_MARGIN {
        Stability::Stable
    } else {
        Stability::Marginal
    }
}

/// Monodromy trace of `ẍ + (a − 2g cos 2t)x = 0` over one period `π`.
pub fn floquet_classify(a: f64, g: f64, h: f64) -> Result<StabilityVerdict> {
    if !(h > 0.0) || PI / h < 100.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "the step must split the period into at least 100 steps, got h = {h}"
        )));
    }
    if !a.is_finite() || !g.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite (a, g) = ({a}, {g})")));
    }
    let steps = (PI / h).ceil() as usize;
    let step = PI / steps as f64;
    let rhs = |t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        let k = mathieu_coefficient(a, g, t);
        out[0] = y[1];
        out[1] = -k * y[0];
        out[2] = y[3];
        out[3] = -k * y[2];
        Ok(())
    };
    let mut y = vec![1.0, 0.0, 0.0, 1.0];
    for i in 0..steps {
        y = rk4_step(&y, rhs, i as f64 * step, step)?;
    }
    let trace = y[0] + y[3];
    let wronskian = y[0] * y[3] - y[1] * y[2];
    Ok(StabilityVerdict {
        a,
        g,
        trace,
        classification: classify_trace(trace),
        wronskian_drift: (wronskian - 1.0).abs(),
    })
}

/// Floquet verdicts on a `resolution × resolution` raster of the closed
/// `(a, g)` box, `g` outer and `a` inner.
pub fn ince_strutt_raster(
    a_range: (f64, f64),
    g_range: (f64, f64),
    resolution: usize,
    h: f64,
) -> Result<Vec<StabilityVerdict>> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("raster resolution must be at least 2, got {resolution}")));
    }
    let lerp = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * i as f64 / (resolution - 1) as f64;
    (0..resolution * resolution)
        .into_par_iter()
        .map(|k| floquet_classify(lerp(a_range, k % resolution), lerp(g_range, k / resolution), h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn unit() -> PhysicalParams {
        PhysicalParams::default()
    }

    #[test]
    fn raster_layout_and_free_row() {
        let r = ince_strutt_raster((0.5, 4.5), (0.0, 0.4), 5, 0.01).unwrap();
        assert_eq!(r.len(), 25);
        assert_eq!((r[1].a, r[1].g), (1.5, 0.0));
        assert_eq!((r[5].a, r[5].g), (0.5, 0.1));
        for v in &r[..5] {
            assert_abs_diff_eq!(v.trace, 2.0 * (PI * v.a.sqrt()).cos(), epsilon = 1e-8);
        }
        assert!(ince_strutt_raster((0.0, 1.0), (0.0, 1.0), 1, 0.01).is_err());
    }

    #[test]
    fn derived_constants() {
        let p = PhysicalParams::new(2.0, 0.7, 1.3).unwrap();
        assert!(p.alpha() < 0.0);
        assert_abs_diff_eq!(p.alpha() * p.beta(), -1.0 / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.alpha2(), -1.3 / 4.0, epsilon = 1e-15);
        assert!(PhysicalParams::new(0.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 1.0).is_err());
        assert!(PhysicalParams::try_from(RawParams { m: 1.0, hbar: -1.0, hbar2: 1.0 }).is_err());
    }

    #[test]
    fn sin_squared_at_quarter_period() {
        let d = SigmaDriver::SinSquared { sigma0: 1.0, varpi: 1.0 };
        let s = sigma_eval(&d, &unit(), PI / 4.0).unwrap();
        assert_abs_diff_eq!(s.sigma, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.sigma_dot, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.sigma_ddot, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_from_unit_frequency() {
        let d = SigmaDriver::constant_from_frequency(&unit(), 1.0).unwrap();
        let s = sigma_eval(&d, &unit(), 3.7).unwrap();
        assert_abs_diff_eq!(s.sigma, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!((s.sigma_dot, s.sigma_ddot), (0.0, 0.0));
        assert_abs_diff_eq!(omega_squared(&s, &unit()), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn separatrix_value_and_zero_frequency() {
        let d = SigmaDriver::Separatrix { c1: 1.0, c2: 0.0, branch: Branch::Plus };
        let s = sigma_eval(&d, &unit(), 2.0).unwrap();
        assert_abs_diff_eq!(s.sigma, 4.25f64.sqrt(), epsilon = 1e-14);
        for &(c1, c2, b) in &[(1.0, 0.0, Branch::Plus), (0.3, 1.2, Branch::Minus), (-2.0, 0.5, Branch::Plus)] {
            let d = SigmaDriver::Separatrix { c1, c2, branch: b };
            for k in 0..20 {
                let s = sigma_eval(&d, &unit(), -3.0 + 0.37 * k as f64).unwrap();
                assert!(omega_squared(&s, &unit()).abs() < 1e-12);
            }
        }
        let bad = SigmaDriver::Separatrix { c1: 0.0, c2: 0.0, branch: Branch::Plus };
        assert!(sigma_eval(&bad, &unit(), 0.0).is_err());
    }

    #[test]
    fn omega_squared_cancellation() {
        let p = unit();
        let alpha2 = p.alpha().powi(2);
        let s = SigmaState::new(0.0, 1.0, 0.8, alpha2).unwrap();
        assert_eq!(omega_squared(&s, &p), 0.0);
    }

    #[test]
    fn mathieu_rejected_by_closed_form_and_domain_errors() {
        let d = SigmaDriver::mathieu_from_rest(&unit(), 1.0, 0.2).unwrap();
        assert!(matches!(sigma_eval(&d, &unit(), 0.0), Err(Error::Unsupported(_))));
        let d = SigmaDriver::SinSquared { sigma0: -1.0, varpi: 1.0 };
        assert!(matches!(sigma_eval(&d, &unit(), 0.0), Err(Error::Domain(_))));
        assert!(SigmaState::new(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let p = PhysicalParams::new(1.3, 0.8, 1.0).unwrap();
        let drivers = [
            SigmaDriver::SinSquared { sigma0: 0.9, varpi: 1.7 },
            SigmaDriver::Separatrix { c1: 0.6, c2: -0.4, branch: Branch::Minus },
        ];
        let h = 1e-5;
        for d in &drivers {
            for &t in &[0.1, 0.9, 2.3] {
                let s = sigma_eval(d, &p, t).unwrap();
                let sp = sigma_eval(d, &p, t + h).unwrap();
                let sm = sigma_eval(d, &p, t - h).unwrap();
                assert_abs_diff_eq!((sp.sigma - sm.sigma) / (2.0 * h), s.sigma_dot, epsilon = 1e-8);
                assert_abs_diff_eq!((sp.sigma_dot - sm.sigma_dot) / (2.0 * h), s.sigma_ddot, epsilon = 1e-8);
                assert_abs_diff_eq!((sp.sigma_ddot - sm.sigma_ddot) / (2.0 * h), s.sigma_dddot, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn ode_equilibrium_is_preserved() {
        let p = unit();
        let d = SigmaDriver::mathieu_from_rest(&p, 1.0, 0.0).unwrap();
        let SigmaDriver::Mathieu { sigma0, .. } = d else { unreachable!() };
        let tr = solve_sigma_ode(1.0, 0.0, &p, sigma0, 0.0, 10.0 * PI, DEFAULT_STEP).unwrap();
        let dev = tr.samples.iter().map(|s| (s.sigma - sigma0).abs()).fold(0.0, f64::max);
        assert!(dev <= 1e-6, "deviation {dev}");
        assert_abs_diff_eq!(sigma0, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn ode_samples_respect_the_equation_and_grid() {
        let p = unit();
        let tr = solve_sigma_ode(1.0, 0.2, &p, FRAC_1_SQRT_2, 0.0, 5.0, 0.01).unwrap();
        assert_eq!(tr.samples.len(), 501);
        assert_eq!(tr.t_end(), 5.0);
        for w in tr.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        let alpha2 = p.alpha().powi(2);
        for s in &tr.samples {
            let rhs = alpha2 / s.sigma.powi(3) - s.sigma * (1.0 - 0.4 * (2.0 * s.t).cos());
            assert_eq!(s.sigma_ddot, rhs);
        }
    }

    #[test]
    fn ode_is_fourth_order() {
        let p = unit();
        let reference = solve_sigma_ode(1.0, 0.2, &p, FRAC_1_SQRT_2, 0.0, 4.0, 1e-3 / 8.0).unwrap();
        let err = |h: f64| {
            let tr = solve_sigma_ode(1.0, 0.2, &p, FRAC_1_SQRT_2, 0.0, 4.0, h).unwrap();
            (tr.samples.last().unwrap().sigma - reference.samples.last().unwrap().sigma).abs()
        };
        let ratio = err(0.01) / err(0.005);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn mathieu_width_grows() {
        let p = unit();
        let tr = solve_sigma_ode(1.0, 0.2, &p, FRAC_1_SQRT_2, 0.0, 40.0, DEFAULT_STEP).unwrap();
        let amp = |lo: f64, hi: f64| {
            tr.samples
                .iter()
                .filter(|s| s.t >= lo && s.t < hi)
                .map(|s| (s.sigma - FRAC_1_SQRT_2).abs())
                .fold(0.0, f64::max)
        };
        assert!(amp(30.0, 40.0) > 2.0 * amp(0.0, 10.0));
    }

    #[test]
    fn ode_singularity_is_reported() {
        let p = PhysicalParams::new(1.0, 1e-12, 1.0).unwrap();
        let err = solve_sigma_ode(0.0, 0.0, &p, 1.0, -10.0, 1.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::Singularity { t, .. } if t > 0.09 && t < 0.11));
        assert!(solve_sigma_ode(1.0, 0.2, &p, 0.0, 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn dense_state_interpolation() {
        let p = unit();
        let coarse = solve_sigma_ode(1.0, 0.2, &p, 0.5, 0.3, 6.0, 0.01).unwrap();
        let fine = solve_sigma_ode(1.0, 0.2, &p, 0.5, 0.3, 6.0, 0.0005).unwrap();
        let (mut on_grid, mut on_grid_dot) = (0.0f64, 0.0f64);
        for s in &coarse.samples {
            let f = fine.state_at(s.t).unwrap();
            on_grid = on_grid.max((s.sigma - f.sigma).abs());
            on_grid_dot = on_grid_dot.max((s.sigma_dot - f.sigma_dot).abs());
        }
        let (mut off_grid, mut off_grid_dot) = (0.0f64, 0.0f64);
        for k in 0..60 {
            let t = 0.0037 + 0.0999 * k as f64;
            let a = coarse.state_at(t).unwrap();
            let b = fine.state_at(t).unwrap();
            off_grid = off_grid.max((a.sigma - b.sigma).abs());
            off_grid_dot = off_grid_dot.max((a.sigma_dot - b.sigma_dot).abs());
        }
        assert!(off_grid <= 2.0 * on_grid + 1e-12, "{off_grid} vs {on_grid}");
        assert!(off_grid_dot <= 2.0 * on_grid_dot + 1e-12, "{off_grid_dot} vs {on_grid_dot}");
        let s = coarse.state_at(0.5).unwrap();
        assert_eq!(s.sigma, coarse.samples[50].sigma);
        assert!(matches!(coarse.state_at(6.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn quintic_hermite_reproduces_quintics() {
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3) + 0.3 * t.powi(5);
        let df = |t: f64| -2.0 + 1.5 * t * t + 1.5 * t.powi(4);
        let ddf = |t: f64| 3.0 * t + 6.0 * t.powi(3);
        let (a, b) = (0.4, 1.1);
        let (v, d) = quintic_hermite([f(a), df(a), ddf(a)], [f(b), df(b), ddf(b)], b - a, 0.3);
        let t = a + 0.3 * (b - a);
        assert_abs_diff_eq!(v, f(t), epsilon = 1e-14);
        assert_abs_diff_eq!(d, df(t), epsilon = 1e-13);
    }

    #[test]
    fn hill_closed_forms() {
        let p = unit();
        let tr = integrate_hill(|_| Ok(1.0), 0.0, 1.0, &p, PI / 2.0, 1e-3).unwrap();
        let end = tr.last().unwrap();
        assert_abs_diff_eq!(end.x, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(end.p, 0.0, epsilon = 1e-8);
        let free = integrate_hill(|_| Ok(0.0), 0.0, 1.0, &p, 3.0, 0.1).unwrap();
        for s in &free.samples {
            assert_abs_diff_eq!(s.x, s.t, epsilon = 1e-12);
        }
        let err = integrate_hill(
            |t| if t > 1.0 { Err(Error::OutOfRange { t, lo: 0.0, hi: 1.0 }) } else { Ok(1.0) },
            0.0,
            1.0,
            &p,
            2.0,
            0.01,
        );
        assert!(matches!(err, Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn hill_amplitude_grows_for_mathieu() {
        let p = unit();
        let tr = integrate_hill(|t| Ok(1.0 - 0.4 * (2.0 * t).cos()), 0.0, 1.0, &p, 40.0, DEFAULT_STEP).unwrap();
        let maxima = tr.window_maxima(PI);
        assert!(maxima.len() >= 12);
        for w in maxima[..12].windows(2) {
            assert!(w[1] > w[0], "{maxima:?}");
        }
    }

    #[test]
    fn hill_energy_is_pumped() {
        let p = unit();
        let tr = integrate_hill(|t| Ok(1.0 - 0.4 * (2.0 * t).cos()), 0.0, 1.0, &p, 5.0 * PI, DEFAULT_STEP).unwrap();
        let per = (PI / tr.samples[1].t).round() as usize;
        let energies: Vec<f64> = (1..=5)
            .map(|k| {
                let s = tr.samples[k * per];
                0.5 * s.p * s.p + 0.5 * (1.0 - 0.4) * s.x * s.x
            })
            .collect();
        for w in energies.windows(2) {
            assert!(w[1] >= w[0], "{energies:?}");
        }
    }

    #[test]
    fn floquet_examples() {
        let v = floquet_classify(2.25, 0.0, DEFAULT_STEP).unwrap();
        assert_abs_diff_eq!(v.trace, 0.0, epsilon = 1e-9);
        assert_eq!(v.classification, Stability::Stable);
        assert_eq!(floquet_classify(1.0, 0.2, DEFAULT_STEP).unwrap().classification, Stability::Unstable);
        let s = floquet_classify(2.0, 0.2, DEFAULT_STEP).unwrap();
        assert_eq!(s.classification, Stability::Stable);
        assert!(s.wronskian_drift < 1e-8);
        assert!(floquet_classify(1.0, 0.2, PI / 50.0).is_err());
        assert_eq!(floquet_classify(1.0, 0.0, DEFAULT_STEP).unwrap().classification, Stability::Marginal);
    }

    #[test]
    fn floquet_zero_coupling_matches_closed_form() {
        for &a in &[0.3, 0.8, 1.5, 3.0, 5.2] {
            let v = floquet_classify(a, 0.0, DEFAULT_STEP).unwrap();
            assert_abs_diff_eq!(v.trace, 2.0 * (PI * f64::sqrt(a)).cos(), epsilon = 1e-10);
        }
    }

    #[test]
    fn classify_bands() {
        assert_eq!(classify_trace(2.0 + 2e-6), Stability::Unstable);
        assert_eq!(classify_trace(-2.0 - 2e-6), Stability::Unstable);
        assert_eq!(classify_trace(2.0 - 2e-6), Stability::Stable);
        assert_eq!(classify_trace(-2.0 + 5e-7), Stability::Marginal);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn floquet_symmetric_in_g(a in 0.1f64..6.0, g in 0.0f64..1.0) {
            let p = floquet_classify(a, g, DEFAULT_STEP).unwrap();
            let m = floquet_classify(a, -g, DEFAULT_STEP).unwrap();
            prop_assert!((p.trace - m.trace).abs() <= 1e-10 * p.trace.abs().max(1.0));
            prop_assert!(p.wronskian_drift < 1e-8);
        }

        #[test]
        fn separatrix_has_zero_frequency(c1 in 0.1f64..3.0, c2 in -2.0f64..2.0, t in -5.0f64..5.0) {
            let d = SigmaDriver::Separatrix { c1, c2, branch: Branch::Minus };
            let s = sigma_eval(&d, &unit(), t).unwrap();
            prop_assert!(omega_squared(&s, &unit()).abs() < 1e-12 * (1.0 + 1.0 / s.sigma.powi(4)));
        }
    }
}
