//! Scenario files and dotted-path overrides.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use wvl_core::dynamics::sigma_eval;
use wvl_core::highrank::Rank4Sign;
use wvl_core::{PhysicalParams, PolyOrder, SigmaDriver, SigmaHistory};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: PhysicalParams,
    pub driver: SigmaDriver,
    #[serde(default = "default_orders")]
    pub n: Vec<i64>,
    pub time: TimeWindow,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub rank4_sign: Rank4Sign,
    /// `(ṗ, p̈)` at which `wigner` also writes rank-4 slices.
    #[serde(default)]
    pub rank4_slice: Option<[f64; 2]>,
    /// Times for `wigner` grids; the full time grid when absent.
    #[serde(default)]
    pub wigner_times: Option<Vec<f64>>,
    /// Launch point `(x, p)` for the trajectory spectrum; defaults to
    /// `(0, √(2mE_n(0)))`.
    #[serde(default)]
    pub launch: Option<[f64; 2]>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub stability: StabilityScan,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisPoints {
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub x: AxisPoints,
    pub p: AxisPoints,
    pub quadrature: AxisPoints,
    pub residual: AxisPoints,
    pub rank4: AxisPoints,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x: AxisPoints { points: 201 },
            p: AxisPoints { points: 201 },
            quadrature: AxisPoints { points: wvl_core::spectrum::DEFAULT_POINTS },
            residual: AxisPoints { points: 101 },
            rank4: AxisPoints { points: 9 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub residual: f64,
    pub convergence: f64,
    pub characteristic: f64,
    pub spectrum_rel: f64,
    pub fd_step: f64,
    pub hill_step: f64,
    /// RK4 output step of the width ODE.
    pub sigma_step: f64,
    /// Sampling step of the accumulated phase energy.
    pub accumulator_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-5,
            convergence: 0.5,
            characteristic: 1e-6,
            spectrum_rel: 0.05,
            fd_step: 1e-3,
            hill_step: wvl_core::dynamics::DEFAULT_STEP,
            sigma_step: wvl_core::dynamics::DEFAULT_STEP,
            accumulator_step: wvl_core::wavefunction::ACCUMULATOR_STEP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityScan {
    pub a: [f64; 2],
    pub g: [f64; 2],
    pub resolution: usize,
    pub step: f64,
}

impl Default for StabilityScan {
    fn default() -> Self {
        Self { a: [-1.0, 10.0], g: [0.0, 5.0], resolution: 111, step: PI / 400.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Added to `Ω²` in the Moyal check; nonzero values are a negative control.
    pub omega2_offset: f64,
}

fn default_orders() -> Vec<i64> {
    vec![0, 1, 2]
}

fn default_output() -> PathBuf {
    PathBuf::from("wvl-out")
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let params = PhysicalParams::default();
        Self {
            params,
            driver: SigmaDriver::mathieu_from_rest(&params, 1.0, 0.2).expect("valid default driver"),
            n: default_orders(),
            time: TimeWindow { t0: 0.0, t1: 5.0 * PI, dt: PI / 20.0 },
            grid: GridConfig::default(),
            output: default_output(),
            rank4_sign: Rank4Sign::default(),
            rank4_slice: None,
            wigner_times: None,
            launch: None,
            tolerances: Tolerances::default(),
            stability: StabilityScan::default(),
            verify: VerifyConfig::default(),
        }
    }
}

/// Reads `path` (or the built-in default), applies `overrides` in order and
/// validates the result.
pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> CliResult<ScenarioConfig> {
    let mut value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(CliError::io(p))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => serde_json::to_value(ScenarioConfig::default())?,
    };
    for (key, raw) in overrides {
        set_path(&mut value, key, parse_scalar(raw))?;
    }
    let config: ScenarioConfig = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

fn parse_scalar(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> CliResult<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Config(format!("malformed override key '{key}'")));
        }
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        let Value::Object(map) = node else {
            return Err(CliError::Config(format!("'{}' in '{key}' is not a table", parts[..i].join("."))));
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("split yields at least one part")
}

impl ScenarioConfig {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let TimeWindow { t0, t1, dt } = self.time;
        if !(t0.is_finite() && t1.is_finite() && dt.is_finite()) || t0 < 0.0 || t1 < t0 || dt <= 0.0 {
            return bad(format!("time window needs 0 <= t0 <= t1 and dt > 0, got t0={t0}, t1={t1}, dt={dt}"));
        }
        if (t1 - t0) / dt > 1e6 {
            return bad(format!("time window has more than 1e6 steps ({t0}..{t1} by {dt})"));
        }
        if let Some(ts) = &self.wigner_times {
            if ts.is_empty() || ts.iter().any(|t| !(t0..=t1).contains(t)) {
                return bad(format!("wigner_times must be a non-empty list inside [{t0}, {t1}], got {ts:?}"));
            }
        }
        if self.n.is_empty() {
            return bad("the order list n is empty".into());
        }
        for &n in &self.n {
            PolyOrder::new(n).map_err(|e| CliError::Config(e.to_string()))?;
        }
        let g = &self.grid;
        for (name, a) in
            [("x", g.x), ("p", g.p), ("quadrature", g.quadrature), ("residual", g.residual), ("rank4", g.rank4)]
        {
            if a.points < 3 || a.points.is_multiple_of(2) {
                return bad(format!("grid.{name}.points must be odd and at least 3, got {}", a.points));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("residual", t.residual),
            ("convergence", t.convergence),
            ("characteristic", t.characteristic),
            ("spectrum_rel", t.spectrum_rel),
            ("fd_step", t.fd_step),
            ("hill_step", t.hill_step),
            ("sigma_step", t.sigma_step),
            ("accumulator_step", t.accumulator_step),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerances.{name} must be positive, got {v}"));
            }
        }
        let s = &self.stability;
        if s.resolution < 2
            || !(s.step > 0.0)
            || [s.a, s.g].iter().any(|r| !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1])
        {
            return bad(format!("stability scan needs finite ordered ranges, resolution >= 2 and step > 0, got {s:?}"));
        }
        if [self.rank4_slice, self.launch].iter().flatten().flatten().any(|v| !v.is_finite()) {
            return bad("rank4_slice and launch must be finite".into());
        }
        match self.driver {
            SigmaDriver::Mathieu { a, g, sigma0, sigma_dot0 } => {
                if ![a, g, sigma_dot0].iter().all(|v| v.is_finite()) || !(sigma0.is_finite() && sigma0 > 0.0) {
                    return bad(format!(
                        "Mathieu driver needs finite a, g, sigma_dot0 and sigma0 > 0, got {:?}",
                        self.driver
                    ));
                }
            }
            _ => {
                for at in [t0, t1] {
                    sigma_eval(&self.driver, &self.params, at).map_err(|e| CliError::Config(e.to_string()))?;
                }
            }
        }
        Ok(())
    }

    pub fn orders(&self) -> Vec<PolyOrder> {
        self.n.iter().map(|&n| PolyOrder::new(n).expect("validated")).collect()
    }

    /// `t0, t0 + dt, …` up to `t1`.
    pub fn times(&self) -> Vec<f64> {
        let TimeWindow { t0, t1, dt } = self.time;
        let steps = ((t1 - t0) / dt * (1.0 + 1e-12)).floor() as usize;
        (0..=steps).map(|k| (t0 + k as f64 * dt).min(t1)).collect()
    }

    /// Width history covering the window plus the finite-difference margin.
    pub fn history(&self) -> CliResult<SigmaHistory> {
        let t_end = self.time.t1 + 4.0 * self.tolerances.fd_step + 0.01;
        Ok(SigmaHistory::with_step(self.driver, self.params, t_end, self.tolerances.sigma_step)?)
    }
}
