//! Energy spectra by phase-space quadrature and along Hill trajectories.

use rayon::prelude::*;
use serde_json::{json, Value};
use wvl_core::spectrum::{quadrature_grid, spectrum_by_quadrature, spectrum_by_trajectory_from, TAU_OMEGA};
use wvl_core::wigner::PhasePoint;
use wvl_core::PolyOrder;

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, OutputDir};

pub fn run(config: &ScenarioConfig, out: &mut OutputDir) -> CliResult<Value> {
    let history = config.history()?;
    let params = *history.params();
    let times = config.times();
    let points = config.grid.quadrature.points;
    let dt = config.time.dt;

    let quad = |n: PolyOrder, t: f64| -> CliResult<f64> {
        let wrap = |source| CliError::Spectrum { n: n.get(), t, source };
        let s = history.state(t).map_err(wrap)?;
        let grid = quadrature_grid(n, &s, &params, points).map_err(wrap)?;
        Ok(spectrum_by_quadrature(n, &s, &params, &grid).map_err(wrap)?.energy)
    };

    let mut rows = Vec::new();
    let mut worst = json!(null);
    let mut worst_rel = 0.0;
    for n in config.orders() {
        let quadrature: Vec<f64> = times.par_iter().map(|&t| quad(n, t)).collect::<CliResult<_>>()?;
        let launch = match config.launch {
            Some([x, p]) => PhasePoint::new(x, p),
            None => {
                let e0 = if times.first() == Some(&0.0) { quadrature[0] } else { quad(n, 0.0)? };
                if e0 < 0.0 {
                    return Err(CliError::Config(format!(
                        "E_{}(0) = {e0} is negative; set launch explicitly",
                        n.get()
                    )));
                }
                PhasePoint::new(0.0, (2.0 * params.m() * e0).sqrt())
            }
        };
        let trajectory = spectrum_by_trajectory_from(n, &history, launch, &times, config.tolerances.hill_step)?;
        for ((&t, &q), tr) in times.iter().zip(&quadrature).zip(&trajectory) {
            let rel = (tr.energy - q).abs() / q.abs();
            if rel > worst_rel {
                worst_rel = rel;
                worst = json!({ "n": n.get(), "t": t, "rel_diff": rel });
            }
            let k = (t / TAU_OMEGA).round();
            let mark = if (t - k * TAU_OMEGA).abs() <= 0.5 * dt { format!("{k}") } else { String::new() };
            rows.push(vec![num(t), n.get().to_string(), num(q), num(tr.energy), num(rel), mark]);
        }
    }
    out.csv(
        "spectrum.csv",
        &["t [time]", "n", "E_quadrature [energy]", "E_trajectory [energy]", "rel_diff", "period_mark [tau]"],
        rows,
    )?;
    Ok(json!({
        "max_rel_diff": worst,
        "tolerance": config.tolerances.spectrum_rel,
        "within_tolerance": worst_rel <= config.tolerances.spectrum_rel,
    }))
}
